import pytest

from relaysim.model import ScenarioConfig


@pytest.fixture
def make_scenario():
    """Factory for the 2-UE evaluation scenario family used in tests."""

    def build(omega=None, p_ue=20.0, p_rs=20.0, p_bs=46.0, frames=10_000,
              seed=1, num_ues=2):
        if omega is None:
            omega = {"U1R": -6, "U2R": -8, "U1B": -40, "U2B": -41, "RB": 0}
        return ScenarioConfig(
            num_ues=num_ues,
            power_ue_dbm=tuple([p_ue] * num_ues),
            power_rs_dbm=p_rs,
            power_bs_dbm=p_bs,
            omega_db=omega,
            frames=frames,
            seed=seed,
        )

    return build
