import math

import pytest

from relaysim.config import load_config, parse_config
from relaysim.model import ConfigError

FIG3_YAML = """
num_ues: 2
power_ue_dbm: [20, 20]
power_rs_dbm: 20
power_bs_dbm: 46
omega_db: {U1R: -13, U2R: -12, U1B: -30, U2B: -49, RB: 0}
frames: 50000
seed: 7
protocol: odba
"""


def test_parse_reference_scenario():
    spec = parse_config(FIG3_YAML)
    assert spec.protocol == "odba"
    assert spec.scenario.num_ues == 2
    assert spec.scenario.omega_db["U2B"] == -49
    assert spec.scenario.power_bs == pytest.approx(10 ** 4.6)
    assert math.isinf(spec.buffer_cap)
    assert spec.lambda_fixed is None


def test_parse_json_document():
    spec = parse_config(
        '{"num_ues": 1, "power_ue_dbm": [0], "power_rs_dbm": 0,'
        ' "power_bs_dbm": 0, "omega_db": {"U1R": 0, "U1B": 0, "RB": 0},'
        ' "protocol": "benchmark", "seed": 1}')
    assert spec.protocol == "benchmark"
    assert spec.scenario.frames == 100_000  # default horizon


def test_noise_power_defaults_to_one():
    spec = parse_config(FIG3_YAML)
    assert spec.scenario.noise_power == 1.0


def test_power_ordering_rejected():
    bad = FIG3_YAML.replace("power_rs_dbm: 20", "power_rs_dbm: 50")
    with pytest.raises(ConfigError, match="power ordering"):
        parse_config(bad)


def test_missing_link_rejected():
    bad = FIG3_YAML.replace("U2B: -49, ", "")
    with pytest.raises(ConfigError, match="missing average gain.*U2B"):
        parse_config(bad)


def test_nodba_with_single_ue_rejected():
    text = """
num_ues: 1
power_ue_dbm: [20]
power_rs_dbm: 20
power_bs_dbm: 46
omega_db: {U1R: -13, U1B: -30, RB: 0}
protocol: nodba
"""
    with pytest.raises(ConfigError, match="nodba.*num_ues >= 2"):
        parse_config(text)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown config key"):
        parse_config(FIG3_YAML + "\nbandwidth: 20\n")
    with pytest.raises(ConfigError, match="unknown search key"):
        parse_config(FIG3_YAML + "\nsearch: {stepsize: 1}\n")


def test_missing_required_key():
    with pytest.raises(ConfigError, match="missing required config key"):
        parse_config("num_ues: 2")


def test_buffer_cap_forms():
    assert math.isinf(parse_config(FIG3_YAML + "buffer_cap: null\n").buffer_cap)
    assert math.isinf(parse_config(FIG3_YAML + "buffer_cap: inf\n").buffer_cap)
    assert parse_config(FIG3_YAML + "buffer_cap: 8\n").buffer_cap == 8.0
    with pytest.raises(ConfigError):
        parse_config(FIG3_YAML + "buffer_cap: big\n")


def test_search_block_parsed():
    spec = parse_config(FIG3_YAML + """
search: {lambda_init: [-0.3, -0.7], step0: 0.02, batch_frames: 1500,
         max_iters: 50, tol: 0.01, seed: 9}
""")
    assert spec.search.lambda_init == (-0.3, -0.7)
    assert spec.search.batch_frames == 1500
    assert spec.search.seed == 9


def test_sweep_block_parsed():
    spec = parse_config(FIG3_YAML + """
sweep:
  axis: U1B
  values: [-50, -40, -30]
  protocols: [odba, benchmark]
""")
    assert spec.sweep.axis == "U1B"
    assert spec.sweep.values == (-50, -40, -30)
    assert spec.sweep.protocols == ("odba", "benchmark")


def test_lambda_fixed_parsed():
    spec = parse_config(FIG3_YAML + "lambda_fixed: [-0.5, -0.4]\n")
    assert spec.lambda_fixed == (-0.5, -0.4)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config(str(tmp_path / "nope.yaml"))


def test_garbage_document_rejected():
    with pytest.raises(ConfigError):
        parse_config("just some words\nnot a mapping")
