import json

import pytest

from relaysim.cli import main
from relaysim.reports import load_report

CONFIG = """
num_ues: 2
power_ue_dbm: [20, 20]
power_rs_dbm: 20
power_bs_dbm: 46
omega_db: {U1R: -6, U2R: -8, U1B: -40, U2B: -41, RB: 0}
frames: 1500
seed: 4
protocol: odba
search: {max_iters: 30, batch_frames: 1000}
sweep: {axis: buffer_cap, values: [4, null], protocols: [odba, benchmark]}
"""


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(CONFIG)
    return str(path)


def test_run_writes_json_report(config_path, tmp_path):
    out = str(tmp_path / "report.json")
    assert main(["run", "--config", config_path, "--out", out]) == 0
    rep = load_report(out)
    assert rep.protocol == "odba"
    assert rep.frames == 1500


def test_run_to_stdout(config_path, capsys):
    assert main(["run", "--config", config_path]) == 0
    body = json.loads(capsys.readouterr().out)
    assert body["kind"] == "sim_report"


def test_run_csv_format(config_path, tmp_path):
    out = str(tmp_path / "report.csv")
    assert main(["run", "--config", config_path, "--out", out,
                 "--format", "csv"]) == 0
    lines = open(out).read().strip().split("\n")
    assert len(lines) == 2
    assert lines[0].startswith("axis_value,protocol,tau_ul")


def test_json_like_alias(config_path, tmp_path):
    out = str(tmp_path / "report.json")
    assert main(["run", "--config", config_path, "--out", out,
                 "--format", "json-like"]) == 0
    assert load_report(out).protocol == "odba"


def test_overrides_change_seed_and_frames(config_path, tmp_path):
    out = str(tmp_path / "r.json")
    main(["run", "--config", config_path, "--out", out,
          "--seed", "99", "--frames", "800"])
    rep = load_report(out)
    assert rep.seed == 99
    assert rep.frames == 800


def test_search_command(config_path, tmp_path):
    out = str(tmp_path / "search.json")
    assert main(["search", "--config", config_path, "--out", out]) == 0
    res = load_report(out)
    assert res.protocol == "odba"
    assert res.iterations == 30


def test_sweep_command(config_path, tmp_path):
    out = str(tmp_path / "sweep.csv")
    assert main(["sweep", "--config", config_path, "--out", out,
                 "--format", "csv"]) == 0
    lines = open(out).read().strip().split("\n")
    assert len(lines) == 1 + 4  # header + 2 caps x 2 protocols


def test_sweep_without_block_fails(tmp_path, capsys):
    path = tmp_path / "nosweep.yaml"
    path.write_text(CONFIG.replace("sweep:", "# sweep:").split("sweep")[0])
    assert main(["sweep", "--config", str(path)]) == 2
    assert "sweep" in capsys.readouterr().err


def test_bad_config_reports_error(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text(CONFIG.replace("power_rs_dbm: 20", "power_rs_dbm: 60"))
    assert main(["run", "--config", str(path)]) == 2
    assert "power ordering" in capsys.readouterr().err
