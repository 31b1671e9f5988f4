import math

import pytest

from relaysim.engine import ALL_MODES, RunSpec, run_simulation, sweep
from relaysim.reports import (CSV_COLUMNS, load_report, render_csv,
                              report_from_dict, report_to_dict, write_report)
from relaysim.search import SearchConfig, search_1d

FAST = SearchConfig(max_iters=40, batch_frames=1000)


@pytest.fixture
def sim_report(make_scenario):
    return run_simulation(RunSpec(scenario=make_scenario(frames=2000),
                                  protocol="odba", search=FAST))


@pytest.fixture
def sweep_report(make_scenario):
    tmpl = RunSpec(scenario=make_scenario(frames=1000), protocol="odba",
                   search=FAST)
    return sweep(tmpl, "buffer_cap", [None, 4.0],
                 protocols=("odba", "nodba", "benchmark"))


def test_sim_report_round_trip(tmp_path, sim_report):
    path = str(tmp_path / "run.json")
    write_report(sim_report, path, fmt="json")
    assert load_report(path) == sim_report


def test_sweep_report_round_trip(tmp_path, sweep_report):
    path = str(tmp_path / "sweep.json")
    write_report(sweep_report, path, fmt="json")
    assert load_report(path) == sweep_report


def test_search_result_round_trip(tmp_path, make_scenario):
    res = search_1d(make_scenario(frames=10), FAST)
    path = str(tmp_path / "search.json")
    write_report(res, path, fmt="json")
    assert load_report(path) == res


def test_csv_columns_fixed_order():
    head = CSV_COLUMNS[:8]
    assert head == ["axis_value", "protocol", "tau_ul", "tau_dl", "tau_sum",
                    "delivered_ul", "delivered_dl", "frac_coupled"]
    assert CSV_COLUMNS[8:8 + len(ALL_MODES)] == [f"frac_{m}" for m in ALL_MODES]
    assert CSV_COLUMNS[-8:] == ["lambda1", "lambda2", "lambda3", "lambda4",
                                "drift_ul", "drift_dl", "frames", "seed"]


def test_sweep_csv_shape(tmp_path, sweep_report):
    path = str(tmp_path / "sweep.csv")
    write_report(sweep_report, path, fmt="csv")
    lines = open(path).read().strip().split("\n")
    assert lines[0].split(",")[:2] == ["axis_value", "protocol"]
    assert len(lines) == 1 + len(sweep_report.rows)
    # capped rows come before the unbounded ones, which print as "inf"
    assert lines[1].startswith("4.0,odba")
    assert lines[4].startswith("inf,odba")


def test_csv_lambda_columns_per_protocol(sweep_report):
    lines = render_csv(sweep_report).strip().split("\n")
    header = lines[0].split(",")
    idx = {name: header.index(name) for name in
           ("protocol", "lambda1", "lambda2", "lambda3", "lambda4",
            "frac_coupled", "frac_idle", "frac_mac_to_relay")}
    for line in lines[1:]:
        cells = line.split(",")
        proto = cells[idx["protocol"]]
        if proto == "nodba":
            assert cells[idx["lambda1"]] == "" and cells[idx["lambda3"]] != ""
            assert cells[idx["frac_coupled"]] == ""
            assert cells[idx["frac_idle"]] != ""
        else:
            assert cells[idx["lambda1"]] != "" and cells[idx["lambda3"]] == ""
            assert cells[idx["frac_idle"]] == ""
        if proto == "benchmark":
            assert cells[idx["frac_mac_to_relay"]] != ""


def test_sim_csv_single_row(sim_report):
    lines = render_csv(sim_report).strip().split("\n")
    assert len(lines) == 2
    assert lines[1].split(",")[0] == ""  # no axis value for a single run


def test_search_csv_is_trace_table(make_scenario):
    res = search_1d(make_scenario(frames=10), FAST)
    lines = render_csv(res).strip().split("\n")
    assert lines[0] == "iteration,lambda_a,lambda_b,drift_a,drift_b"
    assert len(lines) == 1 + res.iterations


def test_mode_order_stable(sim_report):
    data = report_to_dict(sim_report)
    assert list(data["mode_fractions"]) == [m for m in ALL_MODES
                                            if m in data["mode_fractions"]]


def test_unknown_kind_rejected():
    with pytest.raises(ValueError, match="unrecognized report kind"):
        report_from_dict({"kind": "mystery"})


def test_write_report_bad_format(sim_report, tmp_path):
    with pytest.raises(ValueError, match="unknown report format"):
        write_report(sim_report, str(tmp_path / "x"), fmt="xml")


def test_write_report_bad_path(sim_report, tmp_path):
    with pytest.raises(OSError, match="cannot write report"):
        write_report(sim_report, str(tmp_path / "no_dir" / "x.json"))
