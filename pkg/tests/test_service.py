from fastapi.testclient import TestClient

from relaysim.engine import RunSpec, run_simulation
from relaysim.model import ScenarioConfig
from relaysim.reports import report_from_dict, sim_report_to_dict
from relaysim.search import SearchConfig
from relaysim.service.app import app

client = TestClient(app)

SCENARIO = {
    "num_ues": 2,
    "power_ue_dbm": [20, 20],
    "power_rs_dbm": 20,
    "power_bs_dbm": 46,
    "omega_db": {"U1R": -6, "U2R": -8, "U1B": -40, "U2B": -41, "RB": 0},
    "frames": 2000,
    "seed": 3,
}
SEARCH = {"max_iters": 40, "batch_frames": 1000}


def test_health():
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json()["status"] == "ok"


def test_run_endpoint_matches_in_process():
    resp = client.post("/run", json={"scenario": SCENARIO, "protocol": "odba",
                                     "search": SEARCH})
    assert resp.status_code == 200
    body = resp.json()
    local = run_simulation(RunSpec(scenario=ScenarioConfig(**SCENARIO),
                                   protocol="odba",
                                   search=SearchConfig(**SEARCH)))
    assert body == sim_report_to_dict(local)
    assert report_from_dict(body) == local


def test_run_endpoint_with_fixed_multipliers():
    resp = client.post("/run", json={"scenario": SCENARIO, "protocol": "odba",
                                     "lambda_fixed": [-0.5, -0.5]})
    assert resp.status_code == 200
    assert resp.json()["lambda_star"] == [-0.5, -0.5]
    assert resp.json()["case_label"] == "fixed"


def test_search_endpoint():
    resp = client.post("/search", json={"scenario": SCENARIO,
                                        "protocol": "nodba",
                                        "search": SEARCH})
    assert resp.status_code == 200
    body = resp.json()
    assert body["kind"] == "search_result"
    assert len(body["lambda_trace"]) == body["iterations"]


def test_sweep_endpoint():
    resp = client.post("/sweep", json={
        "scenario": SCENARIO, "protocol": "odba", "search": SEARCH,
        "axis": "buffer_cap", "values": [None, 4.0],
        "protocols": ["odba", "benchmark"],
    })
    assert resp.status_code == 200
    body = resp.json()
    assert body["kind"] == "sweep_report"
    assert len(body["rows"]) == 4
    assert body["rows"][0]["axis_value"] == 4.0
    assert body["rows"][-1]["axis_value"] is None  # unbounded sorts last


def test_invalid_power_ordering_is_422():
    bad = dict(SCENARIO, power_rs_dbm=50)
    resp = client.post("/run", json={"scenario": bad, "protocol": "odba"})
    assert resp.status_code == 422
    assert "power ordering" in resp.json()["detail"]


def test_single_ue_nodba_is_422():
    bad = {
        "num_ues": 1, "power_ue_dbm": [20], "power_rs_dbm": 20,
        "power_bs_dbm": 46, "omega_db": {"U1R": -6, "U1B": -40, "RB": 0},
        "frames": 100, "seed": 1,
    }
    resp = client.post("/run", json={"scenario": bad, "protocol": "nodba"})
    assert resp.status_code == 422


def test_malformed_request_is_422():
    resp = client.post("/run", json={"scenario": SCENARIO,
                                     "protocol": "turbo"})
    assert resp.status_code == 422
