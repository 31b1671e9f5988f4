"""HTTP service wrapping the simulation engine.

Endpoints run synchronously (desk-scale jobs take seconds to a few
minutes); responses are the same JSON documents the CLI writes to disk.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..engine import run_search, run_simulation, sweep
from ..model import ConfigError
from ..reports import (search_result_to_dict, sim_report_to_dict,
                       sweep_report_to_dict)
from .schemas import (HealthResponse, RunRequest, SearchResultModel,
                      SimReportModel, SweepReportModel, SweepRequest)

app = FastAPI(
    title="relaysim",
    description="Monte-Carlo link-level simulator for two-way multiuser "
                "buffer-aided relaying with decoupled uplink/downlink "
                "policies.",
    version=__version__,
)


def _to_spec(request):
    try:
        return request.to_spec()
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/search", response_model=SearchResultModel)
def search_endpoint(request: RunRequest):
    spec = _to_spec(request)
    return search_result_to_dict(run_search(spec))


@app.post("/run", response_model=SimReportModel)
def run_endpoint(request: RunRequest):
    spec = _to_spec(request)
    return sim_report_to_dict(run_simulation(spec))


@app.post("/sweep", response_model=SweepReportModel)
def sweep_endpoint(request: SweepRequest):
    spec = _to_spec(request)
    if spec.sweep is None:
        raise HTTPException(status_code=422, detail="sweep block required")
    try:
        report = sweep(spec, spec.sweep.axis, spec.sweep.values,
                       protocols=spec.sweep.protocols or None)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return sweep_report_to_dict(report)
