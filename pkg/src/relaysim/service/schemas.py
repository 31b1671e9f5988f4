"""Pydantic request/response models for the HTTP service.

Requests mirror the config-file schema; responses mirror the JSON report
documents (reports.sim_report_to_dict and friends), so a response body can
be fed straight back into reports.report_from_dict.
"""
from __future__ import annotations

import math
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field

from ..engine import RunSpec, SweepSpec
from ..model import ScenarioConfig
from ..search import SearchConfig


class ScenarioModel(BaseModel):
    num_ues: int
    power_ue_dbm: List[float]
    power_rs_dbm: float
    power_bs_dbm: float
    omega_db: Dict[str, float]
    noise_power: float = 1.0
    frames: int = 100_000
    seed: int = 0

    def to_config(self) -> ScenarioConfig:
        return ScenarioConfig(
            num_ues=self.num_ues,
            power_ue_dbm=tuple(self.power_ue_dbm),
            power_rs_dbm=self.power_rs_dbm,
            power_bs_dbm=self.power_bs_dbm,
            omega_db=dict(self.omega_db),
            noise_power=self.noise_power,
            frames=self.frames,
            seed=self.seed,
        )


class SearchModel(BaseModel):
    lambda_init: Tuple[float, float] = (-0.5, -0.5)
    step0: float = 0.05
    decay: float = 0.02
    batch_frames: int = 3000
    max_iters: int = 400
    tol: float = 1e-3
    seed: Optional[int] = None
    patience: int = 5
    max_move: float = 0.1

    def to_config(self) -> SearchConfig:
        return SearchConfig(**self.model_dump())


class RunRequest(BaseModel):
    scenario: ScenarioModel
    protocol: Literal["odba", "nodba", "benchmark"]
    search: SearchModel = Field(default_factory=SearchModel)
    buffer_cap: Optional[float] = None  # null = unbounded
    lambda_fixed: Optional[Tuple[float, float]] = None

    def to_spec(self) -> RunSpec:
        return RunSpec(
            scenario=self.scenario.to_config(),
            protocol=self.protocol,
            search=self.search.to_config(),
            buffer_cap=math.inf if self.buffer_cap is None else self.buffer_cap,
            lambda_fixed=self.lambda_fixed,
        )


class SweepRequest(RunRequest):
    axis: str
    values: List[Optional[float]]  # null entries mean unbounded buffer_cap
    protocols: List[Literal["odba", "nodba", "benchmark"]] = []

    def to_spec(self) -> RunSpec:
        spec = super().to_spec()
        return RunSpec(
            scenario=spec.scenario,
            protocol=spec.protocol,
            search=spec.search,
            buffer_cap=spec.buffer_cap,
            lambda_fixed=spec.lambda_fixed,
            sweep=SweepSpec(axis=self.axis, values=tuple(self.values),
                            protocols=tuple(self.protocols)),
        )


def run_request_from_spec(spec: RunSpec) -> dict:
    """Request payload equivalent to a parsed RunSpec (CLI remote mode)."""
    scn = spec.scenario
    payload = {
        "scenario": {
            "num_ues": scn.num_ues,
            "power_ue_dbm": list(scn.power_ue_dbm),
            "power_rs_dbm": scn.power_rs_dbm,
            "power_bs_dbm": scn.power_bs_dbm,
            "omega_db": dict(scn.omega_db),
            "noise_power": scn.noise_power,
            "frames": scn.frames,
            "seed": scn.seed,
        },
        "protocol": spec.protocol,
        "search": {
            "lambda_init": list(spec.search.lambda_init),
            "step0": spec.search.step0,
            "decay": spec.search.decay,
            "batch_frames": spec.search.batch_frames,
            "max_iters": spec.search.max_iters,
            "tol": spec.search.tol,
            "seed": spec.search.seed,
            "patience": spec.search.patience,
            "max_move": spec.search.max_move,
        },
        "buffer_cap": (None if math.isinf(spec.buffer_cap)
                       else spec.buffer_cap),
        "lambda_fixed": (None if spec.lambda_fixed is None
                         else list(spec.lambda_fixed)),
    }
    if spec.sweep is not None:
        payload["axis"] = spec.sweep.axis
        payload["values"] = [None if v is None or (isinstance(v, float)
                                                   and math.isinf(v)) else v
                             for v in spec.sweep.values]
        payload["protocols"] = list(spec.sweep.protocols)
    return payload


class SimReportModel(BaseModel):
    kind: Literal["sim_report"] = "sim_report"
    protocol: str
    frames: int
    seed: int
    buffer_cap: Optional[float]
    lambda_star: List[float]
    search_converged: bool
    search_iterations: int
    case_label: str
    tau_ul: float
    tau_dl: float
    tau_sum: float
    tau_sum_se: float
    delivered_ul: float
    delivered_dl: float
    mode_fractions: Dict[str, float]
    mode_rate_sums: Dict[str, List[float]]
    coupled_fraction: Optional[float]
    decoupled_fraction: Optional[float]
    queue_stats: Dict[str, float]
    arrival_ul: float
    departure_ul: float
    arrival_dl: float
    departure_dl: float
    drift_ul: float
    drift_dl: float
    conservation_ul: float
    conservation_dl: float


class SweepRowModel(BaseModel):
    axis_value: Optional[float]
    report: SimReportModel


class SweepReportModel(BaseModel):
    kind: Literal["sweep_report"] = "sweep_report"
    axis: str
    rows: List[SweepRowModel]


class SearchResultModel(BaseModel):
    kind: Literal["search_result"] = "search_result"
    protocol: str
    lambda_star: List[float]
    iterations: int
    converged: bool
    case_label: str
    clamp_events: int
    drift_trace: List[List[float]]
    lambda_trace: List[List[float]]


class HealthResponse(BaseModel):
    status: str
    version: str
