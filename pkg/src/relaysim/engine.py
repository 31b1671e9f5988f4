"""End-to-end experiment pipeline.

A run is two phases: first the drift search tunes the policy's long-term
multipliers with queues ignored, then the tuned policy is simulated frame
by frame with real (optionally capped) relay queues, accumulating rate,
mode and queue statistics. Sweeps repeat runs over one scenario axis and
one or more policies with independently derived seeds per row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import benchmark as bench
from . import nodba, odba
from .model import (BufferPair, ChannelRealization, ConfigError,
                    FrameOutcome, ScenarioConfig, sample_gains, snr_view)
from .search import SearchConfig, SearchResult, derive_seed, search_for

PROTOCOLS = ("odba", "nodba", "benchmark")

ODBA_UL_KINDS = (odba.UL_DIRECT, odba.UL_TO_RELAY, odba.UL_RELAY_OUT)
ODBA_DL_KINDS = (odba.DL_DIRECT, odba.DL_FROM_RELAY, odba.DL_RELAY_IN)
ODBA_MODES = tuple(f"ul_{u}__dl_{d}" for u in ODBA_UL_KINDS
                   for d in ODBA_DL_KINDS)
NODBA_MODES = (nodba.PAIR_UL_RELAY, nodba.PAIR_DL_RELAY, nodba.RELAY_OUT,
               nodba.RELAY_IN, "idle")
BENCHMARK_MODES = (bench.UL_DIRECT, bench.DL_DIRECT, bench.MAC_TO_RELAY,
                   bench.RELAY_BROADCAST)
ALL_MODES = ODBA_MODES + NODBA_MODES + BENCHMARK_MODES


def modes_for(protocol: str) -> tuple:
    return {"odba": ODBA_MODES, "nodba": NODBA_MODES,
            "benchmark": BENCHMARK_MODES}[protocol]


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    protocols: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "protocols", tuple(self.protocols))
        if not self.values:
            raise ConfigError("sweep needs a non-empty value list")
        for p in self.protocols:
            if p not in PROTOCOLS:
                raise ConfigError(f"unknown protocol in sweep: {p!r}")


@dataclass(frozen=True)
class RunSpec:
    """One experiment: scenario + policy + search knobs + buffer cap.

    lambda_fixed skips the search phase and simulates with the given
    multipliers. buffer_cap=inf disables the finite-buffer guards.
    """

    scenario: ScenarioConfig
    protocol: str
    search: SearchConfig = SearchConfig()
    buffer_cap: float = math.inf
    lambda_fixed: Optional[tuple] = None
    sweep: Optional[SweepSpec] = None

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(
                f"unknown protocol {self.protocol!r}; "
                f"expected one of {', '.join(PROTOCOLS)}")
        if self.protocol == "nodba" and self.scenario.num_ues < 2:
            raise ConfigError("protocol 'nodba' needs num_ues >= 2")
        if self.lambda_fixed is not None:
            object.__setattr__(self, "lambda_fixed",
                               tuple(float(x) for x in self.lambda_fixed))
            if len(self.lambda_fixed) != 2:
                raise ConfigError("lambda_fixed needs exactly two components")
        if not self.buffer_cap > 0:
            raise ConfigError("buffer_cap must be positive (or unbounded)")


@dataclass
class SimReport:
    """Aggregated results of one simulated run."""

    protocol: str
    frames: int
    seed: int
    buffer_cap: float
    lambda_star: tuple
    search_converged: bool
    search_iterations: int
    case_label: str
    tau_ul: float
    tau_dl: float
    tau_sum: float
    tau_sum_se: float          # Monte-Carlo standard error of tau_sum
    delivered_ul: float
    delivered_dl: float
    mode_fractions: dict
    mode_rate_sums: dict       # mode -> [sum of counted UL, counted DL]
    coupled_fraction: Optional[float]
    decoupled_fraction: Optional[float]
    queue_stats: dict
    arrival_ul: float
    departure_ul: float
    arrival_dl: float
    departure_dl: float
    drift_ul: float            # arrival_ul - departure_ul
    drift_dl: float
    conservation_ul: float     # relative flow-vs-state residual
    conservation_dl: float


@dataclass
class SweepRow:
    axis_value: float
    report: SimReport


@dataclass
class SweepReport:
    axis: str
    rows: list


class _Tally:
    """Per-frame accumulator for one simulation phase."""

    def __init__(self, modes):
        self.n = 0
        self.ul_counted = 0.0
        self.dl_counted = 0.0
        self.ul_delivered = 0.0
        self.dl_delivered = 0.0
        self.ul_arr = 0.0
        self.ul_dep = 0.0
        self.dl_arr = 0.0
        self.dl_dep = 0.0
        self.coupled = 0
        self.q_ul_sum = 0.0
        self.q_dl_sum = 0.0
        self.q_ul_max = 0.0
        self.q_dl_max = 0.0
        self.mode_counts = {m: 0 for m in modes}
        self.mode_rates = {m: [0.0, 0.0] for m in modes}
        # Welford on the per-frame counted sum, for the tau_sum stderr.
        self._mean = 0.0
        self._m2 = 0.0

    def add(self, mode, out):
        self.n += 1
        self.ul_counted += out.ul_counted
        self.dl_counted += out.dl_counted
        self.ul_delivered += out.ul_delivered
        self.dl_delivered += out.dl_delivered
        self.ul_arr += out.ul_arrival
        self.ul_dep += out.ul_departure
        self.dl_arr += out.dl_arrival
        self.dl_dep += out.dl_departure
        if out.coupled:
            self.coupled += 1
        buf = out.buffer_after
        self.q_ul_sum += buf.q_ul
        self.q_dl_sum += buf.q_dl
        if buf.q_ul > self.q_ul_max:
            self.q_ul_max = buf.q_ul
        if buf.q_dl > self.q_dl_max:
            self.q_dl_max = buf.q_dl
        self.mode_counts[mode] += 1
        rates = self.mode_rates[mode]
        rates[0] += out.ul_counted
        rates[1] += out.dl_counted
        total = out.ul_counted + out.dl_counted
        delta = total - self._mean
        self._mean += delta / self.n
        self._m2 += delta * (total - self._mean)

    def tau_sum_se(self):
        if self.n < 2:
            return 0.0
        return math.sqrt(self._m2 / (self.n - 1) / self.n)


def _simulate_odba(cfg, lam, cap, tally):
    rng = np.random.default_rng(cfg.seed)
    gains = sample_gains(cfg, rng, cfg.frames)
    links = cfg.undirected_links
    guard = math.isfinite(cap)
    buf = BufferPair(0.0, 0.0, cap)
    for i in range(cfg.frames):
        real = ChannelRealization(dict(zip(links, gains[i].tolist())))
        snr = snr_view(real, cfg)
        rates = odba.odba_rates(snr)
        if guard:
            ul = odba.odba_decide_ul(rates, lam[0], q_ul=buf.q_ul, cap=cap)
            dl = odba.odba_decide_dl(rates, lam[1], q_dl=buf.q_dl, cap=cap)
        else:
            ul = odba.odba_decide_ul(rates, lam[0])
            dl = odba.odba_decide_dl(rates, lam[1])
        out = odba.odba_apply_frame(odba.OdbaSelection(ul, dl), rates, buf)
        buf = out.buffer_after
        tally.add(f"ul_{ul.kind}__dl_{dl.kind}", out)
    return buf


def _simulate_nodba(cfg, lam, cap, tally):
    rng = np.random.default_rng(cfg.seed)
    gains = sample_gains(cfg, rng, cfg.frames)
    links = cfg.undirected_links
    guard = math.isfinite(cap)
    buf = BufferPair(0.0, 0.0, cap)
    for i in range(cfg.frames):
        real = ChannelRealization(dict(zip(links, gains[i].tolist())))
        snr = snr_view(real, cfg)
        rates = nodba.nodba_rates(snr, buf)
        scores = nodba.selection_scores(rates, lam[0], lam[1])
        allowed = nodba.feasible_candidates(rates, buf) if guard else None
        sel = nodba.nodba_decide(scores, lam[0], lam[1], allowed=allowed)
        if sel is None:
            tally.add("idle", _idle_outcome(buf))
            continue
        out = nodba.nodba_apply_frame(sel, rates, buf)
        buf = out.buffer_after
        tally.add(sel.kind, out)
    return buf


def _simulate_benchmark(cfg, duals, cap, tally):
    rng = np.random.default_rng(cfg.seed)
    gains = sample_gains(cfg, rng, cfg.frames)
    links = cfg.undirected_links
    buf = BufferPair(0.0, 0.0, cap)
    for i in range(cfg.frames):
        real = ChannelRealization(dict(zip(links, gains[i].tolist())))
        snr = snr_view(real, cfg)
        sel = bench.benchmark_decide(i + 1, snr, buf, duals)
        out = bench.benchmark_apply_frame(sel, snr, buf)
        buf = out.buffer_after
        tally.add(sel.kind, out)
    return buf


def _idle_outcome(buf):
    return FrameOutcome(selection=None, ul_counted=0.0, dl_counted=0.0,
                        ul_delivered=0.0, dl_delivered=0.0,
                        ul_arrival=0.0, ul_departure=0.0,
                        dl_arrival=0.0, dl_departure=0.0,
                        buffer_after=buf)


def run_search(spec: RunSpec) -> SearchResult:
    """Phase 1: tune the multipliers for the spec's policy."""
    return search_for(spec.protocol, spec.scenario, spec.search)


def run_simulation(spec: RunSpec) -> SimReport:
    """Full two-phase run (search unless lambda_fixed, then simulation)."""
    if spec.lambda_fixed is not None:
        lam = spec.lambda_fixed
        converged, iterations, label = True, 0, "fixed"
    else:
        res = run_search(spec)
        lam = res.lambda_star
        converged, iterations, label = res.converged, res.iterations, res.case_label

    cfg = spec.scenario
    tally = _Tally(modes_for(spec.protocol))
    if spec.protocol == "odba":
        final = _simulate_odba(cfg, lam, spec.buffer_cap, tally)
    elif spec.protocol == "nodba":
        final = _simulate_nodba(cfg, lam, spec.buffer_cap, tally)
    else:
        final = _simulate_benchmark(cfg, lam, spec.buffer_cap, tally)

    n = tally.n
    cons_ul = abs((tally.ul_arr - tally.ul_dep) - final.q_ul) \
        / max(tally.ul_arr, 1.0)
    cons_dl = abs((tally.dl_arr - tally.dl_dep) - final.q_dl) \
        / max(tally.dl_arr, 1.0)
    coupled = tally.coupled / n if spec.protocol == "odba" else None
    return SimReport(
        protocol=spec.protocol,
        frames=n,
        seed=cfg.seed,
        buffer_cap=spec.buffer_cap,
        lambda_star=tuple(lam),
        search_converged=converged,
        search_iterations=iterations,
        case_label=label,
        tau_ul=tally.ul_counted / n,
        tau_dl=tally.dl_counted / n,
        tau_sum=(tally.ul_counted + tally.dl_counted) / n,
        tau_sum_se=tally.tau_sum_se(),
        delivered_ul=tally.ul_delivered / n,
        delivered_dl=tally.dl_delivered / n,
        mode_fractions={m: tally.mode_counts[m] / n
                        for m in modes_for(spec.protocol)},
        mode_rate_sums={m: list(tally.mode_rates[m])
                        for m in modes_for(spec.protocol)},
        coupled_fraction=coupled,
        decoupled_fraction=None if coupled is None else 1.0 - coupled,
        queue_stats={
            "q_ul_mean": tally.q_ul_sum / n,
            "q_ul_max": tally.q_ul_max,
            "q_dl_mean": tally.q_dl_sum / n,
            "q_dl_max": tally.q_dl_max,
        },
        arrival_ul=tally.ul_arr / n,
        departure_ul=tally.ul_dep / n,
        arrival_dl=tally.dl_arr / n,
        departure_dl=tally.dl_dep / n,
        drift_ul=(tally.ul_arr - tally.ul_dep) / n,
        drift_dl=(tally.dl_arr - tally.dl_dep) / n,
        conservation_ul=cons_ul,
        conservation_dl=cons_dl,
    )


def _apply_axis(spec: RunSpec, axis: str, value) -> RunSpec:
    scn = spec.scenario
    if axis == "buffer_cap":
        cap = math.inf if value is None else float(value)
        return replace(spec, buffer_cap=cap)
    if axis in scn.omega_db:
        omega = dict(scn.omega_db)
        omega[axis] = float(value)
        return replace(spec, scenario=replace(scn, omega_db=omega))
    if axis == "power_rs_dbm":
        return replace(spec, scenario=replace(scn, power_rs_dbm=float(value)))
    if axis == "power_bs_dbm":
        return replace(spec, scenario=replace(scn, power_bs_dbm=float(value)))
    if axis == "power_ue_dbm":
        ue = tuple(float(value) for _ in scn.power_ue_dbm)
        return replace(spec, scenario=replace(scn, power_ue_dbm=ue))
    raise ConfigError(
        f"sweep axis {axis!r} is neither a link id, a power, nor buffer_cap")


def _axis_sort_key(value) -> float:
    return math.inf if value is None else float(value)


def sweep(template: RunSpec, axis: str, values,
          protocols: Optional[tuple] = None) -> SweepReport:
    """One full run per (axis value, protocol), with per-row seeds derived
    from the template's base seed."""
    values = list(values)
    if not values:
        raise ConfigError("sweep needs a non-empty value list")
    protocols = tuple(protocols) if protocols else (template.protocol,)
    for p in protocols:
        if p not in PROTOCOLS:
            raise ConfigError(f"unknown protocol in sweep: {p!r}")
    order = sorted(range(len(values)), key=lambda i: _axis_sort_key(values[i]))
    rows = []
    for i in order:
        value = values[i]
        for proto in protocols:
            row_spec = _apply_axis(template, axis, value)
            row_seed = derive_seed(template.scenario.seed, "sweep", i, proto)
            row_spec = replace(
                row_spec, protocol=proto,
                scenario=replace(row_spec.scenario, seed=row_seed))
            rows.append(SweepRow(axis_value=_axis_sort_key(value),
                                 report=run_simulation(row_spec)))
    return SweepReport(axis=axis, rows=rows)
