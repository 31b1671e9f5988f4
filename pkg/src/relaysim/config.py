"""Run configuration parsing.

Configs are flat JSON or YAML documents; keys mirror RunSpec. Minimal
example:

    num_ues: 2
    power_ue_dbm: [20, 20]
    power_rs_dbm: 20
    power_bs_dbm: 46
    omega_db: {U1R: -6, U2R: -8, U1B: -40, U2B: -41, RB: 0}
    frames: 100000
    seed: 1
    protocol: odba

Optional blocks: noise_power (default 1.0), buffer_cap (null or "inf" for
unbounded), lambda_fixed, search{lambda_init, step0, decay, batch_frames,
max_iters, tol, seed, patience} and sweep{axis, values, protocols}.
"""
from __future__ import annotations

import json
import math

import yaml

from .engine import RunSpec, SweepSpec
from .model import ConfigError, ScenarioConfig
from .search import SearchConfig

_TOP_KEYS = {
    "num_ues", "power_ue_dbm", "power_rs_dbm", "power_bs_dbm", "omega_db",
    "noise_power", "frames", "seed", "protocol", "buffer_cap",
    "lambda_fixed", "search", "sweep",
}
_SEARCH_KEYS = {"lambda_init", "step0", "decay", "batch_frames",
                "max_iters", "tol", "seed", "patience", "max_move"}
_SWEEP_KEYS = {"axis", "values", "protocols"}


def _load_document(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is neither valid JSON nor YAML: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("config document must be a key-value mapping")
    return data


def _require(data: dict, key: str):
    if key not in data:
        raise ConfigError(f"missing required config key: {key}")
    return data[key]


def _parse_cap(raw) -> float:
    if raw is None:
        return math.inf
    if isinstance(raw, str):
        if raw.lower() in ("inf", "infinity", "unbounded"):
            return math.inf
        raise ConfigError(f"buffer_cap string must be 'inf', got {raw!r}")
    return float(raw)


def parse_config(text: str) -> RunSpec:
    """Parse a config document into a validated RunSpec.

    Unit conversion (dBm/dB to linear) happens inside ScenarioConfig; all
    invariants (power ordering, link coverage, protocol applicability) are
    checked here or in the dataclass constructors, each with its own
    diagnostic.
    """
    data = _load_document(text)
    unknown = sorted(set(data) - _TOP_KEYS)
    if unknown:
        raise ConfigError("unknown config key(s): " + ", ".join(unknown))

    scenario = ScenarioConfig(
        num_ues=int(_require(data, "num_ues")),
        power_ue_dbm=tuple(_require(data, "power_ue_dbm")),
        power_rs_dbm=float(_require(data, "power_rs_dbm")),
        power_bs_dbm=float(_require(data, "power_bs_dbm")),
        omega_db=dict(_require(data, "omega_db")),
        noise_power=float(data.get("noise_power", 1.0)),
        frames=int(data.get("frames", 100_000)),
        seed=int(data.get("seed", 0)),
    )

    search_raw = data.get("search") or {}
    unknown = sorted(set(search_raw) - _SEARCH_KEYS)
    if unknown:
        raise ConfigError("unknown search key(s): " + ", ".join(unknown))
    search_kwargs = dict(search_raw)
    if "lambda_init" in search_kwargs:
        search_kwargs["lambda_init"] = tuple(search_kwargs["lambda_init"])
    search = SearchConfig(**search_kwargs)

    sweep_spec = None
    if data.get("sweep") is not None:
        sweep_raw = data["sweep"]
        unknown = sorted(set(sweep_raw) - _SWEEP_KEYS)
        if unknown:
            raise ConfigError("unknown sweep key(s): " + ", ".join(unknown))
        sweep_spec = SweepSpec(
            axis=str(_require(sweep_raw, "axis")),
            values=tuple(_require(sweep_raw, "values")),
            protocols=tuple(sweep_raw.get("protocols") or ()),
        )

    lambda_fixed = data.get("lambda_fixed")
    return RunSpec(
        scenario=scenario,
        protocol=str(_require(data, "protocol")),
        search=search,
        buffer_cap=_parse_cap(data.get("buffer_cap")),
        lambda_fixed=None if lambda_fixed is None else tuple(lambda_fixed),
        sweep=sweep_spec,
    )


def load_config(path: str) -> RunSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
