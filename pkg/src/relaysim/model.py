"""Shared system model: scenario parameters, block-Rayleigh fading draws,
directed-link SNRs and the log2(1+x) capacity function.

Conventions used throughout the package:
  * UE indices m are 1-based; Python lists indexed with m-1.
  * Undirected links are named "U{m}R", "U{m}B" and "RB"; the directed
    uplink set reuses those names (transmitter first), the directed
    downlink set is "RU{m}", "BU{m}" and "BR".
  * Powers enter in dBm and average gains in dB; everything is converted
    to linear once at construction and all internal math is linear.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

RELAY_BS = "RB"


class ConfigError(ValueError):
    """Inconsistent scenario or run configuration."""


def db_to_linear(x_db: float) -> float:
    """Convert a dB (or dBm) value to the linear scale."""
    return 10.0 ** (x_db / 10.0)


def capacity(snr: float) -> float:
    """Maximal achievable rate log2(1 + snr) in bits/symbol, snr >= 0."""
    if snr < 0.0:
        raise ValueError(f"negative SNR not allowed: {snr!r}")
    return math.log2(1.0 + snr)


def ue_relay_link(m: int) -> str:
    return f"U{m}R"


def ue_bs_link(m: int) -> str:
    return f"U{m}B"


@dataclass(frozen=True)
class ScenarioConfig:
    """Static scenario description.

    num_ues: number of UEs M (>= 1; the non-orthogonal protocol needs >= 2).
    power_ue_dbm: per-UE transmit power, dBm.
    power_rs_dbm / power_bs_dbm: relay and base-station power, dBm. The
        station hierarchy must satisfy P_BS >= P_RS >= P_UE (linear).
    omega_db: average channel gain per undirected link, dB.
    noise_power: linear noise power (normalized to 1 by default).
    frames: simulation horizon in frames.
    seed: base seed for the fading stream.
    """

    num_ues: int
    power_ue_dbm: tuple
    power_rs_dbm: float
    power_bs_dbm: float
    omega_db: dict
    noise_power: float = 1.0
    frames: int = 100_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "power_ue_dbm",
                           tuple(float(p) for p in self.power_ue_dbm))
        object.__setattr__(self, "omega_db",
                           {k: float(v) for k, v in self.omega_db.items()})
        if self.num_ues < 1:
            raise ConfigError("num_ues must be >= 1")
        if len(self.power_ue_dbm) != self.num_ues:
            raise ConfigError(
                f"power_ue_dbm has {len(self.power_ue_dbm)} entries, "
                f"expected {self.num_ues}")
        missing = [l for l in self.undirected_links if l not in self.omega_db]
        if missing:
            raise ConfigError(
                "missing average gain for link(s): " + ", ".join(missing))
        unknown = sorted(set(self.omega_db) - set(self.undirected_links))
        if unknown:
            raise ConfigError("unknown link id(s) in omega_db: " + ", ".join(unknown))
        for link, val in self.omega_db.items():
            if not math.isfinite(val):
                raise ConfigError(f"omega_db[{link}] must be finite")
        if not (math.isfinite(self.noise_power) and self.noise_power > 0):
            raise ConfigError("noise_power must be positive and finite")
        if self.frames < 1:
            raise ConfigError("frames must be >= 1")
        if not (self.power_bs >= self.power_rs >= max(self.power_ue)):
            raise ConfigError(
                "power ordering violated: need P_BS >= P_RS >= P_UE "
                f"(got {self.power_bs_dbm}, {self.power_rs_dbm}, "
                f"{max(self.power_ue_dbm)} dBm)")

    @cached_property
    def undirected_links(self) -> tuple:
        ues = range(1, self.num_ues + 1)
        return tuple([ue_relay_link(m) for m in ues]
                     + [ue_bs_link(m) for m in ues] + [RELAY_BS])

    @cached_property
    def power_ue(self) -> tuple:
        return tuple(db_to_linear(p) for p in self.power_ue_dbm)

    @cached_property
    def power_rs(self) -> float:
        return db_to_linear(self.power_rs_dbm)

    @cached_property
    def power_bs(self) -> float:
        return db_to_linear(self.power_bs_dbm)

    @cached_property
    def omega_lin(self) -> dict:
        return {k: db_to_linear(v) for k, v in self.omega_db.items()}

    @cached_property
    def omega_vector(self) -> np.ndarray:
        """Linear average gains, aligned with undirected_links."""
        return np.array([self.omega_lin[l] for l in self.undirected_links])


@dataclass
class ChannelRealization:
    """One block-fading draw: |h|^2 per undirected link (reciprocal)."""

    gain2: dict


def sample_gains(cfg: ScenarioConfig, rng: np.random.Generator,
                 n: int) -> np.ndarray:
    """Draw n i.i.d. block-fading realizations.

    Column j holds |h|^2 for cfg.undirected_links[j], exponential with mean
    equal to the linear average gain (Rayleigh amplitude squared).
    """
    return rng.exponential(scale=cfg.omega_vector,
                           size=(n, len(cfg.undirected_links)))


def sample_channel(cfg: ScenarioConfig,
                   rng: np.random.Generator) -> ChannelRealization:
    """Draw one frame's fading realization."""
    row = sample_gains(cfg, rng, 1)[0]
    return ChannelRealization(dict(zip(cfg.undirected_links, row.tolist())))


@dataclass
class SnrView:
    """Directed-link SNRs for one frame.

    gamma_ul keys: U{m}R, U{m}B, RB.  gamma_dl keys: RU{m}, BU{m}, BR.
    Reciprocity: each directed pair shares the undirected gain and differs
    only in transmitter power.
    """

    gamma_ul: dict
    gamma_dl: dict
    num_ues: int


def snr_view(real: ChannelRealization, cfg: ScenarioConfig) -> SnrView:
    g = real.gain2
    n0 = cfg.noise_power
    try:
        g_rb = g[RELAY_BS]
    except KeyError:
        raise ConfigError("channel realization missing link RB") from None
    gu = {RELAY_BS: cfg.power_rs * g_rb / n0}
    gd = {"BR": cfg.power_bs * g_rb / n0}
    for m in range(1, cfg.num_ues + 1):
        ur, ub = ue_relay_link(m), ue_bs_link(m)
        try:
            g_ur, g_ub = g[ur], g[ub]
        except KeyError as exc:
            raise ConfigError(f"channel realization missing link {exc}") from None
        p_u = cfg.power_ue[m - 1]
        gu[ur] = p_u * g_ur / n0
        gu[ub] = p_u * g_ub / n0
        gd[f"RU{m}"] = cfg.power_rs * g_ur / n0
        gd[f"BU{m}"] = cfg.power_bs * g_ub / n0
    return SnrView(gamma_ul=gu, gamma_dl=gd, num_ues=cfg.num_ues)


@dataclass(frozen=True)
class BufferPair:
    """Relay queue occupancies in bits/symbol, one per direction.

    cap bounds each queue independently; math.inf means unbounded.
    """

    q_ul: float = 0.0
    q_dl: float = 0.0
    cap: float = math.inf

    def __post_init__(self):
        if self.q_ul < 0 or self.q_dl < 0:
            raise ValueError("queue occupancy cannot be negative")
        if self.q_ul > self.cap or self.q_dl > self.cap:
            raise ValueError("queue occupancy exceeds the buffer cap")


@dataclass
class FrameOutcome:
    """Result of applying one frame's selection.

    Counted rates follow each protocol's sum-rate accounting; delivered
    rates count only bits that reached their final destination this frame.
    Arrival/departure record the relay-buffer flows for drift bookkeeping.
    """

    selection: object
    ul_counted: float
    dl_counted: float
    ul_delivered: float
    dl_delivered: float
    ul_arrival: float
    ul_departure: float
    dl_arrival: float
    dl_departure: float
    buffer_after: BufferPair
    coupled: Optional[bool] = None
