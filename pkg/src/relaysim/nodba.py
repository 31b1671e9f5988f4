"""Non-orthogonal decoupled uplink/downlink policy.

One full-frame transmission per frame, chosen among four modes: two paired
modes where opposing flows collide and the receiver applies successive
interference cancellation, and the two relay hops. In the pair where UE m
feeds the relay while the BS serves UE l directly, the relay decodes the
strong BS signal first, which caps the direct downlink rate at
C(gamma_BR / (1 + gamma_UmR)). In the opposite pair (UE m direct to BS,
relay serving UE l) the BS cancels the relay signal, capping the relay's
downlink rate at C(gamma_RB / (1 + gamma_UmB)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

from .model import (BufferPair, FrameOutcome, RELAY_BS, SnrView, capacity,
                    ue_bs_link, ue_relay_link)

PAIR_UL_RELAY = "sim_ul_to_relay__dl_direct"
PAIR_DL_RELAY = "sim_ul_direct__dl_from_relay"
RELAY_OUT = "relay_out"
RELAY_IN = "relay_in"


class UndefinedCaseError(ValueError):
    """No decision rule exists for lam3 <= -1 together with lam4 >= 0."""


class NodbaSelection(NamedTuple):
    kind: str
    ul_ue: Optional[int] = None  # UE transmitting uplink in a paired mode
    dl_ue: Optional[int] = None  # UE receiving downlink in a paired mode


@lru_cache(maxsize=None)
def pair_indices(num_ues: int) -> tuple:
    """All ordered (ul UE, dl UE) pairs with distinct UEs, row-major."""
    return tuple((m, l) for m in range(1, num_ues + 1)
                 for l in range(1, num_ues + 1) if l != m)


@dataclass
class NodbaRateTable:
    """Full-frame candidate rates, indexed [ul_ue - 1][dl_ue - 1] for the
    paired modes (diagonal unused, left at 0).

    Built without a buffer the queue terms are dropped from the mins
    (threshold-search view); built with one they cap the relay drains.
    """

    num_ues: int
    pair_ul_to_relay: list    # UE m -> relay feed, interference-free via SIC
    pair_dl_direct: list      # BS -> UE l, SIC-capped by the relay's decode
    pair_ul_direct: list      # UE m -> BS, full capacity
    pair_dl_from_relay: list  # relay -> UE l, capped by queue/capacity/SIC
    relay_out: float          # relay -> BS, capped by the uplink queue
    relay_in: float           # BS -> relay, full capacity


def nodba_rates(snr: SnrView, buf: Optional[BufferPair] = None) -> NodbaRateTable:
    m_count = snr.num_ues
    if m_count < 2:
        raise ValueError("paired simultaneous modes need at least 2 UEs")
    gu, gd = snr.gamma_ul, snr.gamma_dl
    q_ul = buf.q_ul if buf is not None else math.inf
    q_dl = buf.q_dl if buf is not None else math.inf
    ues = range(1, m_count + 1)
    c_ur = [capacity(gu[ue_relay_link(m)]) for m in ues]
    c_ub = [capacity(gu[ue_bs_link(m)]) for m in ues]
    c_bu = [capacity(gd[f"BU{m}"]) for m in ues]
    c_ru = [capacity(gd[f"RU{m}"]) for m in ues]
    g_rb, g_br = gu[RELAY_BS], gd["BR"]

    zeros = [[0.0] * m_count for _ in ues]
    t_feed = [row[:] for row in zeros]
    t_dl_direct = [row[:] for row in zeros]
    t_ul_direct = [row[:] for row in zeros]
    t_dl_relay = [row[:] for row in zeros]
    for m in ues:
        sic_dl = capacity(g_br / (1.0 + gu[ue_relay_link(m)]))
        sic_ru = capacity(g_rb / (1.0 + gu[ue_bs_link(m)]))
        for l in ues:
            if l == m:
                continue
            t_feed[m - 1][l - 1] = c_ur[m - 1]
            t_dl_direct[m - 1][l - 1] = min(c_bu[l - 1], sic_dl)
            t_ul_direct[m - 1][l - 1] = c_ub[m - 1]
            t_dl_relay[m - 1][l - 1] = min(q_dl, c_ru[l - 1], sic_ru)
    return NodbaRateTable(
        num_ues=m_count,
        pair_ul_to_relay=t_feed,
        pair_dl_direct=t_dl_direct,
        pair_ul_direct=t_ul_direct,
        pair_dl_from_relay=t_dl_relay,
        relay_out=min(q_ul, capacity(g_rb)),
        relay_in=capacity(g_br),
    )


@dataclass
class ScoreTable:
    """Weighted selection scores; the frame-level rule is their argmax."""

    num_ues: int
    pair_ul_relay: list   # dl_direct - lam3 * feed
    pair_dl_relay: list   # ul_direct + (1 + lam4) * dl_from_relay
    relay_out: float      # (1 + lam3) * relay hop rate
    relay_in: float       # -lam4 * relay feed rate


def selection_scores(rates: NodbaRateTable, lam3: float,
                     lam4: float) -> ScoreTable:
    n = rates.num_ues
    s1 = [[0.0] * n for _ in range(n)]
    s2 = [[0.0] * n for _ in range(n)]
    for m, l in pair_indices(n):
        s1[m - 1][l - 1] = (rates.pair_dl_direct[m - 1][l - 1]
                            - lam3 * rates.pair_ul_to_relay[m - 1][l - 1])
        s2[m - 1][l - 1] = (rates.pair_ul_direct[m - 1][l - 1]
                            + (1.0 + lam4) * rates.pair_dl_from_relay[m - 1][l - 1])
    return ScoreTable(
        num_ues=n,
        pair_ul_relay=s1,
        pair_dl_relay=s2,
        relay_out=(1.0 + lam3) * rates.relay_out,
        relay_in=-lam4 * rates.relay_in,
    )


def case_of(lam3: float, lam4: float) -> str:
    """Which branch of the decision rule applies for (lam3, lam4)."""
    if lam3 > -1.0 and lam4 < 0.0:
        return "I"
    if lam3 > -1.0:
        return "II"
    if lam4 < 0.0:
        return "III"
    return "undefined"


def nodba_decide(scores: ScoreTable, lam3: float, lam4: float,
                 allowed: Optional[set] = None) -> Optional[NodbaSelection]:
    """Argmax over the case-admissible candidates.

    Case I admits every mode; case II only the relay-feeding pair and the
    relay's uplink hop; case III only the relay-draining pair and the
    downlink hop. Ties resolve in mode order then row-major pair order.
    `allowed` optionally restricts further (finite-buffer guard); returns
    None when nothing is admissible (idle frame).
    """
    case = case_of(lam3, lam4)
    if case == "undefined":
        raise UndefinedCaseError(
            f"no decision rule for lam3={lam3!r}, lam4={lam4!r}")
    candidates = []
    if case in ("I", "II"):
        candidates += [(scores.pair_ul_relay[m - 1][l - 1],
                        NodbaSelection(PAIR_UL_RELAY, m, l))
                       for m, l in pair_indices(scores.num_ues)]
    if case in ("I", "III"):
        candidates += [(scores.pair_dl_relay[m - 1][l - 1],
                        NodbaSelection(PAIR_DL_RELAY, m, l))
                       for m, l in pair_indices(scores.num_ues)]
    if case in ("I", "II"):
        candidates.append((scores.relay_out, NodbaSelection(RELAY_OUT)))
    if case in ("I", "III"):
        candidates.append((scores.relay_in, NodbaSelection(RELAY_IN)))
    best = None
    best_score = -math.inf
    for score, sel in candidates:
        if allowed is not None and sel not in allowed:
            continue
        if score > best_score:
            best, best_score = sel, score
    return best


def feasible_candidates(rates: NodbaRateTable, buf: BufferPair) -> set:
    """Finite-buffer guard: drop feeds that would overflow and drains from
    an empty queue."""
    out = set()
    for m, l in pair_indices(rates.num_ues):
        if buf.q_ul + rates.pair_ul_to_relay[m - 1][l - 1] <= buf.cap:
            out.add(NodbaSelection(PAIR_UL_RELAY, m, l))
        if buf.q_dl > 0.0:
            out.add(NodbaSelection(PAIR_DL_RELAY, m, l))
    if buf.q_ul > 0.0:
        out.add(NodbaSelection(RELAY_OUT))
    if buf.q_dl + rates.relay_in <= buf.cap:
        out.add(NodbaSelection(RELAY_IN))
    return out


def nodba_apply_frame(sel: NodbaSelection, rates: NodbaRateTable,
                      buf: BufferPair) -> FrameOutcome:
    """Execute one frame.

    The relay-feeding pair counts only its direct downlink component (the
    uplink bits sit in the queue until the relay's hop); the relay-draining
    pair counts both of its flows; the BS->relay hop counts nothing until
    drained.
    """
    q_ul, q_dl, cap = buf.q_ul, buf.q_dl, buf.cap
    ul_counted = ul_delivered = ul_arr = ul_dep = 0.0
    dl_counted = dl_delivered = dl_arr = dl_dep = 0.0

    if sel.kind == PAIR_UL_RELAY:
        fed = min(rates.pair_ul_to_relay[sel.ul_ue - 1][sel.dl_ue - 1],
                  cap - q_ul)
        q_ul += fed
        ul_arr = fed
        dl_counted = dl_delivered = \
            rates.pair_dl_direct[sel.ul_ue - 1][sel.dl_ue - 1]
    elif sel.kind == PAIR_DL_RELAY:
        moved = min(q_dl, rates.pair_dl_from_relay[sel.ul_ue - 1][sel.dl_ue - 1])
        q_dl -= moved
        ul_counted = ul_delivered = \
            rates.pair_ul_direct[sel.ul_ue - 1][sel.dl_ue - 1]
        dl_counted = dl_delivered = dl_dep = moved
    elif sel.kind == RELAY_OUT:
        moved = min(q_ul, rates.relay_out)
        q_ul -= moved
        ul_counted = ul_delivered = ul_dep = moved
    elif sel.kind == RELAY_IN:
        fed = min(rates.relay_in, cap - q_dl)
        q_dl += fed
        dl_arr = fed
    else:
        raise ValueError(f"unknown selection kind: {sel.kind!r}")

    return FrameOutcome(
        selection=sel,
        ul_counted=ul_counted, dl_counted=dl_counted,
        ul_delivered=ul_delivered, dl_delivered=dl_delivered,
        ul_arrival=ul_arr, ul_departure=ul_dep,
        dl_arrival=dl_arr, dl_departure=dl_dep,
        buffer_after=BufferPair(q_ul, q_dl, cap),
    )
