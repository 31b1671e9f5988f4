"""Orthogonal decoupled uplink/downlink policy.

Each frame is split into an uplink and a downlink half-slot. Per slot
exactly one link is active: a UE's direct link, the UE-to-relay feed, or
the relay's own hop. The decision rule is a weighted argmax whose weights
come from a long-term multiplier per direction; interior multipliers in
(-1, 0) trade the relay feed/drain against the direct links, anything
outside that interval makes the relay useless and collapses the rule to
the best direct link.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .model import (BufferPair, FrameOutcome, RELAY_BS, SnrView, capacity,
                    ue_bs_link, ue_relay_link)

UL_DIRECT = "direct"
UL_TO_RELAY = "to_relay"
UL_RELAY_OUT = "relay_out"
DL_DIRECT = "direct"
DL_FROM_RELAY = "from_relay"
DL_RELAY_IN = "relay_in"


class UlChoice(NamedTuple):
    kind: str
    ue: Optional[int] = None  # 1-based; None for the relay->BS hop


class DlChoice(NamedTuple):
    kind: str
    ue: Optional[int] = None  # 1-based; None for the BS->relay hop


@dataclass
class OdbaSelection:
    """Active link per slot; exactly one uplink and one downlink pick."""

    ul: UlChoice
    dl: DlChoice


@dataclass
class OdbaRateTable:
    """Buffer-unconstrained half-slot rate candidates, one per link.

    Every entry equals half the link capacity; queue limits are applied
    when a frame is executed, not here.
    """

    ul_direct: list      # [m-1]: UE m -> BS
    ul_to_relay: list    # [m-1]: UE m -> relay
    ul_relay_out: float  # relay -> BS
    dl_direct: list      # [m-1]: BS -> UE m
    dl_from_relay: list  # [m-1]: relay -> UE m
    dl_relay_in: float   # BS -> relay


def odba_rates(snr: SnrView) -> OdbaRateTable:
    gu, gd = snr.gamma_ul, snr.gamma_dl
    ues = range(1, snr.num_ues + 1)
    return OdbaRateTable(
        ul_direct=[0.5 * capacity(gu[ue_bs_link(m)]) for m in ues],
        ul_to_relay=[0.5 * capacity(gu[ue_relay_link(m)]) for m in ues],
        ul_relay_out=0.5 * capacity(gu[RELAY_BS]),
        dl_direct=[0.5 * capacity(gd[f"BU{m}"]) for m in ues],
        dl_from_relay=[0.5 * capacity(gd[f"RU{m}"]) for m in ues],
        dl_relay_in=0.5 * capacity(gd["BR"]),
    )


def interior(lam: float) -> bool:
    """True when the multiplier keeps the relay in play (-1 < lam < 0)."""
    return -1.0 < lam < 0.0


def _argmax_first(values) -> int:
    best, best_val = 0, values[0]
    for i in range(1, len(values)):
        if values[i] > best_val:
            best, best_val = i, values[i]
    return best


def odba_decide_ul(rates: OdbaRateTable, lam1: float,
                   q_ul: Optional[float] = None,
                   cap: Optional[float] = None) -> UlChoice:
    """Uplink-slot decision.

    Candidates score as {direct rate, -lam1 * feed rate, (1+lam1) * relay
    hop rate}; ties resolve direct < to_relay < relay_out, then lowest UE.
    When q_ul and a finite cap are given, candidates that would overflow
    the queue (feed) or read from an empty one (hop) are dropped before
    the argmax.
    """
    if not interior(lam1):
        return UlChoice(UL_DIRECT, 1 + _argmax_first(rates.ul_direct))
    guard = cap is not None and math.isfinite(cap) and q_ul is not None
    best = UlChoice(UL_DIRECT, 1)
    best_score = rates.ul_direct[0]
    for m in range(2, len(rates.ul_direct) + 1):
        r = rates.ul_direct[m - 1]
        if r > best_score:
            best, best_score = UlChoice(UL_DIRECT, m), r
    w = -lam1
    for m in range(1, len(rates.ul_to_relay) + 1):
        r = rates.ul_to_relay[m - 1]
        if guard and q_ul + r > cap:
            continue
        s = w * r
        if s > best_score:
            best, best_score = UlChoice(UL_TO_RELAY, m), s
    if not (guard and q_ul <= 0.0):
        s = (1.0 + lam1) * rates.ul_relay_out
        if s > best_score:
            best = UlChoice(UL_RELAY_OUT)
    return best


def odba_decide_dl(rates: OdbaRateTable, lam2: float,
                   q_dl: Optional[float] = None,
                   cap: Optional[float] = None) -> DlChoice:
    """Downlink-slot mirror of the uplink rule.

    Here the relay hop (BS -> relay) feeds the queue and the relay -> UE
    links drain it, so the guard roles swap accordingly.
    """
    if not interior(lam2):
        return DlChoice(DL_DIRECT, 1 + _argmax_first(rates.dl_direct))
    guard = cap is not None and math.isfinite(cap) and q_dl is not None
    best = DlChoice(DL_DIRECT, 1)
    best_score = rates.dl_direct[0]
    for m in range(2, len(rates.dl_direct) + 1):
        r = rates.dl_direct[m - 1]
        if r > best_score:
            best, best_score = DlChoice(DL_DIRECT, m), r
    if not (guard and q_dl <= 0.0):
        w = -lam2
        for m in range(1, len(rates.dl_from_relay) + 1):
            s = w * rates.dl_from_relay[m - 1]
            if s > best_score:
                best, best_score = DlChoice(DL_FROM_RELAY, m), s
    if not (guard and q_dl + rates.dl_relay_in > cap):
        s = (1.0 + lam2) * rates.dl_relay_in
        if s > best_score:
            best = DlChoice(DL_RELAY_IN)
    return best


def is_coupled(ul: UlChoice, dl: DlChoice) -> bool:
    """Mirror-image slot picks for the same hop count as a coupled frame."""
    if ul.kind == UL_DIRECT and dl.kind == DL_DIRECT:
        return ul.ue == dl.ue
    if ul.kind == UL_TO_RELAY and dl.kind == DL_FROM_RELAY:
        return ul.ue == dl.ue
    return ul.kind == UL_RELAY_OUT and dl.kind == DL_RELAY_IN


def odba_apply_frame(sel: OdbaSelection, rates: OdbaRateTable,
                     buf: BufferPair) -> FrameOutcome:
    """Execute one frame: move bits, clamp against the queues, tally rates.

    Relay drains move min(queue, candidate); feeds clamp at the remaining
    headroom (a no-op for unbounded buffers). Counted uplink rate covers
    direct + relay-out, counted downlink covers direct + relay-in; the
    delivered figures replace relay-in with what actually reached a UE.
    """
    q_ul, q_dl, cap = buf.q_ul, buf.q_dl, buf.cap
    ul_counted = ul_delivered = ul_arr = ul_dep = 0.0
    dl_counted = dl_delivered = dl_arr = dl_dep = 0.0

    if sel.ul.kind == UL_DIRECT:
        ul_counted = ul_delivered = rates.ul_direct[sel.ul.ue - 1]
    elif sel.ul.kind == UL_TO_RELAY:
        fed = min(rates.ul_to_relay[sel.ul.ue - 1], cap - q_ul)
        q_ul += fed
        ul_arr = fed
    else:
        moved = min(q_ul, rates.ul_relay_out)
        q_ul -= moved
        ul_counted = ul_delivered = ul_dep = moved

    if sel.dl.kind == DL_DIRECT:
        dl_counted = dl_delivered = rates.dl_direct[sel.dl.ue - 1]
    elif sel.dl.kind == DL_FROM_RELAY:
        moved = min(q_dl, rates.dl_from_relay[sel.dl.ue - 1])
        q_dl -= moved
        dl_delivered = dl_dep = moved
    else:
        fed = min(rates.dl_relay_in, cap - q_dl)
        q_dl += fed
        dl_counted = dl_arr = fed

    return FrameOutcome(
        selection=sel,
        ul_counted=ul_counted, dl_counted=dl_counted,
        ul_delivered=ul_delivered, dl_delivered=dl_delivered,
        ul_arrival=ul_arr, ul_departure=ul_dep,
        dl_arrival=dl_arr, dl_departure=dl_dep,
        buffer_after=BufferPair(q_ul, q_dl, cap),
        coupled=is_coupled(sel.ul, sel.dl),
    )
