"""Round-robin benchmark policy.

One UE is scheduled per frame (congruent to the frame index modulo the UE
count) and the frame carries exactly one of: the UE's direct uplink, the
BS's direct downlink, a multiple-access feed where UE and BS transmit to
the relay simultaneously (the relay decodes the BS first, so the BS-side
rate is SIC-capped), or a relay broadcast draining both queues. The
selection criterion is an explicit approximation of the single-UE
reference scheme this benchmark stands in for: weighted scores with one
long-term dual per queue, tuned by the same drift search as the main
policies.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Optional

from .model import BufferPair, FrameOutcome, RELAY_BS, SnrView, capacity, \
    ue_bs_link, ue_relay_link

UL_DIRECT = "ul_direct"
DL_DIRECT = "dl_direct"
MAC_TO_RELAY = "mac_to_relay"
RELAY_BROADCAST = "relay_broadcast"


class BenchmarkSelection(NamedTuple):
    ue: int
    kind: str
    mac_rates: Optional[tuple] = None        # (UL feed, DL feed)
    broadcast_rates: Optional[tuple] = None  # (UL hop capacity, DL hop capacity)


def scheduled_ue(frame_index: int, num_ues: int) -> int:
    """Round-robin UE for a 1-based frame index (congruent mod num_ues)."""
    r = frame_index % num_ues
    return num_ues if r == 0 else r


def benchmark_decide(frame_index: int, snr: SnrView,
                     buf: Optional[BufferPair],
                     duals: tuple) -> BenchmarkSelection:
    """Score the four candidate modes for the scheduled UE and take the max.

    buf=None evaluates with the queues treated as never limiting (the
    threshold-search view). Ties resolve in the listed mode order.
    """
    mu_ul, mu_dl = duals
    m = scheduled_ue(frame_index, snr.num_ues)
    gu, gd = snr.gamma_ul, snr.gamma_dl
    c_ub = capacity(gu[ue_bs_link(m)])
    c_bu = capacity(gd[f"BU{m}"])
    feed_ul = capacity(gu[ue_relay_link(m)])
    feed_dl = capacity(gd["BR"] / (1.0 + gu[ue_relay_link(m)]))
    out_ul = capacity(gu[RELAY_BS])
    out_dl = capacity(gd[f"RU{m}"])
    q_ul = buf.q_ul if buf is not None else math.inf
    q_dl = buf.q_dl if buf is not None else math.inf

    scores = (
        c_ub,
        c_bu,
        -mu_ul * feed_ul - mu_dl * feed_dl,
        (1.0 + mu_ul) * min(q_ul, out_ul) + (1.0 + mu_dl) * min(q_dl, out_dl),
    )
    best = 0
    for i in (1, 2, 3):
        if scores[i] > scores[best]:
            best = i
    if best == 0:
        return BenchmarkSelection(m, UL_DIRECT)
    if best == 1:
        return BenchmarkSelection(m, DL_DIRECT)
    if best == 2:
        return BenchmarkSelection(m, MAC_TO_RELAY, mac_rates=(feed_ul, feed_dl))
    return BenchmarkSelection(m, RELAY_BROADCAST, broadcast_rates=(out_ul, out_dl))


def benchmark_apply_frame(sel: BenchmarkSelection, snr: SnrView,
                          buf: BufferPair) -> FrameOutcome:
    """Execute one frame: direct modes count full-frame capacity, the MAC
    feed fills both queues (counts nothing), the broadcast drains both and
    counts the moved bits."""
    q_ul, q_dl, cap = buf.q_ul, buf.q_dl, buf.cap
    ul_counted = ul_delivered = ul_arr = ul_dep = 0.0
    dl_counted = dl_delivered = dl_arr = dl_dep = 0.0
    m = sel.ue

    if sel.kind == UL_DIRECT:
        ul_counted = ul_delivered = capacity(snr.gamma_ul[ue_bs_link(m)])
    elif sel.kind == DL_DIRECT:
        dl_counted = dl_delivered = capacity(snr.gamma_dl[f"BU{m}"])
    elif sel.kind == MAC_TO_RELAY:
        fed_ul = min(sel.mac_rates[0], cap - q_ul)
        fed_dl = min(sel.mac_rates[1], cap - q_dl)
        q_ul += fed_ul
        q_dl += fed_dl
        ul_arr, dl_arr = fed_ul, fed_dl
    elif sel.kind == RELAY_BROADCAST:
        moved_ul = min(q_ul, sel.broadcast_rates[0])
        moved_dl = min(q_dl, sel.broadcast_rates[1])
        q_ul -= moved_ul
        q_dl -= moved_dl
        ul_counted = ul_delivered = ul_dep = moved_ul
        dl_counted = dl_delivered = dl_dep = moved_dl
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
