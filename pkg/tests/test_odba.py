import math

import numpy as np
import pytest

from relaysim.model import BufferPair, SnrView
from relaysim.odba import (DlChoice, OdbaRateTable, OdbaSelection, UlChoice,
                           is_coupled, odba_apply_frame, odba_decide_dl,
                           odba_decide_ul, odba_rates)


def view(gu, gd, num_ues=2):
    base_ul = {"U1R": 0.0, "U2R": 0.0, "U1B": 0.0, "U2B": 0.0, "RB": 0.0}
    base_dl = {"RU1": 0.0, "RU2": 0.0, "BU1": 0.0, "BU2": 0.0, "BR": 0.0}
    base_ul.update(gu)
    base_dl.update(gd)
    return SnrView(gamma_ul=base_ul, gamma_dl=base_dl, num_ues=num_ues)


def table(ul_direct=(0.0, 0.0), ul_to_relay=(0.0, 0.0), ul_relay_out=0.0,
          dl_direct=(0.0, 0.0), dl_from_relay=(0.0, 0.0), dl_relay_in=0.0):
    return OdbaRateTable(list(ul_direct), list(ul_to_relay), ul_relay_out,
                         list(dl_direct), list(dl_from_relay), dl_relay_in)


def test_rates_half_capacity():
    rates = odba_rates(view({"U1B": 3.0}, {"BR": 15.0}))
    assert rates.ul_direct[0] == 1.0
    assert rates.dl_relay_in == 2.0


def test_rates_zero_snr():
    rates = odba_rates(view({}, {}))
    assert rates.ul_direct == [0.0, 0.0]
    assert rates.ul_relay_out == 0.0
    assert rates.dl_from_relay == [0.0, 0.0]


def test_decide_ul_interior_example():
    rates = table(ul_direct=(1.0, 0.8), ul_to_relay=(1.5, 2.5),
                  ul_relay_out=1.8)
    # scores: 1.0, 0.8, 0.75, 1.25, 0.9 -> the second feed wins
    assert odba_decide_ul(rates, -0.5) == UlChoice("to_relay", 2)


def test_decide_ul_outside_interior_is_best_direct():
    rates = table(ul_direct=(1.0, 0.8), ul_to_relay=(5.0, 5.0),
                  ul_relay_out=9.0)
    assert odba_decide_ul(rates, 0.2) == UlChoice("direct", 1)


def test_decide_ul_tie_break():
    rates = table(ul_direct=(1.0, 1.0), ul_to_relay=(1.0, 1.0),
                  ul_relay_out=1.0)
    assert odba_decide_ul(rates, -0.5) == UlChoice("direct", 1)


def test_decide_dl_interior_example():
    rates = table(dl_direct=(0.6, 0.5), dl_from_relay=(2.0, 1.0),
                  dl_relay_in=1.4)
    # scores: 0.6, 0.5, 1.0, 0.5, 0.7
    assert odba_decide_dl(rates, -0.5) == DlChoice("from_relay", 1)


def test_decide_dl_outside_interior():
    rates = table(dl_direct=(0.6, 0.9))
    assert odba_decide_dl(rates, 1.0) == DlChoice("direct", 2)


def test_decide_dl_relay_in_dominates():
    rates = table(dl_direct=(0.6, 0.5), dl_from_relay=(1.0, 0.8),
                  dl_relay_in=10.0)
    assert odba_decide_dl(rates, -0.5) == DlChoice("relay_in")


@pytest.mark.parametrize("lam", [0.0, -1.0, 0.7, -1.5])
def test_boundary_multipliers_never_use_relay(lam):
    rng = np.random.default_rng(3)
    for _ in range(200):
        rates = table(ul_direct=rng.exponential(1, 2),
                      ul_to_relay=rng.exponential(5, 2),
                      ul_relay_out=rng.exponential(5),
                      dl_direct=rng.exponential(1, 2),
                      dl_from_relay=rng.exponential(5, 2),
                      dl_relay_in=rng.exponential(5))
        assert odba_decide_ul(rates, lam).kind == "direct"
        assert odba_decide_dl(rates, lam).kind == "direct"


def _brute_force_ul(rates, lam1):
    # Lagrangian value per candidate, priority order, first max wins.
    cands = [(r, UlChoice("direct", m + 1))
             for m, r in enumerate(rates.ul_direct)]
    cands += [(-lam1 * r, UlChoice("to_relay", m + 1))
              for m, r in enumerate(rates.ul_to_relay)]
    cands.append(((1.0 + lam1) * rates.ul_relay_out, UlChoice("relay_out")))
    best = max(range(len(cands)), key=lambda i: (cands[i][0], -i))
    return cands[best][1]


def _brute_force_dl(rates, lam2):
    cands = [(r, DlChoice("direct", m + 1))
             for m, r in enumerate(rates.dl_direct)]
    cands += [(-lam2 * r, DlChoice("from_relay", m + 1))
              for m, r in enumerate(rates.dl_from_relay)]
    cands.append(((1.0 + lam2) * rates.dl_relay_in, DlChoice("relay_in")))
    best = max(range(len(cands)), key=lambda i: (cands[i][0], -i))
    return cands[best][1]


def test_decision_matches_brute_force_argmax():
    rng = np.random.default_rng(1234)
    for _ in range(2000):
        m = int(rng.integers(1, 5))
        draw = lambda k: rng.exponential(2.0, k)
        rates = OdbaRateTable(list(draw(m)), list(draw(m)), float(draw(1)[0]),
                              list(draw(m)), list(draw(m)), float(draw(1)[0]))
        if rng.random() < 0.25:  # force ties
            rates.ul_direct = [round(r, 1) for r in rates.ul_direct]
            rates.ul_to_relay = [round(r, 1) for r in rates.ul_to_relay]
            rates.dl_direct = [round(r, 1) for r in rates.dl_direct]
        lam1 = float(rng.uniform(-1, 0))
        lam2 = float(rng.uniform(-1, 0))
        assert odba_decide_ul(rates, lam1) == _brute_force_ul(rates, lam1)
        assert odba_decide_dl(rates, lam2) == _brute_force_dl(rates, lam2)


def test_decision_scale_equivariance():
    rng = np.random.default_rng(8)
    for _ in range(100):
        rates = table(ul_direct=rng.exponential(1, 2),
                      ul_to_relay=rng.exponential(1, 2),
                      ul_relay_out=rng.exponential(1))
        c = float(rng.uniform(0.1, 50))
        scaled = table(ul_direct=[c * r for r in rates.ul_direct],
                       ul_to_relay=[c * r for r in rates.ul_to_relay],
                       ul_relay_out=c * rates.ul_relay_out)
        lam = float(rng.uniform(-0.99, -0.01))
        assert odba_decide_ul(rates, lam) == odba_decide_ul(scaled, lam)


def test_apply_relay_out_limited_by_queue():
    rates = table(ul_relay_out=1.0)
    sel = OdbaSelection(UlChoice("relay_out"), DlChoice("direct", 1))
    out = odba_apply_frame(sel, rates, BufferPair(0.3, 0.0))
    assert out.ul_counted == pytest.approx(0.3)
    assert out.buffer_after.q_ul == 0.0
    assert out.ul_departure == pytest.approx(0.3)


def test_apply_direct_leaves_buffers():
    rates = table(ul_direct=(0.9, 0.1), dl_direct=(0.8, 0.1))
    sel = OdbaSelection(UlChoice("direct", 1), DlChoice("direct", 1))
    out = odba_apply_frame(sel, rates, BufferPair(1.0, 2.0))
    assert out.buffer_after == BufferPair(1.0, 2.0)
    assert out.coupled is True
    assert out.ul_counted == 0.9 and out.dl_counted == 0.8


def test_apply_feed_accumulates():
    rates = table(ul_to_relay=(0.2, 0.7))
    sel = OdbaSelection(UlChoice("to_relay", 2), DlChoice("direct", 1))
    out = odba_apply_frame(sel, rates, BufferPair(1.0, 0.0))
    assert out.buffer_after.q_ul == pytest.approx(1.7)
    assert out.ul_counted == 0.0
    assert out.coupled is False


def test_apply_feed_clamps_at_cap():
    rates = table(ul_to_relay=(0.9, 0.0), dl_relay_in=0.9)
    sel = OdbaSelection(UlChoice("to_relay", 1), DlChoice("relay_in"))
    out = odba_apply_frame(sel, rates, BufferPair(0.8, 0.5, cap=1.0))
    assert out.buffer_after.q_ul == pytest.approx(1.0)
    assert out.buffer_after.q_dl == pytest.approx(1.0)
    assert out.dl_counted == pytest.approx(0.5)


@pytest.mark.parametrize("ul,dl,expect", [
    (UlChoice("direct", 1), DlChoice("direct", 1), True),
    (UlChoice("direct", 1), DlChoice("direct", 2), False),
    (UlChoice("to_relay", 2), DlChoice("from_relay", 2), True),
    (UlChoice("to_relay", 1), DlChoice("from_relay", 2), False),
    (UlChoice("relay_out"), DlChoice("relay_in"), True),
    (UlChoice("relay_out"), DlChoice("direct", 1), False),
])
def test_coupled_definition(ul, dl, expect):
    assert is_coupled(ul, dl) is expect


def test_buffers_never_negative_under_random_policy():
    rng = np.random.default_rng(99)
    buf = BufferPair(0.0, 0.0)
    kinds_ul = ["direct", "to_relay", "relay_out"]
    kinds_dl = ["direct", "from_relay", "relay_in"]
    for _ in range(2000):
        rates = table(ul_direct=rng.exponential(1, 2),
                      ul_to_relay=rng.exponential(1, 2),
                      ul_relay_out=rng.exponential(1),
                      dl_direct=rng.exponential(1, 2),
                      dl_from_relay=rng.exponential(1, 2),
                      dl_relay_in=rng.exponential(1))
        ku = kinds_ul[rng.integers(3)]
        kd = kinds_dl[rng.integers(3)]
        sel = OdbaSelection(
            UlChoice(ku, int(rng.integers(1, 3)) if ku != "relay_out" else None),
            DlChoice(kd, int(rng.integers(1, 3)) if kd != "relay_in" else None))
        buf = odba_apply_frame(sel, rates, buf).buffer_after
        assert buf.q_ul >= 0.0 and buf.q_dl >= 0.0


def test_guard_removes_overflowing_feed():
    rates = table(ul_direct=(0.1, 0.05), ul_to_relay=(3.0, 0.2),
                  ul_relay_out=0.4)
    # unguarded pick is the first feed
    assert odba_decide_ul(rates, -0.5).kind == "to_relay"
    # with 0.5 headroom the big feed is dropped; the relay hop wins instead
    choice = odba_decide_ul(rates, -0.5, q_ul=1.5, cap=2.0)
    assert choice == UlChoice("relay_out")


def test_guard_removes_empty_queue_drain():
    rates = table(ul_direct=(0.1, 0.05), ul_relay_out=5.0)
    assert odba_decide_ul(rates, -0.5).kind == "relay_out"
    choice = odba_decide_ul(rates, -0.5, q_ul=0.0, cap=4.0)
    assert choice == UlChoice("direct", 1)


def test_guard_falls_back_to_best_direct():
    rates = table(ul_direct=(0.1, 0.3), ul_to_relay=(9.0, 9.0),
                  ul_relay_out=9.0)
    choice = odba_decide_ul(rates, -0.5, q_ul=0.0, cap=1.0)
    assert choice == UlChoice("direct", 2)
    rates_dl = table(dl_direct=(0.2, 0.1), dl_from_relay=(9.0, 9.0),
                     dl_relay_in=9.0)
    choice = odba_decide_dl(rates_dl, -0.5, q_dl=0.0, cap=1.0)
    assert choice == DlChoice("direct", 1)
