import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from limsup_lab.approx import ApproxSpec, Schedule, Tabulated
from limsup_lab.dimension import ClosedFormCase
from limsup_lab.errors import BudgetExceeded, PreconditionUnmet
from limsup_lab.lab import (
    DichotomyScan,
    MembershipQuery,
    binomial_ci,
    box_count_dimension,
    count_rectangle_boxes,
    covering_sum,
    covering_transition,
    is_member_truncated,
    layer_rectangles,
    measure_scan,
)
from limsup_lab.rings import RingDescriptor, ambient_from_fraction, sample_uniform

REAL = RingDescriptor.real()


def _pair(a, b):
    return [[ambient_from_fraction(REAL, a), ambient_from_fraction(REAL, b)]]


def test_rational_point_hit_at_denominator():
    # a power law has psi(1) = 1 and hits everything at q = 1; use a flat 1/100
    X = _pair(F(1, 3), F(1, 3))
    flat = ApproxSpec(1, 2, Tabulated(((F(1, 100),) * 4,) * 2), schedule=Schedule(2, 4))
    hit, rec = is_member_truncated(MembershipQuery(REAL, X, flat, 10))
    assert hit and rec.q[0].value == 3


def test_power_law_hits_at_one():
    X = sample_uniform(REAL, (1, 2), 0)
    hit, rec = is_member_truncated(MembershipQuery(REAL, X, ApproxSpec.power_law(1, 2, (5, 5)), 10))
    assert hit and rec.q[0].value == 1


def test_dirichlet_always_hits():
    spec = ApproxSpec.power_law(1, 2, (F(1, 2), F(1, 2)))
    for s in range(20):
        X = sample_uniform(REAL, (1, 2), s)
        assert is_member_truncated(MembershipQuery(REAL, X, spec, 16))[0]


@settings(max_examples=25, deadline=None)
@given(
    st.integers(0, 10**6),
    st.fractions(min_value=F(1, 2), max_value=3, max_denominator=5),
    st.fractions(min_value=F(1, 2), max_value=3, max_denominator=5),
    st.integers(2, 40),
)
def test_membership_monotone(seed, t1, t2, H):
    X = sample_uniform(REAL, (1, 2), seed)
    spec = ApproxSpec.power_law(1, 2, (t1, t2))
    hit = is_member_truncated(MembershipQuery(REAL, X, spec, H))[0]
    if hit:
        assert is_member_truncated(MembershipQuery(REAL, X, spec, 2 * H))[0]
        looser = ApproxSpec.power_law(1, 2, (t1 / 2, t2))
        assert is_member_truncated(MembershipQuery(REAL, X, looser, H))[0]


def _scan(seed=1, N=100):
    specs = (
        ("div", ApproxSpec.power_law(1, 2, (F(1, 2), F(1, 2)))),
        ("conv", ApproxSpec.power_law(1, 2, (F(3, 5), F(3, 5)))),
        ("wide", ApproxSpec.power_law(1, 2, (F(1, 4), F(1, 4)))),
    )
    return DichotomyScan(specs, N, (8, 64, 512), seed, tail_starts=(8, 64, 512))


def test_scan_reproducible_and_monotone():
    a = measure_scan(_scan())
    assert a == measure_scan(_scan())
    for sid in ("div", "conv", "wide"):
        fr = [r.hits for r in a if r.spec_id == sid]
        assert fr == sorted(fr)
        tail = [r.hits for r in a if r.spec_id == f"{sid}/tail"]
        assert tail == sorted(tail, reverse=True)
    assert all(r.fraction == 1 for r in a if r.spec_id == "wide")


def test_scan_preconditions():
    with pytest.raises(PreconditionUnmet):
        _scan(N=50)


def test_binomial_ci():
    lo, hi = binomial_ci(50, 100)
    assert lo < 0.5 < hi and abs((hi - lo) / 2 - 1.96 * 0.05) < 1e-3
    assert binomial_ci(100, 100) == (1.0, 1.0)


def box_oracle(case, Q, k):
    """Cells of side 2^-k meeting the union of every open box around p/q, Q <= q <= 2Q."""
    N = 2**k
    e = [1 + t for t in case.tau]
    cells = set()
    for q in range(Q, 2 * Q + 1):
        h = [F(1, q ** int(x)) for x in e]
        for p1 in range(q + 1):
            for p2 in range(q + 1):
                ranges = []
                for c, hh in zip((F(p1, q), F(p2, q)), h):
                    lo, hi = c - hh, c + hh
                    # cell i meets (lo, hi) iff i/N < hi and (i+1)/N > lo
                    i0 = max(math.floor(lo * N), 0)
                    i1 = min(math.ceil(hi * N) - 1, N - 1)
                    ranges.append(range(i0, i1 + 1))
                cells.update((i, j) for i in ranges[0] for j in ranges[1])
    return len(cells)


@pytest.mark.parametrize("Q,ks", [(3, (3, 4, 5, 6)), (4, (5, 6, 7, 8)), (5, (8, 9, 10, 11))])
def test_box_counts_match_bruteforce(Q, ks):
    case = ClosedFormCase.two_dim((3, 2))
    est = box_count_dimension(case, (Q, 2 * Q), scales=ks)
    assert list(est.counts) == [box_oracle(case, Q, k) for k in ks]


def test_box_count_two_dim_layer():
    case = ClosedFormCase.two_dim((3, 2))
    est = box_count_dimension(case, (32, 64))
    assert abs(est.slope - 1) <= 0.15


def test_box_count_calibration_full_square():
    case = ClosedFormCase.two_dim((F(1, 2), F(1, 2)))
    est = box_count_dimension(case, (64, 128), scales=range(2, 7))
    assert abs(est.slope - 2) <= 0.05


def test_thickened_line_slope():
    ks = range(4, 12)
    counts = []
    for k in ks:
        lo = np.array([[0.0, 0.5 - 1e-9]])
        hi = np.array([[1.0, 0.5 + 1e-9]])
        counts.append(count_rectangle_boxes(lo, hi, k))
    slope = np.polyfit([k * math.log(2) for k in ks], np.log(counts), 1)[0]
    assert abs(slope - 1) < 1e-9


def test_box_budget():
    case = ClosedFormCase.two_dim((3, 2))
    with pytest.raises(BudgetExceeded):
        box_count_dimension(case, (64, 128), budget=10)


def test_layer_keeps_each_point_once():
    L = layer_rectangles(ClosedFormCase.two_dim((3, 2)), 6)
    pts = {(F(int(a), int(q)), F(int(b), int(q))) for (a, b), q in zip(L.p, L.q)}
    assert len(pts) == len(L.q)


def test_box_rejects_other_settings():
    with pytest.raises(PreconditionUnmet):
        box_count_dimension(ClosedFormCase.complex(1, (3,)), (8, 16))


def test_covering_sums_flat_and_growing():
    case = ClosedFormCase.two_dim((3, 2))
    above = covering_sum(case, F(11, 10), (1, 1 << 16))
    below = covering_sum(case, F(9, 10), (1, 1 << 16))
    tail = [r.partial_sum for r in above if r.Q >= 1024]
    # tail beyond Q is at most the integral of q^(3 - 4s) = q^-1.4 from Q
    assert tail[-1] - tail[0] <= 1024**-0.4 / 0.4
    grow = [r.partial_sum for r in below]
    assert all(b > a * 1.1 for a, b in zip(grow[-6:], grow[-5:]))


@pytest.mark.parametrize(
    "case",
    [ClosedFormCase.two_dim((3, 2)), ClosedFormCase.padic(2, (4,)), ClosedFormCase.complex(1, (3,)), ClosedFormCase.laurent(1, (2, 3))],
)
def test_supercritical_sums_flat(case):
    s = case.full_dimension + 1
    rows = covering_sum(case, s, (1, 1 << 14))
    assert rows[-1].partial_sum - rows[-4].partial_sum < 1e-3


def test_transition_brackets_closed_form():
    grid = [F(k, 20) for k in range(1, 61)]
    tr = covering_transition(ClosedFormCase.two_dim((3, 2)), grid)
    assert tr.brackets(1) and tr.upper - tr.lower == F(1, 20)
    tr = covering_transition(ClosedFormCase.padic(2, (4,)), grid)
    assert tr.brackets(F(7, 4))
