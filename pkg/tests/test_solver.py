import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from limsup_lab.approx import ApproxSpec, balance_rho_real
from limsup_lab.errors import ParseError, PreconditionUnmet
from limsup_lab.rings import (
    AmbientPoint,
    IntegerPoint,
    Kind,
    RingDescriptor,
    ambient_from_fraction,
    parse_point,
    sample_uniform,
)
from limsup_lab.solver import (
    LinearFormSystem,
    Status,
    Strategy,
    certify_minkowski,
    empirical_ubiquity_check,
    enumerate_resonant_neighborhood_hits,
    minkowski_conditions,
    parse_ring,
    read_matrix,
    solve,
    verify_record,
    write_matrix,
)

REAL = RingDescriptor.real()
CPLX = RingDescriptor.complex()


def _dist(x: F) -> F:
    return abs(x - round(x))


def real_oracle(A, gamma, theta):
    """Smallest sup-norm height of a nonzero q meeting every bound, or None."""
    m, n = len(A), len(A[0])
    vals = [[A[j][i].values()[0] for i in range(n)] for j in range(m)]
    best = None
    for q in itertools.product(*[range(-int(t), int(t) + 1) for t in theta]):
        if not any(q):
            continue
        errs = [_dist(sum(q[j] * vals[j][i] for j in range(m))) for i in range(n)]
        if all(e < g for e, g in zip(errs, gamma)):
            h = max(abs(x) for x in q)
            best = h if best is None else min(best, h)
    return best


def test_zero_matrix_gives_first_integer():
    A = [[ambient_from_fraction(REAL, 0)]]
    rec = solve(LinearFormSystem(REAL, A, (F(1, 5),), (5,)))
    assert rec.found
    assert rec.q == (IntegerPoint(Kind.REAL, 1),) and rec.p == (IntegerPoint(Kind.REAL, 0),)
    assert rec.errors == (0,)


def test_golden_ratio():
    g = ambient_from_fraction(REAL, (1 + 5**0.5) / 2)
    sys_ = LinearFormSystem(REAL, [[g]], (F(1, 5),), (5,))
    first = solve(sys_, Strategy.FIRST_FOUND)
    assert first.q[0].value == 3 and abs(float(first.errors[0]) - 0.146) < 1e-3
    best = solve(sys_, Strategy.MIN_ERROR)
    assert best.q[0].value == 5 and best.p[0].value == 8
    assert abs(float(best.errors[0]) - 0.090) < 1e-3
    assert solve(sys_, Strategy.MIN_HEIGHT) == first
    assert verify_record(sys_, best)


def test_complex_half_plus_half_i():
    x = ambient_from_fraction(CPLX, F(1, 2), F(1, 2))
    rec = solve(LinearFormSystem(CPLX, [[x]], (F(3, 5),), (1,)))
    assert rec.found
    assert rec.q[0].value == (1, 0) and rec.p[0].value == (0, 0)
    assert rec.errors == (F(1, 2),)


def test_certified_none_and_exhausted():
    x = ambient_from_fraction(REAL, F(1, 2))
    sys_ = LinearFormSystem(REAL, [[x]], (F(1, 1000),), (1,))
    assert solve(sys_).status is Status.CERTIFIED_NONE
    y = ambient_from_fraction(REAL, F(1, 7919))
    big = LinearFormSystem(REAL, [[y]], (F(1, 10**9),), (10**6,))
    assert solve(big, max_candidates=1000).status is Status.SEARCH_EXHAUSTED


@settings(max_examples=40, deadline=None)
@given(
    st.integers(0, 10**6),
    st.integers(1, 2),
    st.integers(1, 2),
    st.sampled_from([F(1, 2), F(1, 3), F(1, 5), F(1, 10)]),
    st.integers(1, 6),
)
def test_real_solver_matches_oracle(seed, m, n, gamma, theta):
    ring = RingDescriptor.real(16)
    A = sample_uniform(ring, (m, n), seed)
    sys_ = LinearFormSystem(ring, A, (gamma,) * n, (theta,) * m)
    rec = solve(sys_)
    want = real_oracle(A, (gamma,) * n, (theta,) * m)
    if want is None:
        assert rec.status is Status.CERTIFIED_NONE
    else:
        assert rec.found and rec.height == want
        assert verify_record(sys_, rec)


def complex_oracle(a, gamma, theta):
    """Smallest sup height of a nonzero Gaussian q with sup-distance of q*a below gamma."""
    re, im = a
    best = None
    for x in range(-theta, theta + 1):
        for y in range(-theta, theta + 1):
            if x == y == 0:
                continue
            pr, pi = x * re - y * im, x * im + y * re
            if max(_dist(pr), _dist(pi)) < gamma:
                h = max(abs(x), abs(y))
                best = h if best is None else min(best, h)
    return best


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([F(1, 3), F(1, 5), F(1, 8)]), st.integers(1, 5))
def test_complex_solver_matches_oracle(seed, gamma, theta):
    ring = RingDescriptor.complex(12)
    A = sample_uniform(ring, (1, 1), seed)
    rec = solve(LinearFormSystem(ring, A, (gamma,), (theta,)))
    want = complex_oracle(A[0][0].values(), gamma, theta)
    if want is None:
        assert rec.status is Status.CERTIFIED_NONE
    else:
        assert rec.found and rec.height == want


@pytest.mark.parametrize(
    "ring,eb,hb,kw",
    [
        (RingDescriptor.real(), (F(1, 4),) * 2, (4, 4), {}),
        (RingDescriptor.complex(), (F(1, 3),), (3,), {}),
        (RingDescriptor.quaternion(), (F(1, 5),), (3,), {}),
        (RingDescriptor.laurent(3), (F(1, 9),), (9,), {}),
        (RingDescriptor.padic(5), (F(1, 200),), (30,), {"companion_bounds": (30,)}),
    ],
)
def test_every_strategy_verifies(ring, eb, hb, kw):
    for s in range(5):
        A = sample_uniform(ring, (len(hb), len(eb)), s)
        sys_ = LinearFormSystem(ring, A, eb, hb, **kw)
        for strat in Strategy:
            rec = solve(sys_, strat)
            assert rec.found
            assert verify_record(sys_, rec)


def test_laurent_with_polynomial_part():
    L = RingDescriptor.laurent(2)
    x = parse_point("t2:1,1;[1,0,1,1]", L)
    sys_ = LinearFormSystem(L, [[x]], (F(1, 8),), (4,))
    rec = solve(sys_)
    assert rec.found and verify_record(sys_, rec)


def test_certify_examples():
    assert certify_minkowski(REAL, 2, 2, (F(1, 4),) * 2, (4, 4), trials=40, seed=2).summary == "40/40"
    assert certify_minkowski(CPLX, 1, 1, (1,), (1,), trials=40, seed=2).summary == "40/40"
    L = RingDescriptor.laurent(2)
    assert certify_minkowski(L, 1, 1, (2,), (2,), trials=40, seed=2).summary == "40/40"


def test_certify_rejects_small_product():
    with pytest.raises(PreconditionUnmet):
        certify_minkowski(REAL, 1, 1, (F(1, 3),), (2,), trials=5)
    prod_ok, vol, _ = minkowski_conditions(RingDescriptor.quaternion(), 1, 1, (F(1, 8),), (6,))
    assert prod_ok and vol


def test_resonant_hits_on_centre():
    q = IntegerPoint(Kind.REAL, 3)
    assert enumerate_resonant_neighborhood_hits(REAL, q, [F(1, 3)], F(1, 10), [0]) >= 1


def test_complex_resonant_count_bound():
    rng = random.Random(0)
    for _ in range(100):
        a, b = rng.randint(-6, 6), rng.randint(-6, 6)
        if a == b == 0:
            continue
        r = F(rng.randint(1, 20), 100)
        d = r * F(rng.randint(0, 99), 100)
        c = (F(rng.randint(0, 100), 100), F(rng.randint(0, 100), 100))
        cnt = enumerate_resonant_neighborhood_hits(CPLX, IntegerPoint(Kind.COMPLEX, (a, b)), [c], r, [d])
        assert cnt <= (8 * r * max(abs(a), abs(b)) + 2) ** 2


def test_padic_resonant_count_bound():
    P = RingDescriptor.padic(3)
    rng = random.Random(1)
    for _ in range(50):
        lam = rng.randint(0, 2)
        q0 = 3**lam * rng.choice([1, 2, 4, 5, 7])
        U = rng.randint(5, 60)
        r = F(1, 3 ** rng.randint(0, 3))
        c = rng.randint(0, 3**20 - 1)
        cnt = enumerate_resonant_neighborhood_hits(P, IntegerPoint(Kind.PADIC, q0), [c], r, [0], U)
        assert cnt <= 1 + U * r * F(3) ** (1 - lam)


def test_ubiquity_real():
    spec = ApproxSpec.power_law(1, 2, (F(3, 10), F(9, 10)), k_max=10)
    rho = balance_rho_real(spec)
    rep = empirical_ubiquity_check(REAL, spec, rho, 8, samples=400, ball_center=(F(1, 2), F(1, 2)), ball_radius=F(1, 4))
    assert rep.meets_constant and rep.u == 256
    full = empirical_ubiquity_check(REAL, spec, (F(1, 2), F(1, 2)), 6, samples=200)
    assert full.fraction == 1


def test_ubiquity_deterministic():
    spec = ApproxSpec.power_law(1, 2, (F(3, 10), F(9, 10)), k_max=10)
    rho = balance_rho_real(spec)
    a = empirical_ubiquity_check(REAL, spec, rho, 5, samples=200, seed=4)
    b = empirical_ubiquity_check(REAL, spec, rho, 5, samples=200, seed=4)
    assert a == b


@pytest.mark.parametrize("ring", [REAL, CPLX, RingDescriptor.quaternion(), RingDescriptor.padic(7, 8), RingDescriptor.laurent(4, 6)])
def test_matrix_roundtrip(ring):
    A = sample_uniform(ring, (2, 3), 9)
    ring2, B = read_matrix(write_matrix(ring, A))
    assert ring2 == ring and B == A


def test_ring_tokens():
    assert parse_ring("padic:5") == RingDescriptor.padic(5)
    assert parse_ring("laurent:4:8") == RingDescriptor.laurent(4, 8)
    with pytest.raises(ParseError):
        parse_ring("octonion")
    with pytest.raises(ParseError):
        read_matrix("real:32 1 2\n1/2\n")
