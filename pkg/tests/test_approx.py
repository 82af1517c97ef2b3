import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from limsup_lab.approx import (
    ApproxSpec,
    FullMeasureShortcut,
    PowerProduct,
    WeightVector,
    balance_rho_padic,
    balance_rho_real,
    check_c_regular,
    condensation_constants,
    inverse_height,
    quasi_norm,
    series_partial_sums,
)
from limsup_lab.errors import OutOfTableRange, PreconditionUnmet

PP = PowerProduct

fracs = st.fractions(min_value=F(1, 12), max_value=F(50), max_denominator=12)


@settings(max_examples=100, deadline=None)
@given(fracs, fracs, st.fractions(min_value=-3, max_value=3, max_denominator=6))
def test_power_compare_agrees_with_floats(a, b, e):
    x, y = PP.power(a, e), PP.power(b, e)
    fx, fy = float(a) ** float(e), float(b) ** float(e)
    if abs(fx - fy) > 1e-9 * max(fx, fy):
        assert (x < y) == (fx < fy)
    if a == b:
        assert x == y


@settings(max_examples=60, deadline=None)
@given(fracs, st.fractions(min_value=-2, max_value=2, max_denominator=5), st.fractions(min_value=-2, max_value=2, max_denominator=5))
def test_power_laws_of_exponents(b, e1, e2):
    assert PP.power(b, e1) * PP.power(b, e2) == PP.power(b, e1 + e2)
    assert PP.power(b, e1) ** 3 == PP.power(b, 3 * e1)


def test_quasi_norm_examples():
    assert quasi_norm((2, 3), WeightVector((1, 1))) == 3
    q = quasi_norm((4, 2), (F(4, 3), F(2, 3)))
    # 4^(3/4) == 2^(3/2) since 4^3 == 2^6
    assert q == PP.power(4, F(3, 4)) == PP.power(2, F(3, 2))
    assert quasi_norm((0, 5), (F(1, 2), F(3, 2))) == PP.power(5, F(2, 3))


def test_c_regular():
    assert check_c_regular([F(1, 2**k) for k in range(1, 12)], F(1, 2)) == (True, None)
    table = [1 / math.log(2**k) for k in range(1, 12)]
    ok, k = check_c_regular(table, F(1, 2))
    # f(u_2) = f(u_1)/2 exactly; the first failure is log 4 / log 8 = 2/3
    assert not ok and k == 1


def test_psi_over_u_is_regular():
    spec = ApproxSpec.power_law(1, 2, (F(3, 10), F(9, 10)), M=3, k_max=8)
    for i in range(2):
        table = [spec.psi(i, u) / u for u in spec.schedule.points()]
        assert check_c_regular(table, F(1, 3)) == (True, None)


def test_series_harmonic():
    spec = ApproxSpec.power_law(1, 2, (F(1, 2), F(1, 2)))
    direct, _ = series_partial_sums(spec, 20)
    assert direct == sum(F(1, r) for r in range(1, 21))


def test_series_convergent_tail():
    spec = ApproxSpec.power_law(1, 2, (F(3, 5), F(3, 5)))
    d1, _ = series_partial_sums(spec, 10_000)
    d2, _ = series_partial_sums(spec, 40_000)
    # tail beyond R bounded by the integral of r^-1.2 from R
    assert 0 < d2 - d1 <= 10_000 ** -0.2 / 0.2


def test_condensation_ratio_bounded():
    spec = ApproxSpec.power_law(1, 2, (F(1, 2), F(3, 5)))
    lo, hi = condensation_constants(2, 1)
    for R in (2, 10, 100, 1000, 5000):
        d, c = series_partial_sums(spec, R)
        assert float(lo) <= d / c <= float(hi)


def test_balance_real_phi_star_branch():
    spec = ApproxSpec.power_law(1, 2, (F(3, 10), F(9, 10)), k_max=10)
    rho = balance_rho_real(spec, points=[2**10])
    e = rho.entries[0]
    assert e.phi[0] == F(1, 8) and e.phi[1] == F(1, 2**7)
    assert e.phi[0] * e.phi[1] == F(1, 2**10)
    assert e.phi[1] >= e.psi[1] == F(1, 2**9)


def test_balance_real_threshold_branch():
    spec = ApproxSpec.power_law(1, 2, (F(3, 5), F(3, 5)), k_max=10)
    e = balance_rho_real(spec, points=[2**10]).entries[0]
    assert e.phi == (F(1, 32), F(1, 32))


def test_balance_real_full_measure():
    spec = ApproxSpec.power_law(1, 2, (F(2, 5), F(2, 5)))
    assert isinstance(balance_rho_real(spec), FullMeasureShortcut)


def test_balance_padic_worked_example():
    spec = ApproxSpec.power_law(1, 2, (2, F(1, 10)), M=3, k_max=4)
    rho = balance_rho_padic(spec, 3, points=[81])
    e = rho.entries[0]
    assert e.order == (1, 0) and e.j == 1
    assert e.phi[1] == PP.power(81, F(-1, 10))
    assert e.phi[0] == PP.of(F(1, 9)) * PP.power(81, F(-9, 10))
    assert abs(float(e.phi[1]) - 0.6444) < 1e-4
    assert abs(float(e.phi[0]) - 0.002123) < 1e-5
    assert e.psi[1] >= e.phi[0] > e.psi[0]
    prod = e.rho[0] * e.rho[1]
    assert prod == F(1, 9 * 81**3)


def test_balance_padic_j0_branch():
    spec = ApproxSpec.power_law(1, 2, (5, 5), M=3, k_max=5)
    rho = balance_rho_padic(spec, 3)
    for e in rho.entries:
        assert e.j == 0
        assert e.phi[0] == e.phi[1] == PP.of(F(1, 9 * e.u)) ** F(1, 2)
    assert rho.product_identity_holds() and rho.dominates()


def test_balance_padic_full_measure():
    spec = ApproxSpec.power_law(1, 2, (F(1, 10), F(1, 10)), M=3)
    assert isinstance(balance_rho_padic(spec, 3), FullMeasureShortcut)


def test_inverse_height():
    assert inverse_height(list(range(1, 20)), 7) == 7
    assert inverse_height([2**v for v in range(1, 10)], 10) == 4
    assert inverse_height([5, 6, 7], 3) == 1
    with pytest.raises(OutOfTableRange):
        inverse_height([1, 2], 5)


def test_spec_validation():
    with pytest.raises(PreconditionUnmet):
        ApproxSpec.power_law(1, 2, (1,))
    with pytest.raises(PreconditionUnmet):
        WeightVector((1, 0))
    with pytest.raises(PreconditionUnmet):
        WeightVector((F(1, 2), F(3, 2), 1)).check_padic(2, 2)
