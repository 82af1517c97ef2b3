"""Approximation functions, weights, series and the rho-balancing constructions.

Power-law values such as ``u**-tau`` with rational ``tau`` are irrational in
general, so they are carried as :class:`PowerProduct` objects: finite products
``prod b_i**e_i`` of positive rational bases with rational exponents.  Two such
products are compared by raising their quotient to a common denominator of
the exponents, which reduces every comparison to integer arithmetic.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import OutOfTableRange, PreconditionUnmet

__all__ = [
    "PowerProduct",
    "WeightVector",
    "PowerLaw",
    "Tabulated",
    "Schedule",
    "ApproxSpec",
    "FullMeasureShortcut",
    "BalancedRho",
    "RhoEntry",
    "quasi_norm",
    "check_c_regular",
    "series_partial_sums",
    "condensation_constants",
    "balance_rho_real",
    "balance_rho_padic",
    "inverse_height",
]


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True, eq=False)
class PowerProduct:
    """``coef * prod(base**exp)`` with a rational coefficient, positive
    rational bases and rational exponents.  ``coef == 0`` encodes zero."""

    factors: tuple[tuple[Fraction, Fraction], ...] = ()
    coef: Fraction = Fraction(1)

    def __post_init__(self):
        merged: dict[Fraction, Fraction] = {}
        coef = _frac(self.coef)
        for b, e in self.factors:
            b, e = _frac(b), _frac(e)
            if b <= 0:
                raise ValueError("bases must be positive")
            if b == 1 or e == 0:
                continue
            if e.denominator == 1:
                coef *= b ** int(e)
                continue
            merged[b] = merged.get(b, Fraction(0)) + e
        facs = tuple(sorted((b, e) for b, e in merged.items() if e != 0))
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "factors", () if coef == 0 else facs)

    @classmethod
    def of(cls, value) -> "PowerProduct":
        if isinstance(value, PowerProduct):
            return value
        return cls((), _frac(value))

    @classmethod
    def power(cls, base, exp) -> "PowerProduct":
        return cls(((_frac(base), _frac(exp)),))

    def is_zero(self) -> bool:
        return self.coef == 0

    def __mul__(self, other):
        o = PowerProduct.of(other)
        return PowerProduct(self.factors + o.factors, self.coef * o.coef)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = PowerProduct.of(other)
        if o.is_zero():
            raise ZeroDivisionError("division by zero power product")
        inv = tuple((b, -e) for b, e in o.factors)
        return PowerProduct(self.factors + inv, self.coef / o.coef)

    def __rtruediv__(self, other):
        return PowerProduct.of(other) / self

    def __pow__(self, exp):
        exp = _frac(exp)
        if self.is_zero():
            if exp <= 0:
                raise ZeroDivisionError("0 to a nonpositive power")
            return self
        if self.coef < 0:
            if exp.denominator != 1:
                raise ValueError("fractional power of a negative value")
            sign = -1 if int(exp) % 2 else 1
            base = ((-self.coef, exp),)
            return PowerProduct(base + tuple((b, e * exp) for b, e in self.factors), sign)
        base = ((self.coef, exp),) if self.coef != 1 else ()
        return PowerProduct(base + tuple((b, e * exp) for b, e in self.factors))

    def sign(self) -> int:
        return (self.coef > 0) - (self.coef < 0)

    def compare(self, other) -> int:
        """Exact three-way comparison: -1, 0 or 1."""
        o = PowerProduct.of(other)
        s1, s2 = self.sign(), o.sign()
        if s1 != s2 or s1 == 0:
            return (s1 > s2) - (s1 < s2)
        # both nonzero, same sign: compare |self|/|other| with 1
        q = PowerProduct(self.factors, abs(self.coef)) / PowerProduct(o.factors, abs(o.coef))
        c = q._cmp_one()
        return c if s1 > 0 else -c

    def _cmp_one(self) -> int:
        d = 1
        for _, e in self.factors:
            d = d * e.denominator // math.gcd(d, e.denominator)
        num, den = self.coef.numerator ** d, self.coef.denominator ** d
        for b, e in self.factors:
            k = int(e * d)
            if k >= 0:
                num *= b.numerator**k
                den *= b.denominator**k
            else:
                num *= b.denominator ** (-k)
                den *= b.numerator ** (-k)
        return (num > den) - (num < den)

    def __eq__(self, other):
        if isinstance(other, (PowerProduct, int, Fraction)):
            return self.compare(other) == 0
        return NotImplemented

    __hash__ = None  # equal values can have different factorisations

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    def log(self) -> float:
        if self.coef <= 0:
            raise ValueError("log of a nonpositive value")
        return math.log(self.coef) + sum(float(e) * math.log(b) for b, e in self.factors)

    def __float__(self):
        if self.is_zero():
            return 0.0
        return math.copysign(math.exp(PowerProduct(self.factors, abs(self.coef)).log()), self.sign())

    def exact(self) -> Fraction | None:
        """The value as a Fraction when rational and recognisable."""
        return self.coef if not self.factors else None

    @property
    def base(self) -> Fraction:
        """Single-factor view ``base**exponent`` (used by quasi_norm)."""
        if not self.factors:
            return self.coef
        if len(self.factors) == 1 and self.coef == 1:
            return self.factors[0][0]
        raise ValueError("not a single power")

    @property
    def exponent(self) -> Fraction:
        if not self.factors:
            return Fraction(1)
        self.base  # validates the single-power shape
        return self.factors[0][1]

    def __repr__(self):
        parts = [] if self.coef == 1 and self.factors else [str(self.coef)]
        parts += [f"{b}^({e})" for b, e in self.factors]
        return "PP(" + " * ".join(parts) + ")"


# ---------------------------------------------------------------------------
# specs


@dataclass(frozen=True)
class WeightVector:
    v: tuple[Fraction, ...]

    def __post_init__(self):
        v = tuple(_frac(x) for x in self.v)
        if not v or any(x <= 0 for x in v):
            raise PreconditionUnmet("weights must be positive")
        object.__setattr__(self, "v", v)

    @classmethod
    def uniform(cls, k: int) -> "WeightVector":
        return cls((Fraction(1),) * k)

    def check_padic(self, m: int, n: int) -> None:
        """The p-adic convention: first m weights sum to m, last n equal 1."""
        if len(self.v) != m + n:
            raise PreconditionUnmet(f"p-adic weight needs m+n={m + n} entries")
        if sum(self.v[:m]) != m or any(x != 1 for x in self.v[m:]):
            raise PreconditionUnmet("p-adic weight needs sum(v[:m]) = m and v[m:] = 1")


@dataclass(frozen=True)
class PowerLaw:
    tau: tuple[Fraction, ...]

    def __post_init__(self):
        tau = tuple(_frac(x) for x in self.tau)
        if any(x <= 0 for x in tau):
            raise PreconditionUnmet("power-law exponents must be positive")
        object.__setattr__(self, "tau", tau)


@dataclass(frozen=True)
class Tabulated:
    """psi_i sampled on the schedule: ``values[i][k] = psi_i(u_k)``."""

    values: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        vals = tuple(tuple(_frac(x) for x in row) for row in self.values)
        for row in vals:
            if any(b > a for a, b in zip(row, row[1:])):
                raise PreconditionUnmet("tabulated psi must be nonincreasing")
            if any(x <= 0 for x in row):
                raise PreconditionUnmet("tabulated psi must be positive")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class Schedule:
    M: int = 2
    k_max: int = 12

    def __post_init__(self):
        if self.M < 2:
            raise PreconditionUnmet("schedule base M must be >= 2")

    def points(self) -> list[int]:
        return [self.M**k for k in range(1, self.k_max + 1)]


@dataclass(frozen=True)
class ApproxSpec:
    m: int
    n: int
    family: PowerLaw | Tabulated
    weight: WeightVector | None = None
    schedule: Schedule = field(default_factory=Schedule)

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise PreconditionUnmet("m and n must be positive")
        if isinstance(self.family, PowerLaw) and len(self.family.tau) != self.n:
            raise PreconditionUnmet("need one exponent per coordinate")
        if isinstance(self.family, Tabulated):
            if len(self.family.values) != self.n:
                raise PreconditionUnmet("need one table per coordinate")
            if any(len(r) != self.schedule.k_max for r in self.family.values):
                raise PreconditionUnmet("tables must cover the schedule")

    @classmethod
    def power_law(cls, m, n, tau, M=2, k_max=12, weight=None) -> "ApproxSpec":
        return cls(m, n, PowerLaw(tuple(tau)), weight, Schedule(M, k_max))

    @property
    def is_power_law(self) -> bool:
        return isinstance(self.family, PowerLaw)

    def psi(self, i: int, u) -> PowerProduct:
        """psi_i(u) exactly.  Tabulated functions are right-constant between
        schedule points and equal to the first sample below ``u_1``."""
        if self.is_power_law:
            return PowerProduct.power(u, -self.family.tau[i])
        pts = self.schedule.points()
        k = max(bisect.bisect_right(pts, u) - 1, 0)
        return PowerProduct.of(self.family.values[i][k])

    def psi_float(self, i: int, u: float) -> float:
        if self.is_power_law:
            return float(u) ** -float(self.family.tau[i])
        return float(self.psi(i, u))

    def threshold_fn(self) -> Callable[[int], tuple[PowerProduct, ...]]:
        return lambda u: tuple(self.psi(i, u) for i in range(self.n))


# ---------------------------------------------------------------------------
# quasi-norm and regularity


def quasi_norm(a: Sequence[int], v: WeightVector | Sequence) -> PowerProduct:
    """``max_i |a_i|**(1/v_i)`` as an exact single power ``base**exponent``."""
    w = v.v if isinstance(v, WeightVector) else tuple(_frac(x) for x in v)
    if len(a) != len(w):
        raise PreconditionUnmet("length mismatch between vector and weight")
    best = PowerProduct.of(0)
    for ai, vi in zip(a, w):
        if ai == 0:
            continue
        cand = PowerProduct.power(abs(int(ai)), 1 / vi)
        if cand > best:
            best = cand
    return best


def check_c_regular(table: Sequence, c, burn_in: int = 0) -> tuple[bool, int | None]:
    """Is ``f(u_{k+1}) <= c f(u_k)`` for every ``k >= burn_in``?

    Returns ``(ok, first failing k)``; entries may be Fractions, floats or
    PowerProducts.
    """
    c = _frac(c)
    if not table:
        raise PreconditionUnmet("empty table")
    for k in range(burn_in, len(table) - 1):
        a, b = table[k], table[k + 1]
        if isinstance(a, PowerProduct) or isinstance(b, PowerProduct):
            bad = PowerProduct.of(b) > PowerProduct.of(a) * c
        elif isinstance(a, float) or isinstance(b, float):
            bad = float(b) > float(c) * float(a)
        else:
            bad = _frac(b) > c * _frac(a)
        if bad:
            return False, k
    return True, None


# ---------------------------------------------------------------------------
# series


def _term(spec: ApproxSpec, r: int):
    """``r**(m-1) prod psi_i(r)`` as a PowerProduct."""
    val = PowerProduct.of(r ** (spec.m - 1))
    for i in range(spec.n):
        val = val * spec.psi(i, r)
    return val


def series_partial_sums(spec: ApproxSpec, R: int):
    """Direct and Cauchy-condensed partial sums of the volume series.

    direct    = sum_{r<=R} r^(m-1) prod psi_i(r)
    condensed = sum_{M^k<=R, k>=0} M^(km) prod psi_i(M^k)

    Power laws with an integral total exponent give exact Fractions; other
    power laws give floats (the terms are irrational).
    """
    M = spec.schedule.M
    if R < 1:
        raise PreconditionUnmet("R must be positive")
    ks = []
    k = 0
    while M**k <= R:
        ks.append(k)
        k += 1
    if spec.is_power_law:
        e = Fraction(spec.m - 1) - sum(spec.family.tau)
        if e.denominator == 1:
            direct = sum((Fraction(r) ** int(e) for r in range(1, R + 1)), Fraction(0))
            condensed = sum((Fraction(M) ** (k * spec.m) * Fraction(M**k) ** int(e - spec.m + 1) for k in ks), Fraction(0))
            return direct, condensed
        fe = float(e)
        direct = math.fsum(float(r) ** fe for r in range(1, R + 1))
        condensed = math.fsum(float(M) ** (k * spec.m) * float(M**k) ** (fe - spec.m + 1) for k in ks)
        return direct, condensed
    direct = math.fsum(float(_term(spec, r)) for r in range(1, R + 1))
    condensed = math.fsum(float(M) ** (k * spec.m) * float(_term(spec, M**k)) / float(M**k) ** (spec.m - 1) for k in ks)
    return direct, condensed


def condensation_constants(M: int, m: int) -> tuple[Fraction, Fraction]:
    """Bounds ``c1 <= direct/condensed <= c2`` valid for nonincreasing prod psi.

    Block ``[M^k, M^(k+1))`` has at most ``(M-1)M^k`` terms, each between
    ``M^(k(m-1)) prod psi(M^(k+1))`` and ``M^((k+1)(m-1)) prod psi(M^k)``.
    """
    upper = Fraction(M - 1) * Fraction(M) ** (m - 1)
    lower = min(Fraction(1), Fraction(M - 1, M**m))
    return lower, upper


# ---------------------------------------------------------------------------
# rho balancing


@dataclass(frozen=True)
class FullMeasureShortcut:
    """Typed outcome: the approximation functions are large enough that the
    limsup set is the whole domain (Minkowski/Dirichlet regime)."""

    reason: str
    u: int | None = None


@dataclass(frozen=True)
class RhoEntry:
    u: int
    order: tuple[int, ...]
    j: int
    phi: tuple[PowerProduct, ...]
    rho: tuple[PowerProduct, ...]
    psi: tuple[PowerProduct, ...]


@dataclass(frozen=True)
class BalancedRho:
    """Per-schedule-point balanced functions with their exactness data."""

    entries: tuple[RhoEntry, ...]
    target: Callable[[int], PowerProduct] = field(compare=False, repr=False)
    burn_in: int = 0

    def product_identity_holds(self) -> bool:
        return all(_prod(e.rho) == self.target(e.u) for e in self.entries)

    def dominates(self) -> bool:
        """rho_i(u) >= psi_i(u)/u at every entry."""
        return all(r >= s / e.u for e in self.entries for r, s in zip(e.rho, e.psi))

    def table(self, i: int) -> list[PowerProduct]:
        return [e.rho[i] for e in self.entries]


def _prod(xs) -> PowerProduct:
    out = PowerProduct.of(1)
    for x in xs:
        out = out * x
    return out


def _schedule_points(spec: ApproxSpec, points: Sequence[int] | None) -> list[int]:
    return list(points) if points is not None else spec.schedule.points()


def balance_rho_real(spec: ApproxSpec, points: Sequence[int] | None = None) -> BalancedRho | FullMeasureShortcut:
    """Two-coordinate balancing for simultaneous approximation in the plane.

    With ``l1`` the index of the larger psi at q: if ``psi_l1 > q^(-1/2)`` set
    ``phi_l1 = psi_l1`` and ``phi_l2 = q^-1/psi_l1``, otherwise both
    ``phi = q^(-1/2)``.  Then ``phi_1 phi_2 = q^-1`` and ``rho = phi/q``.
    """
    if spec.n != 2 or spec.m != 1:
        raise PreconditionUnmet("balance_rho_real needs n=2, m=1")
    pts = _schedule_points(spec, points)
    entries = []
    burn = 0
    for idx, q in enumerate(pts):
        psi = (spec.psi(0, q), spec.psi(1, q))
        target = PowerProduct.of(Fraction(1, q))
        if psi[0] * psi[1] >= target:
            if idx == len(pts) - 1 or (spec.is_power_law):
                return FullMeasureShortcut("psi_1 psi_2 >= 1/q: the set is everything", q)
            burn = idx + 1
            entries = []
            continue
        l1 = 0 if psi[0] >= psi[1] else 1
        l2 = 1 - l1
        half = PowerProduct.power(q, Fraction(-1, 2))
        phi = [None, None]
        if psi[l1] > half:
            phi[l1] = psi[l1]
            phi[l2] = target / psi[l1]
            j = 1
        else:
            phi[l1] = phi[l2] = half
            j = 0
        rho = tuple(f / q for f in phi)
        entries.append(RhoEntry(q, (l1, l2), j, tuple(phi), rho, psi))
    return BalancedRho(tuple(entries), lambda u: PowerProduct.of(Fraction(1, u**3)), burn)


def _nu(p: int, m: int, n: int, u: int, psi_sorted, j: int) -> PowerProduct:
    base = PowerProduct.of(Fraction(1, p**n * u**m)) / _prod(psi_sorted[:j])
    return base ** Fraction(1, n - j)


def balance_rho_padic(spec: ApproxSpec, p: int, points: Sequence[int] | None = None) -> BalancedRho | FullMeasureShortcut:
    """Balancing for the p-adic linear-form setting.

    For each scheduled u, order psi decreasingly as ``psi_l1 >= ... >= psi_ln``
    and find the unique ``0 <= j < n`` with ``psi_lj >= nu(u,j) > psi_l(j+1)``
    where ``nu(u,j) = (p^-n u^-m / prod_{i<=j} psi_li)^(1/(n-j))``.  Then
    ``phi = psi`` on the first j sorted coordinates and ``nu`` elsewhere, so
    ``prod rho = p^-n u^-(m+n)`` with ``rho = phi/u``.
    """
    m, n = spec.m, spec.n
    pts = _schedule_points(spec, points)
    entries = []
    burn = 0
    for idx, u in enumerate(pts):
        psi = tuple(spec.psi(i, u) for i in range(n))
        order = _exact_desc_order(psi)
        ps = [psi[i] for i in order]
        if _prod(ps) >= PowerProduct.of(Fraction(1, p**n * u**m)):
            if idx == len(pts) - 1 or spec.is_power_law:
                return FullMeasureShortcut("prod psi >= p^-n u^-m: the set is everything", u)
            burn = idx + 1
            entries = []
            continue
        hits = []
        for j in range(n):
            nu = _nu(p, m, n, u, ps, j)
            upper_ok = j == 0 or ps[j - 1] >= nu
            lower_ok = nu > ps[j]
            if upper_ok and lower_ok:
                hits.append((j, nu))
        if len(hits) != 1:
            raise AssertionError(f"sandwich index not unique at u={u}: {hits}")
        j, nu = hits[0]
        phi = [None] * n
        for pos, i in enumerate(order):
            phi[i] = ps[pos] if pos < j else nu
        rho = tuple(f / u for f in phi)
        entries.append(RhoEntry(u, order, j, tuple(phi), rho, psi))
    return BalancedRho(tuple(entries), lambda u: PowerProduct.of(Fraction(1, p**n * u ** (m + n))), burn)


def _exact_desc_order(vals: Sequence[PowerProduct]) -> tuple[int, ...]:
    order: list[int] = []
    for i, v in enumerate(vals):
        pos = len(order)
        while pos > 0 and vals[order[pos - 1]] < v:
            pos -= 1
        order.insert(pos, i)
    return tuple(order)


def inverse_height(table: Sequence, u) -> int:
    """Smallest ``v >= 1`` with ``Phi(v) >= u`` where ``table[v-1] = Phi(v)``."""
    if not table:
        raise OutOfTableRange("empty table")
    key = PowerProduct.of(u) if isinstance(u, PowerProduct) else u
    lo, hi = 0, len(table)
    if not (table[-1] >= key):
        raise OutOfTableRange(f"table maximum {table[-1]} is below {u}")
    while lo < hi:
        mid = (lo + hi) // 2
        if table[mid] >= key:
            hi = mid
        else:
            lo = mid + 1
    return lo + 1
