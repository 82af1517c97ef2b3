"""Exact arithmetic for the five number systems.

Real, complex and quaternion ambient values are dyadic fixed point: every
component is an integer numerator over ``2**L``.  p-adic values are digit
vectors of length ``L`` and Laurent values are coefficient vectors of
``X^-1 .. X^-L`` over the finite field with ``t`` elements, optionally with a
polynomial part.  Integers of each ring are stored exactly; Hurwitz integers use
doubled coordinates so that all arithmetic stays integral.

Tie-breaking in every nearest-integer routine is lexicographic on the
(doubled) integer coordinates.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ParseError, PrecisionExhausted, PreconditionUnmet, UnattainableHeight

__all__ = [
    "Kind",
    "RingDescriptor",
    "FiniteField",
    "IntegerPoint",
    "AmbientPoint",
    "Surd",
    "reduce",
    "nearest_hurwitz",
    "hurwitz_units",
    "quat_mul",
    "quat_conj",
    "padic_abs",
    "padic_valuation",
    "abs_value",
    "dist_to_integers",
    "add",
    "sample_uniform",
    "count_shell",
    "enumerate_shell",
    "ambient_from_fraction",
    "format_point",
    "parse_point",
    "format_integer",
    "parse_integer",
    "is_prime",
    "prime_power",
]


# ---------------------------------------------------------------------------
# small number theory helpers


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_power(t: int) -> tuple[int, int] | None:
    """Return ``(p, r)`` with ``t == p**r`` or None."""
    if t < 2:
        return None
    for p in range(2, t + 1):
        if t % p == 0:
            if not is_prime(p):
                return None
            r, s = 0, t
            while s % p == 0:
                s //= p
                r += 1
            return (p, r) if s == 1 else None
    return None


class Kind(str, Enum):
    REAL = "real"
    PADIC = "padic"
    COMPLEX = "complex"
    QUATERNION = "quaternion"
    LAURENT = "laurent"


_COMPONENTS = {Kind.REAL: 1, Kind.COMPLEX: 2, Kind.QUATERNION: 4}


@dataclass(frozen=True)
class RingDescriptor:
    """Which arithmetic substrate, plus its working precision."""

    kind: Kind
    precision: int = 32
    p: int | None = None
    t: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.precision < 1:
            raise PreconditionUnmet("precision must be >= 1")
        if self.kind is Kind.PADIC:
            if self.p is None or not is_prime(self.p):
                raise PreconditionUnmet(f"p-adic ring needs a prime p, got {self.p}")
        elif self.kind is Kind.LAURENT:
            if self.t is None or prime_power(self.t) is None:
                raise PreconditionUnmet(f"Laurent ring needs a prime power t, got {self.t}")
            if self.t >= 2**31:
                raise PreconditionUnmet("field size must fit a machine word")

    @classmethod
    def real(cls, precision: int = 32) -> "RingDescriptor":
        return cls(Kind.REAL, precision)

    @classmethod
    def complex(cls, precision: int = 32) -> "RingDescriptor":
        return cls(Kind.COMPLEX, precision)

    @classmethod
    def quaternion(cls, precision: int = 32) -> "RingDescriptor":
        return cls(Kind.QUATERNION, precision)

    @classmethod
    def padic(cls, p: int, precision: int = 20) -> "RingDescriptor":
        return cls(Kind.PADIC, precision, p=p)

    @classmethod
    def laurent(cls, t: int, precision: int = 16) -> "RingDescriptor":
        return cls(Kind.LAURENT, precision, t=t)

    @property
    def archimedean(self) -> bool:
        return self.kind in _COMPONENTS

    @property
    def components(self) -> int:
        """Real components per ambient coordinate (archimedean kinds)."""
        return _COMPONENTS.get(self.kind, 1)

    @property
    def scale(self) -> int:
        return 1 << self.precision

    @property
    def field(self) -> "FiniteField":
        if self.kind is not Kind.LAURENT:
            raise PreconditionUnmet("only Laurent rings carry a coefficient field")
        return FiniteField.of(self.t)

    def describe(self) -> str:
        if self.kind is Kind.PADIC:
            return f"padic(p={self.p}, L={self.precision})"
        if self.kind is Kind.LAURENT:
            return f"laurent(t={self.t}, L={self.precision})"
        return f"{self.kind.value}(L={self.precision})"


# ---------------------------------------------------------------------------
# finite fields


class FiniteField:
    """GF(t) with elements encoded as integers ``0..t-1``.

    For ``t = p**r`` with ``r > 1`` an element encodes the base-p digit vector
    of its polynomial representative modulo a fixed irreducible polynomial.
    All operations accept numpy arrays.
    """

    _TABLE_LIMIT = 1024

    def __init__(self, t: int):
        pr = prime_power(t)
        if pr is None:
            raise PreconditionUnmet(f"{t} is not a prime power")
        self.t = t
        self.p, self.r = pr
        self.modulus: tuple[int, ...] | None = None
        self._add = self._mul = None
        if self.r > 1:
            if t > self._TABLE_LIMIT:
                raise PreconditionUnmet(f"GF({t}) tables too large")
            self.modulus = self._irreducible()
            self._build_tables()
        self._neg = np.array([self.neg_scalar(a) for a in range(t)], dtype=np.int64) if t <= self._TABLE_LIMIT else None

    @staticmethod
    @lru_cache(maxsize=None)
    def of(t: int) -> "FiniteField":
        return FiniteField(t)

    # polynomial helpers over F_p, little-endian coefficient lists
    def _digits(self, a: int) -> list[int]:
        return [(a // self.p**k) % self.p for k in range(self.r)]

    def _undigits(self, ds: Sequence[int]) -> int:
        return sum(int(d) * self.p**k for k, d in enumerate(ds))

    def _irreducible(self) -> tuple[int, ...]:
        p, r = self.p, self.r
        for tail in itertools.product(range(p), repeat=r):
            poly = list(tail) + [1]
            if tail[0] == 0:
                continue
            if not any(_poly_has_factor(poly, d, p) for d in range(1, r // 2 + 1)):
                return tuple(poly)
        raise AssertionError("no irreducible polynomial found")

    def _mul_poly(self, a: int, b: int) -> int:
        p, r, mod = self.p, self.r, self.modulus
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * r - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        for k in range(len(prod) - 1, r - 1, -1):
            c = prod[k]
            if c:
                for j in range(r + 1):
                    prod[k - r + j] = (prod[k - r + j] - c * mod[j]) % p
        return self._undigits(prod[:r])

    def _build_tables(self):
        t = self.t
        add = np.zeros((t, t), dtype=np.int64)
        mul = np.zeros((t, t), dtype=np.int64)
        for a in range(t):
            da = self._digits(a)
            for b in range(t):
                db = self._digits(b)
                add[a, b] = self._undigits([(x + y) % self.p for x, y in zip(da, db)])
                mul[a, b] = self._mul_poly(a, b)
        self._add, self._mul = add, mul

    def neg_scalar(self, a: int) -> int:
        if self.r == 1:
            return (-a) % self.p
        return self._undigits([(-d) % self.p for d in self._digits(a)])

    def add(self, a, b):
        if self.r == 1:
            return (np.asarray(a, dtype=np.int64) + b) % self.t
        return self._add[a, b]

    def neg(self, a):
        if self.r == 1:
            return (-np.asarray(a, dtype=np.int64)) % self.t
        return self._neg[a]

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.r == 1:
            return (np.asarray(a, dtype=np.int64) * b) % self.t
        return self._mul[a, b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        if self.r == 1:
            return pow(int(a), -1, self.t)
        row = self._mul[a]
        return int(np.nonzero(row == 1)[0][0])


def _poly_has_factor(poly, d, p) -> bool:
    """True if ``poly`` over F_p has a monic factor of degree d."""
    for tail in itertools.product(range(p), repeat=d):
        div = list(tail) + [1]
        rem = list(poly)
        for k in range(len(rem) - 1, d - 1, -1):
            c = rem[k]
            if c:
                for j in range(d + 1):
                    rem[k - d + j] = (rem[k - d + j] - c * div[j]) % p
        if not any(rem[:d]):
            return True
    return False


# ---------------------------------------------------------------------------
# exact square roots of rationals (Euclidean norms)


@dataclass(frozen=True, order=False)
class Surd:
    """The nonnegative square root of a nonnegative rational, compared exactly."""

    square: Fraction

    def __post_init__(self):
        object.__setattr__(self, "square", Fraction(self.square))
        if self.square < 0:
            raise ValueError("negative square")

    def _sq(self, other):
        if isinstance(other, Surd):
            return other.square
        other = Fraction(other)
        if other < 0:
            return None
        return other * other

    def __eq__(self, other):
        if isinstance(other, (Surd, int, Fraction)):
            sq = self._sq(other)
            return sq is not None and sq == self.square
        return NotImplemented

    def __hash__(self):
        e = self.exact()
        return hash(e) if e is not None else hash(("surd", self.square))

    def __lt__(self, other):
        sq = self._sq(other)
        return False if sq is None else self.square < sq

    def __le__(self, other):
        sq = self._sq(other)
        return False if sq is None else self.square <= sq

    def __gt__(self, other):
        sq = self._sq(other)
        return True if sq is None else self.square > sq

    def __ge__(self, other):
        sq = self._sq(other)
        return True if sq is None else self.square >= sq

    def __float__(self):
        return math.sqrt(self.square)

    def exact(self) -> Fraction | None:
        """The root as a Fraction when it is rational."""
        n, d = self.square.numerator, self.square.denominator
        rn, rd = math.isqrt(n), math.isqrt(d)
        if rn * rn == n and rd * rd == d:
            return Fraction(rn, rd)
        return None

    def __repr__(self):
        e = self.exact()
        return f"Surd({e})" if e is not None else f"Surd(sqrt({self.square}))"


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class IntegerPoint:
    """An exact integer of a ring.

    ``value`` is an ``int`` (real, p-adic), a pair (Gaussian), a doubled
    quadruple with equal parity (Hurwitz) or a little-endian coefficient tuple
    with no trailing zeros (Laurent polynomial over GF(t)).
    """

    kind: Kind
    value: object
    t: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        k, v = self.kind, self.value
        if k in (Kind.REAL, Kind.PADIC):
            object.__setattr__(self, "value", int(v))
        elif k is Kind.COMPLEX:
            a, b = v
            object.__setattr__(self, "value", (int(a), int(b)))
        elif k is Kind.QUATERNION:
            q = tuple(int(c) for c in v)
            if len(q) != 4 or len({c % 2 for c in q}) != 1:
                raise ValueError(f"Hurwitz doubled coordinates need equal parity: {q}")
            object.__setattr__(self, "value", q)
        else:
            coeffs = [int(c) for c in v]
            while coeffs and coeffs[-1] == 0:
                coeffs.pop()
            if self.t is None:
                raise ValueError("Laurent integer needs t")
            if any(not 0 <= c < self.t for c in coeffs):
                raise ValueError("coefficient out of field range")
            object.__setattr__(self, "value", tuple(coeffs))

    @classmethod
    def hurwitz(cls, a, b, c, d) -> "IntegerPoint":
        """From ordinary (possibly half-integer) coordinates."""
        return cls(Kind.QUATERNION, tuple(int(Fraction(x) * 2) for x in (a, b, c, d)))

    def is_zero(self) -> bool:
        v = self.value
        if isinstance(v, int):
            return v == 0
        return not any(v)

    def coords(self) -> tuple[Fraction, ...]:
        """Ordinary coordinates (halves for Hurwitz)."""
        v = self.value
        if self.kind is Kind.QUATERNION:
            return tuple(Fraction(c, 2) for c in v)
        if isinstance(v, int):
            return (Fraction(v),)
        return tuple(Fraction(c) for c in v)

    def sup_norm(self) -> Fraction:
        """|.|_inf of the integer; t**deg for Laurent polynomials."""
        if self.kind is Kind.LAURENT:
            return Fraction(0) if not self.value else Fraction(self.t) ** (len(self.value) - 1)
        return max(abs(c) for c in self.coords())


@dataclass(frozen=True)
class AmbientPoint:
    """A point of the ambient completion at working precision."""

    ring: RingDescriptor
    coords: tuple[int, ...]
    poly: tuple[int, ...] = field(default=())

    def __post_init__(self):
        r = self.ring
        c = tuple(int(x) for x in self.coords)
        object.__setattr__(self, "coords", c)
        if r.archimedean:
            if len(c) != r.components:
                raise ValueError(f"{r.kind.value} point needs {r.components} components")
        elif r.kind is Kind.PADIC:
            if len(c) != r.precision or any(not 0 <= d < r.p for d in c):
                raise ValueError("p-adic digits out of range or wrong length")
        else:
            if len(c) != r.precision or any(not 0 <= d < r.t for d in c):
                raise ValueError("Laurent coefficients out of range or wrong length")
            poly = [int(x) for x in self.poly]
            while poly and poly[-1] == 0:
                poly.pop()
            if any(not 0 <= d < r.t for d in poly):
                raise ValueError("Laurent coefficients out of range")
            object.__setattr__(self, "poly", tuple(poly))

    def values(self) -> tuple[Fraction, ...]:
        """Exact rational components (archimedean kinds)."""
        s = self.ring.scale
        return tuple(Fraction(n, s) for n in self.coords)

    def padic_integer(self) -> int:
        """Digits read as an integer in ``[0, p**L)``."""
        p = self.ring.p
        return sum(d * p**i for i, d in enumerate(self.coords))


def ambient_from_fraction(ring: RingDescriptor, *values) -> AmbientPoint:
    """Round rationals to the nearest grid point of an archimedean ring.

    For p-adic rings a single integer (or rational with unit denominator) is
    expanded into digits modulo ``p**L``.
    """
    if ring.kind is Kind.PADIC:
        (v,) = values
        v = Fraction(v)
        mod = ring.p**ring.precision
        if v.denominator % ring.p == 0:
            raise PreconditionUnmet("value is not a p-adic integer")
        n = (v.numerator * pow(v.denominator, -1, mod)) % mod
        return AmbientPoint(ring, _digits_of(n, ring.p, ring.precision))
    if not ring.archimedean:
        raise PreconditionUnmet("use parse_point for Laurent values")
    s = ring.scale
    nums = []
    for v in values:
        v = Fraction(v) * s
        nums.append(math.floor(v + Fraction(1, 2)))
    return AmbientPoint(ring, tuple(nums))


def _digits_of(n: int, p: int, L: int) -> tuple[int, ...]:
    out = []
    for _ in range(L):
        n, d = divmod(n, p)
        out.append(d)
    return tuple(out)


# ---------------------------------------------------------------------------
# quaternions


def quat_mul(a: Sequence, b: Sequence) -> tuple:
    """Hamilton product of coordinate quadruples (any exact numeric type)."""
    a1, b1, c1, d1 = a
    a2, b2, c2, d2 = b
    return (
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    )


def quat_conj(a: Sequence) -> tuple:
    return (a[0], -a[1], -a[2], -a[3])


def hurwitz_units() -> list[IntegerPoint]:
    """The 24 units of the Hurwitz order, in lexicographic doubled order."""
    units = []
    for i in range(4):
        for s in (-2, 2):
            v = [0, 0, 0, 0]
            v[i] = s
            units.append(tuple(v))
    units.extend(itertools.product((-1, 1), repeat=4))
    return [IntegerPoint(Kind.QUATERNION, u) for u in sorted(units)]


def _round_lex(x: Fraction) -> int:
    """Nearest integer; exact halves go down (the lexicographically smaller)."""
    return math.ceil(x - Fraction(1, 2))


def nearest_hurwitz(x: AmbientPoint) -> IntegerPoint:
    """Euclidean-nearest Hurwitz integer; ties broken lexicographically."""
    if x.ring.kind is not Kind.QUATERNION:
        raise PreconditionUnmet("nearest_hurwitz needs a quaternion point")
    return _nearest_hurwitz_values(x.values())


def _nearest_hurwitz_values(vals: Sequence[Fraction]) -> IntegerPoint:
    lip = tuple(2 * _round_lex(v) for v in vals)
    # half-integer coset: nearest point of Z + 1/2 to v is round(v - 1/2) + 1/2
    half = tuple(2 * _round_lex(v - Fraction(1, 2)) + 1 for v in vals)

    def d2(c):
        return sum((v - Fraction(k, 2)) ** 2 for v, k in zip(vals, c))

    dl, dh = d2(lip), d2(half)
    if dl < dh or (dl == dh and lip < half):
        return IntegerPoint(Kind.QUATERNION, lip)
    return IntegerPoint(Kind.QUATERNION, half)


# ---------------------------------------------------------------------------
# reduction and norms


def reduce(x: AmbientPoint) -> tuple[AmbientPoint, IntegerPoint]:
    """Split ``x`` into (fractional part, nearest integer).

    p-adic points already live in the compact domain Z_p, so the integer part
    is 0.  Laurent points split into polynomial and fractional parts.
    """
    r = x.ring
    k = r.kind
    if k is Kind.PADIC:
        return x, IntegerPoint(Kind.PADIC, 0)
    if k is Kind.LAURENT:
        return AmbientPoint(r, x.coords), IntegerPoint(Kind.LAURENT, x.poly, t=r.t)
    s = r.scale
    if k is Kind.QUATERNION:
        z = nearest_hurwitz(x)
        frac = tuple(n - c * s // 2 for n, c in zip(x.coords, z.value))
        return AmbientPoint(r, frac), z
    ints = tuple(_round_lex(Fraction(n, s)) for n in x.coords)
    frac = tuple(n - i * s for n, i in zip(x.coords, ints))
    z = IntegerPoint(k, ints[0] if k is Kind.REAL else ints)
    return AmbientPoint(r, frac), z


def padic_valuation(x, p: int | None = None) -> int | None:
    """Index of the first nonzero digit; None when all retained digits vanish
    (or the integer is 0)."""
    if isinstance(x, AmbientPoint):
        for i, d in enumerate(x.coords):
            if d:
                return i
        return None
    n = int(x.value if isinstance(x, IntegerPoint) else x)
    if n == 0:
        return None
    if p is None:
        raise PreconditionUnmet("integer input needs p")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def padic_abs(x, p: int | None = None, *, strict: bool = False) -> Fraction:
    """``p**-v``.  Zero at working precision returns 0 (below the floor
    ``p**-L``) or raises PrecisionExhausted when ``strict``."""
    if isinstance(x, AmbientPoint):
        if x.ring.kind is not Kind.PADIC:
            raise PreconditionUnmet("padic_abs needs a p-adic point")
        v = padic_valuation(x)
        if v is None:
            if strict:
                raise PrecisionExhausted(f"value below p^-{x.ring.precision}")
            return Fraction(0)
        return Fraction(1, x.ring.p**v)
    v = padic_valuation(x, p)
    return Fraction(0) if v is None else Fraction(1, p**v)


def abs_value(x: AmbientPoint, norm: str = "sup"):
    """Absolute value of an ambient point.

    Archimedean kinds use the sup norm over real components by default
    (``norm="euclid"`` gives a Surd).  Laurent values have ``t**deg``.
    """
    r = x.ring
    if r.kind is Kind.PADIC:
        return padic_abs(x)
    if r.kind is Kind.LAURENT:
        if x.poly:
            return Fraction(r.t) ** (len(x.poly) - 1)
        return _laurent_frac_abs(x.coords, r.t)
    vals = x.values()
    if norm == "euclid":
        return Surd(sum(v * v for v in vals))
    return max(abs(v) for v in vals)


def _laurent_frac_abs(coeffs: Sequence[int], t: int) -> Fraction:
    for i, c in enumerate(coeffs):
        if c:
            return Fraction(1, t ** (i + 1))
    return Fraction(0)


def dist_to_integers(x: AmbientPoint, norm: str = "euclid"):
    """Distance from ``x`` to the nearest ring integer.

    Real: the usual distance.  Complex and quaternion: Euclidean by default
    (a Surd), or ``norm="sup"`` for the max-coordinate variant used by the
    linear-form lemmas.  Laurent: the norm of the fractional part.  p-adic
    points are integers of Z_p, so the distance is 0.
    """
    r = x.ring
    if r.kind is Kind.PADIC:
        return Fraction(0)
    if r.kind is Kind.LAURENT:
        return _laurent_frac_abs(x.coords, r.t)
    if r.kind is Kind.REAL:
        return abs(reduce(x)[0].values()[0])
    if norm == "sup":
        if r.kind is Kind.COMPLEX:
            return max(abs(v) for v in reduce(x)[0].values())
        vals = x.values()
        lip = max(abs(v - _round_lex(v)) for v in vals)
        half = max(abs(v - _round_lex(v - Fraction(1, 2)) - Fraction(1, 2)) for v in vals)
        return min(lip, half)
    frac = reduce(x)[0]
    return Surd(sum(v * v for v in frac.values()))


def add(x: AmbientPoint, y: AmbientPoint) -> AmbientPoint:
    """Ring addition at shared precision (p-adic: modulo p**L)."""
    if x.ring != y.ring:
        raise PreconditionUnmet("points from different rings")
    r = x.ring
    if r.archimedean:
        return AmbientPoint(r, tuple(a + b for a, b in zip(x.coords, y.coords)))
    if r.kind is Kind.PADIC:
        mod = r.p**r.precision
        return AmbientPoint(r, _digits_of((x.padic_integer() + y.padic_integer()) % mod, r.p, r.precision))
    F = r.field
    frac = tuple(int(v) for v in F.add(np.array(x.coords), np.array(y.coords)))
    n = max(len(x.poly), len(y.poly))
    xp = np.array(list(x.poly) + [0] * (n - len(x.poly)), dtype=np.int64)
    yp = np.array(list(y.poly) + [0] * (n - len(y.poly)), dtype=np.int64)
    poly = tuple(int(v) for v in F.add(xp, yp)) if n else ()
    return AmbientPoint(r, frac, poly)


# ---------------------------------------------------------------------------
# sampling


def sample_uniform(ring: RingDescriptor, shape: tuple[int, int], seed: int) -> list[list[AmbientPoint]]:
    """Deterministic Haar/Lebesgue sample of an ``m x n`` matrix.

    Real and complex entries are uniform on [0,1)^c; quaternion entries are
    uniform on the Voronoi cell of 0 (rejection from [-1/2,1/2]^4).
    """
    arr = sample_uniform_array(ring, shape, seed)
    m, n = shape
    if ring.kind is Kind.LAURENT or ring.kind is Kind.PADIC or ring.kind is Kind.REAL:
        return [[AmbientPoint(ring, tuple(arr[i, j].tolist())) for j in range(n)] for i in range(m)]
    return [[AmbientPoint(ring, tuple(int(v) for v in arr[i, j])) for j in range(n)] for i in range(m)]


def sample_uniform_array(ring: RingDescriptor, shape: tuple[int, int], seed: int, count: int | None = None) -> np.ndarray:
    """Array form of :func:`sample_uniform`.

    Shape is ``(m, n, c)`` (or ``(count, m, n, c)`` when ``count`` is given),
    where ``c`` is the component/digit count.  Numerators are int64 for
    precision up to 62 bits, Python ints otherwise.
    """
    rng = np.random.default_rng(seed)
    m, n = shape
    lead = (count,) if count is not None else ()
    k = ring.kind
    L = ring.precision
    if k is Kind.PADIC:
        return rng.integers(0, ring.p, size=lead + (m, n, L), dtype=np.int64)
    if k is Kind.LAURENT:
        return rng.integers(0, ring.t, size=lead + (m, n, L), dtype=np.int64)
    c = ring.components
    if L > 60:
        raise PreconditionUnmet("array sampling supports precision <= 60 bits")
    if k is not Kind.QUATERNION:
        return rng.integers(0, 1 << L, size=lead + (m, n, c), dtype=np.int64)
    total = int(np.prod(lead + (m, n)))
    half = 1 << (L - 1)
    out = np.empty((0, 4), dtype=np.int64)
    while out.shape[0] < total:
        draw = rng.integers(-half, half + 1, size=(2 * (total - out.shape[0]) + 8, 4), dtype=np.int64)
        inside = np.abs(draw).sum(axis=1) <= (1 << L)
        out = np.concatenate([out, draw[inside]])
    return out[:total].reshape(lead + (m, n, 4))


# ---------------------------------------------------------------------------
# shells


def _check_height(ring: RingDescriptor, height) -> tuple[str, int]:
    """Normalise a height to ('int', Q), ('half', 2h) or ('deg', r)."""
    h = Fraction(height)
    if h < 0:
        raise UnattainableHeight(f"negative height {height}")
    k = ring.kind
    if k is Kind.LAURENT:
        if h == 0:
            return "deg", -1
        r = 0
        while Fraction(ring.t) ** r < h:
            r += 1
        if Fraction(ring.t) ** r != h:
            raise UnattainableHeight(f"{height} is not a power of t={ring.t}")
        return "deg", r
    if k is Kind.QUATERNION:
        if (2 * h).denominator != 1:
            raise UnattainableHeight(f"{height} is not a half-integer")
        return "half", int(2 * h)
    if h.denominator != 1:
        raise UnattainableHeight(f"{height} is not an integer")
    return "int", int(h)


def _atmost(ring: RingDescriptor, m: int, tag: str, h: int) -> int:
    k = ring.kind
    if tag == "deg":
        return ring.t ** (m * (h + 1))
    if tag == "half":
        if h < 0:
            return 0
        lip = (2 * (h // 2) + 1) ** 4
        half = (2 * ((h + 1) // 2)) ** 4
        return (lip + half) ** m
    if h < 0:
        return 0
    per = 2 * h + 1
    return per ** (m * (2 if k is Kind.COMPLEX else 1))


def count_shell(ring: RingDescriptor, m: int, height, mode: str = "exact") -> int:
    """Number of integer vectors of length ``m`` with sup norm equal to
    (``mode="exact"``) or at most (``"atmost"``) ``height``.

    Laurent heights are ``t**r`` (0 for the zero vector); the exact count is
    ``t**(m(r+1)) - t**(m r)``.
    """
    tag, h = _check_height(ring, height)
    mode = mode.lower().replace("_", "")
    upto = _atmost(ring, m, tag, h)
    if mode == "atmost":
        return upto
    if mode != "exact":
        raise ValueError(f"unknown mode {mode}")
    if tag == "deg":
        return upto - (ring.t ** (m * h) if h >= 0 else 0)
    return upto - _atmost(ring, m, tag, h - 1)


def enumerate_shell(ring: RingDescriptor, m: int, height) -> list[tuple[IntegerPoint, ...]]:
    """Brute-force list of integer vectors with sup norm exactly ``height``."""
    tag, h = _check_height(ring, height)
    k = ring.kind
    if tag == "deg":
        per = [()] + [
            tuple(cs)
            for deg in range(0, h + 1)
            for cs in itertools.product(range(ring.t), repeat=deg + 1)
            if cs[-1] != 0
        ]
        singles = [IntegerPoint(Kind.LAURENT, c, t=ring.t) for c in per]
        target = Fraction(0) if h < 0 else Fraction(ring.t) ** h
    elif tag == "half":
        cands = []
        for parity in (0, 1):
            rng_ = [c for c in range(-h, h + 1) if c % 2 == parity]
            cands += [IntegerPoint(Kind.QUATERNION, c) for c in itertools.product(rng_, repeat=4)]
        singles = cands
        target = Fraction(h, 2)
    elif k is Kind.COMPLEX:
        singles = [IntegerPoint(k, (a, b)) for a in range(-h, h + 1) for b in range(-h, h + 1)]
        target = Fraction(h)
    else:
        singles = [IntegerPoint(k, a) for a in range(-h, h + 1)]
        target = Fraction(h)
    out = []
    for vec in itertools.product(singles, repeat=m):
        if max(z.sup_norm() for z in vec) == target:
            out.append(vec)
    return out


# ---------------------------------------------------------------------------
# serialization
#
# Real        "3/8"                 exact dyadic rational
# Complex     "3/8+1/2i", "-1/4i"   real part then imaginary part
# Quaternion  "1/2,1/2,1/2,1/2"     coordinates of 1, i, j, k
# p-adic      "p5:0,0,3,1"          digits d_0, d_1, ... (padded with zeros)
# Laurent     "t2:[1,0,1]"          coefficients of X^-1, X^-2, ...
#             "t2:1,1;[1,0,1]"      polynomial part (constant term first) ; fraction

_FRAC = r"[+-]?\d+(?:/\d+)?"
_COMPLEX_RE = re.compile(rf"^\s*(?:(?P<re>{_FRAC}))?\s*(?:(?P<im>[+-]?\s*(?:\d+(?:/\d+)?)?)i)?\s*$")


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _exact_dyadic(ring: RingDescriptor, text: str, exact: bool) -> int:
    try:
        v = Fraction(text.replace(" ", ""))
    except ValueError as e:
        raise ParseError(f"bad rational {text!r}") from e
    scaled = v * ring.scale
    if scaled.denominator != 1:
        if exact:
            raise ParseError(f"{text} is not representable at {ring.precision} bits")
        return math.floor(scaled + Fraction(1, 2))
    return int(scaled)


def format_point(x: AmbientPoint) -> str:
    r = x.ring
    k = r.kind
    if k is Kind.PADIC:
        return f"p{r.p}:" + ",".join(str(d) for d in x.coords)
    if k is Kind.LAURENT:
        body = "[" + ",".join(str(c) for c in x.coords) + "]"
        if x.poly:
            body = ",".join(str(c) for c in x.poly) + ";" + body
        return f"t{r.t}:" + body
    vals = x.values()
    if k is Kind.REAL:
        return _fmt(vals[0])
    if k is Kind.COMPLEX:
        a, b = vals
        sign = "-" if b < 0 else "+"
        return f"{_fmt(a)}{sign}{_fmt(abs(b))}i"
    return ",".join(_fmt(v) for v in vals)


def parse_point(text: str, ring: RingDescriptor, *, exact: bool = False) -> AmbientPoint:
    """Parse a point in the textual format above.

    Archimedean values that are not multiples of ``2**-L`` are rounded to the
    nearest grid point unless ``exact`` is set.
    """
    text = text.strip()
    k = ring.kind
    if k is Kind.PADIC:
        m = re.fullmatch(r"p(\d+):([\d,\s]*)", text)
        if not m or int(m.group(1)) != ring.p:
            raise ParseError(f"bad p-adic literal {text!r} for p={ring.p}")
        digits = [int(d) for d in m.group(2).split(",") if d.strip()]
        if len(digits) > ring.precision or any(d >= ring.p for d in digits):
            raise ParseError(f"digits out of range in {text!r}")
        return AmbientPoint(ring, tuple(digits + [0] * (ring.precision - len(digits))))
    if k is Kind.LAURENT:
        m = re.fullmatch(r"t(\d+):(?:([\d,\s]*);)?\[([\d,\s]*)\]", text)
        if not m or int(m.group(1)) != ring.t:
            raise ParseError(f"bad Laurent literal {text!r} for t={ring.t}")
        poly = [int(c) for c in (m.group(2) or "").split(",") if c.strip()]
        coeffs = [int(c) for c in m.group(3).split(",") if c.strip()]
        if len(coeffs) > ring.precision or any(c >= ring.t for c in coeffs + poly):
            raise ParseError(f"coefficients out of range in {text!r}")
        return AmbientPoint(ring, tuple(coeffs + [0] * (ring.precision - len(coeffs))), tuple(poly))
    if k is Kind.REAL:
        return AmbientPoint(ring, (_exact_dyadic(ring, text, exact),))
    if k is Kind.QUATERNION:
        parts = text.split(",")
        if len(parts) != 4:
            raise ParseError(f"quaternion needs 4 coordinates: {text!r}")
        return AmbientPoint(ring, tuple(_exact_dyadic(ring, p, exact) for p in parts))
    m = _COMPLEX_RE.match(text)
    if not m or (m.group("re") is None and m.group("im") is None):
        raise ParseError(f"bad complex literal {text!r}")
    re_part = m.group("re") or "0"
    im = m.group("im")
    if im is None:
        im = "0"
    else:
        im = im.replace(" ", "")
        if im in ("", "+"):
            im = "1"
        elif im == "-":
            im = "-1"
    return AmbientPoint(ring, (_exact_dyadic(ring, re_part, exact), _exact_dyadic(ring, im, exact)))


def format_integer(z: IntegerPoint) -> str:
    k = z.kind
    if k in (Kind.REAL, Kind.PADIC):
        return str(z.value)
    if k is Kind.COMPLEX:
        a, b = z.value
        return f"{a}{'-' if b < 0 else '+'}{abs(b)}i"
    if k is Kind.QUATERNION:
        return ",".join(_fmt(c) for c in z.coords())
    return f"t{z.t}:{{" + ",".join(str(c) for c in z.value) + "}"


def parse_integer(text: str, ring: RingDescriptor) -> IntegerPoint:
    text = text.strip()
    k = ring.kind
    try:
        if k in (Kind.REAL, Kind.PADIC):
            return IntegerPoint(k, int(text))
        if k is Kind.QUATERNION:
            return IntegerPoint.hurwitz(*[Fraction(p) for p in text.split(",")])
        if k is Kind.LAURENT:
            m = re.fullmatch(r"t(\d+):\{([\d,\s]*)\}", text)
            if not m:
                raise ParseError(f"bad polynomial literal {text!r}")
            return IntegerPoint(k, [int(c) for c in m.group(2).split(",") if c.strip()], t=int(m.group(1)))
        x = parse_point(text, RingDescriptor.complex(1), exact=True)
        a, b = x.values()
        if a.denominator != 1 or b.denominator != 1:
            raise ParseError(f"not a Gaussian integer: {text!r}")
        return IntegerPoint(k, (int(a), int(b)))
    except ValueError as e:
        raise ParseError(str(e)) from e
