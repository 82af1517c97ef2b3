"""Exhaustive linear-form solvers and certification of the Minkowski lemmas.

Every search walks the ring's integer vectors in a fixed canonical order:
nondecreasing height level, then lexicographic on the flattened coordinates.
Only one representative per class of unit multiples is visited (first
nonzero coordinate positive; for Gaussian vectors the leading entry has
positive real and nonnegative imaginary part; for polynomial vectors the
first nonzero coefficient is 1), since unit multiples give the same errors.  Errors are evaluated on integer numerators, so every
comparison against a bound is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .approx import ApproxSpec, BalancedRho, PowerProduct, WeightVector, quasi_norm
from .errors import BudgetExceeded, ParseError, PrecisionExhausted, PreconditionUnmet
from .rings import (
    AmbientPoint,
    IntegerPoint,
    Kind,
    RingDescriptor,
    format_integer,
    format_point,
    parse_point,
    sample_uniform_array,
)

__all__ = [
    "Status",
    "Strategy",
    "LinearFormSystem",
    "SolutionRecord",
    "CertificationReport",
    "UbiquityReport",
    "solve",
    "verify_record",
    "certify_minkowski",
    "minkowski_conditions",
    "enumerate_resonant_neighborhood_hits",
    "empirical_ubiquity_check",
    "format_ring",
    "parse_ring",
    "read_matrix",
    "write_matrix",
    "solution_header",
    "solution_row",
    "DEFAULT_MAX_CANDIDATES",
]

DEFAULT_MAX_CANDIDATES = 4_000_000
_CHUNK = 1 << 15
_INT64_SAFE = 1 << 62


class Status(str, Enum):
    FOUND = "Found"
    CERTIFIED_NONE = "CertifiedNone"
    SEARCH_EXHAUSTED = "SearchExhausted"


class Strategy(str, Enum):
    FIRST_FOUND = "FirstFound"
    MIN_ERROR = "MinError"
    MIN_HEIGHT = "MinHeight"


def _fr(x):
    if isinstance(x, PowerProduct):
        e = x.exact()
        return x if e is None else e
    return x if isinstance(x, Fraction) else Fraction(x)


def _pp(x) -> PowerProduct:
    return PowerProduct.of(x)


def _strict_floor(x, scale: int) -> int:
    """Largest integer ``E`` with ``E < x * scale`` (``x`` exact, positive)."""
    g = _pp(x) * scale
    f = float(g)
    e = math.floor(f) if math.isfinite(f) else 0
    while _pp(e).compare(g) >= 0:
        e -= 1
    while _pp(e + 1).compare(g) < 0:
        e += 1
    return e


def _floor(x) -> int:
    """``floor(x)`` for exact positive ``x``."""
    return _strict_floor(x, 1) + (1 if _pp(_strict_floor(x, 1) + 1).compare(_pp(x)) == 0 else 0)


def _min_valuation(gamma, base: int, cap: int) -> int:
    """Smallest ``k >= 0`` with ``base**-k < gamma``; ``cap + 1`` if beyond."""
    g = _pp(gamma)
    for k in range(cap + 2):
        if _pp(Fraction(1, base**k)).compare(g) < 0:
            return k
    return cap + 1


def _max_degree(theta, t: int) -> int:
    """Largest ``d`` with ``t**d <= theta``; -1 when ``theta < 1``."""
    g = _pp(theta)
    d = -1
    while _pp(t ** (d + 1)).compare(g) <= 0:
        d += 1
    return d


# ---------------------------------------------------------------------------
# systems and records


def _as_array(ring: RingDescriptor, A) -> tuple[np.ndarray, tuple]:
    """Internal array of the matrix plus Laurent polynomial parts."""
    if isinstance(A, np.ndarray):
        arr = A
        polys = ()
    else:
        rows = [list(r) for r in A]
        if not rows or not rows[0]:
            raise PreconditionUnmet("matrix must be nonempty")
        if any(len(r) != len(rows[0]) for r in rows):
            raise PreconditionUnmet("ragged matrix")
        for r in rows:
            for x in r:
                if not isinstance(x, AmbientPoint) or x.ring != ring:
                    raise PreconditionUnmet("matrix entries must be points of the system's ring")
        arr = np.array([[list(x.coords) for x in r] for r in rows], dtype=np.int64)
        polys = tuple(tuple(x.poly for x in r) for r in rows) if ring.kind is Kind.LAURENT else ()
    if arr.ndim != 3:
        raise PreconditionUnmet("matrix array must have shape (m, n, c)")
    if ring.kind is Kind.PADIC:
        weights = np.array([ring.p**i for i in range(ring.precision)], dtype=object)
        ints = (arr.astype(object) * weights).sum(axis=2)
        return ints, polys
    return arr, polys


@dataclass(frozen=True, eq=False)
class LinearFormSystem:
    """``|[[q A_i]]| < gamma_i`` for each column i, ``|q_j| <= theta_j``.

    ``A`` is an ``m x n`` nested sequence of AmbientPoints or an array of
    numerators/digits of shape ``(m, n, c)``.  In the p-adic ring the
    companion integers ``a_1..a_n`` are bounded by ``companion_bounds``
    (default: the largest height bound).  ``right_multiply`` switches the
    quaternion forms to ``A_i q``.
    """

    ring: RingDescriptor
    A: object
    error_bounds: tuple
    height_bounds: tuple
    weight: WeightVector | None = None
    companion_bounds: tuple | None = None
    right_multiply: bool = False
    _arr: np.ndarray = field(init=False, repr=False)
    _polys: tuple = field(init=False, repr=False)

    def __post_init__(self):
        arr, polys = _as_array(self.ring, self.A)
        object.__setattr__(self, "_arr", arr)
        object.__setattr__(self, "_polys", polys)
        eb = tuple(_fr(x) for x in self.error_bounds)
        hb = tuple(_fr(x) for x in self.height_bounds)
        if len(eb) != self.n or len(hb) != self.m:
            raise PreconditionUnmet(f"need {self.n} error bounds and {self.m} height bounds")
        if any(_pp(x).sign() <= 0 for x in eb + hb):
            raise PreconditionUnmet("bounds must be positive")
        object.__setattr__(self, "error_bounds", eb)
        object.__setattr__(self, "height_bounds", hb)
        if self.companion_bounds is not None:
            cb = tuple(_fr(x) for x in self.companion_bounds)
            if len(cb) != self.n:
                raise PreconditionUnmet("need one companion bound per column")
            object.__setattr__(self, "companion_bounds", cb)
        if self.weight is not None and self.ring.kind not in (Kind.REAL, Kind.PADIC):
            raise PreconditionUnmet("weighted heights are supported for real and p-adic rings")

    @property
    def m(self) -> int:
        return self._arr.shape[0]

    @property
    def n(self) -> int:
        return self._arr.shape[1]

    def companions(self) -> tuple[int, ...]:
        cb = self.companion_bounds
        if cb is None:
            top = max(self.height_bounds, key=lambda x: float(x))
            return (_floor(top),) * self.n
        return tuple(_floor(x) for x in cb)

    def matrix_points(self) -> list[list[AmbientPoint]]:
        r = self.ring
        if r.kind is Kind.PADIC:
            digits = []
            for row in self._arr:
                out = []
                for v in row:
                    v = int(v)
                    ds = []
                    for _ in range(r.precision):
                        v, d = divmod(v, r.p)
                        ds.append(d)
                    out.append(AmbientPoint(r, tuple(ds)))
                digits.append(out)
            return digits
        pol = self._polys
        return [
            [AmbientPoint(r, tuple(int(c) for c in self._arr[j, i]), pol[j][i] if pol else ()) for i in range(self.n)]
            for j in range(self.m)
        ]


@dataclass(frozen=True)
class SolutionRecord:
    status: Status
    q: tuple[IntegerPoint, ...] = ()
    p: tuple[IntegerPoint, ...] = ()
    errors: tuple[Fraction, ...] = ()
    height: object = None
    below_floor: tuple[bool, ...] = ()
    examined: int = 0

    @property
    def found(self) -> bool:
        return self.status is Status.FOUND


# ---------------------------------------------------------------------------
# candidate generation


def _entry_values(ring: RingDescriptor, bound: int, width: int):
    """All admissible values of one entry of q with level <= bound.

    Returns (values array (s, c), levels (s,)).  Levels: |.|_inf for integer
    kinds, doubled sup norm for Hurwitz, degree (-1 for zero) for Laurent."""
    k = ring.kind
    if bound < 0:
        if k is Kind.LAURENT:
            return np.zeros((1, width), dtype=np.int64), np.array([-1])
        return np.zeros((1, ring.components), dtype=np.int64), np.array([0])
    if k in (Kind.REAL, Kind.PADIC):
        v = np.arange(-bound, bound + 1, dtype=np.int64)[:, None]
        return v, np.abs(v[:, 0])
    if k is Kind.COMPLEX:
        r = np.arange(-bound, bound + 1, dtype=np.int64)
        v = np.stack(np.meshgrid(r, r, indexing="ij"), axis=-1).reshape(-1, 2)
        return v, np.abs(v).max(axis=1)
    if k is Kind.QUATERNION:
        parts = []
        for parity in (0, 1):
            r = np.array([c for c in range(-bound, bound + 1) if c % 2 == parity], dtype=np.int64)
            if r.size:
                parts.append(np.stack(np.meshgrid(r, r, r, r, indexing="ij"), axis=-1).reshape(-1, 4))
        v = np.concatenate(parts)
        return v, np.abs(v).max(axis=1)
    t = ring.t
    grids = np.meshgrid(*([np.arange(t, dtype=np.int64)] * (bound + 1)), indexing="ij")
    v = np.stack(grids, axis=-1).reshape(-1, bound + 1)
    nz = v != 0
    deg = np.where(nz.any(axis=1), bound - np.argmax(nz[:, ::-1], axis=1), -1)
    if width > bound + 1:
        v = np.concatenate([v, np.zeros((v.shape[0], width - bound - 1), dtype=np.int64)], axis=1)
    return v, deg


def _entry_count(ring: RingDescriptor, bound: int) -> int:
    k = ring.kind
    if bound < 0:
        return 1
    if k in (Kind.REAL, Kind.PADIC):
        return 2 * bound + 1
    if k is Kind.COMPLEX:
        return (2 * bound + 1) ** 2
    if k is Kind.QUATERNION:
        return (2 * (bound // 2) + 1) ** 4 + (2 * ((bound + 1) // 2)) ** 4
    return ring.t ** (bound + 1)


@dataclass
class _Candidates:
    q: np.ndarray  # (K, m, c)
    level: np.ndarray  # (K,)
    complete: bool
    cap_level: int


def _level_bounds(sys_ring: RingDescriptor, height_bounds) -> list[int]:
    k = sys_ring.kind
    if k is Kind.LAURENT:
        return [_max_degree(h, sys_ring.t) for h in height_bounds]
    if k is Kind.QUATERNION:
        return [_floor(_pp(h) * 2) for h in height_bounds]
    return [_floor(h) for h in height_bounds]


def _generate(ring: RingDescriptor, bounds: list[int], weight: WeightVector | None, budget: int) -> _Candidates:
    """All sign-normalised nonzero vectors within ``bounds`` in canonical order.

    When the full box exceeds ``budget`` the search is truncated to the
    largest uniform level whose box fits, which is a prefix of the order."""
    def total(bs):
        return math.prod(_entry_count(ring, b) for b in bs)

    complete = True
    cap = max(bounds)
    if total(bounds) > budget:
        complete = False
        lo = -1 if ring.kind is Kind.LAURENT else 0
        while cap > lo and total([min(b, cap) for b in bounds]) > budget:
            cap -= 1
        bounds = [min(b, cap) for b in bounds]
    width = max(bounds) + 1 if ring.kind is Kind.LAURENT else ring.components
    width = max(width, 1)
    vals = [_entry_values(ring, b, width) for b in bounds]
    sizes = [v[0].shape[0] for v in vals]
    idx = np.indices(sizes).reshape(len(sizes), -1)
    q = np.stack([vals[j][0][idx[j]] for j in range(len(sizes))], axis=1)
    level = np.max(np.stack([vals[j][1][idx[j]] for j in range(len(sizes))], axis=1), axis=1)
    flat = q.reshape(q.shape[0], -1)
    nz = flat != 0
    has = nz.any(axis=1)
    if ring.kind is Kind.COMPLEX:
        # one associate per unit class {1, i, -1, -i}: lead entry has re > 0, im >= 0
        ent = np.argmax(q.any(axis=2), axis=1)
        lead = q[np.arange(q.shape[0]), ent]
        keep = has & (lead[:, 0] > 0) & (lead[:, 1] >= 0)
    else:
        first = flat[np.arange(flat.shape[0]), np.argmax(nz, axis=1)]
        keep = has & ((first == 1) if ring.kind is Kind.LAURENT else (first > 0))
    q, level, flat = q[keep], level[keep], flat[keep]
    if weight is not None:
        prim = _weighted_keys(flat, weight, ring)
    else:
        prim = level
    keys = [flat[:, c] for c in range(flat.shape[1] - 1, -1, -1)]
    if prim.dtype == object:
        order = sorted(range(len(prim)), key=lambda i: (prim[i], tuple(flat[i])))
        order = np.array(order, dtype=np.int64)
    else:
        order = np.lexsort(keys + [prim])
    return _Candidates(q[order], level[order], complete, cap)


def _weighted_keys(flat: np.ndarray, weight: WeightVector, ring: RingDescriptor) -> np.ndarray:
    """Exact integer sort keys ``height**D`` for the quasi-norm heights."""
    inv = [1 / v for v in weight.v[: flat.shape[1]]]
    D = 1
    for e in inv:
        D = D * e.denominator // math.gcd(D, e.denominator)
    powers = [int(e * D) for e in inv]
    out = np.empty(flat.shape[0], dtype=object)
    absf = np.abs(flat).astype(object)
    for r in range(flat.shape[0]):
        out[r] = max(int(absf[r, c]) ** powers[c] for c in range(flat.shape[1]))
    return out


# ---------------------------------------------------------------------------
# vectorised error evaluation ("badness": smaller is better, integer valued)

_QT = np.zeros((4, 4, 4), dtype=np.int64)
for _r, _s, _u, _sg in [
    (0, 0, 0, 1), (0, 1, 1, -1), (0, 2, 2, -1), (0, 3, 3, -1),
    (1, 0, 1, 1), (1, 1, 0, 1), (1, 2, 3, 1), (1, 3, 2, -1),
    (2, 0, 2, 1), (2, 1, 3, -1), (2, 2, 0, 1), (2, 3, 1, 1),
    (3, 0, 3, 1), (3, 1, 2, 1), (3, 2, 1, -1), (3, 3, 0, 1),
]:
    _QT[_r, _s, _u] = _sg


def _dist_mod(S: np.ndarray, W: int) -> np.ndarray:
    r = np.mod(S, W)
    return np.minimum(r, W - r)


class _Evaluator:
    """Evaluates all n forms for a batch of candidates against one matrix."""

    def __init__(self, sys_: LinearFormSystem):
        self.ring = sys_.ring
        self.arr = sys_._arr
        self.right = sys_.right_multiply
        self.m, self.n = sys_.m, sys_.n
        r = self.ring
        if r.kind is Kind.PADIC:
            self.P = r.p**r.precision
            self.comp = np.array(sys_.companions(), dtype=np.int64)
            hmax = max(_floor(h) for h in sys_.height_bounds)
            self.obj = self.m * max(hmax, 1) * self.P >= _INT64_SAFE
            self.X = self.arr.astype(object) if self.obj else self.arr.astype(np.int64)
            self.pk = [r.p**k for k in range(1, r.precision + 1)]

    def badness(self, q: np.ndarray) -> np.ndarray:
        r = self.ring
        k = r.kind
        A = self.arr
        if k is Kind.REAL:
            S = q[:, :, 0] @ A[:, :, 0]
            return _dist_mod(S, r.scale)
        if k is Kind.COMPLEX:
            a, b = q[:, :, 0], q[:, :, 1]
            x, y = A[:, :, 0], A[:, :, 1]
            re = a @ x - b @ y
            im = a @ y + b @ x
            return np.maximum(_dist_mod(re, r.scale), _dist_mod(im, r.scale))
        if k is Kind.QUATERNION:
            if self.right:
                S = np.einsum("jis,kju,rsu->kir", A, q, _QT)
            else:
                S = np.einsum("kjs,jiu,rsu->kir", q, A, _QT)
            W = 2 * r.scale
            lip = _dist_mod(S, W).max(axis=2)
            half = _dist_mod(S - r.scale, W).max(axis=2)
            return np.minimum(lip, half)
        if k is Kind.PADIC:
            qq = q[:, :, 0].astype(object) if self.obj else q[:, :, 0]
            S = np.mod(qq @ self.X, self.P)
            v = np.zeros(S.shape, dtype=np.int64)
            for pk in self.pk:
                res = np.mod(S, pk)
                ok = (res <= self.comp) | (pk - res <= self.comp)
                if not ok.any():
                    break
                v += ok.astype(np.int64)
            return -v
        # Laurent: count leading zero coefficients of the fractional part
        F = r.field
        width = q.shape[2]
        S = r.precision - (width - 1)
        if S < 1:
            raise PrecisionExhausted("precision too small for the polynomial degree")
        out = np.empty((q.shape[0], self.n), dtype=np.int64)
        for i in range(self.n):
            acc = np.zeros((q.shape[0], S), dtype=np.int64)
            for j in range(self.m):
                for e in range(width):
                    c = q[:, j, e]
                    if not c.any():
                        continue
                    acc = F.add(acc, F.mul(c[:, None], A[j, i, e : e + S][None, :]))
            nz = acc != 0
            out[:, i] = -np.where(nz.any(axis=1), np.argmax(nz, axis=1), S)
        return out


def _static_thresholds(sys_: LinearFormSystem, width: int) -> np.ndarray:
    r = sys_.ring
    return np.array([_threshold(r, g, width) for g in sys_.error_bounds], dtype=np.int64)


def _threshold(ring: RingDescriptor, gamma, width: int = 1) -> int:
    """Largest badness value that still meets ``error < gamma``."""
    k = ring.kind
    if k in (Kind.REAL, Kind.COMPLEX):
        return _strict_floor(gamma, ring.scale)
    if k is Kind.QUATERNION:
        return _strict_floor(gamma, 2 * ring.scale)
    if k is Kind.PADIC:
        need = _min_valuation(gamma, ring.p, ring.precision)
        if need > ring.precision:
            raise PrecisionExhausted(f"bound {gamma} is below p^-{ring.precision}")
        return -need
    need = _min_valuation(gamma, ring.t, ring.precision)
    avail = ring.precision - (width - 1)
    if need - 1 > avail:
        raise PrecisionExhausted(f"bound {gamma} needs {need - 1} vanishing coefficients, only {avail} available")
    return -max(need - 1, 0)


# ---------------------------------------------------------------------------
# exact per-candidate evaluation (records and verification)


def _round_half_down(S: int, W: int) -> int:
    return (S + W // 2 - 1) // W


def _exact_eval(sys_: LinearFormSystem, qrow: np.ndarray):
    """(q points, p points, errors, below_floor) for one candidate."""
    r = sys_.ring
    k = r.kind
    A = sys_._arr
    m, n = sys_.m, sys_.n
    qs, ps, errs, floors = [], [], [], []
    if k is Kind.REAL:
        qv = [int(x) for x in qrow[:, 0]]
        qs = [IntegerPoint(k, v) for v in qv]
        W = r.scale
        for i in range(n):
            S = sum(qv[j] * int(A[j, i, 0]) for j in range(m))
            p = _round_half_down(S, W)
            ps.append(IntegerPoint(k, p))
            errs.append(Fraction(abs(S - p * W), W))
            floors.append(False)
    elif k is Kind.COMPLEX:
        qv = [(int(a), int(b)) for a, b in qrow]
        qs = [IntegerPoint(k, v) for v in qv]
        W = r.scale
        for i in range(n):
            re = sum(a * int(A[j, i, 0]) - b * int(A[j, i, 1]) for j, (a, b) in enumerate(qv))
            im = sum(a * int(A[j, i, 1]) + b * int(A[j, i, 0]) for j, (a, b) in enumerate(qv))
            pr, pi = _round_half_down(re, W), _round_half_down(im, W)
            ps.append(IntegerPoint(k, (pr, pi)))
            errs.append(max(Fraction(abs(re - pr * W), W), Fraction(abs(im - pi * W), W)))
            floors.append(False)
    elif k is Kind.QUATERNION:
        from .rings import quat_mul

        qv = [tuple(int(c) for c in row) for row in qrow]
        qs = [IntegerPoint(k, v) for v in qv]
        W = 2 * r.scale
        for i in range(n):
            S = [0, 0, 0, 0]
            for j in range(m):
                a = tuple(int(c) for c in A[j, i])
                prod = quat_mul(a, qv[j]) if sys_.right_multiply else quat_mul(qv[j], a)
                S = [x + y for x, y in zip(S, prod)]
            lip = tuple(2 * _round_half_down(s, W) for s in S)
            half = tuple(2 * _round_half_down(s - W // 2, W) + 1 for s in S)
            el = max(Fraction(abs(2 * s - c * W), 2 * W) for s, c in zip(S, lip))
            eh = max(Fraction(abs(2 * s - c * W), 2 * W) for s, c in zip(S, half))
            best = lip if (el < eh or (el == eh and lip < half)) else half
            ps.append(IntegerPoint(k, best))
            errs.append(min(el, eh))
            floors.append(False)
    elif k is Kind.PADIC:
        qv = [int(x) for x in qrow[:, 0]]
        qs = [IntegerPoint(k, v) for v in qv]
        P = r.p**r.precision
        comp = sys_.companions()
        for i in range(n):
            S = sum(qv[j] * int(A[j, i]) for j in range(m)) % P
            v = 0
            while v < r.precision:
                pk = r.p ** (v + 1)
                res = S % pk
                if res <= comp[i] or pk - res <= comp[i]:
                    v += 1
                else:
                    break
            pk = r.p**v
            res = S % pk
            reps = [x for x in (res, res - pk) if abs(x) <= comp[i]]
            a = min(reps, key=lambda x: (abs(x), x)) if v else 0
            ps.append(IntegerPoint(k, a))
            below = v >= r.precision
            errs.append(Fraction(0) if below else Fraction(1, r.p**v))
            floors.append(below)
    else:
        F = r.field
        t = r.t
        qv = [tuple(int(c) for c in row) for row in qrow]
        qs = [IntegerPoint(k, v, t=t) for v in qv]
        width = qrow.shape[1]
        S = r.precision - (width - 1)
        pol = sys_._polys
        for i in range(n):
            frac = [0] * S
            poly = [0] * (width + max((len(pol[j][i]) for j in range(m)), default=0) + 1) if pol else [0] * (width + 1)
            for j in range(m):
                c = qv[j]
                alpha = [int(x) for x in A[j, i]]
                for e, ce in enumerate(c):
                    if not ce:
                        continue
                    for s in range(1, S + 1):
                        frac[s - 1] = int(F.add(frac[s - 1], F.mul(ce, alpha[s + e - 1])))
                    for d in range(0, e):
                        poly[d] = int(F.add(poly[d], F.mul(ce, alpha[e - d - 1])))
                    if pol:
                        for d, pc in enumerate(pol[j][i]):
                            poly[d + e] = int(F.add(poly[d + e], F.mul(ce, pc)))
            ps.append(IntegerPoint(k, poly, t=t))
            lead = next((s for s, c in enumerate(frac) if c), None)
            if lead is None:
                errs.append(Fraction(0))
                floors.append(True)
            else:
                errs.append(Fraction(1, t ** (lead + 1)))
                floors.append(False)
    return tuple(qs), tuple(ps), tuple(errs), tuple(floors)


def _record_height(sys_: LinearFormSystem, qs, ps):
    if sys_.weight is not None:
        vec = [z.value for z in qs]
        if len(sys_.weight.v) == sys_.m + sys_.n:
            vec += [z.value for z in ps]
        h = quasi_norm(vec, sys_.weight)
        return _fr(h)
    if sys_.ring.kind is Kind.PADIC:
        return Fraction(max(abs(z.value) for z in qs + ps))
    return max(z.sup_norm() for z in qs)


def _build_record(sys_: LinearFormSystem, qrow, examined: int) -> SolutionRecord:
    qs, ps, errs, floors = _exact_eval(sys_, qrow)
    return SolutionRecord(Status.FOUND, qs, ps, errs, _record_height(sys_, qs, ps), floors, examined)


# ---------------------------------------------------------------------------
# search


def _search(sys_: LinearFormSystem, cands: _Candidates, thresholds, strategy: Strategy):
    """Return (index or None, examined).  ``thresholds`` is (n,) or a
    callable mapping a level array to (K, n) thresholds."""
    ev = _Evaluator(sys_)
    K = cands.q.shape[0]
    best = None
    best_key = None
    start = 0
    step = 1024
    while start < K:
        stop = min(K, start + step)
        bad = ev.badness(cands.q[start:stop])
        thr = thresholds(cands.level[start:stop]) if callable(thresholds) else thresholds
        ok = np.all(bad <= thr, axis=1)
        if ok.any():
            if strategy is not Strategy.MIN_ERROR:
                return start + int(np.argmax(ok)), start + int(np.argmax(ok)) + 1
            key = bad.max(axis=1)
            key = np.where(ok, key, np.iinfo(np.int64).max)
            i = int(np.argmin(key))
            if best_key is None or key[i] < best_key:
                best, best_key = start + i, int(key[i])
        start = stop
        step = min(step * 4, _CHUNK)
    return best, K


def solve(
    sys_: LinearFormSystem,
    strategy: Strategy | str = Strategy.FIRST_FOUND,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
) -> SolutionRecord:
    """Exhaustive search for a nonzero ``q`` meeting every bound.

    FirstFound and MinHeight both return the first hit in canonical order
    (the order is by height, so they coincide); MinError minimises the
    largest per-coordinate error, ties going to the earlier candidate.
    A miss is ``CertifiedNone`` when every candidate under the height bounds
    was examined and ``SearchExhausted`` when the budget cut the search.
    """
    strategy = Strategy(strategy)
    bounds = _level_bounds(sys_.ring, sys_.height_bounds)
    cands = _generate(sys_.ring, bounds, sys_.weight, max_candidates)
    thr = _static_thresholds(sys_, cands.q.shape[2] if cands.q.size else 1)
    idx, examined = _search(sys_, cands, thr, strategy)
    if idx is None:
        status = Status.CERTIFIED_NONE if cands.complete else Status.SEARCH_EXHAUSTED
        return SolutionRecord(status, examined=examined)
    return _build_record(sys_, cands.q[idx], examined)


def verify_record(sys_: LinearFormSystem, rec: SolutionRecord) -> bool:
    """Recompute a Found record from scratch and re-check every bound."""
    if not rec.found:
        return False
    r = sys_.ring
    if all(z.is_zero() for z in rec.q):
        return False
    width = 1
    if r.kind is Kind.LAURENT:
        width = max(len(z.value) for z in rec.q)
        width = max(width, 1)
        qrow = np.array([list(z.value) + [0] * (width - len(z.value)) for z in rec.q], dtype=np.int64)
    elif r.kind is Kind.COMPLEX:
        qrow = np.array([list(z.value) for z in rec.q], dtype=np.int64)
    elif r.kind is Kind.QUATERNION:
        qrow = np.array([list(z.value) for z in rec.q], dtype=np.int64)
    else:
        qrow = np.array([[z.value] for z in rec.q], dtype=np.int64)
    qs, ps, errs, floors = _exact_eval(sys_, qrow)
    if (qs, ps, errs) != (rec.q, rec.p, rec.errors):
        return False
    for e, fl, g in zip(errs, floors, sys_.error_bounds):
        if not fl and _pp(e).compare(_pp(g)) >= 0:
            return False
    for z, h in zip(rec.q, sys_.height_bounds):
        if _pp(z.sup_norm()).compare(_pp(h)) > 0:
            return False
    if r.kind is Kind.PADIC:
        if any(abs(z.value) > c for z, c in zip(rec.p, sys_.companions())):
            return False
    return True


# ---------------------------------------------------------------------------
# Minkowski certification


@dataclass(frozen=True)
class CertificationReport:
    ring: str
    m: int
    n: int
    trials: int
    found: int
    failures: tuple[int, ...]
    product_condition: bool
    volume_condition: bool
    detail: str = ""

    @property
    def summary(self) -> str:
        return f"{self.found}/{self.trials}"


def minkowski_conditions(ring: RingDescriptor, m: int, n: int, error_bounds, height_bounds, companion_bounds=None):
    """(product_condition, volume_condition, detail) for the ring's lemma.

    The first is the product condition as stated for the ring; the second
    is the finite-scale condition under which the lattice-point argument
    applies verbatim to the search performed here."""
    eb = [_pp(_fr(x)) for x in error_bounds]
    hb = [_pp(_fr(x)) for x in height_bounds]
    prod = PowerProduct.of(1)
    for x in eb + hb:
        prod = prod * x
    k = ring.kind
    if k in (Kind.REAL, Kind.COMPLEX):
        ok = prod.compare(1) >= 0
        return ok, ok, f"prod = {float(prod):.6g}, needs >= 1"
    if k is Kind.QUATERNION:
        target = PowerProduct.of(Fraction(1, 2 ** (m + n)))
        prod_ok = prod.compare(target) >= 0
        vol = (prod**4).compare(target) >= 0
        return prod_ok, vol, f"prod = {float(prod):.6g}, product needs >= 2^-{m + n}, lattice needs prod^4 >= 2^-{m + n}"
    if k is Kind.LAURENT:
        t = ring.t
        prod_ok = prod.compare(t ** (n + m)) >= 0
        degs = [_max_degree(h, t) for h in hb]
        need = [_min_valuation(g, t, ring.precision) for g in eb]
        free = sum(d + 1 for d in degs)
        cons = sum(max(x - 1, 0) for x in need)
        vol = free > cons and max(need) - 1 <= ring.precision - max(degs)
        return prod_ok, vol, f"{free} free coefficients against {cons} constraints"
    p = ring.p
    allh = list(hb) + ([_pp(_fr(x)) for x in companion_bounds] if companion_bounds else [max(hb, key=float)] * n)
    hprod = PowerProduct.of(1)
    for x in allh:
        hprod = hprod * x
    epro = PowerProduct.of(1)
    for x in eb:
        epro = epro * x
    prod_ok = epro.compare(PowerProduct.of(Fraction(1, p**n)) / hprod) >= 0 and all(x.compare(Fraction(1, p)) < 0 for x in eb)
    ks = [_min_valuation(g, p, ring.precision) for g in eb]
    ints = [_floor(x) for x in allh]
    lattice = math.prod(ints) >= p ** sum(ks)
    forced = all(p**kk > c for kk, c in zip(ks, ints[m:]))
    return prod_ok, lattice and forced, f"valuations {ks}, prod H = {math.prod(ints)}, forced a0 != 0: {forced}"


def _trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1, dtype=np.uint64)[0])


def certify_minkowski(
    ring: RingDescriptor,
    m: int,
    n: int,
    error_bounds,
    height_bounds,
    trials: int = 200,
    seed: int = 0,
    companion_bounds=None,
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
    right_multiply: bool = False,
) -> CertificationReport:
    """Sample ``trials`` matrices and solve each one exhaustively.

    Raises PreconditionUnmet when the ring's product condition fails.  The
    lemma promises ``found == trials``; the caller asserts it.
    """
    prod_ok, vol, detail = minkowski_conditions(ring, m, n, error_bounds, height_bounds, companion_bounds)
    if not prod_ok:
        raise PreconditionUnmet(f"{ring.describe()}: product condition fails ({detail})")
    sample = sample_uniform_array(ring, (m, n), _trial_seed(seed, 0))
    base = LinearFormSystem(ring, sample, tuple(error_bounds), tuple(height_bounds), None, companion_bounds, right_multiply)
    cands = _generate(ring, _level_bounds(ring, base.height_bounds), None, max_candidates)
    thr = _static_thresholds(base, cands.q.shape[2] if cands.q.size else 1)
    found, failures = 0, []
    for i in range(trials):
        arr = sample_uniform_array(ring, (m, n), _trial_seed(seed, i))
        sys_ = LinearFormSystem(ring, arr, base.error_bounds, base.height_bounds, None, companion_bounds, right_multiply)
        idx, _ = _search(sys_, cands, thr, Strategy.FIRST_FOUND)
        if idx is None:
            failures.append(i)
        else:
            found += 1
    return CertificationReport(ring.describe(), m, n, trials, found, tuple(failures), prod_ok, vol, detail)


# ---------------------------------------------------------------------------
# resonant neighbourhoods


def enumerate_resonant_neighborhood_hits(
    ring: RingDescriptor,
    q,
    ball_center: Sequence,
    ball_radius,
    thickening: Sequence,
    height_cap: int | None = None,
) -> int:
    """Count companion vectors ``p`` whose thickened resonant set meets a ball.

    Real and complex (m = 1): ``p/q`` must lie within ``r + delta_i`` of the
    centre in each coordinate (sup norm).  p-adic (m = 1): the condition is
    ``|q c_i - p_i|_p / |q|_p < r + delta_i`` with ``|p_i| <= height_cap``.
    The count is the product of the per-coordinate counts.
    """
    qs = q if isinstance(q, (list, tuple)) else [q]
    if len(qs) != 1:
        raise PreconditionUnmet("resonant neighbourhood counts are implemented for m = 1")
    z = qs[0]
    if not isinstance(z, IntegerPoint):
        z = IntegerPoint(ring.kind, z, t=ring.t)
    if z.is_zero():
        raise PreconditionUnmet("q must be nonzero")
    r = _fr(ball_radius)
    if any(_fr(d) >= r for d in thickening):
        raise PreconditionUnmet("thickening must be below the ball radius")
    k = ring.kind
    total = 1
    for c, d in zip(ball_center, thickening):
        rad = r + _fr(d)
        if k is Kind.REAL:
            c = _fr(c)
            qq = z.value
            lo, hi = sorted((qq * (c - rad), qq * (c + rad)))
            cnt = math.ceil(hi) - math.floor(lo) - 1
            if height_cap is not None:
                cnt = sum(1 for p in range(math.floor(lo) + 1, math.ceil(hi)) if abs(p) <= height_cap)
        elif k is Kind.COMPLEX:
            c = complex(c) if not isinstance(c, tuple) else c
            cre, cim = (_fr(c[0]), _fr(c[1])) if isinstance(c, tuple) else (_fr(c.real), _fr(c.imag))
            a, b = z.value
            pre = a * cre - b * cim
            pim = a * cim + b * cre
            reach = math.isqrt(2 * (a * a + b * b)) + 1
            R = math.ceil(rad * reach) + 1
            norm2 = a * a + b * b
            cnt = 0
            for x in range(math.floor(pre) - R, math.ceil(pre) + R + 1):
                for y in range(math.floor(pim) - R, math.ceil(pim) + R + 1):
                    if height_cap is not None and max(abs(x), abs(y)) > height_cap:
                        continue
                    # p/q = p * conj(q) / |q|^2
                    ur = Fraction(x * a + y * b, norm2)
                    ui = Fraction(y * a - x * b, norm2)
                    if max(abs(cre - ur), abs(cim - ui)) < rad:
                        cnt += 1
        elif k is Kind.PADIC:
            if height_cap is None:
                raise PreconditionUnmet("p-adic counts need a height cap")
            p, L = ring.p, ring.precision
            P = p**L
            cval = int(c.padic_integer()) if isinstance(c, AmbientPoint) else int(c) % P
            qa = z.value
            vq = 0
            while qa % p**(vq + 1) == 0:
                vq += 1
            qabs = Fraction(1, p**vq)
            cnt = 0
            for a in range(-height_cap, height_cap + 1):
                diff = (qa * cval - a) % P
                if diff == 0:
                    dist = Fraction(0)
                else:
                    v = 0
                    while diff % p ** (v + 1) == 0:
                        v += 1
                    dist = Fraction(1, p**v) / qabs
                if dist < rad:
                    cnt += 1
        else:
            raise PreconditionUnmet(f"resonant counts not implemented for {k.value}")
        total *= cnt
    return total


# ---------------------------------------------------------------------------
# ubiquity


@dataclass(frozen=True)
class UbiquityReport:
    fraction: float
    hits: int
    samples: int
    constant: Fraction
    u: int
    meets_constant: bool


def empirical_ubiquity_check(
    ring: RingDescriptor,
    spec: ApproxSpec,
    rho,
    k: int,
    samples: int = 2000,
    constant_c=Fraction(1, 2),
    ball_center: Sequence | None = None,
    ball_radius=Fraction(1, 2),
    seed: int = 0,
    scale=1,
) -> UbiquityReport:
    """Monte Carlo fraction of a ball covered by ``U_{alpha in J_k} Delta(R_alpha, rho(u_k))``.

    ``J_k`` collects heights in ``(u_{k-1}, u_k]``.  ``rho`` is a BalancedRho
    (its entry at ``u_k`` is used) or an explicit tuple of radii.  Real: the
    resonant sets are the points ``p/q``.  p-adic: they are the solution sets
    of ``a_0 x = a_i`` and distances are ``|a_0 x_i - a_i|_p / |a_0|_p``;
    ``scale`` multiplies every radius (the p-adic proof's ``p**lambda_0``).
    """
    if spec.m != 1:
        raise PreconditionUnmet("ubiquity checks are implemented for m = 1")
    pts = spec.schedule.points()
    if not 1 <= k <= len(pts):
        raise PreconditionUnmet(f"k = {k} outside the schedule")
    u = pts[k - 1]
    lo = pts[k - 2] if k >= 2 else 0
    if isinstance(rho, BalancedRho):
        entry = next((e for e in rho.entries if e.u == u), None)
        if entry is None:
            raise PreconditionUnmet(f"rho has no entry at u = {u}")
        radii = tuple(entry.rho)
    else:
        radii = tuple(rho)
    n = spec.n
    if len(radii) != n:
        raise PreconditionUnmet("need one radius per coordinate")
    radii = tuple(_pp(x) * scale for x in radii)
    c_lim = _fr(constant_c)
    rng = np.random.default_rng(seed)
    if ring.kind is Kind.REAL:
        W = ring.scale
        center = [Fraction(1, 2)] * n if ball_center is None else [_fr(c) for c in ball_center]
        rad = _fr(ball_radius)
        lo_num = [int((c - rad) * W) for c in center]
        hi_num = [int((c + rad) * W) for c in center]
        X = np.stack([rng.integers(lo_num[i], hi_num[i], size=samples, dtype=np.int64) for i in range(n)], axis=1)
        qs = np.arange(lo + 1, u + 1, dtype=np.int64)
        # ||q x_i|| < q rho_i  <=>  dist numerator <= T_i(q)
        T = np.array([[_strict_floor(radii[i] * int(qq), W) for i in range(n)] for qq in qs], dtype=np.int64)
        hits = 0
        for s in range(samples):
            S = qs[:, None] * X[s][None, :]
            ok = np.all(_dist_mod(S, W) <= T, axis=1)
            hits += bool(ok.any())
    elif ring.kind is Kind.PADIC:
        p, L = ring.p, ring.precision
        P = p**L
        if ball_center is None:
            center, rad_v = [0] * n, 0
        else:
            center = [int(c) % P for c in ball_center]
            rad = _fr(ball_radius)
            rad_v = 0
            while Fraction(1, p**rad_v) > rad:
                rad_v += 1
        X = [
            [(center[i] + p**rad_v * int(rng.integers(0, p ** min(L - rad_v, 12)))) % P for i in range(n)]
            for _ in range(samples)
        ]
        need = [_min_valuation(radii[i], p, L) for i in range(n)]
        hits = 0
        a0s = [a for a in range(lo + 1, u + 1)]
        for x in X:
            hit = False
            for a0 in a0s:
                v0 = 0
                while a0 % p ** (v0 + 1) == 0:
                    v0 += 1
                good = True
                for i in range(n):
                    # best companion a_i with |a_i| <= u: the largest valuation reachable
                    S = a0 * x[i] % P
                    kk = need[i] + v0
                    pk = p**kk
                    res = S % pk
                    if not (res <= u or pk - res <= u):
                        good = False
                        break
                if good:
                    hit = True
                    break
            hits += hit
    else:
        raise PreconditionUnmet(f"ubiquity checks are implemented for real and p-adic rings, not {ring.kind.value}")
    frac = hits / samples
    return UbiquityReport(frac, hits, samples, c_lim, u, frac >= float(c_lim))


# ---------------------------------------------------------------------------
# text formats


def format_ring(ring: RingDescriptor) -> str:
    k = ring.kind
    if k is Kind.PADIC:
        return f"padic:{ring.p}:{ring.precision}"
    if k is Kind.LAURENT:
        return f"laurent:{ring.t}:{ring.precision}"
    return f"{k.value}:{ring.precision}"


def parse_ring(token: str) -> RingDescriptor:
    """``real[:L]``, ``complex[:L]``, ``quaternion[:L]``, ``padic:p[:L]``, ``laurent:t[:L]``."""
    parts = token.strip().lower().split(":")
    try:
        kind = Kind(parts[0])
        nums = [int(x) for x in parts[1:]]
    except ValueError as e:
        raise ParseError(f"bad ring token {token!r}") from e
    if kind is Kind.PADIC:
        if not nums:
            raise ParseError("padic ring needs p")
        return RingDescriptor.padic(nums[0], *nums[1:2])
    if kind is Kind.LAURENT:
        if not nums:
            raise ParseError("laurent ring needs t")
        return RingDescriptor.laurent(nums[0], *nums[1:2])
    return RingDescriptor(kind, *nums[:1])


def write_matrix(ring: RingDescriptor, A: Sequence[Sequence[AmbientPoint]]) -> str:
    rows = [list(r) for r in A]
    lines = [f"{format_ring(ring)} {len(rows)} {len(rows[0])}"]
    for r in rows:
        lines += [format_point(x) for x in r]
    return "\n".join(lines) + "\n"


def read_matrix(text: str) -> tuple[RingDescriptor, list[list[AmbientPoint]]]:
    """Parse the matrix format: header ``ring m n`` then one entry per line."""
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty matrix file")
    ln0, head = lines[0]
    parts = head.split()
    if len(parts) != 3:
        raise ParseError("header must be 'ring m n'", ln0)
    ring = parse_ring(parts[0])
    try:
        m, n = int(parts[1]), int(parts[2])
    except ValueError as e:
        raise ParseError("bad dimensions", ln0) from e
    body = lines[1:]
    if len(body) != m * n:
        raise ParseError(f"expected {m * n} entries, found {len(body)}", ln0)
    pts = []
    for ln, txt in body:
        try:
            pts.append(parse_point(txt, ring))
        except ParseError as e:
            raise ParseError(str(e), ln) from e
    return ring, [pts[j * n : (j + 1) * n] for j in range(m)]


def solution_header(m: int, n: int) -> list[str]:
    return ["status", "height"] + [f"q{j + 1}" for j in range(m)] + [f"p{i + 1}" for i in range(n)] + [f"err{i + 1}" for i in range(n)]


def solution_row(rec: SolutionRecord, m: int, n: int) -> list[str]:
    def fmt(x):
        if x is None:
            return ""
        if isinstance(x, Fraction):
            return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
        return repr(x)

    if not rec.found:
        return [rec.status.value, ""] + [""] * (m + 2 * n)
    return (
        [rec.status.value, fmt(rec.height)]
        + [format_integer(z) for z in rec.q]
        + [format_integer(z) for z in rec.p]
        + [fmt(e) for e in rec.errors]
    )
