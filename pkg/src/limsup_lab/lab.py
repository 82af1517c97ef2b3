"""Empirical harness: truncated membership, dichotomy scans, box counting and
covering sums.

The truncated limsup set at cap ``H`` is the set of matrices having some
``q`` with ``|q| <= H`` and ``[[q A_i]] < psi_i(|q|)`` for every i.  Scans
report both full membership up to ``H`` and tail membership over
``[H0, H]``; the first probes the divergence half of the dichotomy, the
second the convergence half.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .approx import ApproxSpec, PowerProduct
from .dimension import ClosedFormCase, Setting, cover_exponents
from .errors import BudgetExceeded, PrecisionExhausted, PreconditionUnmet
from .rings import Kind, RingDescriptor, sample_uniform_array
from .solver import (
    LinearFormSystem,
    SolutionRecord,
    Status,
    _build_record,
    _Evaluator,
    _generate,
    _level_bounds,
    _threshold,
)

__all__ = [
    "MembershipQuery",
    "DichotomyScan",
    "ScanRow",
    "BoxCountEstimate",
    "CoveringRow",
    "TransitionReport",
    "is_member_truncated",
    "measure_scan",
    "binomial_ci",
    "count_rectangle_boxes",
    "layer_rectangles",
    "default_scales",
    "box_count_dimension",
    "covering_sum",
    "covering_transition",
    "DEFAULT_BOX_BUDGET",
]

DEFAULT_BOX_BUDGET = 50_000_000


# ---------------------------------------------------------------------------
# membership


def _level_height(ring: RingDescriptor, level: int):
    if ring.kind is Kind.QUATERNION:
        return Fraction(level, 2)
    if ring.kind is Kind.LAURENT:
        return Fraction(ring.t) ** level
    return level


class _Engine:
    """Candidates up to the cap plus a per-level threshold table, shared by
    every sample of a scan."""

    def __init__(self, ring: RingDescriptor, spec: ApproxSpec, H):
        self.ring, self.spec = ring, spec
        m, n = spec.m, spec.n
        bounds = _level_bounds(ring, (H,) * m)
        self.cands = _generate(ring, bounds, None, 1 << 62)
        width = self.cands.q.shape[2]
        top = int(self.cands.level.max()) if self.cands.level.size else 0
        lo = -1 if ring.kind is Kind.LAURENT else 0
        table = np.zeros((top - lo + 1, n), dtype=np.int64)
        for lev in range(max(lo, 0), top + 1):
            h = _level_height(ring, lev)
            if h == 0:
                continue
            for i in range(n):
                table[lev - lo, i] = _threshold(ring, spec.psi(i, h), width)
        self.table, self.lo = table, lo
        self.thr = table[self.cands.level - lo]
        self.m, self.n = m, n

    def _system(self, X) -> LinearFormSystem:
        one = (Fraction(1),)
        return LinearFormSystem(self.ring, X, one * self.n, one * self.m)

    def hit_mask(self, X) -> np.ndarray:
        sys_ = self._system(X)
        ev = _Evaluator(sys_)
        bad = ev.badness(self.cands.q)
        return np.all(bad <= self.thr, axis=1)


def _check_padic_floor(ring: RingDescriptor, spec: ApproxSpec, H) -> None:
    if ring.kind is not Kind.PADIC:
        return
    floor = PowerProduct.of(Fraction(1, ring.p ** (ring.precision - 2)))
    for i in range(spec.n):
        if spec.psi(i, H).compare(floor) <= 0:
            raise PrecisionExhausted(f"psi_{i + 1}({H}) is within two digits of p^-{ring.precision}")


@dataclass(frozen=True, eq=False)
class MembershipQuery:
    ring: RingDescriptor
    X: object
    spec: ApproxSpec
    height_cap: int


def is_member_truncated(query: MembershipQuery) -> tuple[bool, SolutionRecord | None]:
    """Is there ``q`` with height at most the cap and every error below
    ``psi_i(height(q))``?  The witness is the first such ``q`` in canonical
    order."""
    _check_padic_floor(query.ring, query.spec, query.height_cap)
    eng = _Engine(query.ring, query.spec, query.height_cap)
    mask = eng.hit_mask(query.X)
    if not mask.any():
        return False, None
    idx = int(np.argmax(mask))
    sys_ = eng._system(query.X)
    rec = _build_record(sys_, eng.cands.q[idx], idx + 1)
    return True, rec


# ---------------------------------------------------------------------------
# dichotomy scans


def binomial_ci(hits: int, N: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Normal-approximation interval, clipped to [0, 1]."""
    f = hits / N
    half = z * math.sqrt(f * (1 - f) / N)
    return max(0.0, f - half), min(1.0, f + half)


@dataclass(frozen=True)
class DichotomyScan:
    """Samples ``N`` matrices once and evaluates every spec on them.

    ``ladder`` lists the caps for full membership; ``tail_starts`` lists the
    ``H0`` values for tail membership over ``[H0, max(ladder)]``."""

    specs: tuple[tuple[str, ApproxSpec], ...]
    N: int
    ladder: tuple[int, ...]
    seed: int
    ring: RingDescriptor = field(default_factory=RingDescriptor.real)
    tail_starts: tuple[int, ...] = ()
    modes: tuple[str, ...] = ("full", "tail")

    def __post_init__(self):
        if self.N < 100:
            raise PreconditionUnmet("scans need N >= 100 samples")
        lad = tuple(int(h) for h in self.ladder)
        if not lad or any(b <= a for a, b in zip(lad, lad[1:])):
            raise PreconditionUnmet("height ladder must be increasing")
        object.__setattr__(self, "ladder", lad)
        object.__setattr__(self, "tail_starts", tuple(sorted(int(h) for h in self.tail_starts)))
        shapes = {(s.m, s.n) for _, s in self.specs}
        if len(shapes) != 1:
            raise PreconditionUnmet("all specs in a scan must share (m, n)")
        if any(h > self.ladder[-1] for h in self.tail_starts):
            raise PreconditionUnmet("tail starts must not exceed the top of the ladder")


@dataclass(frozen=True)
class ScanRow:
    spec_id: str
    H: int
    hits: int
    N: int
    fraction: float
    ci_lo: float
    ci_hi: float

    def as_list(self) -> list[str]:
        return [self.spec_id, str(self.H), str(self.hits), str(self.N), f"{self.fraction:.6f}", f"{self.ci_lo:.6f}", f"{self.ci_hi:.6f}"]


SCAN_HEADER = ["spec_id", "H", "hits", "N", "fraction", "ci_lo", "ci_hi"]


def _row(spec_id, H, hits, N) -> ScanRow:
    lo, hi = binomial_ci(hits, N)
    return ScanRow(spec_id, H, hits, N, hits / N, lo, hi)


def measure_scan(scan: DichotomyScan) -> list[ScanRow]:
    """Full and tail membership fractions per spec.

    Full rows are labelled by the spec id with ``H`` the cap.  Tail rows are
    labelled ``<id>/tail`` with ``H`` holding the tail start ``H0``; the top
    of the tail window is ``max(ladder)``.  Each sample's first and last
    hitting heights are recorded once, so all rows come from one pass.
    """
    ring = scan.ring
    top = scan.ladder[-1]
    m, n = scan.specs[0][1].m, scan.specs[0][1].n
    X = sample_uniform_array(ring, (m, n), scan.seed, count=scan.N)
    rows: list[ScanRow] = []
    for spec_id, spec in scan.specs:
        _check_padic_floor(ring, spec, top)
        eng = _Engine(ring, spec, top)
        heights = eng.cands.level
        first = np.full(scan.N, np.iinfo(np.int64).max, dtype=np.int64)
        last = np.full(scan.N, -1, dtype=np.int64)
        for s in range(scan.N):
            mask = eng.hit_mask(X[s])
            if mask.any():
                lv = heights[mask]
                first[s], last[s] = lv.min(), lv.max()
        if "full" in scan.modes:
            for H in scan.ladder:
                rows.append(_row(spec_id, H, int((first <= _level_of(ring, H)).sum()), scan.N))
        if "tail" in scan.modes:
            for H0 in scan.tail_starts:
                rows.append(_row(f"{spec_id}/tail", H0, int((last >= _level_of(ring, H0)).sum()), scan.N))
    return rows


def _level_of(ring: RingDescriptor, H) -> int:
    return _level_bounds(ring, (H,))[0]


# ---------------------------------------------------------------------------
# box counting


@dataclass(frozen=True)
class BoxCountEstimate:
    scales: tuple[float, ...]
    counts: tuple[int, ...]
    slope: float
    residual: float
    log_eps: tuple[float, ...] = ()
    log_counts: tuple[float, ...] = ()
    rectangles: int = 0
    method: str = ""

    def rows(self) -> list[list[str]]:
        out = []
        for e, c, le, lc in zip(self.scales, self.counts, self.log_eps, self.log_counts):
            out.append([repr(e), str(c), f"{le:.12g}", f"{lc:.12g}", f"{self.slope:.12g}", f"{self.residual:.12g}"])
        return out


BOX_HEADER = ["eps", "count", "log_eps", "log_count", "slope", "residual"]


def _cell_range(lo_exact, hi_exact, lo_f: np.ndarray, hi_f: np.ndarray, k: int):
    """First and last cell index (side 2**-k) meeting each open interval.

    Float positions are used unless within rounding distance of a cell
    boundary, where the exact callbacks decide."""
    N = 1 << k
    tol = 1e-10 + N * 2e-15
    xl, xh = lo_f * N, hi_f * N
    ilo = np.floor(xl).astype(np.int64)
    ihi = (np.ceil(xh) - 1).astype(np.int64)
    near_lo = np.abs(xl - np.round(xl)) < tol
    near_hi = np.abs(xh - np.round(xh)) < tol
    for r in np.nonzero(near_lo)[0]:
        ilo[r] = lo_exact(int(r), k)
    for r in np.nonzero(near_hi)[0]:
        ihi[r] = hi_exact(int(r), k)
    return np.clip(ilo, 0, N - 1), np.clip(ihi, 0, N - 1)


def count_rectangle_boxes(lo: np.ndarray, hi: np.ndarray, k: int, disjoint: bool = False, budget: int = DEFAULT_BOX_BUDGET) -> int:
    """Number of cells of side ``2**-k`` in ``[0,1)^d`` meeting a union of
    open boxes ``(lo, hi)`` (arrays of shape ``(R, d)``), float positions.

    With ``disjoint=True`` the caller certifies that no two boxes share a
    cell and the count is a sum of products; otherwise cells are collected
    and deduplicated, subject to ``budget``."""
    N = 1 << k
    ilo = np.clip(np.floor(lo * N).astype(np.int64), 0, N - 1)
    ihi = np.clip((np.ceil(hi * N) - 1).astype(np.int64), 0, N - 1)
    return _count_from_ranges(ilo, ihi, k, disjoint, budget)


def _count_from_ranges(ilo, ihi, k, disjoint, budget) -> int:
    span = np.maximum(ihi - ilo + 1, 0)
    per = np.prod(span, axis=1)
    if disjoint:
        return int(per.sum())
    d = ilo.shape[1]
    N = 1 << k
    if d <= 2 and N**d <= _GRID_CELLS:
        return _count_on_grid(ilo[per > 0], ihi[per > 0], N, d)
    total = int(per.sum())
    if total > budget:
        raise BudgetExceeded(f"{total} cells exceed the budget {budget}")
    keys = []
    for r in np.nonzero(per)[0]:
        axes = [np.arange(ilo[r, j], ihi[r, j] + 1, dtype=np.int64) for j in range(d)]
        grid = np.meshgrid(*axes, indexing="ij")
        lin = np.zeros(grid[0].shape, dtype=np.int64)
        for g in grid:
            lin = lin * N + g
        keys.append(lin.ravel())
    if not keys:
        return 0
    return int(np.unique(np.concatenate(keys)).size)


_GRID_CELLS = 1 << 24


def _count_on_grid(ilo, ihi, N, d) -> int:
    """Union count via a difference array over the full ``N**d`` grid."""
    if d == 1:
        D = np.zeros(N + 1, dtype=np.int64)
        np.add.at(D, ilo[:, 0], 1)
        np.add.at(D, ihi[:, 0] + 1, -1)
        return int((np.cumsum(D)[:N] > 0).sum())
    D = np.zeros((N + 1, N + 1), dtype=np.int32)
    a0, a1 = ilo[:, 0], ilo[:, 1]
    b0, b1 = ihi[:, 0] + 1, ihi[:, 1] + 1
    np.add.at(D, (a0, a1), 1)
    np.add.at(D, (a0, b1), -1)
    np.add.at(D, (b0, a1), -1)
    np.add.at(D, (b0, b1), 1)
    cover = np.cumsum(np.cumsum(D, axis=0), axis=1)[:N, :N]
    return int((cover > 0).sum())


@dataclass
class _Layer:
    q: np.ndarray  # (R,)
    p: np.ndarray  # (R, d)
    half: np.ndarray  # (R, d) float half-sides
    exps: tuple  # per coordinate exponent e_i, half-side q**-e_i
    Q: int


def layer_rectangles(case: ClosedFormCase, Q: int) -> _Layer:
    """Distinct resonant points ``p/q`` in ``[0,1]^n`` with ``Q <= q <= 2Q``.

    A point is kept at its smallest denominator in the layer, which carries
    the largest neighbourhood; half-sides are ``q**-(1 + tau_i)``."""
    if case.setting not in (Setting.TWODIM, Setting.REAL) or case.m != 1 or case.n > 2:
        raise PreconditionUnmet("box counting supports the real settings with m = 1 and n <= 2")
    n = case.n
    exps = tuple(1 + t for t in case.tau)
    qs, ps = [], []
    for q in range(Q, 2 * Q + 1):
        grids = np.meshgrid(*([np.arange(q + 1, dtype=np.int64)] * n), indexing="ij")
        P = np.stack([g.ravel() for g in grids], axis=1)
        g = np.gcd.reduce(np.concatenate([P, np.full((P.shape[0], 1), q)], axis=1), axis=1)
        d = q // g
        keep = q == d * ((Q + d - 1) // d)
        ps.append(P[keep])
        qs.append(np.full(int(keep.sum()), q, dtype=np.int64))
    q = np.concatenate(qs)
    p = np.concatenate(ps)
    half = np.stack([q.astype(np.float64) ** -float(e) for e in exps], axis=1)
    return _Layer(q, p, half, exps, Q)


def default_scales(case: ClosedFormCase, Q: int, count: int = 5) -> tuple[int, ...]:
    """Dyadic exponents ``k`` centred in log-space on ``eps* = 2 (prod h_i)^(1/n)``
    where ``h_i`` are the half-sides at the layer's geometric-mean height.

    Around ``eps*`` a single box's count ``prod(2 h_i/eps + 1)`` has unit
    secant slope per anisotropic coordinate pair, so the window measures the
    layer's scaling rather than the saturation of the point cloud."""
    qbar = Q * math.sqrt(2)
    exps = [1 + float(t) for t in case.tau]
    logh = sum(-e * math.log2(qbar) for e in exps) / len(exps)
    kstar = -(1 + logh)
    centre = round(kstar)
    start = centre - (count - 1) // 2
    return tuple(range(start, start + count))


def box_count_dimension(
    case: ClosedFormCase,
    layer: tuple[int, int] | int,
    scales: Sequence[int] | None = None,
    budget: int = DEFAULT_BOX_BUDGET,
) -> BoxCountEstimate:
    """Box-counting slope of one height layer ``U_{Q<=q<=2Q} Delta(p/q, psi(q)/q)``.

    ``scales`` are dyadic exponents ``k`` (cell side ``2**-k``); by default a
    five-scale window from :func:`default_scales`.  Cells are counted
    exactly: when the layer's points are provably separated by more than a
    cell plus both half-sides, the count is a sum over boxes; otherwise the
    hit cells are deduplicated.  BudgetExceeded is raised before any work if
    boxes times scales exceeds ``budget``.
    """
    Q = layer[0] if isinstance(layer, tuple) else int(layer)
    if isinstance(layer, tuple) and layer[1] != 2 * Q:
        raise PreconditionUnmet("layers are dyadic: (Q, 2Q)")
    ks = tuple(scales) if scales is not None else default_scales(case, Q)
    if len(ks) < 4:
        raise PreconditionUnmet("need at least 4 scales")
    n = case.n
    approx_rects = sum((q + 1) ** n for q in range(Q, 2 * Q + 1))
    if approx_rects * len(ks) > budget:
        raise BudgetExceeded(f"{approx_rects} boxes x {len(ks)} scales exceed the budget {budget}")
    L = layer_rectangles(case, Q)
    qf = L.q.astype(np.float64)
    centre = L.p / qf[:, None]
    lo_f, hi_f = centre - L.half, centre + L.half
    sep = 1.0 / (4.0 * Q * Q)
    hmax = float(L.half.max())
    counts = []
    methods = set()
    for k in ks:
        eps = 2.0**-k
        disjoint = sep - 2 * hmax > 2 * eps
        cols_lo, cols_hi = [], []
        for j in range(n):
            e = L.exps[j]

            def lo_exact(r, kk, j=j, e=e):
                return _exact_floor_shift(int(L.p[r, j]), int(L.q[r]), e, kk, -1)

            def hi_exact(r, kk, j=j, e=e):
                return _exact_floor_shift(int(L.p[r, j]), int(L.q[r]), e, kk, 1)

            a, b = _cell_range(lo_exact, hi_exact, lo_f[:, j], hi_f[:, j], k)
            cols_lo.append(a)
            cols_hi.append(b)
        ilo, ihi = np.stack(cols_lo, axis=1), np.stack(cols_hi, axis=1)
        counts.append(_count_from_ranges(ilo, ihi, k, disjoint, budget))
        methods.add("disjoint-sum" if disjoint else "union")
    eps = np.array([2.0**-k for k in ks])
    lx = -np.log(eps)
    ly = np.log(np.array(counts, dtype=np.float64))
    slope, icept = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + icept)) ** 2)))
    return BoxCountEstimate(
        tuple(float(e) for e in eps),
        tuple(int(c) for c in counts),
        float(slope),
        resid,
        tuple(float(np.log(e)) for e in eps),
        tuple(float(v) for v in ly),
        len(L.q),
        "+".join(sorted(methods)),
    )


def _exact_floor_shift(p: int, q: int, e: Fraction, k: int, side: int) -> int:
    """Exact cell index for the open interval end ``p/q + side*q**-e``.

    side = -1 returns ``floor((p/q - h) 2**k)``; side = +1 returns
    ``ceil((p/q + h) 2**k) - 1``."""
    N = 1 << k
    if Fraction(e).denominator == 1:
        # rational end point (p q^(e-1) + side) / q^e
        qe = q ** int(e)
        num = (p * (qe // q) + side) * N
        return num // qe if side < 0 else -((-num) // qe) - 1
    h = PowerProduct.power(q, -e)
    c = Fraction(p, q)
    guess = math.floor((float(c) + side * float(h)) * N)
    # find the integer j with j/N <= c + side*h < (j+1)/N
    def le(j):  # j/N <= c + side*h ?
        r = Fraction(j, N) - c
        if side > 0:
            return r <= 0 or PowerProduct.of(r).compare(h) <= 0
        return r <= 0 and PowerProduct.of(-r).compare(h) >= 0

    j = guess + 2
    while not le(j):
        j -= 1
    while le(j + 1):
        j += 1
    if side < 0:
        return j
    exact_hit = Fraction(j, N) - c
    on_boundary = exact_hit > 0 and PowerProduct.of(exact_hit).compare(h) == 0
    return j - 1 if on_boundary else j


# ---------------------------------------------------------------------------
# covering sums


@dataclass(frozen=True)
class CoveringRow:
    s: Fraction
    Q: int
    partial_sum: float

    def as_list(self) -> list[str]:
        return [_fmt_frac(self.s), str(self.Q), repr(self.partial_sum)]


COVER_HEADER = ["s", "Q", "partial_sum"]


def _fmt_frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _term_exponents(case: ClosedFormCase, s) -> list[float]:
    return [float(c.N) - float(c.lam) * float(s) for c in cover_exponents(case)]


def _block_sums(case: ClosedFormCase, s, K: int) -> np.ndarray:
    """Dyadic block sums ``B_k = sum_{2^k <= q < 2^(k+1)} min_j q**E_j``
    (Laurent: ``B_k = t**(k (E+1))``, one block per degree)."""
    E = min(_term_exponents(case, s))
    if case.setting is Setting.LAURENT:
        return np.array([2.0 ** (k * (E + 1)) for k in range(K)])
    out = np.empty(K)
    for k in range(K):
        q = np.arange(2**k, 2 ** (k + 1), dtype=np.float64)
        out[k] = np.sum(q**E)
    return out


def covering_sum(case: ClosedFormCase, s, Q_range: tuple[int, int] = (1, 1 << 16), points: Sequence[int] | None = None) -> list[CoveringRow]:
    """Partial sums ``sum_{q <= Q} min_j q**(N_j - lam_j s)`` of the cover
    cost, reported at dyadic ``Q`` (or at ``points``) inside ``Q_range``."""
    s = Fraction(s)
    if s <= 0:
        raise PreconditionUnmet("s must be positive")
    lo, hi = Q_range
    E = min(_term_exponents(case, s))
    q = np.arange(1, hi + 1, dtype=np.float64)
    csum = np.cumsum(q**E)
    if points is None:
        points = [2**k for k in range(0, hi.bit_length()) if lo <= 2**k <= hi]
    return [CoveringRow(s, int(Q), float(csum[Q - 1])) for Q in points]


@dataclass(frozen=True)
class TransitionReport:
    grid: tuple[Fraction, ...]
    divergent: tuple[bool, ...]
    lower: Fraction | None
    upper: Fraction | None

    def brackets(self, value) -> bool:
        if self.lower is None or self.upper is None:
            return False
        return self.lower <= value <= self.upper


def covering_transition(case: ClosedFormCase, s_grid: Sequence, blocks: int = 20) -> TransitionReport:
    """Classify each ``s`` as divergent when the last dyadic block sum is at
    least the previous one, and bracket the flip between grid neighbours."""
    grid = tuple(sorted(Fraction(x) for x in s_grid))
    div = []
    for s in grid:
        B = _block_sums(case, s, blocks)
        div.append(bool(B[-1] >= B[-2]))
    lower = upper = None
    for a, b, da, db in zip(grid, grid[1:], div, div[1:]):
        if da and not db:
            lower, upper = a, b
            break
    return TransitionReport(grid, tuple(div), lower, upper)
