"""Dimension engine: the mass-transference lower bound, the closed forms and
the exponent-selection rules used in the lower-bound proofs.

Everything here is exact rational arithmetic.  Two conventions coexist and
are deliberately kept apart:

* the real settings (``REAL`` linear forms and ``TWODIM`` simultaneous) use
  ``psi_i(q) = q**-tau_i``; the transference exponents are ``1 + tau_i``;
* the p-adic, complex, quaternion and Laurent settings parametrise the
  bound directly, ``[[qA_j]] < |q|**-(tau_j - 1)``; exponents are ``tau_j``.

Indices returned by this module (argmins, partitions) are 0-based.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

from .errors import EmptyAdmissibleSet, HypothesisViolated, PreconditionUnmet

__all__ = [
    "Setting",
    "CaseTag",
    "DimensionProblem",
    "Partition",
    "MTPRResult",
    "ClosedFormCase",
    "ClosedFormResult",
    "Selection",
    "GridResult",
    "CoverExponent",
    "mtpr_lower_bound",
    "closed_form",
    "select_exponents",
    "problem_for",
    "grid_optimize_lower_bound",
    "cover_exponents",
]


def _fr(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _pos(x: Fraction) -> Fraction:
    return x if x > 0 else Fraction(0)


# ---------------------------------------------------------------------------
# general lower bound


@dataclass(frozen=True)
class DimensionProblem:
    """Inputs of the transference bound: Ahlfors exponents ``delta``, scaling
    exponent ``kappa``, ubiquity exponents ``a`` and excess exponents ``t``."""

    delta: tuple[Fraction, ...]
    kappa: Fraction
    a: tuple[Fraction, ...]
    t: tuple[Fraction, ...]

    def __post_init__(self):
        d = tuple(_fr(x) for x in self.delta)
        a = tuple(_fr(x) for x in self.a)
        t = tuple(_fr(x) for x in self.t)
        k = _fr(self.kappa)
        if not (len(d) == len(a) == len(t)) or not d:
            raise PreconditionUnmet("delta, a and t must have the same positive length")
        if any(x <= 0 for x in d):
            raise PreconditionUnmet("delta must be positive")
        if not 0 <= k < 1:
            raise PreconditionUnmet("kappa must lie in [0, 1)")
        if any(x <= 0 for x in a):
            raise PreconditionUnmet("a must be positive")
        if any(x < 0 for x in t):
            raise PreconditionUnmet("t must be nonnegative")
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "kappa", k)

    @property
    def n(self) -> int:
        return len(self.delta)


@dataclass(frozen=True)
class Partition:
    A: Fraction
    K1: tuple[int, ...]
    K2: tuple[int, ...]
    K3: tuple[int, ...]


@dataclass(frozen=True)
class MTPRResult:
    value: Fraction
    argmins: tuple[Fraction, ...]
    partitions: tuple[Partition, ...]
    candidates: tuple[tuple[Fraction, Fraction], ...]


def _partition(prob: DimensionProblem, A: Fraction) -> Partition:
    k1 = tuple(j for j in range(prob.n) if prob.a[j] >= A)
    k2 = tuple(j for j in range(prob.n) if prob.a[j] + prob.t[j] <= A and j not in k1)
    k3 = tuple(j for j in range(prob.n) if j not in k1 and j not in k2)
    return Partition(A, k1, k2, k3)


def _s_value(prob: DimensionProblem, part: Partition) -> Fraction:
    d, a, t, k = prob.delta, prob.a, prob.t, prob.kappa
    s = sum((d[j] for j in part.K1 + part.K2), Fraction(0))
    s += k * sum((d[j] for j in part.K3), Fraction(0))
    num = sum((a[j] * d[j] for j in part.K3), Fraction(0)) - sum((t[j] * d[j] for j in part.K2), Fraction(0))
    return s + (1 - k) * num / part.A


def mtpr_lower_bound(prob: DimensionProblem) -> MTPRResult:
    """Minimum of the transference expression over ``A = {a_i, a_i + t_i}``.

    Every minimising candidate is reported, with its partition."""
    cands = sorted(set(prob.a) | {x + y for x, y in zip(prob.a, prob.t)})
    scored = []
    for A in cands:
        part = _partition(prob, A)
        scored.append((A, _s_value(prob, part), part))
    best = min(s for _, s, _ in scored)
    mins = [(A, p) for A, s, p in scored if s == best]
    return MTPRResult(
        value=best,
        argmins=tuple(A for A, _ in mins),
        partitions=tuple(p for _, p in mins),
        candidates=tuple((A, s) for A, s, _ in scored),
    )


# ---------------------------------------------------------------------------
# closed forms


class Setting(str, Enum):
    REAL = "real"
    TWODIM = "twodim"
    PADIC = "padic"
    COMPLEX = "complex"
    QUATERNION = "quaternion"
    LAURENT = "laurent"

    @property
    def shifted(self) -> bool:
        """True for the settings that use ``psi = q**-tau``."""
        return self in (Setting.REAL, Setting.TWODIM)

    @property
    def c_delta(self) -> int:
        return {Setting.COMPLEX: 2, Setting.QUATERNION: 4}.get(self, 1)


@dataclass(frozen=True)
class ClosedFormCase:
    """A setting, its dimensions and exponent vector ``tau`` (length n)."""

    setting: Setting
    tau: tuple[Fraction, ...]
    m: int = 1

    def __post_init__(self):
        s = Setting(self.setting)
        tau = tuple(_fr(x) for x in self.tau)
        if not tau:
            raise PreconditionUnmet("tau must be nonempty")
        if s is Setting.TWODIM and (len(tau) != 2 or self.m != 1):
            raise PreconditionUnmet("the two-dimensional setting has m=1, n=2")
        if self.m < 1:
            raise PreconditionUnmet("m must be positive")
        if any(x <= 0 for x in tau):
            raise PreconditionUnmet("tau must be positive")
        object.__setattr__(self, "setting", s)
        object.__setattr__(self, "tau", tau)

    @classmethod
    def real(cls, m, tau):
        return cls(Setting.REAL, tuple(tau), m)

    @classmethod
    def two_dim(cls, tau):
        return cls(Setting.TWODIM, tuple(tau), 1)

    @classmethod
    def padic(cls, m, tau):
        return cls(Setting.PADIC, tuple(tau), m)

    @classmethod
    def complex(cls, m, tau):
        return cls(Setting.COMPLEX, tuple(tau), m)

    @classmethod
    def quaternion(cls, m, tau):
        return cls(Setting.QUATERNION, tuple(tau), m)

    @classmethod
    def laurent(cls, m, tau):
        return cls(Setting.LAURENT, tuple(tau), m)

    @property
    def n(self) -> int:
        return len(self.tau)

    @property
    def exponents(self) -> tuple[Fraction, ...]:
        """Transference exponents: ``1 + tau`` in the real settings."""
        if self.setting.shifted:
            return tuple(1 + x for x in self.tau)
        return self.tau

    @property
    def delta(self) -> Fraction:
        if self.setting is Setting.TWODIM:
            return Fraction(1)
        return Fraction(self.setting.c_delta * self.m)

    @property
    def kappa(self) -> Fraction:
        return Fraction(self.m - 1, self.m)

    @property
    def full_dimension(self) -> Fraction:
        return self.delta * self.n

    def hypothesis(self) -> tuple[bool, str | None]:
        tau, m, n = self.tau, self.m, self.n
        s = self.setting
        if s is Setting.REAL and not sum(tau) > m:
            return False, f"sum(tau) = {sum(tau)} <= m = {m}"
        if s is Setting.TWODIM and not sum(tau) > 1:
            return False, f"tau_1 + tau_2 = {sum(tau)} <= 1"
        if s is Setting.PADIC:
            if not sum(tau) > m + n:
                return False, f"sum(tau) = {sum(tau)} <= m + n = {m + n}"
            if not min(tau) > 1:
                return False, f"min(tau) = {min(tau)} <= 1"
        if s in (Setting.COMPLEX, Setting.QUATERNION, Setting.LAURENT):
            if not min(tau) > 1:
                return False, f"min(tau) = {min(tau)} <= 1"
            if not sum(tau) >= m + n:
                return False, f"sum(tau) = {sum(tau)} < m + n = {m + n}"
        return True, None


@dataclass(frozen=True)
class ClosedFormResult:
    value: Fraction
    argmin: tuple[int, ...]
    hypothesis_ok: bool = True
    reason: str | None = None
    terms: tuple[Fraction, ...] = field(default=(), repr=False)


def _closed_terms(case: ClosedFormCase) -> list[Fraction]:
    tau, m, n = case.tau, case.m, case.n
    if case.setting.shifted:
        out = []
        for k in range(n):
            exc = sum((_pos(tau[k] - tau[j]) for j in range(n)), Fraction(0))
            out.append(n * (m - 1) + (n + m + exc) / (1 + tau[k]))
        return out
    c = case.setting.c_delta
    out = []
    for j in range(n):
        exc = sum((_pos(tau[j] - tau[i]) for i in range(n)), Fraction(0))
        out.append(c * n * (m - 1) + c * (n + m + exc) / tau[j])
    return out


def closed_form(case: ClosedFormCase, strict: bool = False) -> ClosedFormResult:
    """Evaluate the setting's dimension formula and report all minimising j.

    When the hypothesis fails the set is full (Dirichlet regime); the full
    dimension is returned with ``hypothesis_ok=False`` unless ``strict``."""
    ok, reason = case.hypothesis()
    if not ok:
        if strict:
            raise HypothesisViolated(reason)
        return ClosedFormResult(case.full_dimension, (), False, reason)
    terms = _closed_terms(case)
    best = min(terms)
    return ClosedFormResult(best, tuple(j for j, v in enumerate(terms) if v == best), True, None, tuple(terms))


# ---------------------------------------------------------------------------
# exponent selection


class CaseTag(str, Enum):
    BALL_TO_RECTANGLE = "ball_to_rectangle"
    RECTANGLE_TO_RECTANGLE = "rectangle_to_rectangle"


@dataclass(frozen=True)
class Selection:
    a: tuple[Fraction, ...]
    t: tuple[Fraction, ...]
    tag: CaseTag
    u: int | None = None
    d_tilde: Fraction | None = None


def select_exponents(case: ClosedFormCase) -> Selection:
    """The proofs' choice of ubiquity exponents with ``sum(a) = n + m``.

    If every exponent is at least ``(n+m)/n`` the ball is balanced into a
    cube.  Otherwise, with exponents sorted decreasingly, ``u`` is the largest
    index with ``u*e_u + sum_{i>u} e_i > n+m``; the first ``u`` coordinates
    share ``D = (n+m - sum_{i>u} e_i)/u`` and the rest keep ``a_i = e_i``.
    """
    ok, reason = case.hypothesis()
    if not ok:
        raise HypothesisViolated(reason)
    e = case.exponents
    n, m = case.n, case.m
    total = Fraction(n + m)
    if min(e) >= total / n:
        a = tuple(total / n for _ in e)
        return Selection(a, tuple(x - y for x, y in zip(e, a)), CaseTag.BALL_TO_RECTANGLE)
    order = sorted(range(n), key=lambda i: (-e[i], i))
    es = [e[i] for i in order]
    u = 0
    for K in range(1, n + 1):
        if K * es[K - 1] + sum(es[K:], Fraction(0)) > total:
            u = K
    if u == 0:
        # sum(e) == n + m exactly: nothing to redistribute
        return Selection(e, tuple(Fraction(0) for _ in e), CaseTag.RECTANGLE_TO_RECTANGLE, 0, None)
    d = (total - sum(es[u:], Fraction(0))) / u
    if not (es[u - 1] > d and (u == n or d >= es[u])):
        raise AssertionError("sandwich e_u > D >= e_{u+1} failed")
    a_sorted = [d] * u + es[u:]
    a = [Fraction(0)] * n
    for pos, i in enumerate(order):
        a[i] = a_sorted[pos]
    if sum(a) != total:
        raise AssertionError("selected exponents do not sum to n + m")
    return Selection(tuple(a), tuple(x - y for x, y in zip(e, a)), CaseTag.RECTANGLE_TO_RECTANGLE, u, d)


def problem_for(case: ClosedFormCase, a: Sequence) -> DimensionProblem:
    """The transference problem for ``case`` at ubiquity exponents ``a``."""
    e = case.exponents
    a = tuple(_fr(x) for x in a)
    if any(x > y for x, y in zip(a, e)):
        raise PreconditionUnmet("a_i may not exceed the approximation exponent")
    return DimensionProblem(
        delta=(case.delta,) * case.n,
        kappa=case.kappa,
        a=a,
        t=tuple(y - x for x, y in zip(a, e)),
    )


# ---------------------------------------------------------------------------
# brute-force check of the selection


@dataclass(frozen=True)
class GridResult:
    value: Fraction
    a: tuple[Fraction, ...]
    resolution: int
    evaluated: int
    from_proof_point: bool
    box_relaxed: bool = False
    notes: tuple[str, ...] = ()


def _compositions(total: int, parts: int):
    for cuts in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, out = -1, []
        for c in cuts:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield out


def grid_optimize_lower_bound(
    case: ClosedFormCase, grid_resolution: int = 16, include_proof_point: bool = True, padic_box: bool = True
) -> GridResult:
    """Maximise the transference bound over admissible ``a`` on a grid.

    Admissible means ``1 <= a_i <= e_i`` with ``sum(a) = n + m``; the grid is
    ``a_i = 1 + m*k_i/R`` over compositions ``k`` of ``R``.  In the p-adic
    setting the open box ``(1, m-1)^n`` is imposed when it is compatible with
    the proof's own choice, and relaxed (with a note) otherwise.
    """
    if grid_resolution < 8:
        raise PreconditionUnmet("grid resolution must be at least 8")
    ok, reason = case.hypothesis()
    if not ok:
        raise HypothesisViolated(reason)
    e, n, m, R = case.exponents, case.n, case.m, grid_resolution
    notes: list[str] = []
    proof = select_exponents(case).a

    lo, hi = [Fraction(1)] * n, list(e)
    strict_box = False
    relaxed = False
    if padic_box and case.setting is Setting.PADIC:
        box_lo, box_hi = Fraction(1), Fraction(m - 1)
        if not (n * box_lo < n + m < n * box_hi):
            notes.append(f"box (1, {m - 1})^{n} cannot contain sum(a) = {n + m}; relaxed to 1 <= a_i")
            relaxed = True
        elif not all(box_lo < x < box_hi for x in proof):
            notes.append("proof point lies outside the box (1, m-1)^n; box relaxed")
            relaxed = True
        else:
            hi = [min(h, box_hi) for h in hi]
            strict_box = True

    def admissible(a):
        if strict_box:
            return all(l < x < h for x, l, h in zip(a, lo, hi))
        return all(l <= x <= h for x, l, h in zip(a, lo, hi))

    best, best_a, count, from_proof = None, None, 0, False
    for k in _compositions(R, n):
        a = tuple(1 + Fraction(m * ki, R) for ki in k)
        if not admissible(a):
            continue
        count += 1
        v = mtpr_lower_bound(problem_for(case, a)).value
        if best is None or v > best:
            best, best_a = v, a
    if include_proof_point and admissible(proof):
        count += 1
        v = mtpr_lower_bound(problem_for(case, proof)).value
        if best is None or v > best:
            best, best_a, from_proof = v, proof, True
    if best is None:
        raise EmptyAdmissibleSet(f"no admissible grid point at resolution {R}")
    return GridResult(best, best_a, R, count, from_proof, relaxed, tuple(notes))


# ---------------------------------------------------------------------------
# cover exponents for the upper-bound sums


@dataclass(frozen=True)
class CoverExponent:
    """Layer ``Q`` of cover ``j`` costs ``Q**(N - lam*s)``; critical ``(N+1)/lam``."""

    j: int
    N: Fraction
    lam: Fraction

    @property
    def critical(self) -> Fraction:
        return (self.N + 1) / self.lam


def cover_exponents(case: ClosedFormCase) -> tuple[CoverExponent, ...]:
    """Per-layer cost exponents of the natural covers, one per coordinate j.

    Cover j uses cubes of side ``Q**-lam_j`` with ``lam_j = e_j``; counting the
    cubes needed per resonant piece and the pieces per layer gives
    ``N_j = c(m+n) - 1 + c*n*(m-1)*lam_j + c*sum_i (e_j - e_i)^+`` where ``c``
    is the real dimension of one coordinate.  The critical exponent of cover
    j equals the j-th closed-form term.
    """
    e, n, m = case.exponents, case.n, case.m
    c = case.setting.c_delta
    out = []
    for j in range(n):
        exc = sum((_pos(e[j] - e[i]) for i in range(n)), Fraction(0))
        N = c * (m + n) - 1 + c * n * (m - 1) * e[j] + c * exc
        out.append(CoverExponent(j, N, e[j]))
    return tuple(out)
