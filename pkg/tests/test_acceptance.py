"""Acceptance criteria.  Each test reports one PASS/FAIL line; the lines are
collected again in the terminal summary."""

import random
import time
from fractions import Fraction as F

import pytest

from limsup_lab.approx import ApproxSpec, FullMeasureShortcut, PowerProduct, balance_rho_padic, balance_rho_real
from limsup_lab.cli import main
from limsup_lab.dimension import (
    ClosedFormCase,
    Setting,
    closed_form,
    grid_optimize_lower_bound,
    mtpr_lower_bound,
    problem_for,
    select_exponents,
)
from limsup_lab.lab import DichotomyScan, box_count_dimension, covering_transition, measure_scan
from limsup_lab.rings import RingDescriptor, count_shell, enumerate_shell
from limsup_lab.solver import certify_minkowski


# 1. closed forms


def test_c1_closed_forms(report):
    t0 = time.perf_counter()
    got = {
        "padic m=2 n=1 tau=4": closed_form(ClosedFormCase.padic(2, (4,))).value,
        "twodim (3,2)": closed_form(ClosedFormCase.two_dim((3, 2))).value,
        "real m=n=1 tau=2": closed_form(ClosedFormCase.real(1, (2,))).value,
    }
    want = {"padic m=2 n=1 tau=4": F(7, 4), "twodim (3,2)": F(1), "real m=n=1 tau=2": F(2, 3)}
    ok = got == want
    for tau in (2, F(5, 2), 3, F(13, 3), 7):
        v = closed_form(ClosedFormCase.complex(1, (tau,))).value
        # 4/(tau'+1) with tau' = tau - 1
        ok &= v == 4 / F(tau) == 4 / ((F(tau) - 1) + 1)
    dt = time.perf_counter() - t0
    ok &= dt < 1
    assert report("1 closed forms", ok, f"{got}, {dt:.3f}s")


# 2. cross-validation


def _random_case(rng: random.Random, setting: Setting) -> ClosedFormCase:
    while True:
        m, n = rng.randint(1, 3), rng.randint(1, 3)
        tau = tuple(F(rng.randint(1, 48), rng.randint(1, 6)) for _ in range(n))
        case = ClosedFormCase(setting, tau, m)
        if case.hypothesis()[0]:
            return case


SETTINGS2 = [Setting.REAL, Setting.PADIC, Setting.COMPLEX, Setting.QUATERNION, Setting.LAURENT]


def test_c2_cross_validation(report):
    t0 = time.perf_counter()
    rng = random.Random(20240)
    bad = []
    per = 500
    for setting in SETTINGS2:
        for _ in range(per):
            case = _random_case(rng, setting)
            cf = closed_form(case).value
            sel = select_exponents(case)
            if mtpr_lower_bound(problem_for(case, sel.a)).value != cf:
                bad.append(("select", case))
            g = grid_optimize_lower_bound(case, grid_resolution=8, include_proof_point=False)
            if g.value > cf:
                bad.append(("grid", case))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 120
    assert report("2 cross-validation", ok, f"{per}x{len(SETTINGS2)} cases, {len(bad)} mismatches, {dt:.1f}s")


# 3. Minkowski certification

DESK = [
    ("real m=n=2", RingDescriptor.real(), 2, 2, (F(1, 4),) * 2, (4, 4), None),
    ("complex", RingDescriptor.complex(), 1, 1, (F(1, 6),), (6,), None),
    ("quaternion", RingDescriptor.quaternion(), 1, 1, (F(1, 8),), (6,), None),
    ("laurent t=2", RingDescriptor.laurent(2), 1, 1, (F(1, 4),), (16,), None),
    ("padic p=3", RingDescriptor.padic(3), 1, 1, (F(1, 100),), (64,), (64,)),
    ("padic p=5", RingDescriptor.padic(5), 1, 1, (F(1, 600),), (64,), (64,)),
]


def test_c3_minkowski_certification(report):
    t0 = time.perf_counter()
    summaries = {}
    for name, ring, m, n, eb, hb, comp in DESK:
        rep = certify_minkowski(ring, m, n, eb, hb, trials=200, seed=3, companion_bounds=comp)
        summaries[name] = rep.summary
    dt = time.perf_counter() - t0
    ok = all(s == "200/200" for s in summaries.values()) and dt < 300
    assert report("3 Minkowski certification", ok, f"{summaries}, {dt:.1f}s")


# 4. counting identities


def test_c4_counting(report):
    t0 = time.perf_counter()
    bad = []
    G = RingDescriptor.complex()
    for m in (1, 2):
        for Q in range(1, 6):
            n_enum = len(enumerate_shell(G, m, Q))
            want = (2 * Q + 1) ** (2 * m) - (2 * Q - 1) ** (2 * m)
            if not n_enum == want == count_shell(G, m, Q):
                bad.append(("gauss", m, Q, n_enum, want))
            if m == 1 and n_enum != 8 * Q:
                bad.append(("8s", Q, n_enum))
    for t in (2, 3):
        L = RingDescriptor.laurent(t)
        for m in (1, 2):
            for r in range(0, 4):
                n_enum = len(enumerate_shell(L, m, t**r))
                want = t ** (m * (r + 1)) - t ** (m * r)
                if not n_enum == want == count_shell(L, m, t**r):
                    bad.append(("laurent", t, m, r, n_enum, want))
    dt = time.perf_counter() - t0
    assert report("4 counting identities", not bad and dt < 10, f"{len(bad)} mismatches, {dt:.1f}s")


# 5. rho balancing


def _sandwich_indices(p, m, n, u, ps):
    """Every j meeting psi_(j) >= nu(u,j) > psi_(j+1), recomputed from scratch."""
    out = []
    for j in range(n):
        base = PowerProduct.of(F(1, p**n * u**m))
        for x in ps[:j]:
            base = base / x
        nu = base ** F(1, n - j)
        if (j == 0 or ps[j - 1] >= nu) and nu > ps[j]:
            out.append(j)
    return out


def test_c5_rho_balancing(report):
    t0 = time.perf_counter()
    rng = random.Random(5)
    bad = []
    done_real = done_padic = 0
    while done_real < 100:
        tau = (F(rng.randint(1, 30), 10), F(rng.randint(1, 30), 10))
        spec = ApproxSpec.power_law(1, 2, tau, k_max=8)
        res = balance_rho_real(spec)
        if isinstance(res, FullMeasureShortcut):
            if sum(tau) > 1:
                bad.append(("real shortcut", tau))
            continue
        done_real += 1
        for e in res.entries:
            if e.phi[0] * e.phi[1] != PowerProduct.of(F(1, e.u)):
                bad.append(("real phi product", tau, e.u))
        if not (res.product_identity_holds() and res.dominates()):
            bad.append(("real", tau))
    while done_padic < 100:
        p = rng.choice([2, 3, 5, 7])
        m, n = rng.randint(1, 3), rng.randint(1, 3)
        tau = tuple(F(rng.randint(1, 40), 10) for _ in range(n))
        spec = ApproxSpec.power_law(m, n, tau, k_max=6)
        res = balance_rho_padic(spec, p)
        if isinstance(res, FullMeasureShortcut):
            continue
        done_padic += 1
        if not (res.product_identity_holds() and res.dominates()):
            bad.append(("padic", p, m, n, tau))
        for e in res.entries:
            ps = [e.psi[i] for i in e.order]
            if _sandwich_indices(p, m, n, e.u, ps) != [e.j]:
                bad.append(("sandwich", p, m, n, tau, e.u))
    dt = time.perf_counter() - t0
    assert report("5 rho balancing", not bad and dt < 30, f"{done_real}+{done_padic} tuples, {len(bad)} failures, {dt:.1f}s")


# 6. dichotomy trend

LADDER = tuple(2**k for k in range(3, 13))
TAILS = tuple(2**k for k in range(3, 12))


@pytest.fixture(scope="module")
def dichotomy():
    specs = (
        ("div", ApproxSpec.power_law(1, 2, (F(1, 2), F(1, 2)))),
        ("conv", ApproxSpec.power_law(1, 2, (F(3, 5), F(3, 5)))),
    )
    t0 = time.perf_counter()
    scan = DichotomyScan(specs, 2000, LADDER, seed=2024, tail_starts=TAILS)
    rows = measure_scan(scan)
    dt = time.perf_counter() - t0
    assert rows == measure_scan(scan)
    return rows, dt


def _series(rows, sid):
    return [(r.H, r.fraction) for r in rows if r.spec_id == sid]


def test_c6_divergent_fraction(report, dichotomy):
    rows, dt = dichotomy
    div = [f for _, f in _series(rows, "div")]
    # psi(1) = 1 makes full membership trivial; the tail is the informative part
    tail = dict(_series(rows, "div/tail"))[512]
    ok = div[-1] >= 0.9 and div == sorted(div) and tail >= 0.9 and dt < 600
    assert report("6a divergent fraction >= 0.9, monotone", ok, f"top {div[-1]:.3f}, tail@512 {tail:.3f}, {dt:.1f}s")


def test_c6_convergent_tail_decreasing(report, dichotomy):
    rows, _ = dichotomy
    tail = [f for _, f in _series(rows, "conv/tail")]
    ok = tail == sorted(tail, reverse=True) and tail[0] > tail[-1]
    assert report("6b convergent tail decreasing in H0", ok, " ".join(f"{x:.3f}" for x in tail))


def test_c6_convergent_tail_at_512(report, dichotomy):
    rows, _ = dichotomy
    at = dict(_series(rows, "conv/tail"))[512]
    assert report("6c convergent tail <= 0.2 at H0=512", at <= 0.2, f"{at:.3f}")


# 7. box counting


def test_c7_box_count(report):
    t0 = time.perf_counter()
    est = box_count_dimension(ClosedFormCase.two_dim((3, 2)), (64, 128))
    cal = box_count_dimension(ClosedFormCase.two_dim((F(1, 2), F(1, 2))), (64, 128), scales=range(2, 7))
    dt = time.perf_counter() - t0
    ok = abs(est.slope - 1) <= 0.15 and abs(cal.slope - 2) <= 0.05 and dt < 300
    assert report("7 box-count proxy", ok, f"slope {est.slope:.3f}, calibration {cal.slope:.3f}, {dt:.1f}s")


# 8. covering transition


def test_c8_covering_transition(report):
    t0 = time.perf_counter()
    grid = [F(k, 20) for k in range(1, 61)]
    out = {}
    ok = True
    for name, case, cf in (
        ("twodim", ClosedFormCase.two_dim((3, 2)), F(1)),
        ("padic", ClosedFormCase.padic(2, (4,)), F(7, 4)),
    ):
        tr = covering_transition(case, grid)
        out[name] = f"[{tr.lower}, {tr.upper}]"
        ok &= tr.brackets(cf) and tr.lower <= cf <= tr.upper and tr.upper - tr.lower <= F(1, 20)
    dt = time.perf_counter() - t0
    assert report("8 covering transition", ok and dt < 120, f"{out}, {dt:.1f}s")


# 9. determinism

STOCHASTIC = {
    "measure_scan": "spec.div=1/2,1/2\nspec.conv=3/5,3/5\nsamples=200\nladder=16,64,256\ntail_starts=16,64\n",
    "certify": "ring=quaternion\nm=1\nn=1\nerror_bounds=1/8\nheight_bounds=6\ntrials=30\n",
    "ubiquity": "ring=real\ntau=3/10,9/10\nk=6\nsamples=200\n",
    "solve": "ring=padic:5\nm=1\nn=1\nerror_bounds=1/200\nheight_bounds=30\ncompanion_bounds=30\n",
}


def test_c9_determinism(tmp_path, report):
    same = {}
    for cmd, text in STOCHASTIC.items():
        cfg = tmp_path / f"{cmd}.cfg"
        cfg.write_text(text)
        codes = [main([cmd, "--config", str(cfg), "--seed", "11", "--out", str(tmp_path / d / cmd)]) for d in "ab"]
        a, b = ((tmp_path / d / cmd / f"{cmd}.csv").read_bytes() for d in "ab")
        same[cmd] = codes == [0, 0] and a == b
    assert report("9 determinism", all(same.values()), ", ".join(f"{k}={v}" for k, v in same.items()))
