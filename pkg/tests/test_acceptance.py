"""One test per acceptance criterion; each records a pass/fail summary line."""

import json
import math
import time

import numpy as np

from gen import equality_sample, rand_admissible, rand_cdt, rand_exp, rand_op, rand_poly, rand_violated
from wick_holder.chaos import (
    ChaosExpansion,
    ExponentialVector,
    exp_expansion,
    functorial_transport,
    max_coeff_diff,
    max_rel_coeff_diff,
    pointwise_product,
    second_quantization,
    t_wick_by_definition,
    t_wick_exponentials,
    t_wick_product,
    wick_product,
)
from wick_holder.cli import main
from wick_holder.inequality import (
    HolderConfig,
    binding_index,
    check_corollary,
    jensen_identity_check,
    max_admissible_r,
    nelson_check,
    probe_exponent,
    sharpness_probe,
    verify_inequality,
)
from wick_holder.operators import DiagonalOperator
from wick_holder.quadrature import (
    adaptive_lp_norm,
    gauss_hermite_rule,
    gaussian_integral_closed_form,
    gaussian_integral_lagrange,
    gaussian_integral_quadrature,
    mc_lp_norm,
)
from wick_holder.representation import (
    corollary_operators,
    pqrs_operators,
    repr_check,
    repr_rhs,
    repr_rhs_boundary,
)


def op(*eigs):
    return DiagonalOperator(tuple(eigs))


def test_ac01_product_family_endpoints(criterion):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        phi, psi = rand_poly(rng, d, int(rng.integers(0, 6)), 0.5), rand_poly(rng, d, int(rng.integers(0, 6)), 0.5)
        worst = max(
            worst,
            max_coeff_diff(t_wick_product(phi, psi, DiagonalOperator.identity(d)), pointwise_product(phi, psi)),
            max_coeff_diff(t_wick_product(phi, psi, DiagonalOperator.zero(d)), wick_product(phi, psi)),
        )
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10
    criterion(1, "product-family endpoints", ok, f"max coeff err {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_ac02_definition_consistency(criterion):
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 4))
        phi, psi = rand_poly(rng, d, 4, 0.6), rand_poly(rng, d, 4, 0.6)
        T = rand_op(rng, d, 0.1, 2.0)
        worst = max(worst, max_coeff_diff(t_wick_product(phi, psi, T), t_wick_by_definition(phi, psi, T)))
    ok = worst <= 1e-9
    criterion(2, "T-Wick closed form vs definition", ok, f"max coeff err {worst:.2e}")
    assert ok


def _rel_inf(a, b):
    # coefficient error relative to the largest coefficient of the reference
    return max_coeff_diff(a, b) / max(abs(c) for c in b.terms.values())


def test_ac03_exponential_laws(criterion):
    rng = np.random.default_rng(103)
    worst_gamma = worst_wick = 0.0
    for k in range(20):
        d = 1 if k < 10 else 2
        xi, eta = rand_exp(rng, d), rand_exp(rng, d)
        B = rand_op(rng, d, -2, 2)
        worst_gamma = max(worst_gamma, max_rel_coeff_diff(second_quantization(B, exp_expansion(xi, 20)), exp_expansion(xi.transformed(B), 20)))
        T = rand_op(rng, d, 0, 2)
        prod = t_wick_product(exp_expansion(xi, 20), exp_expansion(eta, 20), T)
        # coefficients above degree 20 are incomplete products of the truncations
        prod = ChaosExpansion(d, {a: c for a, c in prod.terms.items() if sum(a) <= 20})
        scale, v = t_wick_exponentials(xi, eta, T)
        worst_wick = max(worst_wick, _rel_inf(prod, exp_expansion(v, 20) * scale))
    ok = worst_gamma <= 1e-8 and worst_wick <= 1e-8
    criterion(3, "exponential laws on truncations", ok, f"Gamma rel {worst_gamma:.2e}, T-Wick rel {worst_wick:.2e}")
    assert ok


def test_ac04_functorial(criterion):
    rng = np.random.default_rng(104)
    worst = 0.0
    for _ in range(100):
        d = int(rng.integers(1, 3))
        B = DiagonalOperator(tuple(rng.uniform(0.5, 2.0, d) * rng.choice([-1.0, 1.0], d)))
        T = rand_op(rng, d, 0, 2)
        left, right = functorial_transport(B, T, rand_poly(rng, d, 4), rand_poly(rng, d, 4))
        worst = max(worst, max_coeff_diff(left, right))
    ok = worst <= 1e-10
    criterion(4, "functorial two-path equality", ok, f"max coeff err {worst:.2e}")
    assert ok


def test_ac05_integral_representation(criterion):
    rng = np.random.default_rng(105)
    rule = gauss_hermite_rule(40)
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(40):
        d = 1 + k % 2
        C, D, T = rand_cdt(rng, d)
        pts = rng.uniform(-2, 2, (20, d))
        theta = float(rng.uniform(0, 2 * math.pi))
        if k % 4 < 2:
            phi, psi = rand_poly(rng, d, 3), rand_poly(rng, d, 3)
        else:
            phi, psi = rand_exp(rng, d), rand_exp(rng, d)
        worst = max(worst, repr_check(phi, psi, C, D, T, pts, rule, theta))
    # boundary: single-integral form against the rotated double integral
    worst_b = 0.0
    for k in range(20):
        d = 1 + k % 2
        trip = [equality_sample(rng)[2:] for _ in range(d)]
        C, D, T = (op(*[tr[j] for tr in trip]) for j in range(3))
        P, R = corollary_operators(C, D, T)
        Pg, Qg, Rg, Sg = pqrs_operators(C, D, T, theta=float(rng.uniform(0.1, 3.0)))
        phi, psi = (rand_poly(rng, d, 3), rand_poly(rng, d, 3)) if k % 2 else (rand_exp(rng, d), rand_exp(rng, d))
        for x in rng.uniform(-2, 2, (20, d)):
            one = repr_rhs_boundary(phi, psi, C, D, P, R, x, rule)
            two = repr_rhs(phi, psi, C, D, Pg, Qg, Rg, Sg, x, rule)
            worst_b = max(worst_b, abs(one - two) / max(1.0, abs(one)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and worst_b <= 1e-9 and elapsed < 60
    criterion(5, "integral representation", ok, f"repr dev {worst:.2e}, boundary dev {worst_b:.2e}, {elapsed:.2f}s")
    assert ok


def test_ac06_gaussian_integral(criterion):
    rng = np.random.default_rng(106)
    worst_q = worst_forms = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 5))
        a, b = rng.uniform(-2, 2, n), rng.uniform(-2, 2, n)
        closed = gaussian_integral_closed_form(a, b)
        worst_q = max(worst_q, abs(gaussian_integral_quadrature(a, b, 60) - closed) / closed)
        worst_forms = max(worst_forms, abs(gaussian_integral_lagrange(a, b) - closed) / closed)
    ok = worst_q <= 1e-10 and worst_forms <= 1e-14
    criterion(6, "Gaussian integral closed form", ok, f"quadrature rel {worst_q:.2e}, forms rel {worst_forms:.2e}")
    assert ok


def test_ac07_exponential_lp_norms(criterion):
    rng = np.random.default_rng(107)
    vectors = [ExponentialVector((1.0,)), ExponentialVector((0.6, -0.8)), ExponentialVector((0.5,)), ExponentialVector((0.3,)), rand_exp(rng, 2)]
    worst_q = 0.0
    misses = []
    for k, xi in enumerate(vectors):
        for l in (1.5, 2.0, 3.0, 4.0, 6.0):
            closed = xi.lp_norm(l)
            res = adaptive_lp_norm(xi, l, xi.dim, max_order=200)
            worst_q = max(worst_q, abs(res.value - closed) / closed)
            est, se = mc_lp_norm(xi, l, 10**6, seed=1000 + k, d=xi.dim)
            z = (est - closed) / se
            if abs(z) > 4.0:
                misses.append(f"|xi|={math.hypot(*xi.xi):.2f} l={l}: z={z:.2f}")
    ok = worst_q <= 1e-8 and not misses
    detail = f"quadrature rel {worst_q:.2e}; MC beyond 4 stderr: {', '.join(misses) or 'none'}"
    criterion(7, "exponential Lp norms", ok, detail)
    assert ok


def _directions(rng, d):
    dirs = [(np.eye(d)[i], np.eye(d)[i]) for i in range(d)]
    for _ in range(2):
        e, f = rng.normal(size=d), rng.normal(size=d)
        dirs.append((e / np.linalg.norm(e), f / np.linalg.norm(f)))
    return dirs


def test_ac08_soundness(criterion):
    rng = np.random.default_rng(108)
    grid = np.linspace(-3, 3, 13)
    worst = 0.0
    for _ in range(200):
        cfg = rand_admissible(rng)
        for e, f in _directions(rng, cfg.dim):
            for s in grid:
                for u in grid:
                    worst = max(worst, verify_inequality(cfg, ExponentialVector(s * e), ExponentialVector(u * f)))
    worst_poly = 0.0
    for _ in range(50):
        cfg = rand_admissible(rng, dmax=2)
        phi, psi = rand_poly(rng, cfg.dim, int(rng.integers(1, 4))), rand_poly(rng, cfg.dim, int(rng.integers(1, 4)))
        if phi.l2_norm() and psi.l2_norm():
            worst_poly = max(worst_poly, verify_inequality(cfg, phi, psi, method="quadrature", rtol=1e-8))
    ok = worst <= 1 + 1e-9 and worst_poly <= 1 + 1e-6
    criterion(8, "inequality soundness", ok, f"max exp ratio {worst:.12f}, max poly ratio {worst_poly:.9f}")
    assert ok


def test_ac09_sharpness(criterion):
    rng = np.random.default_rng(109)
    worst = 0.0
    min_f = math.inf
    for _ in range(200):
        cfg = rand_violated(rng)
        res = sharpness_probe(cfg, [0.5, 1.0, 3.0, 10.0])
        min_f = min(min_f, res.f_star)
        for w in res.witnesses:
            worst = max(worst, abs(w.log_ratio - w.predicted_log_ratio) / max(1.0, abs(w.predicted_log_ratio)))
    res = sharpness_probe(HolderConfig(2, 2, 1.5, op(1), op(1), op(1)), [3.0])
    exact = abs(res.s_star - 3) <= 1e-12 and abs(res.f_star - 2) <= 1e-12
    ok = min_f > 0 and worst <= 1e-12 and exact
    criterion(9, "sharpness witnesses", ok, f"min f* {min_f:.3e}, log-ratio mismatch {worst:.2e}, s*={res.s_star!r}, f*={res.f_star!r}")
    assert ok


def test_ac10_boundary_tightness(criterion):
    rng = np.random.default_rng(110)
    worst = 0.0
    n = 0
    while n < 100:
        d = int(rng.integers(1, 4))
        C, D, T = rand_cdt(rng, d)
        p, q = rng.uniform(1.2, 6, 2)
        rs = max_admissible_r(p, q, C, D, T)
        if not (math.isfinite(rs) and rs > 1):
            continue
        i = binding_index(p, q, C, D, T)
        worst = max(worst, abs(probe_exponent(p, q, rs, C[i], D[i], T[i]).f_star))
        n += 1
    s = 1 / math.sqrt(2)
    r1 = max_admissible_r(4, 4, op(1), op(1), op(1))
    r2 = max_admissible_r(3, 3, op(s), op(s), op(0))
    ok = worst <= 1e-9 and abs(r1 - 2) <= 1e-12 and abs(r2 - 3) <= 1e-12
    criterion(10, "boundary tightness", ok, f"max |sup f| {worst:.2e}, r*(Hoelder)={r1!r}, r*(Wick)={r2!r}")
    assert ok


def test_ac11_proof_identities(criterion):
    rng = np.random.default_rng(111)
    worst = 0.0
    worst_one = 0.0
    at_one = True
    for _ in range(50):
        rep = jensen_identity_check(*equality_sample(rng))
        worst = max(worst, rep.max_residual)
        worst_one = max(worst_one, abs(rep.objective_at_one - 1), rep.grid_sup - 1)
        at_one = at_one and rep.sup_attained_at_one
    ok = worst <= 1e-12 and worst_one <= 1e-9 and at_one
    criterion(11, "supremum-step identities", ok, f"max residual {worst:.2e}, |sup-1| {worst_one:.2e}, sup at K=L=1: {at_one}")
    assert ok


def test_ac12_corollary_reduction(criterion):
    rng = np.random.default_rng(112)
    compared = agreed = passes = 0
    for _ in range(1000):
        d = int(rng.integers(1, 4))
        B = DiagonalOperator(tuple(rng.uniform(0.2, 2.0, d) * rng.choice([-1.0, 1.0], d)))
        C = B @ DiagonalOperator(tuple(1 / rng.uniform(-1.3, 1.3, d)))
        D = B @ DiagonalOperator(tuple(1 / rng.uniform(-1.3, 1.3, d)))
        T = rand_op(rng, d, 0, 2.5) @ B @ B
        p, q = rng.uniform(1.1, 6, 2)
        cfg = HolderConfig(p, q, float(rng.uniform(1.05, 4)), C, D, T, B)
        rep = check_corollary(cfg, tol=0.0)
        margins = [r.margin for r in rep.records] + [r.margin for r in rep.mapped.records]
        if any(abs(m) <= 1e-12 for m in margins if math.isfinite(m)):
            continue
        compared += 1
        agreed += rep.passed == rep.mapped.passed
        passes += rep.passed
    ok = compared > 900 and agreed == compared and 0 < passes < compared
    criterion(12, "weighted-form reduction", ok, f"{agreed}/{compared} agree ({passes} admissible)")
    assert ok


def test_ac13_nelson(criterion):
    xi = ExponentialVector((0.7, -0.4))
    eq = nelson_check(2, 4, DiagonalOperator.scalar(math.sqrt(3), 2), xi)
    strict = nelson_check(2, 4, DiagonalOperator.scalar(2.0, 2), xi)
    ok = abs(eq - 1) <= 1e-12 and strict < 1
    criterion(13, "hypercontractive specialization", ok, f"ratio on the line {eq!r}, above it {strict!r}")
    assert ok


def test_ac14_tensorization(criterion):
    rng = np.random.default_rng(114)
    worst = 0.0
    for k in range(20):
        while True:
            cfg = rand_admissible(rng, dmax=2)
            if cfg.dim == 2:
                break
        if k % 2:
            f1, f2, g1, g2 = (rand_poly(rng, 1, 3) for _ in range(4))
            phi = ChaosExpansion(2, {(a[0], b[0]): c * e for a, c in f1.terms.items() for b, e in f2.terms.items()})
            psi = ChaosExpansion(2, {(a[0], b[0]): c * e for a, c in g1.terms.items() for b, e in g2.terms.items()})
            if not (phi.l2_norm() and psi.l2_norm()):
                continue
        else:
            phi, psi = rand_exp(rng, 2), rand_exp(rng, 2)
        worst = max(worst, verify_inequality(cfg, phi, psi, method="quadrature", rtol=1e-8))
    ok = worst <= 1 + 1e-6
    criterion(14, "product test functions in d=2", ok, f"max ratio {worst:.9f}")
    assert ok


def test_ac15_cli_determinism(criterion, tmp_path):
    poly = {"polynomial": {"dim": 1, "cap": 40, "terms": [{"index": [0], "coeff": 1.0}, {"index": [1], "coeff": 0.5}]}}
    cases = {
        "norm": {"phi": {"exponential": [0.4, -0.3]}, "l": [1.5, 3.0], "mc_samples": 300_000, "seed": 3, "sweep": [{}, {"seed": 4}]},
        "verify": {"p": 3, "q": 3, "r": 1.5, "C": [0.5], "D": [0.5], "T": [1.0], "phi": poly, "psi": poly, "method": "mc", "mc_samples": 200_000},
        "check": {"p": 4, "q": 4, "r": 2, "C": {"scalar": 1}, "D": {"scalar": 1}, "T": {"scalar": 1}, "dim": 2, "sweep": [{"r": 1.5}, {"r": 2.5}, {}]},
        "probe": {"p": 2, "q": 2, "r": 1.5, "C": [1], "D": [1], "T": [1], "u": [1, 3, 30]},
    }
    identical = True
    for command, doc in cases.items():
        path = tmp_path / f"{command}.json"
        path.write_text(json.dumps(doc))
        outs = []
        for n, jobs in enumerate(("1", "8", "1", "8")):
            out = tmp_path / f"{command}-{n}.json"
            main([command, "--config", str(path), "--jobs", jobs, "-o", str(out)])
            outs.append(out.read_bytes())
        identical = identical and len(set(outs)) == 1
    criterion(15, "CLI determinism", identical, f"{len(cases)} commands x 4 runs (jobs 1 and 8) byte-identical: {identical}")
    assert identical
