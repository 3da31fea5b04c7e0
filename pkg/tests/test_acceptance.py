"""Acceptance criteria; each test prints one PASS/FAIL line with its measured
worst-case metric, tolerance and runtime, then asserts."""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from yamabe_clusters import correction as C
from yamabe_clusters import energy as E
from yamabe_clusters.bubbles import (
    Bubble,
    boundary_residual,
    boundary_scale,
    interior_residual,
    interior_scale,
    linearized_residuals,
    sample_points,
)
from yamabe_clusters.core import HessianForm, off_diagonal_form, params_from_D
from yamabe_clusters.fields import Polynomial
from yamabe_clusters.quadrature import recursion_suite, varphi_identities
from yamabe_clusters.reduction import (
    ClusterConfig,
    F_n,
    F_n_gradient,
    ReducedModel,
    optimize_cluster,
    rho_inverse,
)
from yamabe_clusters.spectral import ball_radius, conformal_factor_check, kernel_transfer_check, steklov_verdict


def verdict(number: int, title: str, checks: list[tuple[str, float, float]], seconds: float, limit: float) -> None:
    """checks: (label, measured, tolerance) with pass iff measured <= tolerance."""
    failed = [c for c in checks if not (c[1] <= c[2])]
    runtime_ok = seconds < limit
    status = "PASS" if not failed and runtime_ok else "FAIL"
    worst = max(checks, key=lambda c: c[1] / c[2] if c[2] else (math.inf if c[1] > 0 else 0))
    detail = f"worst {worst[0]} = {worst[1]:.3e} (tol {worst[2]:.0e})"
    if failed:
        detail += f"; {len(failed)}/{len(checks)} checks over tolerance"
    limit_text = f"limit {limit:.0f}s" if math.isfinite(limit) else "no limit"
    print(f"\n{status} criterion {number}: {title} | {detail} | runtime {seconds:.2f}s ({limit_text})")
    assert not failed, [c for c in failed[:5]]
    assert runtime_ok, f"runtime {seconds:.1f}s exceeds {limit}s"


def test_criterion_01_integral_recursions():
    t0 = time.perf_counter()
    checks = [(c.name, c.rel_error, 1e-12) for c in recursion_suite(range(4, 11))]
    verdict(1, "integral recursions and chain, n = 4..10", checks, time.perf_counter() - t0, 1)


def test_criterion_02_varphi_identities():
    t0 = time.perf_counter()
    checks = []
    for n in range(4, 9):
        for D in (1.1, 1.5, 2.0, 5.0):
            checks += [(c.name, c.rel_error, 1e-10) for c in varphi_identities(n, D)]
    verdict(2, "phi reduction identities, n = 4..8", checks, time.perf_counter() - t0, 5)


def test_criterion_03_bubble_and_kernel_residuals():
    t0 = time.perf_counter()
    checks = []
    for n in range(4, 8):
        for D in (1.25, 2.0, 5.0):
            p = params_from_D(n, D)
            x = sample_points(n, 128, n)
            b = Bubble(p)
            checks.append((f"n={n} D={D} interior", float(np.max(np.abs(interior_residual(b, x)) / interior_scale(b, x))), 1e-8))
            xb = x[:, :-1]
            checks.append((f"n={n} D={D} boundary", float(np.max(np.abs(boundary_residual(b, xb)) / boundary_scale(b, xb))), 1e-8))
            for i in range(1, n + 1):
                ri, rb, mi, mb = linearized_residuals(p, i, x)
                checks.append((f"n={n} D={D} z_{i} interior", float(np.max(np.abs(ri) / mi)), 1e-8))
                checks.append((f"n={n} D={D} z_{i} boundary", float(np.max(np.abs(rb) / mb)), 1e-8))
    verdict(3, "bubble and kernel residuals, n = 4..7, 128 points", checks, time.perf_counter() - t0, 10)


def test_criterion_04_spectral_nondegeneracy():
    t0 = time.perf_counter()
    checks = []
    for n in (4, 5, 6, 7):
        for D in (1.25, 2.0):
            p = params_from_D(n, D)
            _, T = ball_radius(p)
            mu0, mu1, mult, rows = steklov_verdict(p)
            checks.append((f"n={n} D={D} mu0 vs tanh T", abs(mu0 - math.tanh(T)) / math.tanh(T), 1e-8))
            checks.append((f"n={n} D={D} mu1 vs coth T", abs(mu1 - 1 / math.tanh(T)) * math.tanh(T), 1e-8))
            checks.append((f"n={n} D={D} gap count", float(sum(r.mu <= mu1 for r in rows[2:])), 0.0))
            checks.append((f"n={n} D={D} |multiplicity - n|", float(abs(mult - n)), 0.0))
    verdict(4, "Robin spectrum and kernel multiplicity", checks, time.perf_counter() - t0, 30)


def test_criterion_05_conformal_bridge():
    t0 = time.perf_counter()
    checks = []
    for n in (4, 5, 6, 7):
        p = params_from_D(n, 2.0)
        checks.append((f"n={n} pullback deviation", conformal_factor_check(p, sample_points(n, 1000, 0)), 1e-6))
        for i in range(1, n + 1):
            checks.append((f"n={n} transfer z_{i}", kernel_transfer_check(p, i, 1000, 0), 1e-6))
    verdict(5, "Cayley pullback and kernel transfer, 1000 points", checks, time.perf_counter() - t0, 30)


def test_criterion_06_correction():
    t0 = time.perf_counter()
    checks = []
    for n in (4, 5, 6, 7):
        p = params_from_D(n, 1.7)
        x = sample_points(n, 100, 0)
        x1x2 = Polynomial.monomial(n, 0, 1)
        xn = Polynomial.monomial(n, n - 1)
        scale = 1 + np.max(np.abs(x1x2(x) * xn(x)))
        q = x1x2 * (xn + Polynomial.constant(n, -p.D)) * (1 / (4 * n))
        checks += [
            (f"n={n} L(x1x2)", float(np.max(np.abs(C.L_operator(x1x2, p, x) - 2 * n * x1x2(x)))) / scale, 1e-13),
            (f"n={n} L(x1x2xn)", float(np.max(np.abs(C.L_operator(x1x2 * xn, p, x) - 4 * n * x1x2(x) * xn(x)
                                                     - 2 * n * p.D * x1x2(x)))) / scale, 1e-13),
            (f"n={n} L(q)", float(np.max(np.abs(C.L_operator(q, p, x) - x1x2(x) * xn(x)))) / scale, 1e-13),
        ]
        if n >= 5:
            h = off_diagonal_form(n - 1)
            res, mag = C.wp_residual(p, h, x)
            checks.append((f"n={n} w_p residual", float(np.max(np.abs(res) / mag)), 1e-8))
            s0, _ = C.decay_slopes(p, h)
            checks.append((f"n={n} decay slope rel. dev.", abs(s0 - (3 - n)) / (n - 3), 0.02))
    p4 = params_from_D(4, 2.0)
    e0, e1 = C.profile_ode_residuals(p4, np.array([1.01, 1.5, 2.0, 5.0, 20.0, 200.0]))
    checks.append(("Phi0 ODE", float(np.max(np.abs(e0))), 1e-10))
    checks.append(("Phi1 ODE", float(np.max(np.abs(e1))), 1e-10))
    res, mag = C.zp_residual(p4, sample_points(4, 200, 0))
    checks.append(("z_p equation", float(np.max(np.abs(res) / mag)), 1e-8))
    verdict(6, "correction terms", checks, time.perf_counter() - t0, 60)


def test_criterion_07_f_n_oracle(psi_case_n5):
    t0 = time.perf_counter()
    fc = psi_case_n5.constants
    oracle = C.quadratic_form_oracle(psi_case_n5.params, psi_case_n5.psi)
    seconds = psi_case_n5.seconds + time.perf_counter() - t0
    checks = [
        ("-f_5 (nonnegativity)", -fc.f_n, 0.0),
        ("f_5 vs quadratic-form oracle", abs(oracle.value - fc.f_n) / abs(fc.f_n), 0.01),
    ]
    verdict(7, f"f_5 = {fc.f_n:.6g}, oracle {oracle.value:.6g}", checks, seconds, 120)


def test_criterion_08_energy_constants():
    t0 = time.perf_counter()
    checks = []
    for n in (4, 5, 6, 7):
        for D in (1.25, 2.0):
            p = params_from_D(n, D)
            rel = lambda a, b: abs(a - b) / abs(b)
            checks.append((f"n={n} D={D} bubble energy", rel(E.const_E(p), E.const_E_oracle(p)), 1e-6))
            checks.append((f"n={n} D={D} c_n", rel(E.const_c(p), E.const_c_oracle(p)), 1e-6))
            o, c = E.interaction_oracle(p), E.interaction_closed_parts(p)
            checks.append((f"n={n} D={D} interaction total", rel(E.interaction_coefficient(p), o.total), 1e-6))
            checks.append((f"n={n} D={D} interaction interior part", rel(c.interior, o.interior), 1e-6))
            checks.append((f"n={n} D={D} interaction boundary part", rel(c.boundary, o.boundary), 1e-6))
    for n in range(4, 9):
        d, h = E.const_d_h(params_from_D(n, 2.0))
        checks.append((f"n={n} d_n vs h_n", abs(d - h) / abs(h), 1e-10))
    for n in (5, 6, 7):
        for D in (1.2, 1.5, 2.0, 5.0):
            r = E.cancellation_checks(params_from_D(n, D))
            checks.append((f"n={n} D={D} scalar-curvature residual", abs(r.rbar_residual), 1e-8))
            checks.append((f"n={n} D={D} curvature-term residual", abs(r.ric_residual), 1e-8))
    verdict(8, "energy constants and cancellation identities", checks, time.perf_counter() - t0, 60)


def test_criterion_09_n4_log_rate():
    t0 = time.perf_counter()
    r = E.grad_w0_rate(params_from_D(4, 2.0), off_diagonal_form(3), deltas=(1e-3, 1e-4))
    checks = [("slope rel. error", r.rel_error, 0.05)]
    verdict(9, f"n = 4 gradient-energy rate, slope {r.slope:.5g} vs {r.expected:.5g}", checks,
            time.perf_counter() - t0, 120)


def test_criterion_10_reduction():
    t0 = time.perf_counter()
    checks = []
    for eps in (1e-10, 1e-6, 1e-3, 0.05, 0.1, 0.18):
        s = rho_inverse(eps)
        checks.append((f"rho round trip eps={eps}", abs(-s * math.log(s) - eps) / eps, 1e-12))
    p = params_from_D(4, 2.0)
    const = E.assemble_constants(p)
    pn = E.pi_norm_sq(off_diagonal_form(3), 4)
    Q = HessianForm(np.diag([1.0, 2.0, 3.0]))
    rng = np.random.default_rng(0)
    cfg = ClusterConfig(3, rng.uniform(0, 1, 3), rng.normal(size=(3, 3)), 1e-3)
    gd, gt = F_n_gradient(cfg, Q, const, pn, p)
    flat = np.concatenate([cfg.d, cfg.tau.ravel()])
    grad = np.concatenate([gd, gt.ravel()])
    val = lambda v: F_n(ClusterConfig(3, v[:3], v[3:].reshape(3, 3), 1e-3), Q, const, pn, p)
    h = 1e-4
    fd_err = 0.0
    for i in range(len(flat)):
        e = np.zeros_like(flat)
        e[i] = h
        fd = (-val(flat + 2 * e) + 8 * val(flat + e) - 8 * val(flat - e) + val(flat - 2 * e)) / (12 * h)
        fd_err = max(fd_err, abs(fd - grad[i]) / max(1.0, abs(grad[i])))
    checks.append(("F_n gradient vs finite differences", fd_err, 1e-6))
    iso = HessianForm(np.eye(3))
    res2 = optimize_cluster(2, iso, const, pn, p)
    t_star = ReducedModel.build(p, const, iso, pn).two_point_radius(1.0)
    checks.append(("k=2 radius vs t*", float(np.max(np.abs(np.linalg.norm(res2.config.tau, axis=1) - t_star)) / t_star), 1e-6))
    res3 = optimize_cluster(3, iso, const, pn, p)
    t = res3.config.tau
    dists = [np.linalg.norm(t[i] - t[j]) for i in range(3) for j in range(i + 1, 3)]
    checks.append(("k=3 side spread", (max(dists) - min(dists)) / max(dists), 1e-6))
    verdict(10, "reduced energy and cluster optimisation", checks, time.perf_counter() - t0, 30)


DETERMINISM_COMMANDS = [
    ["verify", "integrals"],
    ["verify", "bubble"],
    ["verify", "nondegeneracy", "--n", "4"],
    ["verify", "correction"],
    ["verify", "energy"],
    ["constants", "--n", "4", "--format", "csv"],
    ["spectrum", "--n", "6", "--format", "csv"],
    ["optimize", "--n", "4", "--k", "3"],
    ["export-field", "--n", "4", "--k", "2", "--points", "9"],
]


def test_criterion_11_determinism():
    t0 = time.perf_counter()
    env = dict(os.environ, YCL_THREADS="1")
    checks = []
    for cmd in DETERMINISM_COMMANDS:
        runs = [subprocess.run([sys.executable, "-m", "yamabe_clusters", *cmd], capture_output=True, env=env)
                for _ in range(2)]
        same = runs[0].stdout == runs[1].stdout and runs[0].returncode == runs[1].returncode and runs[0].stdout
        checks.append((" ".join(cmd) + " byte mismatch", 0.0 if same else 1.0, 0.0))
    verdict(11, "repeated CLI reports are byte-identical", checks, time.perf_counter() - t0, math.inf)
