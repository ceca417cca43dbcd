"""Acceptance criteria, one test each, at the stated tolerances.

Each test records a PASS/FAIL line; the lines are printed in the terminal
summary (see conftest.py) and also when this file is run as a script.
"""

import json
import math
import sys
import time

import numpy as np
import pytest
from scipy.integrate import quad

from conftest import CONFIGS, spec_text
from oracles import LINEAR_U0, SIGMA_2_3_1
from pbiharm import cli, solver as sv, testfun as tf
from pbiharm.certificate import certify
from pbiharm.core import Nonlinearity, example36, parse_spec
from pbiharm.geometry import ball_volume, sphere_area

RESULTS = []


def record(number, title, ok, detail):
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}")
    assert ok, detail


def rel(a, b):
    return abs(a - b) / abs(b)


# 1 -------------------------------------------------------------------------


def _ex36_lambda1_display(delta=8.0, tau=1.0):
    # lambda1* = 2^10 pi^{3/2} sigma delta^2 / (tau^8 Gamma(3/2) (G_F + |B(tau/2)| F(delta)))
    F = lambda xi: 2.0 * max(xi - 2.0, 0.0) ** 1.5 / 3.0
    prof = lambda s: 16.0 * delta * s ** 2 * (tau - s) ** 2 / tau ** 4
    kink = tau * (0.5 + 0.5 * math.sqrt(1.0 - 4.0 * math.sqrt(2.0 / (16.0 * delta))))
    inner, _ = quad(lambda s: F(prof(s)) * s ** 2, tau / 2, tau, points=[kink],
                    epsabs=0, epsrel=1e-13, limit=200)
    G_F = 4.0 * math.pi * inner
    sigma = SIGMA_2_3_1 * tau ** 7
    return (2 ** 10 * math.pi ** 1.5 * sigma * delta ** 2
            / (tau ** 8 * math.gamma(1.5) * (G_F + ball_volume(3, tau / 2) * F(delta))))


def test_criterion_1_example36(tmp_path):
    lam1_star = _ex36_lambda1_display()
    base = (CONFIGS / "example36.ini").read_text()
    worst, slowest, ok = 0.0, 0.0, True
    for h in (1.5, 2.0, 10.0):
        cfg = tmp_path / f"ex36_h{h}.ini"
        cfg.write_text(base.replace("h = 2", f"h = {h}"))
        out = tmp_path / f"rep_{h}.json"
        t0 = time.perf_counter()
        code = cli.main(["certify", str(cfg), "-o", str(out)])
        slowest = max(slowest, time.perf_counter() - t0)
        rep = json.loads(out.read_text())
        iv = rep["intervals"]
        ok &= code == 0 and rep["max_F"] == 0.0 and iv["lambda2"] == "inf"
        worst = max(worst, rel(iv["lambda1"], lam1_star), rel(iv["lambda3h"], h * lam1_star))
    ok &= worst <= 1e-10 and slowest < 1.0
    record(1, "sqrt nonlinearity on the unit ball", ok,
           f"lambda1*={lam1_star:.12g}, worst rel err {worst:.2e}, max runtime {slowest:.3f}s")


# 2 -------------------------------------------------------------------------


def _phi_by_quadrature(p, N, tau, delta):
    # Laplacian from the profile polynomial, not from the library formula
    prof = np.polynomial.Polynomial([0, 0, tau ** 2, -2 * tau, 1]) * (16 * delta / tau ** 4)
    d1, d2 = prof.deriv(), prof.deriv(2)
    lap = lambda s: d2(s) + (N - 1) * d1(s) / s
    root = max(r.real for r in (d2 * np.polynomial.Polynomial([0, 1]) + (N - 1) * d1).roots()
               if tau / 2 < r.real < tau and abs(r.imag) < 1e-12)
    scale = abs(lap(tau))
    val, _ = quad(lambda s: abs(lap(s) / scale) ** p * s ** (N - 1), tau / 2, tau,
                  points=[root], epsabs=0, epsrel=1e-13, limit=200)
    return sphere_area(N) * val * scale ** p / p


def test_criterion_2_closed_form_energy():
    t0 = time.perf_counter()
    worst = 0.0
    for p in (2.0, 2.5, 3.0):
        for N in (3, 4, 5):
            for tau in (0.5, 1.0, 2.0):
                for delta in (1.0, 3.0):
                    worst = max(worst, rel(tf.phi_u_delta(p, N, tau, delta),
                                           _phi_by_quadrature(p, N, tau, delta)))
    elapsed = time.perf_counter() - t0
    record(2, "closed-form energy of u_delta vs quadrature", worst <= 1e-8 and elapsed < 10,
           f"54 cases, worst rel err {worst:.2e}, runtime {elapsed:.2f}s")


# 3 -------------------------------------------------------------------------


def test_criterion_3_sigma():
    err0 = rel(tf.sigma(2.0, 3, 1.0), SIGMA_2_3_1)
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(20):
        p, N, tau = rng.uniform(1.2, 6.0), int(rng.integers(3, 9)), rng.uniform(0.1, 5.0)
        p = max(p, N / 2 + 0.1)
        worst = max(worst, rel(tf.sigma(p, N, tau), tau ** (2 * p + N) * tf.sigma(p, N, 1.0)))
    record(3, "sigma oracle and scaling law", err0 <= 1e-10 and worst <= 1e-10,
           f"sigma(2,3,1) rel err {err0:.2e}; scaling worst {worst:.2e} on 20 sets")


# 4 -------------------------------------------------------------------------


def _random_power_spec(rng, extra=""):
    N = int(rng.integers(3, 6))
    p = N / 2 + rng.uniform(0.2, 2.0)
    q = rng.uniform(1.1, p)
    R = rng.uniform(0.5, 2.0)
    return spec_text(N=N, p=p, nl=f"kind = power_sum\nterms = {rng.uniform(0.5, 2):.6f}@{q:.6f}",
                     gamma=rng.uniform(0.2, 2.0), delta=math.exp(rng.uniform(-5.0, 3.0)),
                     domain=f"shape = ball\nradius = {R:.6f}", extra_cert=extra), R


def test_criterion_4_general_test_function_reduction():
    rng = np.random.default_rng(4)
    worst_k, worst_m = 0.0, 0.0
    for _ in range(20):
        text, _ = _random_power_spec(rng)
        spec = parse_spec(text)
        R = spec.domain.radius
        k = rng.uniform(0.05, 1.0)
        worst_k = max(worst_k, rel(tf.K_general(spec.p, spec.N, R / 2, R, k),
                                   tf.K_const(spec.p, spec.N, R, k)))
        base = certify(spec)
        star = certify(parse_spec(text.replace("[certificate]\n",
                                               f"[certificate]\nr1 = {R / 2!r}\nr2 = {R!r}\n")))
        m_star = star.verdict("h2star").margin
        m = base.verdict("h2prime").margin
        worst_m = max(worst_m, rel(m_star, m))
    record(4, "two-radius test function reduces to u_delta", max(worst_k, worst_m) <= 1e-10,
           f"K rel err {worst_k:.2e}, h2 margin rel err {worst_m:.2e} on 20 sets")


# 5 -------------------------------------------------------------------------


def _random_accepted_candidate(rng):
    # flat_then_power with a threshold above gamma has a zero sup-level integral
    text, _ = _random_power_spec(rng)
    if rng.random() < 0.6:
        spec = parse_spec(text)
        thr = spec.gamma * rng.uniform(1.05, 3.0)
        nl = (f"kind = flat_then_power\nthreshold = {thr!r}\nexponent = "
              f"{rng.uniform(1.2, spec.p)!r}\nscale = {rng.uniform(0.1, 5.0)!r}")
        text = spec_text(N=spec.N, p=spec.p, nl=nl, gamma=spec.gamma,
                         delta=thr * rng.uniform(1.5, 10.0),
                         domain=f"shape = ball\nradius = {spec.domain.radius!r}")
    return text


def test_criterion_5_proof_step_implications():
    rng = np.random.default_rng(5)
    accepted = drawn = 0
    worst_eta = 0.0
    ok = True
    while accepted < 100:
        rep = certify(parse_spec(_random_accepted_candidate(rng)))
        drawn += 1
        if not rep.granted:
            continue
        accepted += 1
        if rep.verdict("h1").margin > 0:
            ok &= rep.phi_test > rep.r
        h2 = next(v for v in rep.verdicts if v.name.startswith("h2"))
        if h2.margin > 0:
            ok &= rep.intervals.lambda1 < rep.intervals.lambda2
        worst_eta = max(worst_eta, rel(rep.eta, rep.r / (rep.r + rep.phi_test)))
    ok &= worst_eta <= 1e-12
    record(5, "proof-step implications", ok,
           f"100 accepted specs out of {drawn} drawn, eta identity worst {worst_eta:.2e}")


# 6 -------------------------------------------------------------------------


def test_criterion_6_linear_oracle():
    t0 = time.perf_counter()
    one = Nonlinearity("polynomial", {"breakpoints": (), "pieces": ((1.0,),)})
    errs = []
    for n in (50, 100, 200, 400):
        rec = sv.minimize(sv.RadialGrid(3, 2.0, 1.0, n, one), 1.0, "zero")
        errs.append(abs(rec.state.values[0] - LINEAR_U0) / LINEAR_U0)
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(3)]
    elapsed = time.perf_counter() - t0
    ok = all(abs(o - 2) <= 0.2 for o in orders) and errs[-1] <= 1e-3 and elapsed < 5
    record(6, "linear solver oracle u(0) -> 7/360", ok,
           f"orders {', '.join(f'{o:.3f}' for o in orders)}, rel err at n=400 {errs[-1]:.2e}, "
           f"runtime {elapsed:.2f}s")


# 7 -------------------------------------------------------------------------


def test_criterion_7_gradient():
    nl = Nonlinearity("power_sum", {"terms": ((1.0, 3.0), (0.5, 1.5))})
    rng = np.random.default_rng(7)
    worst = 0.0
    for p in (2.0, 2.5, 3.0):
        grid = sv.RadialGrid(3, p, 1.0, 64, nl)
        for _ in range(50):
            u = sv.random_smooth_init(grid, rng, rng.uniform(0.5, 3.0))
            d = sv.random_smooth_init(grid, rng, 1.0)
            eps = 1e-5
            fd = (sv.energy(grid, u + eps * d, 3.0) - sv.energy(grid, u - eps * d, 3.0)) / (2 * eps)
            worst = max(worst, rel(float(sv.gradient(grid, u, 3.0) @ d), fd))
    record(7, "gradient vs central differences", worst <= 1e-6,
           f"150 states (50 per p), worst rel err {worst:.2e}")


# 8 -------------------------------------------------------------------------


def test_criterion_8_multiplicity():
    t0 = time.perf_counter()
    spec = parse_spec((CONFIGS / "example36.ini").read_text())
    lam = 2 * certify(spec).intervals.lambda1
    grid = sv.RadialGrid(3, 2.0, 1.0, 200, example36())
    trivial = sv.minimize(grid, lam, "zero")
    mini = sv.minimize(grid, lam, "udelta", delta=spec.delta)
    ok = (trivial.converged and trivial.residual == 0.0 and trivial.state.max_abs == 0.0
          and mini.converged and mini.residual <= 1e-8 and mini.state.energy < 0
          and sv.distinct(trivial.state.values, mini.state.values, 1e-4))
    mp = sv.mountain_pass(grid, lam, trivial.state.values, mini.state.values)
    if mp.converged:
        lo = max(mp.endpoint_energies)
        ok &= mp.residual <= 1e-6 and lo < mp.state.energy < mp.initial_path_max
        mp_text = f"mountain-pass candidate J={mp.state.energy:.6g}, residual {mp.residual:.1e}"
    else:
        ok &= bool(mp.reason)
        mp_text = f"mountain-pass failure record: {mp.reason}"
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    record(8, "multiplicity at lambda = 2 lambda1*", ok,
           f"trivial + minimizer (J={mini.state.energy:.6g}, residual {mini.residual:.1e}); "
           f"{mp_text}; runtime {elapsed:.2f}s")


# 9 -------------------------------------------------------------------------


def test_criterion_9_determinism(tmp_path):
    cfg = str(CONFIGS / "example36.ini")
    blobs = {}
    for run in (0, 1):
        rep, table = tmp_path / f"c{run}.json", tmp_path / f"b{run}.csv"
        assert cli.main(["certify", cfg, "-o", str(rep)]) == 0
        assert cli.main(["branch", cfg, "--range", "1500:5000:4", "--multistart", "4",
                         "--seed", "11", "-o", str(table)]) == 0
        blobs[run] = (rep.read_bytes(), table.read_bytes())
    ok = blobs[0] == blobs[1]
    record(9, "byte-determinism of certify and branch", ok,
           f"certify {len(blobs[0][0])} bytes, branch {len(blobs[0][1])} bytes, identical={ok}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
