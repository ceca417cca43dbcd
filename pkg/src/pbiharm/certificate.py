"""Hypothesis checks and certified parameter intervals for the three-solution
theorems.

Every strict inequality is reported as a verdict whose ``margin`` is the
amount by which it is satisfied (positive means it holds).  Quadrature error
bounds are subtracted from margins before the verdict is decided, so a
certificate is never granted on round-off.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from . import testfun
from .core import CertificateReport, HypothesisVerdict, IntervalPair
from .geometry import TALENTI_NOTE, ball_volume, geometry, sphere_area
from .numerics import find_root, integrate, max_on_interval


class UnsupportedCombination(ValueError):
    pass


@dataclass
class Constants:
    k: float
    k_source: str
    tau: float
    center: tuple
    meas: float
    params: testfun.TestFnParams
    log_sigma: float
    sigma_relerr: float
    K: float
    eta: float
    r: float
    phi: float
    max_G: float
    sup_level: float
    sup_level_err: float
    annulus: float
    annulus_err: float
    core: float

    @property
    def sigma(self):
        return math.exp(self.log_sigma)

    @property
    def psi(self):
        return self.annulus + self.core


# ---------------------------------------------------------------------------
# quadrature nodes on domains (for polynomial spatial factors)


def _gauss(m, a, b):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def sphere_directions(N, m=16):
    """Unit vectors and weights of a product rule on S^{N-1}.

    Polar angles use Gauss-Jacobi nodes in cos(phi), the azimuth 2m equally
    spaced nodes, so polynomials of degree < 2m integrate exactly.
    """
    if N == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    grids = []
    for j in range(N - 2):
        a = 0.5 * (N - 3 - j)
        t, w = roots_jacobi(m, a, a)
        grids.append((np.arccos(t), w))
    grids.append((np.arange(2 * m) * np.pi / m, np.full(2 * m, np.pi / m)))
    mesh = np.meshgrid(*[g[0] for g in grids], indexing="ij")
    wmesh = np.meshgrid(*[g[1] for g in grids], indexing="ij")
    angles = np.stack([a.ravel() for a in mesh], axis=1)
    weights = np.prod(np.stack([w.ravel() for w in wmesh], axis=1), axis=1)
    dirs = np.empty((angles.shape[0], N))
    sin_prod = np.ones(angles.shape[0])
    for j in range(N - 1):
        dirs[:, j] = sin_prod * np.cos(angles[:, j])
        sin_prod = sin_prod * np.sin(angles[:, j])
    dirs[:, N - 1] = sin_prod
    return dirs, weights


def domain_nodes(domain, N, m=None):
    """Quadrature nodes and weights covering the whole domain."""
    if m is None:
        m = {1: 200, 2: 64, 3: 24}.get(N, 10)
    if domain.shape == "box":
        axes = [_gauss(m, lo, hi) for lo, hi in zip(domain.lower, domain.upper)]
        mesh = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        wmesh = np.meshgrid(*[a[1] for a in axes], indexing="ij")
        pts = np.stack([g.ravel() for g in mesh], axis=1)
        wts = np.prod(np.stack([g.ravel() for g in wmesh], axis=1), axis=1)
        return pts, wts
    rs, rw = _gauss(m, 0.0, domain.radius)
    dirs, dw = sphere_directions(N, max(m // 2, 4))
    pts = np.asarray(domain.center) + (rs[:, None, None] * dirs[None, :, :])
    wts = (rw * rs ** (N - 1))[:, None] * dw[None, :]
    return pts.reshape(-1, N), wts.ravel()


def _exact_domain_integral(poly, domain):
    if domain.shape == "box":
        return poly.box_integral(domain.lower, domain.upper)
    return poly.shell_integral(domain.center, 0.0, domain.radius)


def signed_parts(poly, domain, N):
    """(int a^+, int a^-, error estimate) over the domain.

    Exact when the sampled values never change sign.  Otherwise a product
    Gauss rule on the clipped parts, with the change against a coarser rule
    as the error estimate (the kink along the zero set limits its order).
    """
    pts, wts = domain_nodes(domain, N)
    vals = poly(pts)
    if np.all(vals >= 0):
        return _exact_domain_integral(poly, domain), 0.0, 0.0
    if np.all(vals <= 0):
        return 0.0, -_exact_domain_integral(poly, domain), 0.0
    fine_m = {1: 400, 2: 128, 3: 48, 4: 20, 5: 14}.get(N, 12)
    fpts, fwts = domain_nodes(domain, N, fine_m)
    fvals = poly(fpts)
    coarse = np.array([np.sum(wts * np.maximum(vals, 0.0)), np.sum(wts * np.maximum(-vals, 0.0))])
    fine = np.array([np.sum(fwts * np.maximum(fvals, 0.0)),
                     np.sum(fwts * np.maximum(-fvals, 0.0))])
    err = np.abs(fine - coarse)
    return float(fine[0]), float(fine[1]), float(max(err))


# ---------------------------------------------------------------------------
# integrals of F


def max_F_on_level(nl, gamma, samples=1024):
    """(max G, max -G) over |xi| <= gamma, G the t-primitive."""
    _, mg = max_on_interval(nl.G, -gamma, gamma, samples)
    _, mng = max_on_interval(lambda t: -nl.G(t), -gamma, gamma, samples)
    return max(mg, 0.0), max(mng, 0.0)


def sup_level_integral(spec, geo, gamma):
    """int over the domain of max_{|xi| <= gamma} F(x, xi), with an error
    estimate (zero unless the spatial factor changes sign)."""
    nl = spec.nonlinearity
    max_g, max_neg_g = max_F_on_level(nl, gamma)
    if nl.autonomous:
        return geo.meas * max_g, 0.0
    pos, neg, err = signed_parts(nl.spatial, spec.domain, spec.N)
    return pos * max_g + neg * max_neg_g, err * (max_g + max_neg_g)


def _profile_kinks(params, nl):
    lo, hi = params.radii
    kinks = []
    for bp in nl.breakpoints():
        if 0.0 < bp < params.delta:
            kinks.append(find_root(lambda s: params.profile(s) - bp, lo, hi))
    return kinks


def annulus_F_integral(spec, geo, params, tol=None):
    """int over the test function's annulus of F(x, profile(|x - x0|))."""
    nl = spec.nonlinearity
    N = spec.N
    lo, hi = params.radii
    tol = spec.quad_tol if tol is None else tol
    if nl.autonomous:
        omega = sphere_area(N)

        def shell(s):
            return omega
    else:
        coeffs = nl.spatial.sphere_polynomial(params.center)
        shell = np.polynomial.Polynomial(coeffs)

    def integrand(s):
        return float(nl.G(params.profile(s))) * shell(s) * s ** (N - 1)

    return integrate(integrand, lo, hi, tol=tol, kinks=_profile_kinks(params, nl))


def core_F_integral(spec, params):
    """int over the inner ball B(x0, r_in) of F(x, delta)."""
    nl = spec.nonlinearity
    r_in = params.radii[0]
    if nl.autonomous:
        vol = ball_volume(spec.N, r_in)
    else:
        vol = nl.spatial.shell_integral(params.center, 0.0, r_in)
    return float(nl.G(params.delta)) * vol


# ---------------------------------------------------------------------------
# constants


def testfn_params(spec, geo):
    if spec.r1 is not None:
        if spec.r2 > geo.tau * (1 + 1e-14):
            raise UnsupportedCombination(
                f"r2={spec.r2} exceeds the inradius {geo.tau}; B(x0, r2) must lie in the domain")
        return testfun.TestFnParams(geo.tau, spec.delta, geo.center, spec.N, spec.p,
                                    "v_delta", spec.r1, spec.r2)
    return testfun.TestFnParams(geo.tau, spec.delta, geo.center, spec.N, spec.p)


def compute_constants(spec, geo=None):
    geo = geometry(spec) if geo is None else geo
    params = testfn_params(spec, geo)
    p, N, k = spec.p, spec.N, geo.k
    if params.variant == "v_delta":
        log_sig, sig_err = testfun.log_sigma_general(p, N, spec.r1, spec.r2, spec.quad_tol)
        K = testfun.K_general(p, N, spec.r1, spec.r2, k, log_sig)
        phi = testfun.phi_v_delta(p, N, spec.r1, spec.r2, spec.delta, k, log_sig)
    else:
        log_sig, sig_err = testfun.log_sigma(p, N, geo.tau, spec.quad_tol)
        K = testfun.K_const(p, N, geo.tau, k, log_sig)
        phi = testfun.phi_u_delta(p, N, geo.tau, spec.delta, log_sig)
    r = testfun.r_level(spec.gamma, p, k)
    if params.variant == "v_delta":
        eta = r / (r + phi)
    else:
        eta = testfun.eta(spec.gamma, spec.delta, p, N, geo.tau, k, log_sig)
    max_g, _ = max_F_on_level(spec.nonlinearity, spec.gamma)
    ann = annulus_F_integral(spec, geo, params)
    sup, sup_err = sup_level_integral(spec, geo, spec.gamma)
    return Constants(
        k=k, k_source=geo.k_source, tau=geo.tau, center=geo.center, meas=geo.meas,
        params=params, log_sigma=log_sig, sigma_relerr=sig_err, K=K, eta=eta, r=r,
        phi=phi, max_G=max_g, sup_level=sup, sup_level_err=sup_err,
        annulus=ann.value, annulus_err=ann.error_estimate, core=core_F_integral(spec, params),
    )


# ---------------------------------------------------------------------------
# hypotheses


def _xi_grid(limit=1e6, n=200):
    pos = np.logspace(-3, math.log10(limit), n)
    return np.concatenate([-pos[::-1], [0.0], pos])


def _growth_samples(spec):
    nl = spec.nonlinearity
    if nl.autonomous and (nl.alpha is None or nl.alpha.is_constant()):
        return None
    pts, _ = domain_nodes(spec.domain, spec.N, m=6)
    return pts


def _check_bounded_growth(spec, name):
    """F(x, xi) <= bound(x) (1 + |xi|^s) with s < p, sampled up to 1e6."""
    nl = spec.nonlinearity
    s = nl.s
    xi = _xi_grid()
    G = nl.G(xi)
    rhs_xi = 1.0 + np.abs(xi) ** s
    pts = _growth_samples(spec)
    if pts is None:
        a = np.array([1.0])
        bound = np.array([nl.b if name == "h3prime" else nl.alpha(np.zeros((1, spec.N)))[0]])
    else:
        a = nl.spatial(pts) if nl.spatial is not None else np.ones(len(pts))
        bound = (np.full(len(pts), nl.b) if name == "h3prime" else nl.alpha(pts))
    F = a[:, None] * G[None, :]
    denom = bound[:, None] * rhs_xi[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0, F / denom, np.where(F > 0, np.inf, 0.0))
    worst = float(np.max(ratio))
    margin = 1.0 - worst
    holds = margin >= 0 and s < spec.p
    detail = (f"validated (sampled): max F/(bound (1+|xi|^s)) = {worst:.6g} "
              f"on |xi| <= 1e6, s={s:g} {'<' if s < spec.p else '>='} p={spec.p:g}")
    return HypothesisVerdict(name, bool(holds), margin, detail)


def _check_h3star(spec):
    """f(t)/|t|^(s-1) -> 0 as |t| -> inf, by a decreasing-tail test."""
    nl = spec.nonlinearity
    s = nl.s
    t = np.logspace(3, 6, 61)
    worst_margin = math.inf
    monotone = True
    for sign in (1.0, -1.0):
        rho = np.abs(nl.g(sign * t)) / t ** (s - 1)
        if rho[0] == 0.0 and np.all(rho == 0.0):
            continue
        increase = np.max(np.diff(rho) / np.maximum(rho[:-1], 1e-300))
        if increase > 1e-12:
            monotone = False
            worst_margin = min(worst_margin, -float(increase))
        else:
            worst_margin = min(worst_margin, 0.9 - float(rho[-1] / rho[0]))
    margin = 1.0 if worst_margin == math.inf else worst_margin
    holds = monotone and margin > 0 and 1 <= s <= spec.p
    detail = (f"validated (sampled): tail of |f(t)|/|t|^(s-1) on 1e3 <= |t| <= 1e6, "
              f"s={s:g}, p={spec.p:g}")
    return HypothesisVerdict("h3star", bool(holds), margin, detail)


def _check_j1(spec, c):
    # F(x, xi) >= 0 on annulus x [0, delta]
    nl = spec.nonlinearity
    xi = np.linspace(0.0, spec.delta, 257)
    G = nl.G(xi)
    if nl.autonomous:
        worst = float(np.min(G))
    else:
        lo, hi = c.params.radii
        rs = np.linspace(lo, hi, 9)
        dirs, _ = sphere_directions(spec.N, 6)
        pts = (np.asarray(c.center) + rs[:, None, None] * dirs[None]).reshape(-1, spec.N)
        worst = float(np.min(nl.spatial(pts)[:, None] * G[None, :]))
    return HypothesisVerdict("j1", worst >= 0, worst,
                             "validated (sampled): min F on annulus x [0, delta]")


def _h2_error(c):
    # quadrature errors in eta * Psi(test) and in the sup-level integral
    return (c.eta * c.annulus_err + c.psi * c.eta * (1 - c.eta) * c.sigma_relerr
            + c.sup_level_err)


def check_hypotheses(spec, geo, c):
    """Verdicts for every hypothesis that applies to this spec."""
    p, gamma, delta = spec.p, spec.gamma, spec.delta
    nl = spec.nonlinearity
    verdicts = []

    k_root = c.K ** (1.0 / p)
    h1_err = k_root * gamma * c.sigma_relerr / p
    h1_margin = delta - k_root * gamma - h1_err
    verdicts.append(HypothesisVerdict(
        "h1", h1_margin > 0, h1_margin,
        f"delta={delta:.17g} vs K^(1/p) gamma={k_root * gamma:.17g}"))

    err = _h2_error(c)
    h2_margin = c.eta * c.psi - c.sup_level - err
    if c.params.variant == "v_delta":
        name = "h2star"
    else:
        name = "h2prime" if nl.autonomous else "h2"
    verdicts.append(HypothesisVerdict(
        name, h2_margin > 0, h2_margin,
        f"sup-level integral {c.sup_level:.17g} vs eta*Psi(test) {c.eta * c.psi:.17g}"))

    if nl.growth == "h3star":
        verdicts.append(_check_h3star(spec))
    elif nl.growth == "h3prime":
        verdicts.append(_check_bounded_growth(spec, "h3prime"))
    else:
        verdicts.append(_check_bounded_growth(spec, "h3"))

    if nl.autonomous:
        verdicts.append(HypothesisVerdict(
            "j1prime", c.annulus >= 0, c.annulus, "annulus integral of F(test) >= 0"))
        j2 = c.eta * c.core / c.meas - c.max_G
        verdicts.append(HypothesisVerdict(
            "j2prime", j2 > 0, j2, "max F < eta meas(inner ball)/meas F(delta)"))
    else:
        verdicts.append(_check_j1(spec, c))
        j2 = c.eta * c.core - c.sup_level - c.sup_level_err
        verdicts.append(HypothesisVerdict(
            "j2", j2 > 0, j2, "sup-level integral < eta * int_inner F(x, delta)"))
    return verdicts


def lambda_interval(spec, c):
    """Interval ]lambda1, lambda2[ and the bound lambda3h; None when the
    denominator of lambda1 is not positive."""
    gap = c.psi - c.sup_level
    gap3 = c.r * c.psi / c.phi - c.sup_level
    if not (gap > 0 and gap3 > 0):
        return None
    lam1 = c.phi / gap
    lam2 = math.inf if c.sup_level == 0 else c.r / c.sup_level
    lam3 = spec.h * c.r / gap3
    overlap = "disjoint" if lam3 <= lam1 else "overlapping"
    return IntervalPair(lam1, lam2, lam3, spec.h, overlap, lam1 < lam2)


def classify_overlap(intervals):
    return intervals.overlap


def certify(spec):
    """Full certificate pipeline for a validated spec."""
    geo = geometry(spec)
    c = compute_constants(spec, geo)
    verdicts = check_hypotheses(spec, geo, c)
    by_name = {v.name: v for v in verdicts}
    h2_name = next(n for n in ("h2", "h2prime", "h2star") if n in by_name)
    growth_name = next(n for n in ("h3", "h3prime", "h3star") if n in by_name)
    intervals = lambda_interval(spec, c) if by_name[h2_name].holds else None
    granted = (by_name["h1"].holds and by_name[h2_name].holds
               and by_name[growth_name].holds
               and intervals is not None and intervals.nonempty)

    notes = [f"k source: {c.k_source}"]
    if c.k_source == "talenti_bound":
        notes.append(TALENTI_NOTE)
    notes.append(f"test function: {c.params.variant}, radii {c.params.radii}")
    notes.append("growth verdicts are validated by sampling, not proven")
    notes.append("the second interval is only known to lie in [0, lambda3h]")
    if intervals is not None and math.isinf(intervals.lambda2):
        notes.append("sup-level integral is zero, so lambda2 = +inf")
    if not granted:
        failed = [v.name for v in verdicts if not v.holds and not v.name.startswith("j")]
        notes.append("certificate denied: " + (", ".join(failed) or "empty interval"))

    err = _h2_error(c)
    return CertificateReport(
        k=c.k, k_source=c.k_source, tau=c.tau, center=tuple(c.center), meas=c.meas,
        test_function=c.params.variant, sigma=c.sigma, K=c.K, eta=c.eta, r=c.r,
        phi_test=c.phi, max_F=c.max_G, sup_level_integral=c.sup_level,
        annulus_integral=c.annulus, core_integral=c.core, psi_test=c.psi,
        quad_error_bound=err, verdicts=verdicts, intervals=intervals,
        granted=bool(granted), notes=notes)
