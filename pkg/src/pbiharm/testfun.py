"""Radial test functions u_delta, v_delta and the constants built from them.

All products of powers are formed in log space; 2**(5p+1) alone overflows a
double once p is a few hundred.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import sphere_area
from .numerics import find_root, integrate, lgamma

LOG2 = math.log(2.0)
LOGPI = math.log(math.pi)


@dataclass(frozen=True)
class TestFnParams:
    __test__ = False  # keep pytest from collecting it

    tau: float
    delta: float
    center: tuple
    N: int
    p: float
    variant: str = "u_delta"  # or "v_delta"
    r1: float | None = None
    r2: float | None = None

    def __post_init__(self):
        if self.variant == "v_delta" and not (self.r1 is not None and 0 < self.r1 < self.r2):
            raise ValueError("v_delta needs 0 < r1 < r2")

    @property
    def radii(self):
        if self.variant == "v_delta":
            return self.r1, self.r2
        return self.tau / 2, self.tau

    def profile(self, l):
        if self.variant == "v_delta":
            return v_delta_profile(l, self.r1, self.r2, self.delta)
        return u_delta_profile(l, self.tau, self.delta)

    def laplacian(self, l):
        if self.variant == "v_delta":
            return v_delta_laplacian(l, self.r1, self.r2, self.delta, self.N)
        return u_delta_laplacian(l, self.tau, self.delta, self.N)


# ---------------------------------------------------------------------------
# profiles as functions of l = |x - x0|


def u_delta_profile(l, tau, delta):
    l = np.asarray(l, dtype=float)
    ring = 16.0 * l ** 2 * (tau - l) ** 2 * delta / tau ** 4
    out = np.where(l <= tau / 2, delta, np.where(l < tau, ring, 0.0))
    return out if out.ndim else float(out)


def u_delta_laplacian(l, tau, delta, N):
    l = np.asarray(l, dtype=float)
    quad = 2 * (N + 2) * l ** 2 - 3 * (N + 1) * tau * l + N * tau ** 2
    inside = (l > tau / 2) & (l < tau)
    out = np.where(inside, 32.0 * delta * quad / tau ** 4, 0.0)
    return out if out.ndim else float(out)


def v_delta_profile(l, r1, r2, delta):
    l = np.asarray(l, dtype=float)
    num = (3 * (l ** 4 - r2 ** 4) - 4 * (r1 + r2) * (l ** 3 - r2 ** 3)
           + 6 * r1 * r2 * (l ** 2 - r2 ** 2))
    ring = delta * num / ((r2 - r1) ** 3 * (r1 + r2))
    out = np.where(l <= r1, delta, np.where(l < r2, ring, 0.0))
    return out if out.ndim else float(out)


def v_delta_laplacian(l, r1, r2, delta, N):
    l = np.asarray(l, dtype=float)
    quad = (N + 2) * l ** 2 - (N + 1) * (r1 + r2) * l + N * r1 * r2
    inside = (l > r1) & (l < r2)
    out = np.where(inside, 12.0 * delta * quad / ((r2 - r1) ** 3 * (r1 + r2)), 0.0)
    return out if out.ndim else float(out)


def _distance(params, x):
    return float(np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(params.center)))


def eval_u_delta(params, x):
    """Value and Laplacian of u_delta at the point ``x``."""
    l = _distance(params, x)
    return (u_delta_profile(l, params.tau, params.delta),
            u_delta_laplacian(l, params.tau, params.delta, params.N))


def eval_v_delta(params, x):
    l = _distance(params, x)
    return v_delta_profile(l, params.r1, params.r2, params.delta)


# ---------------------------------------------------------------------------
# sigma integrals


def _log_abs_power_integral(coeffs, a, b, p, N, tol):
    """log of int_a^b |c2 s^2 + c1 s + c0|^p s^(N-1) ds and its relative error.

    The quadratic is negative at ``a`` and positive at ``b``; the integral is
    split at its root, where |.|^p has a derivative kink for non-even p.
    """
    c2, c1, c0 = coeffs

    def quad(s):
        return (c2 * s + c1) * s + c0

    root = find_root(quad, a, b)
    scale = max(abs(quad(a)), abs(quad(b)), abs(quad(root)), 1e-300)
    smax = max(abs(a), abs(b))

    def integrand(s):
        v = abs(quad(s)) / scale
        if v == 0.0:
            return 0.0
        return math.exp(p * math.log(v)) * (s / smax) ** (N - 1)

    res = integrate(integrand, a, b, tol=tol, kinks=[root], rtol=1e-13)
    log_val = math.log(res.value) + p * math.log(scale) + (N - 1) * math.log(smax)
    return log_val, res.error_estimate / res.value


def log_sigma(p, N, tau, tol=1e-10):
    coeffs = (2.0 * (N + 2), -3.0 * (N + 1) * tau, float(N) * tau ** 2)
    return _log_abs_power_integral(coeffs, tau / 2, tau, p, N, tol)


def log_sigma_general(p, N, r1, r2, tol=1e-10):
    coeffs = (float(N + 2), -(N + 1.0) * (r1 + r2), float(N) * r1 * r2)
    return _log_abs_power_integral(coeffs, r1, r2, p, N, tol)


def sigma(p, N, tau, tol=1e-10):
    """int_{tau/2}^{tau} |2(N+2)s^2 - 3(N+1)tau s + N tau^2|^p s^(N-1) ds."""
    return math.exp(log_sigma(p, N, tau, tol)[0])


def sigma_general(p, N, r1, r2, tol=1e-10):
    """int_{r1}^{r2} |(N+2)s^2 - (N+1)(r1+r2)s + N r1 r2|^p s^(N-1) ds."""
    if r2 <= r1:
        return 0.0
    return math.exp(log_sigma_general(p, N, r1, r2, tol)[0])


# ---------------------------------------------------------------------------
# constants


def _log_norm_factor(p, N):
    # log(2^(5p+1) pi^(N/2) / Gamma(N/2))
    return (5 * p + 1) * LOG2 + 0.5 * N * LOGPI - lgamma(N / 2)


def log_K_const(p, N, tau, k, log_sig=None):
    if log_sig is None:
        log_sig = log_sigma(p, N, tau)[0]
    return 4 * p * math.log(tau) - _log_norm_factor(p, N) - p * math.log(k) - log_sig


def K_const(p, N, tau, k, log_sig=None):
    """tau^(4p) Gamma(N/2) / (2^(5p+1) pi^(N/2) k^p sigma)."""
    return math.exp(log_K_const(p, N, tau, k, log_sig))


def log_K_general(p, N, r1, r2, k, log_sig=None):
    if log_sig is None:
        log_sig = log_sigma_general(p, N, r1, r2)[0]
    return (3 * p * math.log(r2 - r1) + p * math.log(r1 + r2) + lgamma(N / 2)
            - (2 * p + 1) * LOG2 - p * math.log(3.0) - 0.5 * N * LOGPI
            - p * math.log(k) - log_sig)


def K_general(p, N, r1, r2, k, log_sig=None):
    return math.exp(log_K_general(p, N, r1, r2, k, log_sig))


def log_phi_u_delta(p, N, tau, delta, log_sig=None):
    if log_sig is None:
        log_sig = log_sigma(p, N, tau)[0]
    return (_log_norm_factor(p, N) + p * math.log(delta) + log_sig
            - 4 * p * math.log(tau) - math.log(p))


def phi_u_delta(p, N, tau, delta, log_sig=None):
    """Closed-form energy ||u_delta||^p / p."""
    return math.exp(log_phi_u_delta(p, N, tau, delta, log_sig))


def phi_v_delta(p, N, r1, r2, delta, k, log_sig=None):
    if delta == 0:
        return 0.0
    return math.exp(p * math.log(delta) - math.log(p) - p * math.log(k)
                    - log_K_general(p, N, r1, r2, k, log_sig))


def r_level(gamma, p, k):
    return math.exp(p * math.log(gamma) - math.log(p) - p * math.log(k))


def eta(gamma, delta, p, N, tau, k, log_sig=None):
    """The weight r / (r + Phi(u_delta)), in (0, 1)."""
    if log_sig is None:
        log_sig = log_sigma(p, N, tau)[0]
    log_a = 4 * p * math.log(tau) + lgamma(N / 2) + p * math.log(gamma)
    log_b = (p * math.log(k) + (5 * p + 1) * LOG2 + 0.5 * N * LOGPI
             + p * math.log(delta) + log_sig)
    return 1.0 / (1.0 + math.exp(log_b - log_a))


def radial_energy_quadrature(params, tol=1e-12):
    """||test function||^p / p by direct radial quadrature of |Laplacian|^p.

    Independent of the closed forms above; used to cross-check them.
    """
    lo, hi = params.radii
    omega = sphere_area(params.N)
    scale = max(abs(params.laplacian(np.nextafter(lo, hi))),
                abs(params.laplacian(np.nextafter(hi, lo))))

    def integrand(s):
        return abs(params.laplacian(s) / scale) ** params.p * s ** (params.N - 1)

    q = (2 * (params.N + 2), -3 * (params.N + 1) * params.tau, params.N * params.tau ** 2)
    if params.variant == "v_delta":
        q = (params.N + 2, -(params.N + 1) * (lo + hi), params.N * lo * hi)
    root = float(np.max(np.roots(q).real))
    res = integrate(integrand, lo, hi, tol=tol, kinks=[root], rtol=1e-14)
    return omega * res.value * scale ** params.p / params.p
