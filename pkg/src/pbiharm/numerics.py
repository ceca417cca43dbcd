"""One-dimensional numerical kernels: Gamma, quadrature, root finding and
interval maximization."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _sci_integrate
from scipy import optimize as _sci_optimize


class QuadratureError(RuntimeError):
    pass


class BracketError(ValueError):
    pass


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    subdivisions: int


def gamma(x):
    """Gamma function for x > 0."""
    if not x > 0:
        raise ValueError(f"gamma requires x > 0, got {x!r}")
    return math.gamma(x)


def lgamma(x):
    if not x > 0:
        raise ValueError(f"lgamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def integrate(fn, a, b, tol=1e-10, kinks=(), rtol=1e-12, limit=200):
    """Adaptive Gauss-Kronrod quadrature of ``fn`` over ``[a, b]``.

    The interval is split at every point of ``kinks`` before any adaptive
    work, so derivative jumps never sit inside a panel.  The absolute
    tolerance ``tol`` is shared among the pieces in proportion to their
    length; ``rtol`` acts as a fallback for integrands of large magnitude.

    Raises
    ------
    QuadratureError
        if the subdivision budget runs out before the tolerance is met.
    """
    if not a < b:
        raise ValueError(f"integrate requires a < b, got [{a}, {b}]")
    inner = sorted(float(k) for k in kinks if a < k < b)
    edges = [a, *inner, b]
    total = 0.0
    err = 0.0
    subdivisions = 0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        piece_tol = tol * (hi - lo) / (b - a)
        value, abserr, info = _sci_integrate.quad(
            fn, lo, hi, epsabs=piece_tol, epsrel=rtol, limit=limit,
            full_output=1)[:3]
        subdivisions += int(info["last"])
        ok = abserr <= max(piece_tol, rtol * abs(value))
        if not ok:
            raise QuadratureError(
                f"quadrature on [{lo}, {hi}] stopped at error {abserr:.3e} "
                f"after {info['last']} subdivisions")
        total += value
        err += abserr
    return QuadResult(total, err, subdivisions)


def find_root(fn, a, b, tol=1e-14):
    """Root of ``fn`` in ``[a, b]`` by Brent's method; needs a sign change."""
    fa, fb = fn(a), fn(b)
    if fa == 0.0:
        return float(a)
    if fb == 0.0:
        return float(b)
    if fa * fb > 0:
        raise BracketError(f"no sign change on [{a}, {b}]: f(a)={fa}, f(b)={fb}")
    return float(_sci_optimize.brentq(fn, a, b, xtol=tol, rtol=4 * np.finfo(float).eps))


def _golden_max(fn, lo, hi, x0, f0, iters=80):
    # maximize on [lo, hi], keeping the best point seen
    if hi <= lo:
        return x0, f0
    res = _sci_optimize.minimize_scalar(
        lambda t: -fn(t), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-13 * max(1.0, abs(lo), abs(hi)), "maxiter": iters})
    if -res.fun > f0:
        return float(res.x), float(-res.fun)
    return x0, f0


def max_on_interval(fn, a, b, samples=1024):
    """Heuristic global maximum of a continuous function on ``[a, b]``.

    Dense sampling locates the best candidate, which is then refined by a
    bounded golden-section search in its neighbouring cells; the endpoints
    are always candidates.  Returns ``(argmax, max)``.
    """
    samples = max(int(samples), 64)
    ts = np.linspace(a, b, samples)
    vals = np.array([fn(t) for t in ts], dtype=float)
    i = int(np.argmax(vals))
    best_t, best_v = float(ts[i]), float(vals[i])
    for j in {i, 0, samples - 1}:
        lo = ts[max(j - 1, 0)]
        hi = ts[min(j + 1, samples - 1)]
        best_t, best_v = _golden_max(fn, lo, hi, best_t, best_v)
    return best_t, best_v
