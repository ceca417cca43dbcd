"""Measure, inradius/incenter and the embedding constant of Ball and Box
domains."""

import math
from dataclasses import dataclass

import numpy as np

from .numerics import lgamma

TALENTI_NOTE = (
    "k from the Talenti-type upper bound, evaluated with the factor "
    "N(N-2)pi in the denominator exactly as displayed; tighten with k=...")


class EmbeddingBoundUnavailable(ValueError):
    pass


@dataclass(frozen=True)
class GeometryData:
    meas: float
    tau: float
    center: tuple
    k: float
    k_source: str  # "talenti_bound" or "user_override"


def ball_volume(N, R=1.0):
    return math.exp(0.5 * N * math.log(math.pi) - lgamma(N / 2 + 1)) * R ** N


def sphere_area(N):
    """Surface measure of the unit sphere in R^N (omega_{N-1})."""
    return 2.0 * math.exp(0.5 * N * math.log(math.pi) - lgamma(N / 2))


def measure(domain, N):
    if domain.shape == "ball":
        return ball_volume(N, domain.radius)
    return float(np.prod(np.subtract(domain.upper, domain.lower)))


def inradius_center(domain):
    if domain.shape == "ball":
        return domain.radius, tuple(domain.center)
    lower = np.asarray(domain.lower)
    upper = np.asarray(domain.upper)
    tau = float(np.min(upper - lower) / 2)
    return tau, tuple(float(c) for c in (lower + upper) / 2)


def conjugate_exponent(p):
    return p / (p - 1.0)


def talenti_k_bound(meas, N, p):
    """Upper bound for the sup-norm embedding constant (N >= 3, p > N/2).

    The bound blows up as p decreases to N/2, where the Gamma factor
    Gamma(N/(N-2) - p') runs into its pole at zero.
    """
    if N < 3:
        raise EmbeddingBoundUnavailable(
            "embedding bound unavailable for N < 3; supply k")
    if not p > N / 2:
        raise EmbeddingBoundUnavailable(f"bound needs p > N/2, got p={p}; supply k")
    pc = conjugate_exponent(p)
    q = N / (N - 2)
    log_bracket = lgamma(1 + pc) + lgamma(q - pc) - lgamma(q)
    log_k = ((2 / N + 1 / pc - 1) * math.log(meas)
             + (2 / N) * lgamma(1 + N / 2)
             - math.log(N * (N - 2) * math.pi)
             + log_bracket / pc)
    return math.exp(log_k)


def resolve_k(spec, meas):
    """The embedding constant used by the certificate and where it came from."""
    if spec.k_override is not None:
        return spec.k_override, "user_override"
    return talenti_k_bound(meas, spec.N, spec.p), "talenti_bound"


def geometry(spec):
    meas = measure(spec.domain, spec.N)
    tau, center = inradius_center(spec.domain)
    k, source = resolve_k(spec, meas)
    return GeometryData(meas, tau, center, k, source)
