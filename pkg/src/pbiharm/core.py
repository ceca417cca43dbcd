"""Problem specification, the nonlinearity catalog and shared record types."""

import configparser
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

NONLINEARITY_KINDS = ("example36", "power_sum", "flat_then_power", "piecewise",
                      "polynomial")
GROWTH_KINDS = ("h3", "h3prime", "h3star")


class SpecError(ValueError):
    """Raised for malformed or inadmissible problem specifications."""


# ---------------------------------------------------------------------------
# polynomials in N variables (spatial factors and growth bounds)


def _sphere_moment(beta, N):
    # integral of theta**beta over the unit sphere S^{N-1}
    if any(b % 2 for b in beta):
        return 0.0
    num = sum(math.lgamma((b + 1) / 2) for b in beta)
    return 2.0 * math.exp(num - math.lgamma((sum(beta) + N) / 2))


@dataclass(frozen=True)
class Polynomial:
    """Sum of monomials ``coef * prod(x_i ** e_i)``."""

    terms: tuple  # ((coef, (e_1, ..., e_N)), ...)
    N: int

    @classmethod
    def constant(cls, value, N):
        return cls(((float(value), (0,) * N),), N)

    @property
    def degree(self):
        return max((sum(e) for _, e in self.terms), default=0)

    def is_constant(self):
        return all(sum(e) == 0 or c == 0.0 for c, e in self.terms)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for c, e in self.terms:
            out = out + c * np.prod(x ** np.asarray(e, dtype=float), axis=-1)
        return out

    def sphere_polynomial(self, center):
        """Coefficients ``c_j`` with sphere integral of a(center + s*theta)
        equal to ``sum_j c_j s**j``."""
        center = np.asarray(center, dtype=float)
        coeffs = np.zeros(self.degree + 1)
        for c, e in self.terms:
            for b in itertools.product(*(range(ei + 1) for ei in e)):
                mom = _sphere_moment(b, self.N)
                if mom == 0.0:
                    continue
                w = c * mom
                for ei, bi, ci in zip(e, b, center):
                    w *= math.comb(ei, bi) * ci ** (ei - bi)
                coeffs[sum(b)] += w
        return coeffs

    def shell_integral(self, center, r_in, r_out):
        """Exact integral over the shell ``r_in < |x - center| < r_out``."""
        coeffs = self.sphere_polynomial(center)
        N = self.N
        return float(sum(cj * (r_out ** (j + N) - r_in ** (j + N)) / (j + N)
                         for j, cj in enumerate(coeffs)))

    def box_integral(self, lower, upper):
        total = 0.0
        for c, e in self.terms:
            val = c
            for ei, lo, hi in zip(e, lower, upper):
                val *= (hi ** (ei + 1) - lo ** (ei + 1)) / (ei + 1)
            total += val
        return total


def parse_polynomial(text, N):
    """Parse ``"c@e1,...,eN; c@..."``; a bare number is a constant."""
    terms = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "@" in chunk:
            c, e = chunk.split("@", 1)
            exps = tuple(int(v) for v in e.split(","))
            if len(exps) != N or any(v < 0 for v in exps):
                raise SpecError(f"monomial {chunk!r} needs {N} nonnegative exponents")
        else:
            c, exps = chunk, (0,) * N
        terms.append((float(c), exps))
    if not terms:
        raise SpecError("empty polynomial")
    return Polynomial(tuple(terms), N)


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True)
class DomainSpec:
    shape: str  # "ball" or "box"
    center: tuple = ()
    radius: float = 0.0
    lower: tuple = ()
    upper: tuple = ()

    def __post_init__(self):
        if self.shape == "ball":
            if not self.radius > 0:
                raise SpecError("ball radius must be positive")
        elif self.shape == "box":
            if len(self.lower) != len(self.upper):
                raise SpecError("box corners differ in dimension")
            if any(not hi > lo for lo, hi in zip(self.lower, self.upper)):
                raise SpecError("box must have strictly positive side lengths")
        else:
            raise SpecError(f"unknown domain shape {self.shape!r}")

    @property
    def dim(self):
        return len(self.center) if self.shape == "ball" else len(self.lower)

    @classmethod
    def ball(cls, center, radius):
        return cls("ball", center=tuple(float(c) for c in center), radius=float(radius))

    @classmethod
    def box(cls, lower, upper):
        return cls("box", lower=tuple(float(v) for v in lower),
                   upper=tuple(float(v) for v in upper))


# ---------------------------------------------------------------------------
# nonlinearities


def _abs_pow(t, q):
    return np.power(np.abs(t), q)


@dataclass(frozen=True)
class Nonlinearity:
    """A catalog nonlinearity ``f(x, t) = a(x) g(t)`` with exact primitive.

    ``params`` depends on ``kind``:

    * ``example36``: none; g(t) = sqrt(t - 2) for t >= 2, else 0.
    * ``power_sum``: ``terms`` = ((c, q), ...), g(t) = sum c sign(t)|t|^(q-1).
    * ``flat_then_power``: ``threshold``, ``exponent`` q, ``scale`` c;
      g(t) = c (t - threshold)_+^(q-1).
    * ``piecewise``: ``breakpoints`` (increasing) and ``pieces``, one
      ascending coefficient tuple per interval; ``polynomial`` is the
      single-piece case.
    """

    kind: str
    params: dict = field(default_factory=dict)
    spatial: Polynomial | None = None
    growth: str = "h3star"
    s: float | None = None
    alpha: Polynomial | None = None
    b: float | None = None

    def __post_init__(self):
        if self.kind not in NONLINEARITY_KINDS:
            raise SpecError(f"unknown nonlinearity kind {self.kind!r}")
        if self.growth not in GROWTH_KINDS:
            raise SpecError(f"unknown growth variant {self.growth!r}")
        if self.kind == "power_sum":
            if not self.params.get("terms"):
                raise SpecError("power_sum needs at least one term")
            if any(q <= 1 for _, q in self.params["terms"]):
                raise SpecError("power_sum exponents q must exceed 1 for continuity")
        if self.kind == "flat_then_power" and self.params["exponent"] <= 1:
            raise SpecError("flat_then_power exponent must exceed 1 for continuity")
        if self.kind in ("piecewise", "polynomial"):
            self._setup_piecewise()
        self._check_continuity()

    # piecewise bookkeeping is cached on the frozen instance
    def _setup_piecewise(self):
        breaks = tuple(float(v) for v in self.params.get("breakpoints", ()))
        pieces = tuple(tuple(float(c) for c in p) for p in self.params["pieces"])
        if len(pieces) != len(breaks) + 1:
            raise SpecError("piecewise needs one more piece than breakpoints")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise SpecError("breakpoints must be strictly increasing")
        polys = [np.polynomial.Polynomial(p) for p in pieces]
        prims = [p.integ() for p in polys]  # zero at t = 0
        j0 = int(np.searchsorted(breaks, 0.0, side="right"))
        consts = [0.0] * len(polys)
        for j in range(j0 + 1, len(polys)):
            bj = breaks[j - 1]
            consts[j] = prims[j - 1](bj) + consts[j - 1] - prims[j](bj)
        for j in range(j0 - 1, -1, -1):
            bj = breaks[j]
            consts[j] = prims[j + 1](bj) + consts[j + 1] - prims[j](bj)
        object.__setattr__(self, "_breaks", np.array(breaks))
        object.__setattr__(self, "_polys", polys)
        object.__setattr__(self, "_prims", prims)
        object.__setattr__(self, "_consts", consts)

    def _check_continuity(self):
        # a jump keeps its size as the probe shrinks; Hoelder kinks do not
        for bp in self.breakpoints():
            unit = max(1.0, abs(bp))
            jumps = [abs(self.g(bp - e * unit) - self.g(bp + e * unit)) for e in (1e-6, 1e-12)]
            scale = 1.0 + abs(self.g(bp))
            if jumps[1] > 1e-9 * scale and jumps[1] > 0.5 * jumps[0]:
                raise SpecError(f"nonlinearity is discontinuous at t={bp}")

    @property
    def autonomous(self):
        return self.spatial is None

    def breakpoints(self):
        """Points where g (or one of its derivatives) is not smooth."""
        if self.kind == "example36":
            return (2.0,)
        if self.kind == "power_sum":
            return (0.0,)
        if self.kind == "flat_then_power":
            return (float(self.params["threshold"]),)
        return tuple(self._breaks)

    def _piece_index(self, t):
        return np.searchsorted(self._breaks, t, side="right")

    def g(self, t):
        """The t-dependent factor of f."""
        t = np.asarray(t, dtype=float)
        if self.kind == "example36":
            out = np.sqrt(np.maximum(t - 2.0, 0.0))
        elif self.kind == "power_sum":
            out = sum(c * np.sign(t) * _abs_pow(t, q - 1) for c, q in self.params["terms"])
        elif self.kind == "flat_then_power":
            th, q, c = (self.params[k] for k in ("threshold", "exponent", "scale"))
            out = c * np.power(np.maximum(t - th, 0.0), q - 1)
        else:
            idx = self._piece_index(t)
            out = np.zeros_like(t)
            for j, poly in enumerate(self._polys):
                m = idx == j
                out = np.where(m, poly(t), out)
        return out if out.ndim else float(out)

    def G(self, t):
        """Exact primitive of g with G(0) = 0."""
        t = np.asarray(t, dtype=float)
        if self.kind == "example36":
            out = 2.0 * np.power(np.maximum(t - 2.0, 0.0), 1.5) / 3.0
        elif self.kind == "power_sum":
            out = sum(c * _abs_pow(t, q) / q for c, q in self.params["terms"])
        elif self.kind == "flat_then_power":
            th, q, c = (self.params[k] for k in ("threshold", "exponent", "scale"))
            out = c * np.power(np.maximum(t - th, 0.0), q) / q
            # shift so the primitive vanishes at zero for negative thresholds
            out = out - c * max(-th, 0.0) ** q / q
        else:
            idx = self._piece_index(t)
            out = np.zeros_like(t)
            for j, prim in enumerate(self._prims):
                out = np.where(idx == j, prim(t) + self._consts[j], out)
        return out if out.ndim else float(out)

    def dg(self, t):
        """Derivative of g; +inf where it blows up (e.g. sqrt at its root)."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "example36":
                d = t - 2.0
                out = np.where(d > 0, 0.5 / np.sqrt(np.where(d > 0, d, 1.0)),
                               np.where(d == 0, np.inf, 0.0))
            elif self.kind == "power_sum":
                out = sum(c * (q - 1) * _abs_pow(t, q - 2) for c, q in self.params["terms"])
            elif self.kind == "flat_then_power":
                th, q, c = (self.params[k] for k in ("threshold", "exponent", "scale"))
                d = t - th
                out = np.where(d > 0, c * (q - 1) * np.power(np.where(d > 0, d, 1.0), q - 2),
                               0.0)
                if q < 2:
                    out = np.where(d == 0, np.inf, out)
            else:
                idx = self._piece_index(t)
                out = np.zeros_like(t)
                for j, poly in enumerate(self._polys):
                    out = np.where(idx == j, poly.deriv()(t), out)
        return out if out.ndim else float(out)

    def spatial_factor(self, x):
        if self.spatial is None:
            return 1.0
        return self.spatial(x)


def example36(s=2.0):
    """The nonlinearity f(t) = sqrt(t - 2) for t >= 2, zero below."""
    return Nonlinearity("example36", {}, growth="h3star", s=s)


def eval_f(nl, x, t):
    """f(x, t); ``x`` must be given exactly when f has a spatial factor."""
    if (x is None) != nl.autonomous:
        raise ValueError("x must be supplied iff the nonlinearity is non-autonomous")
    if nl.autonomous:
        return nl.g(t)
    return nl.spatial(x) * nl.g(t)


def eval_F(nl, x, t):
    """F(x, t) = int_0^t f(x, tau) dtau, from the exact antiderivative."""
    if (x is None) != nl.autonomous:
        raise ValueError("x must be supplied iff the nonlinearity is non-autonomous")
    if nl.autonomous:
        return nl.G(t)
    return nl.spatial(x) * nl.G(t)


# ---------------------------------------------------------------------------
# problem specification


@dataclass(frozen=True)
class SolverSettings:
    n: int = 200
    tol: float = 1e-8
    max_iter: int = 500
    seed: int = 0
    multistart: int = 4
    distinct_tol: float = 1e-4
    mp_images: int = 24


@dataclass(frozen=True)
class ProblemSpec:
    N: int
    p: float
    domain: DomainSpec
    nonlinearity: Nonlinearity
    gamma: float
    delta: float
    h: float = 2.0
    k_override: float | None = None
    quad_tol: float = 1e-10
    r1: float | None = None
    r2: float | None = None
    solver: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self):
        if self.N < 1:
            raise SpecError("dimension N must be at least 1")
        if not self.p > max(1.0, self.N / 2):
            raise SpecError(
                f"p must exceed max{{1, N/2}} = {max(1.0, self.N / 2)}, got p={self.p}")
        if self.domain.dim != self.N:
            raise SpecError(f"domain has dimension {self.domain.dim}, expected N={self.N}")
        if not self.gamma > 0 or not self.delta > 0:
            raise SpecError("gamma and delta must be positive")
        if not self.h > 1:
            raise SpecError("h must exceed 1")
        if self.k_override is not None and not self.k_override > 0:
            raise SpecError("k must be positive")
        if not self.quad_tol > 0:
            raise SpecError("quad_tol must be positive")
        if (self.r1 is None) != (self.r2 is None):
            raise SpecError("r1 and r2 must be given together")
        if self.r1 is not None and not 0 < self.r1 < self.r2:
            raise SpecError("need 0 < r1 < r2")
        for poly in (self.nonlinearity.spatial, self.nonlinearity.alpha):
            if poly is not None and poly.N != self.N:
                raise SpecError("polynomial dimension does not match N")


def _floats(text):
    return tuple(float(v) for v in text.replace(" ", "").split(",") if v)


def _require(section, key):
    try:
        return section[key]
    except KeyError:
        raise SpecError(f"missing key {key!r} in section [{section.name}]") from None


def _parse_nonlinearity(sec, N, p):
    kind = _require(sec, "kind").strip().lower()
    params = {}
    if kind == "power_sum":
        terms = []
        for chunk in _require(sec, "terms").split(";"):
            if chunk.strip():
                c, q = chunk.split("@")
                terms.append((float(c), float(q)))
        params["terms"] = tuple(terms)
    elif kind == "flat_then_power":
        params = {k: float(_require(sec, k)) for k in ("threshold", "exponent", "scale")}
    elif kind == "piecewise":
        params["breakpoints"] = _floats(sec.get("breakpoints", ""))
        params["pieces"] = tuple(_floats(piece) for piece in _require(sec, "pieces").split("|"))
    elif kind == "polynomial":
        params["breakpoints"] = ()
        params["pieces"] = (_floats(_require(sec, "coeffs")),)
    elif kind != "example36":
        raise SpecError(f"unknown nonlinearity kind {kind!r}")
    spatial = parse_polynomial(sec["spatial"], N) if "spatial" in sec else None
    growth = sec.get("growth", "h3star").strip().lower()
    s = float(sec["s"]) if "s" in sec else float(p)
    alpha = parse_polynomial(sec["alpha"], N) if "alpha" in sec else None
    b = float(sec["b"]) if "b" in sec else None
    if growth == "h3" and alpha is None:
        raise SpecError("growth h3 needs an alpha bound")
    if growth == "h3prime" and b is None:
        raise SpecError("growth h3prime needs a constant b")
    return Nonlinearity(kind, params, spatial=spatial, growth=growth, s=s,
                        alpha=alpha, b=b)


def parse_spec(text):
    """Parse a configuration document into a validated :class:`ProblemSpec`.

    The format is INI-style with sections ``[problem]``, ``[domain]``,
    ``[nonlinearity]``, ``[certificate]`` and an optional ``[solver]``; see
    the README for the full key list.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";;"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise SpecError(f"unreadable config: {exc}") from None
    for name in ("problem", "domain", "nonlinearity", "certificate"):
        if name not in cp:
            raise SpecError(f"missing section [{name}]")
    prob, dom, nl_sec, cert = cp["problem"], cp["domain"], cp["nonlinearity"], cp["certificate"]
    try:
        N = int(_require(prob, "N"))
        p = float(_require(prob, "p"))
        shape = _require(dom, "shape").strip().lower()
        if shape == "ball":
            center = _floats(dom.get("center", ",".join(["0"] * N)))
            domain = DomainSpec.ball(center, float(_require(dom, "radius")))
        elif shape == "box":
            domain = DomainSpec.box(_floats(_require(dom, "lower")), _floats(_require(dom, "upper")))
        else:
            raise SpecError(f"unknown domain shape {shape!r}")
        nl = _parse_nonlinearity(nl_sec, N, p)
        solver = SolverSettings()
        if "solver" in cp:
            sv = cp["solver"]
            solver = SolverSettings(
                n=int(sv.get("n", solver.n)),
                tol=float(sv.get("tol", solver.tol)),
                max_iter=int(sv.get("max_iter", solver.max_iter)),
                seed=int(sv.get("seed", solver.seed)),
                multistart=int(sv.get("multistart", solver.multistart)),
                distinct_tol=float(sv.get("distinct_tol", solver.distinct_tol)),
                mp_images=int(sv.get("mp_images", solver.mp_images)),
            )
        return ProblemSpec(
            N=N, p=p, domain=domain, nonlinearity=nl,
            gamma=float(_require(cert, "gamma")),
            delta=float(_require(cert, "delta")),
            h=float(cert.get("h", 2.0)),
            k_override=float(cert["k"]) if "k" in cert else None,
            quad_tol=float(cert.get("quad_tol", 1e-10)),
            r1=float(cert["r1"]) if "r1" in cert else None,
            r2=float(cert["r2"]) if "r2" in cert else None,
            solver=solver,
        )
    except (TypeError, KeyError) as exc:
        raise SpecError(str(exc)) from None
    except ValueError as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad value: {exc}") from None


# ---------------------------------------------------------------------------
# report records


@dataclass
class HypothesisVerdict:
    name: str
    holds: bool
    margin: float
    detail: str = ""


@dataclass
class IntervalPair:
    lambda1: float
    lambda2: float
    lambda3h: float
    h: float
    overlap: str  # "disjoint" or "overlapping"
    nonempty: bool


@dataclass
class CertificateReport:
    k: float
    k_source: str
    tau: float
    center: tuple
    meas: float
    test_function: str  # "u_delta" or "v_delta"
    sigma: float
    K: float
    eta: float
    r: float
    phi_test: float
    max_F: float
    sup_level_integral: float
    annulus_integral: float
    core_integral: float
    psi_test: float
    quad_error_bound: float
    verdicts: list
    intervals: IntervalPair | None
    granted: bool
    notes: list = field(default_factory=list)

    def verdict(self, name):
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)
