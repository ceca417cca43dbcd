"""Radial discretization of the energy J = Phi - lambda Psi on a ball and
solvers for its critical points.

The grid has nodes r_i = i R/n, i = 0..n.  The unknowns are u_0..u_{n-1};
u_n = 0 is the only imposed boundary condition.  The discrete Laplacian is
the conservative finite-volume form of u'' + (N-1)u'/r, which at r = 0
reduces to the ghost-node closure N u''(0) with u'(0) = 0.  Only rows
0..n-1 of the Laplacian enter the energy, so the second Navier condition
Delta u(R) = 0 is natural: it comes out of stationarity instead of being
imposed.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy import optimize
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import sphere_area
from .testfun import u_delta_profile

F_PRIME_CAP = 1e12
# energy increase attributed to round-off near convergence
_ROUNDOFF = 8 * np.finfo(float).eps


class SolverError(ValueError):
    pass


@dataclass
class RadialState:
    values: np.ndarray  # u at all n+1 nodes, last entry 0
    lam: float
    energy: float
    residual: float
    norm: float
    max_abs: float


@dataclass
class SolutionRecord:
    state: RadialState
    classification: str  # trivial, minimizer, mountain_pass_candidate, other
    residual: float
    converged: bool
    iterations: int = 0
    reason: str = ""
    energy_trace: list = field(default_factory=list, repr=False)

    @property
    def key(self):
        return self.state.values


class RadialGrid:
    """Radial finite-volume grid on the ball of radius R in R^N."""

    def __init__(self, N, p, R, n, nonlinearity=None, center=None):
        if n < 4:
            raise SolverError("grid needs at least 4 intervals")
        self.N, self.p, self.R, self.n = N, float(p), float(R), int(n)
        self.h = self.R / self.n
        self.r = np.linspace(0.0, self.R, self.n + 1)
        omega = sphere_area(N)
        self.omega = omega
        faces = np.clip(np.concatenate([[0.0], self.r[:-1] + self.h / 2, [self.R]]), 0, self.R)
        vol = omega / N * (faces[1:] ** N - faces[:-1] ** N)
        self.w = vol  # cell volumes, length n+1
        self.area = omega * (self.r[:-1] + self.h / 2) ** (N - 1)  # faces i+1/2
        self.nl = nonlinearity
        # Psi weights carry the spherical mean of a spatial factor
        self.w_psi = self.w.copy()
        if nonlinearity is not None and not nonlinearity.autonomous:
            c = np.zeros(N) if center is None else np.asarray(center, dtype=float)
            shell = np.polynomial.Polynomial(nonlinearity.spatial.sphere_polynomial(c))
            self.w_psi = self.w * shell(self.r) / omega
        self.L = self._laplacian()
        self.LT = self.L.T.tocsr()
        self._factorize()

    def _factorize(self):
        self._LT_lu = spla.splu(self.LT.tocsc())
        self._L_lu = spla.splu(self.L.tocsc())

    # SuperLU objects do not pickle; worker processes refactorize
    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_LT_lu"], state["_L_lu"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._factorize()

    def _laplacian(self):
        # (Lu)_i = [A_{i+1/2}(u_{i+1} - u_i) - A_{i-1/2}(u_i - u_{i-1})] / (h V_i)
        n, h = self.n, self.h
        a = self.area
        main = np.empty(n)
        main[0] = -a[0]
        main[1:] = -(a[1:n] + a[0:n - 1])
        off = a[0:n - 1]
        stiff = sp.diags([off, main, off], [-1, 0, 1], shape=(n, n), format="csr") / h
        return (sp.diags(1.0 / self.w[:n]) @ stiff).tocsr()

    # -- helpers -------------------------------------------------------------

    def full(self, u):
        return np.append(np.asarray(u, dtype=float)[: self.n], 0.0)

    def interior(self, values):
        values = np.asarray(values, dtype=float)
        return values[: self.n].copy()

    def lap(self, u):
        return self.L @ u

    def dual_norm(self, g):
        """sqrt(g^T (L^T V L)^{-1} g): the norm of a gradient as a functional
        on the discrete space with ||v|| = ||Lv||_{L^2}."""
        y = self._LT_lu.solve(np.asarray(g, dtype=float))
        return float(np.sqrt(np.sum(y * y / self.w[: self.n])))

    def solve_dirichlet(self, rhs):
        return self._L_lu.solve(np.asarray(rhs, dtype=float))

    def from_profile(self, fn):
        return self.interior(fn(self.r))


# ---------------------------------------------------------------------------
# energy and derivatives


def _abs_pow(x, q):
    return np.power(np.abs(x), q)


def _G(grid, u):
    return grid.nl.G(u) if grid.nl is not None else np.zeros_like(u)


def _g(grid, u):
    return grid.nl.g(u) if grid.nl is not None else np.zeros_like(u)


def phi_h(grid, u):
    lu = grid.L @ u
    return float(np.sum(grid.w[: grid.n] * _abs_pow(lu, grid.p))) / grid.p


def psi_h(grid, u):
    return float(np.sum(grid.w_psi[: grid.n] * _G(grid, u)))


def energy(grid, u, lam):
    """Discrete J = sum w |Lu|^p / p - lam sum w F(u)."""
    return phi_h(grid, u) - lam * psi_h(grid, u)


def discrete_norm(grid, u):
    lu = grid.L @ u
    return float(np.sum(grid.w[: grid.n] * _abs_pow(lu, grid.p))) ** (1.0 / grid.p)


def _grad_parts(grid, u, lam):
    lu = grid.L @ u
    flux = grid.w[: grid.n] * np.sign(lu) * _abs_pow(lu, grid.p - 1)
    g_phi = grid.LT @ flux
    g_psi = grid.w_psi[: grid.n] * _g(grid, u)
    return g_phi, lam * g_psi


def gradient(grid, u, lam):
    """Exact gradient of :func:`energy` with respect to the interior unknowns."""
    g_phi, g_psi = _grad_parts(grid, u, lam)
    return g_phi - g_psi


def residual(grid, u, lam):
    """Dual norm of grad J relative to max(1, |grad Phi|_* + |lam grad Psi|_*).

    The dual norm damps the high-frequency round-off of the fourth-order
    operator, so the floor stays near machine precision as n grows.
    """
    g_phi, g_psi = _grad_parts(grid, u, lam)
    g = g_phi - g_psi
    if not np.any(g):
        return 0.0
    scale = max(1.0, grid.dual_norm(g_phi) + grid.dual_norm(g_psi))
    return grid.dual_norm(g) / scale


def make_state(grid, u, lam):
    return RadialState(values=grid.full(u), lam=lam, energy=energy(grid, u, lam),
                       residual=residual(grid, u, lam), norm=discrete_norm(grid, u),
                       max_abs=float(np.max(np.abs(u))) if len(u) else 0.0)


# ---------------------------------------------------------------------------
# Hessians in banded form


def _phi_curvature(grid, u):
    lu = grid.L @ u
    p = grid.p
    if p == 2.0:
        return grid.w[: grid.n] * 1.0
    floor = max(1e-6 * float(np.max(np.abs(lu))), 1e-12)
    return grid.w[: grid.n] * (p - 1) * np.power(np.maximum(np.abs(lu), floor), p - 2)


def _to_upper_banded(mat, bw=2):
    mat = mat.todia() if sp.issparse(mat) else sp.dia_matrix(mat)
    n = mat.shape[0]
    ab = np.zeros((bw + 1, n))
    for off, row in zip(mat.offsets, mat.data):
        if 0 <= off <= bw:
            ab[bw - off, off:] = row[off:]
    return ab


def _to_general_banded(mat, bw=2):
    mat = mat.todia()
    n = mat.shape[0]
    ab = np.zeros((2 * bw + 1, n))
    for off, row in zip(mat.offsets, mat.data):
        if -bw <= off <= bw:
            if off >= 0:
                ab[bw - off, off:] = row[off:]
            else:
                ab[bw - off, :n + off] = row[:n + off]
    return ab


def phi_hessian(grid, u):
    return (grid.LT @ sp.diags(_phi_curvature(grid, u)) @ grid.L).tocsr()


def psi_curvature(grid, u, lam):
    fp = grid.nl.dg(u) if grid.nl is not None else np.zeros_like(u)
    fp = np.nan_to_num(np.asarray(fp, dtype=float), nan=F_PRIME_CAP, posinf=F_PRIME_CAP)
    return lam * grid.w_psi[: grid.n] * np.minimum(fp, F_PRIME_CAP)


def _spd_matrix(grid, u, lam):
    """Hessian of J with its f' part scaled down until positive definite
    (down to Phi'' alone).  Returns the matrix and its banded Cholesky."""
    hphi = phi_hessian(grid, u)
    curv = psi_curvature(grid, u, lam)
    theta = 1.0
    while True:
        mat = hphi - sp.diags(theta * curv) if theta > 0 else hphi
        try:
            chol = sla.cholesky_banded(_to_upper_banded(mat), check_finite=False)
            return mat, chol
        except np.linalg.LinAlgError:
            if theta == 0.0:
                raise
            theta = theta / 4 if theta > 1e-12 else 0.0


def _spd_direction(grid, u, lam, g):
    """Modified Newton direction -M^{-1} g."""
    _, chol = _spd_matrix(grid, u, lam)
    return -sla.cho_solve_banded((chol, False), g, check_finite=False)


# ---------------------------------------------------------------------------
# minimization


def initial_guess(grid, kind, delta=None, values=None):
    if kind == "zero":
        return np.zeros(grid.n)
    if kind == "udelta":
        if delta is None:
            raise SolverError("udelta init needs delta")
        return grid.from_profile(lambda r: u_delta_profile(r, grid.R, delta))
    if kind == "file":
        if values is None:
            raise SolverError("file init needs values")
        return np.asarray(values, dtype=float)[: grid.n].copy()
    raise SolverError(f"unknown init {kind!r}")


def _classify_min(state):
    return "trivial" if state.max_abs <= 1e-12 else "minimizer"


def minimize(grid, lam, init="zero", delta=None, values=None, tol=1e-8, max_iter=500):
    """Descent on J with Armijo backtracking along modified-Newton directions.

    Energies are monotonically non-increasing.  Returns a converged record
    once the relative residual is at most ``tol``; otherwise a record with
    ``converged=False``.
    """
    u = initial_guess(grid, init, delta, values) if isinstance(init, str) else np.array(init, float)
    J = energy(grid, u, lam)
    trace = [J]
    it = 0
    res = residual(grid, u, lam)
    while res > tol and it < max_iter:
        g = gradient(grid, u, lam)
        d = _spd_direction(grid, u, lam, g)
        slope = float(g @ d)
        if slope >= 0:  # numerically flat; fall back to steepest descent
            d = -g
            slope = -float(g @ g)
        t = 1.0
        while True:
            u_new = u + t * d
            J_new = energy(grid, u_new, lam)
            if J_new <= J + 1e-4 * t * slope or t < 1e-14:
                break
            t *= 0.5
        if J_new > J + _ROUNDOFF * abs(J):
            break
        u, J = u_new, J_new
        trace.append(J)
        it += 1
        res = residual(grid, u, lam)
    state = make_state(grid, u, lam)
    converged = state.residual <= tol
    return SolutionRecord(state, _classify_min(state) if converged else "other",
                          state.residual, converged, it,
                          "" if converged else "iteration cap or stalled line search", trace)


# ---------------------------------------------------------------------------
# Picard iteration for p = 2


def picard_p2(grid, lam, init="zero", delta=None, values=None, tol=1e-8, max_iter=500):
    """Fixed point u <- (Delta^2)^{-1} lam f(u) via two Dirichlet solves."""
    if grid.p != 2.0:
        raise SolverError("picard_p2 requires p = 2")
    u = initial_guess(grid, init, delta, values) if isinstance(init, str) else np.array(init, float)
    shell = grid.w_psi[: grid.n] / grid.w[: grid.n]
    theta = 1.0
    res = residual(grid, u, lam)
    history = [res]
    it = 0
    while res > tol and it < max_iter:
        v = grid.solve_dirichlet(lam * shell * _g(grid, u))
        step = grid.solve_dirichlet(v)
        cand = (1 - theta) * u + theta * step
        cand_res = residual(grid, cand, lam)
        if cand_res > res and theta > 1e-3:
            theta *= 0.5
        else:
            theta = min(1.0, 1.5 * theta)
        u, res = cand, cand_res
        history.append(res)
        it += 1
        if len(history) > 20 and res > 10 * history[-21]:
            state = make_state(grid, u, lam)
            return SolutionRecord(state, "other", state.residual, False, it, "diverged")
    state = make_state(grid, u, lam)
    converged = state.residual <= tol
    return SolutionRecord(state, _classify_min(state) if converged else "other",
                          state.residual, converged, it, "" if converged else "iteration cap")


# ---------------------------------------------------------------------------
# mountain pass


def energy_norm(grid, u):
    lu = grid.L @ u
    return float(np.sqrt(np.sum(grid.w[: grid.n] * lu * lu)))


def _reparametrize(grid, path):
    m = len(path)
    if m < 3:
        return path
    seg = np.array([energy_norm(grid, path[j + 1] - path[j]) for j in range(m - 1)])
    s = np.concatenate([[0.0], np.cumsum(seg)])
    if s[-1] == 0:
        return path
    target = np.linspace(0, s[-1], m)
    arr = np.array(path)
    out = np.empty_like(arr)
    for i in range(arr.shape[1]):
        out[:, i] = np.interp(target, s, arr[:, i])
    out[0], out[-1] = arr[0], arr[-1]
    return list(out)


def newton_critical(grid, u, lam, tol=1e-8, max_iter=50):
    """Damped Newton on grad J = 0 with the full (indefinite) Hessian,
    globalized by backtracking on the residual.  Finds saddles as well as
    minima."""
    res = residual(grid, u, lam)
    for _ in range(max_iter):
        if res <= tol:
            break
        g = gradient(grid, u, lam)
        mat = phi_hessian(grid, u) - sp.diags(psi_curvature(grid, u, lam))
        try:
            d = -sla.solve_banded((2, 2), _to_general_banded(mat.tocsr()), g, check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            return u, res
        t = 1.0
        while t > 1e-6:
            cand = u + t * d
            cres = residual(grid, cand, lam)
            if cres < res:
                break
            t *= 0.5
        else:
            return u, res
        u, res = cand, cres
    return u, res


def mountain_pass(grid, lam, endpoint_a, endpoint_b, tol=1e-6, images=24, max_iter=200,
                  step=0.3):
    """Mountain-pass search between two low-energy states.

    A string of images joins the endpoints, seeded around the highest point
    of the straight segment.  Each iteration first tries Newton polishing
    from the highest image; the result is kept only if it is a critical
    point whose energy lies strictly between the endpoint energies and the
    initial path maximum and which differs from both endpoints.  Otherwise
    the highest image climbs (tangential part of its descent direction
    reversed), the others relax downhill, and both halves of the string are
    redistributed at equal energy-norm spacing.
    """
    a = np.asarray(endpoint_a, dtype=float)[: grid.n]
    b = np.asarray(endpoint_b, dtype=float)[: grid.n]
    Ja, Jb = energy(grid, a, lam), energy(grid, b, lam)
    if np.max(np.abs(a - b)) == 0:
        return _mp_failure(grid, a, lam, "endpoints coincide")
    t_star, initial_max = _segment_max(grid, lam, a, b)
    if not initial_max > max(Ja, Jb):
        return _mp_failure(grid, (1 - t_star) * a + t_star * b, lam,
                           "no mountain between the endpoints along the initial path")
    half = images // 2
    ts = np.concatenate([np.linspace(0.0, t_star, half + 1),
                         np.geomspace(t_star, 1.0, images - half + 1)[1:]])
    path = [(1 - t) * a + t * b for t in ts]

    def acceptable(u, res):
        if res > tol:
            return f"residual {res:.3e} above {tol:g}"
        J = energy(grid, u, lam)
        if not max(Ja, Jb) < J < initial_max:
            return "candidate energy not strictly between endpoint energies and initial path max"
        if float(np.max(np.abs(u))) <= 1e-6:
            return "path collapsed onto the trivial state"
        if not (distinct(u, a) and distinct(u, b)):
            return "path collapsed onto an endpoint"
        return ""

    top = path[half]
    reason = "not started"
    it = 0
    for it in range(1, max_iter + 1):
        energies = [energy(grid, z, lam) for z in path]
        c = int(np.argmax(energies[1:-1])) + 1
        top = path[c]
        polished, pres = newton_critical(grid, top.copy(), lam, tol=tol)
        reason = acceptable(polished, pres)
        if not reason:
            top = polished
            break
        path = _string_step(grid, lam, path, c, step)
    state = make_state(grid, top, lam)
    ok = not reason
    if not ok:
        reason = f"{reason} after {it} iterations"
    rec = SolutionRecord(state, "mountain_pass_candidate" if ok else "other",
                         state.residual, ok, it, reason)
    rec.initial_path_max = initial_max
    rec.endpoint_energies = (Ja, Jb)
    return rec


def _string_step(grid, lam, path, c, step):
    spacing = min(energy_norm(grid, path[j + 1] - path[j]) for j in range(len(path) - 1))
    tangent = path[c + 1] - path[c - 1]
    new = [path[0]]
    for j in range(1, len(path) - 1):
        z = path[j]
        g = gradient(grid, z, lam)
        mat, chol = _spd_matrix(grid, z, lam)
        d = -sla.cho_solve_banded((chol, False), g, check_finite=False)
        if j == c:
            # reverse the tangential part of d in the metric of mat
            tm = float(tangent @ (mat @ tangent))
            if tm > 0:
                d = d + 2 * float(g @ tangent) / tm * tangent
        move = step * d
        size = energy_norm(grid, move)
        if size > 0.5 * spacing > 0:
            move *= 0.5 * spacing / size
        new.append(z + move)
    new.append(path[-1])
    left = _reparametrize(grid, new[: c + 1])
    right = _reparametrize(grid, new[c:])
    return left + right[1:]


def _segment_max(grid, lam, a, b):
    """Highest energy on the segment from a to b.  The barrier can sit very
    close to either end, so t is sampled on a log scale from both sides."""
    tiny = np.geomspace(1e-9, 0.5, 1500)
    ts = np.unique(np.concatenate([[0.0], tiny, 1.0 - tiny, [1.0]]))
    vals = np.array([energy(grid, (1 - t) * a + t * b, lam) for t in ts])
    i = int(np.argmax(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]
    best_t, best = float(ts[i]), float(vals[i])
    if hi > lo:
        res = optimize.minimize_scalar(lambda t: -energy(grid, (1 - t) * a + t * b, lam),
                                       bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-14})
        if -res.fun > best:
            best_t, best = float(res.x), float(-res.fun)
    return best_t, best


def _max_dist(u, v):
    return float(np.max(np.abs(np.asarray(u) - np.asarray(v))))


def _mp_failure(grid, u, lam, reason):
    state = make_state(grid, u, lam)
    rec = SolutionRecord(state, "other", state.residual, False, 0, reason)
    rec.initial_path_max = state.energy
    rec.endpoint_energies = (math.nan, math.nan)
    return rec


# ---------------------------------------------------------------------------
# branch sweeps


def distinct(u, v, tol=1e-4):
    u = np.asarray(u)
    v = np.asarray(v)
    scale = 1.0 + max(np.max(np.abs(u)), np.max(np.abs(v)))
    return _max_dist(u, v) > tol * scale


def random_smooth_init(grid, rng, amplitude):
    """Random combination of cos((j - 1/2) pi r / R), which vanish at R and
    have zero slope at the origin."""
    coeffs = rng.normal(size=4) / np.arange(1, 5) ** 2
    r = grid.r
    vals = sum(c * np.cos((j + 0.5) * np.pi * r / grid.R) for j, c in enumerate(coeffs))
    vals = amplitude * vals / max(np.max(np.abs(vals)), 1e-300)
    return grid.interior(vals)


@dataclass
class SweepRow:
    lam: float
    in_lambda1: bool
    below_lambda3h: bool
    solutions: list
    failures: int


def _solve_lambda(grid, lam, delta, count, seed, tol, max_iter, distinct_tol, idx):
    rng = np.random.default_rng([seed, idx])
    inits = [("zero", None), ("udelta", None)]
    for _ in range(max(count - 2, 0)):
        inits.append(("file", random_smooth_init(grid, rng, 1.5 * delta)))
    found = []
    failures = 0
    for kind, vals in inits:
        rec = minimize(grid, lam, kind, delta=delta, values=vals, tol=tol, max_iter=max_iter)
        if not rec.converged:
            failures += 1
            continue
        if all(distinct(rec.state.values, o.state.values, distinct_tol) for o in found):
            found.append(rec)
    found.sort(key=lambda rec: (rec.state.energy, rec.state.norm))
    return found, failures


def branch_sweep(grid, lambdas, delta, intervals=None, count=4, seed=0, tol=1e-8,
                 max_iter=500, distinct_tol=1e-4, workers=1):
    """Multistart minimization over a list of lambda values.

    Rows come back in the order of ``lambdas`` whatever ``workers`` is.
    """
    jobs = [(grid, lam, delta, count, seed, tol, max_iter, distinct_tol, i)
            for i, lam in enumerate(lambdas)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_lambda, *zip(*jobs)))
    else:
        results = [_solve_lambda(*job) for job in jobs]
    rows = []
    for lam, (found, failures) in zip(lambdas, results):
        if intervals is None:
            in1, below3 = False, False
        else:
            in1 = intervals.lambda1 < lam < intervals.lambda2
            below3 = lam <= intervals.lambda3h
        rows.append(SweepRow(float(lam), in1, below3, found, failures))
    return rows
