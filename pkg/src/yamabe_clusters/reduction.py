"""Scaling schedules, the reduced cluster energy F_n, its maximiser, and the
leading-order reduced-energy expansion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .bubbles import Bubble, bubble_value
from .core import HessianForm, PreconditionError, ProblemParams, SecondFundamentalForm
from .energy import EnergyConstants

UMBILIC_THRESHOLD = 1e-12
MAX_D0 = 1e12
COLLISION_GUARD = 1e-8


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ClusterConfig:
    k: int
    d: np.ndarray
    tau: np.ndarray
    eps: float

    def __post_init__(self) -> None:
        d = np.asarray(self.d, dtype=float).reshape(-1)
        tau = np.atleast_2d(np.asarray(self.tau, dtype=float))
        if self.k < 1 or d.shape != (self.k,) or tau.shape[0] != self.k:
            raise PreconditionError("cluster needs k >= 1 with k values of d and k points tau")
        if np.any(d < 0):
            raise PreconditionError("cluster parameters d_j must be nonnegative")
        if not self.eps > 0:
            raise PreconditionError("eps must be positive")
        if self.k > 1 and min_separation(tau) <= 0:
            raise PreconditionError("cluster points tau_i must be pairwise distinct")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "tau", tau)


@dataclass(frozen=True)
class Schedule:
    eta: float
    delta: np.ndarray
    rho: float | None = None


def min_separation(tau: np.ndarray) -> float:
    tau = np.atleast_2d(tau)
    if len(tau) < 2:
        return math.inf
    diff = tau[:, None, :] - tau[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    return float(dist[np.triu_indices(len(tau), 1)].min())


def d0(c: float, b: float, pi_norm_sq: float) -> float:
    """d_0 = c_n/(2 b_n ||pi||^2)."""
    if not pi_norm_sq > UMBILIC_THRESHOLD:
        raise PreconditionError("||pi(p)||^2 vanishes: the concentration point must be non-umbilic")
    if not (b > 0 and c > 0):
        raise PreconditionError("b_n and c_n must be positive")
    value = c / (2 * b * pi_norm_sq)
    if value > MAX_D0:
        raise PreconditionError("d_0 exceeds the admissible range: the point is too close to umbilic")
    return value


def rho_inverse(eps: float, tol: float = 1e-12) -> float:
    """The s in (0, 1/e) with -s ln s = eps: bisection bracket, then safeguarded Newton.

    -s ln s increases on (0, 1/e) only, so that is the branch used.
    """
    if not 0 < eps < math.exp(-1) / 2:
        raise PreconditionError("rho_inverse needs 0 < eps < 1/(2e)")
    ell = lambda s: -s * math.log(s) - eps
    lo, hi = 0.0, math.exp(-1)
    # bisection to a loose bracket; lo = 0 is handled as the limit ell(0+) = -eps
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ell(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6 * hi:
            break
    s = 0.5 * (lo + hi)
    for _ in range(50):
        step = ell(s) / (-math.log(s) - 1)
        s_new = s - step
        if not lo < s_new < hi:
            s_new = 0.5 * (lo + hi)
        if ell(s_new) < 0:
            lo = s_new
        else:
            hi = s_new
        s = s_new
        if abs(ell(s)) <= tol * 1e-2:
            break
    return s


def schedule(params: ProblemParams, config: ClusterConfig, d0_value: float) -> Schedule:
    n, eps = params.n, config.eps
    if n == 4:
        rho = rho_inverse(eps)
        eta = abs(math.log(rho)) ** -0.25
        return Schedule(eta, rho * (d0_value + eta * config.d), rho)
    eta = eps ** ((n - 4) / n)
    return Schedule(eta, eps * (d0_value + eta * config.d))


def theta(n: int, eps: float) -> tuple[float, float]:
    """(theta_n, Theta_n)."""
    if n == 4:
        rho = rho_inverse(eps)
        v = rho * rho * abs(math.log(rho))
        return v, v
    return eps * eps, eps ** (4 * (n - 2) / n)


# --- reduced energy ---------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedModel:
    """Coefficients of F_n(d, tau) = -b sum Q(tau_i, tau_i) - b ||pi||^2 sum d_i^2
    - coupling sum_{i<j} |tau_i - tau_j|^{2-n}, coupling = d_n d_0^{n-2}/|K|^{(n-2)/2}."""

    n: int
    b: float
    pi_norm_sq: float
    Q: np.ndarray
    coupling: float

    @classmethod
    def build(cls, params: ProblemParams, constants: EnergyConstants, Q: HessianForm, pi_norm_sq: float) -> "ReducedModel":
        n = params.n
        if Q.Q.shape != (n - 1, n - 1):
            raise PreconditionError("Hessian form must be (n-1)x(n-1)")
        dz = d0(constants.c_n_const, constants.b_n, pi_norm_sq)
        coupling = constants.d_n / abs(params.K) ** ((n - 2) / 2) * dz ** (n - 2)
        return cls(n, constants.b_n, pi_norm_sq, Q.Q, coupling)

    def value(self, d: np.ndarray, tau: np.ndarray) -> float:
        tau = np.atleast_2d(tau)
        if len(tau) > 1 and min_separation(tau) <= 0:
            raise PreconditionError("coincident cluster points make the interaction singular")
        quad = -self.b * float(np.einsum("ki,ij,kj->", tau, self.Q, tau))
        conf = -self.b * self.pi_norm_sq * float(np.sum(np.asarray(d) ** 2))
        inter = 0.0
        k = len(tau)
        for i in range(k):
            for j in range(i + 1, k):
                inter += np.linalg.norm(tau[i] - tau[j]) ** (2 - self.n)
        return quad + conf - self.coupling * inter

    def gradient(self, d: np.ndarray, tau: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        tau = np.atleast_2d(tau)
        n = self.n
        g_tau = -2 * self.b * tau @ self.Q
        k = len(tau)
        for i in range(k):
            for j in range(i + 1, k):
                r = tau[i] - tau[j]
                f = self.coupling * (n - 2) * r / np.linalg.norm(r) ** n
                g_tau[i] += f
                g_tau[j] -= f
        return -2 * self.b * self.pi_norm_sq * np.asarray(d, dtype=float), g_tau

    def tau_hessian(self, tau: np.ndarray) -> np.ndarray:
        tau = np.atleast_2d(tau)
        k, m = tau.shape
        n = self.n
        Hm = np.zeros((k * m, k * m))
        for i in range(k):
            Hm[i * m:(i + 1) * m, i * m:(i + 1) * m] -= 2 * self.b * self.Q
        for i in range(k):
            for j in range(i + 1, k):
                r = tau[i] - tau[j]
                rr = np.linalg.norm(r)
                J = self.coupling * (n - 2) * (np.eye(m) / rr ** n - n * np.outer(r, r) / rr ** (n + 2))
                si, sj = slice(i * m, (i + 1) * m), slice(j * m, (j + 1) * m)
                Hm[si, si] += J
                Hm[sj, sj] += J
                Hm[si, sj] -= J
                Hm[sj, si] -= J
        return Hm

    def two_point_radius(self, q: float) -> float:
        """t* for k = 2 with Q = q I: the pair sits at +-t* e."""
        n = self.n
        return ((n - 2) * self.coupling / (self.b * q * 2 ** n)) ** (1 / n)


def F_n(config: ClusterConfig, Q: HessianForm, constants: EnergyConstants, pi_norm_sq: float,
        params: ProblemParams) -> float:
    return ReducedModel.build(params, constants, Q, pi_norm_sq).value(config.d, config.tau)


def F_n_gradient(config: ClusterConfig, Q: HessianForm, constants: EnergyConstants, pi_norm_sq: float,
                 params: ProblemParams) -> tuple[np.ndarray, np.ndarray]:
    return ReducedModel.build(params, constants, Q, pi_norm_sq).gradient(config.d, config.tau)


@dataclass(frozen=True)
class OptimizationResult:
    config: ClusterConfig
    value: float
    gradient_norm: float
    seed: int
    starts: int


def _projected_gradient_norm(d: np.ndarray, g_d: np.ndarray, g_tau: np.ndarray) -> float:
    # at d_j = 0 only an outward (positive) gradient component counts
    gd = np.where((d <= 0) & (g_d < 0), 0.0, g_d)
    return float(math.sqrt(np.sum(gd ** 2) + np.sum(g_tau ** 2)))


def _ascend(model: ReducedModel, tau0: np.ndarray) -> np.ndarray:
    k, m = tau0.shape

    def neg(v):
        tau = v.reshape(k, m)
        if k > 1 and min_separation(tau) < COLLISION_GUARD:
            return math.inf, np.zeros_like(v)
        _, g = model.gradient(np.zeros(k), tau)
        return -model.value(np.zeros(k), tau), -g.ravel()

    res = minimize(neg, tau0.ravel(), jac=True, method="L-BFGS-B",
                   options={"gtol": 1e-13, "ftol": 1e-16, "maxiter": 5000})
    tau = res.x.reshape(k, m)
    # Newton polish; the pseudo-inverse ignores rotational zero modes
    for _ in range(30):
        _, g = model.gradient(np.zeros(k), tau)
        if np.linalg.norm(g) <= 1e-13:
            break
        step = np.linalg.lstsq(model.tau_hessian(tau), -g.ravel(), rcond=1e-12)[0].reshape(k, m)
        t = 1.0
        while t > 1e-6:
            cand = tau + t * step
            if k == 1 or min_separation(cand) >= COLLISION_GUARD:
                _, gc = model.gradient(np.zeros(k), cand)
                if np.linalg.norm(gc) < np.linalg.norm(g):
                    tau = cand
                    break
            t *= 0.5
        else:
            break
    return tau


def optimize_cluster(k: int, Q: HessianForm, constants: EnergyConstants, pi_norm_sq: float,
                     params: ProblemParams, seeds=range(8), eps: float = 1e-3,
                     grad_tol: float = 1e-10) -> OptimizationResult:
    """Multi-start maximisation of F_n.

    The d block is a strictly concave quadratic with maximiser d = 0 on
    [0, inf)^k; the tau block starts from k points on a circle of radius
    t* (the k = 2 isotropic scale) with seeded jitter and is driven by
    L-BFGS-B followed by Newton polishing.  The best value wins, ties going to
    the lowest seed.
    """
    model = ReducedModel.build(params, constants, Q, pi_norm_sq)
    m = params.n - 1
    q_min = float(np.linalg.eigvalsh(model.Q)[0])
    r0 = model.two_point_radius(q_min)
    best = None
    seeds = list(seeds)
    for seed in seeds:
        rng = np.random.default_rng(seed)
        angles = 2 * math.pi * np.arange(k) / k + rng.uniform(0, 2 * math.pi)
        tau0 = np.zeros((k, m))
        if k > 1:
            tau0[:, 0] = r0 * np.cos(angles)
            tau0[:, 1] = r0 * np.sin(angles)
        tau0 += 0.05 * r0 * rng.standard_normal((k, m)) if k > 1 else 0.0
        if k > 1 and min_separation(tau0) < COLLISION_GUARD:
            tau0 += 1e-3 * r0 * rng.standard_normal((k, m))
        try:
            tau = _ascend(model, tau0)
        except (ValueError, FloatingPointError):
            continue
        d = np.zeros(k)
        val = float(model.value(d, tau))
        gd, gt = model.gradient(d, tau)
        gnorm = _projected_gradient_norm(d, gd, gt)
        if not math.isfinite(val) or gnorm > grad_tol:
            continue
        if best is None or val > best[0] + 1e-14 * abs(best[0]):
            best = (val, gnorm, seed, tau)
    if best is None:
        raise OptimizationError(f"no start out of {len(seeds)} reached a stationary point with gradient <= {grad_tol}")
    val, gnorm, seed, tau = best
    return OptimizationResult(ClusterConfig(k, np.zeros(k), tau, eps), val, gnorm, seed, len(seeds))


def reduced_energy_expansion(config: ClusterConfig, params: ProblemParams, constants: EnergyConstants,
                             Q: HessianForm, pi_norm_sq: float) -> float:
    """k E + k theta_n (c d_0 - b ||pi||^2 d_0^2) + Theta_n F_n (the o-term dropped)."""
    th, Th = theta(params.n, config.eps)
    dz = d0(constants.c_n_const, constants.b_n, pi_norm_sq)
    k = config.k
    return (k * constants.E + k * th * (constants.c_n_const * dz - constants.b_n * pi_norm_sq * dz * dz)
            + Th * F_n(config, Q, constants, pi_norm_sq, params))


def approximate_solution_field(config: ClusterConfig, params: ProblemParams, constants: EnergyConstants,
                               pi_norm_sq: float, x, h: SecondFundamentalForm | None = None) -> np.ndarray:
    """Flat-chart ansatz sum_j delta_j^{-(n-2)/2} [U + delta_j w]((x - eta tau_j)/delta_j).

    w is w_p for n >= 5 and the leading profile w-bar for n = 4; with h = None
    only the bubbles are summed.
    """
    from .correction import wbar0_field, wp_field

    dz = d0(constants.c_n_const, constants.b_n, pi_norm_sq)
    sch = schedule(params, config, dz)
    x = np.asarray(x, dtype=float)
    n = params.n
    corr = None
    if h is not None:
        corr = wbar0_field(params, h) if n == 4 else wp_field(params, h)
    out = np.zeros(x.shape[:-1])
    for tau_j, delta_j in zip(config.tau, sch.delta):
        centre = sch.eta * tau_j
        b = Bubble(params, delta=float(delta_j), center=centre)
        out = out + bubble_value(b, x)
        if corr is not None:
            y = b._rescale(x)
            out = out + delta_j * delta_j ** (-(n - 2) / 2) * corr.value(y)
    return out
