"""Radial shooting on the hyperbolic ball, the ball <-> half-space conformal
bridge, and the Robin eigenvalue count that certifies nondegeneracy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import comb, gammaln, hyp2f1

from .bubbles import kernel_value, standard_profile
from .core import PreconditionError, ProblemParams


class ShootingError(RuntimeError):
    pass


@dataclass(frozen=True)
class RadialModeSolution:
    n: int
    i: int
    T: float
    grid: np.ndarray
    gamma: np.ndarray
    gamma_prime: np.ndarray


def ball_radius(params: ProblemParams) -> tuple[float, float]:
    """Euclidean radius R of the image ball and its hyperbolic radius T."""
    D = params.D
    if not D > 1:
        raise PreconditionError(f"D={D} must exceed 1 for the ball picture")
    R = D - math.sqrt(D * D - 1.0)
    # log1p form keeps precision when R is small
    T = math.log1p(R) - math.log1p(-R)
    return R, T


def _series_coefficient(n: int, i: int) -> float:
    """a in gamma = t^i (1 + a t^2 + ...), the regular Frobenius branch."""
    return (3 * n - i * i - (2 * n - 3) * i) / (6.0 * (2 * i + n))


def solve_radial_mode(n: int, i: int, T: float, t0_factor: float = 1e-4, grid_size: int = 64) -> RadialModeSolution:
    """Shoot the regular solution of
    gamma'' + (n-1) coth(t) gamma' - (i(i+n-2)/sinh^2 t + n) gamma = 0
    from a two-term series at t0 = t0_factor*T up to T.

    The log-derivative m = gamma'/gamma obeys a Riccati equation which is
    integrated together with log(gamma); this is stable for the growing
    regular branch and avoids overflow for large i.  gamma is normalised to
    gamma(T) = 1.
    """
    if i < 0 or T <= 0:
        raise PreconditionError("need harmonic index i >= 0 and T > 0")
    lam = i * (i + n - 2)
    a = _series_coefficient(n, i)
    t0 = t0_factor * T
    g0 = 1.0 + a * t0 * t0
    # gamma = t^i (1 + a t^2) gives gamma'/gamma = i/t + 2 a t / (1 + a t^2)
    dg0 = i / t0 + 2 * a * t0 / g0
    state0 = [dg0, math.log(g0) + (i * math.log(t0) if i else 0.0)]

    def rhs(t, s):
        m = s[0]
        sh = math.sinh(t)
        return [-m * m - (n - 1) / math.tanh(t) * m + lam / (sh * sh) + n, m]

    def jac(t, s):
        return [[-2 * s[0] - (n - 1) / math.tanh(t), 0.0], [1.0, 0.0]]

    grid = np.concatenate([np.geomspace(t0, T, grid_size)[:-1], [T]])
    method = "DOP853" if i <= 12 else "Radau"
    kw = {"jac": jac} if method == "Radau" else {}
    sol = solve_ivp(rhs, (t0, T), state0, method=method, t_eval=grid, rtol=1e-12, atol=1e-12, **kw)
    if not sol.success:
        raise ShootingError(f"radial shooting failed for n={n}, i={i}, T={T}: {sol.message}")
    m, logg = sol.y
    gamma = np.exp(logg - logg[-1])
    return RadialModeSolution(n, i, T, sol.t, gamma, m * gamma)


def robin_ratio(sol: RadialModeSolution) -> float:
    if sol.gamma[-1] == 0:
        raise ShootingError("gamma vanishes at the boundary; Robin ratio undefined")
    return float(sol.gamma_prime[-1] / sol.gamma[-1])


def robin_ratio_hypergeometric(n: int, i: int, T: float) -> float:
    """Independent route: gamma = sinh^i(t) 2F1(i+n, i-1; i+n/2; -sinh^2(t/2))."""
    a, b, c = i + n, i - 1, i + n / 2
    v = -math.sinh(T / 2) ** 2
    F = hyp2f1(a, b, c, v)
    dF = a * b / c * hyp2f1(a + 1, b + 1, c + 1, v)
    # dv/dt = -sinh(t)/2
    return i / math.tanh(T) + dF * (-math.sinh(T) / 2) / F if i else dF * (-math.sinh(T) / 2) / F


def harmonic_dimension(n: int, i: int) -> int:
    """Dimension of degree-i spherical harmonics on S^{n-1}."""
    if i == 0:
        return 1
    return int(comb(i + n - 1, n - 1, exact=True) - comb(i + n - 3, n - 1, exact=True))


@dataclass(frozen=True)
class SpectrumRow:
    i: int
    mu: float
    dimension: int


def robin_spectrum(n: int, T: float, max_index: int = 8) -> list[SpectrumRow]:
    return [SpectrumRow(i, robin_ratio(solve_radial_mode(n, i, T)), harmonic_dimension(n, i))
            for i in range(max_index + 1)]


def steklov_verdict(params: ProblemParams, max_index: int = 8, tol: float = 1e-6):
    """(mu0, mu1, multiplicity of D among the Robin ratios, full table)."""
    _, T = ball_radius(params)
    rows = robin_spectrum(params.n, T, max_index)
    mult = sum(r.dimension for r in rows if abs(r.mu - params.D) < tol)
    return rows[0].mu, rows[1].mu, mult, rows


# --- conformal bridge -------------------------------------------------------------

@dataclass(frozen=True)
class CayleyMap:
    """Half-space -> B_R: shift by D e_n, invert in the unit sphere, then invert
    in the sphere centred at e_n/R of radius sqrt(1/R^2 - 1) (a hyperbolic
    isometry of the unit ball sending R e_n to the origin).  Both inversions
    are involutions, which gives the inverse map for free."""

    params: ProblemParams

    @property
    def R(self) -> float:
        return ball_radius(self.params)[0]

    def _centre(self) -> np.ndarray:
        c = np.zeros(self.params.n)
        c[-1] = 1.0 / self.R
        return c

    def _r2(self) -> float:
        return 1.0 / self.R ** 2 - 1.0

    def __call__(self, x) -> np.ndarray:
        y = np.array(x, dtype=float, copy=True)
        y[..., -1] += self.params.D
        w = y / np.sum(y * y, axis=-1, keepdims=True)
        u = w - self._centre()
        return self._centre() + self._r2() * u / np.sum(u * u, axis=-1, keepdims=True)

    def inverse(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        u = z - self._centre()
        w = self._centre() + self._r2() * u / np.sum(u * u, axis=-1, keepdims=True)
        y = w / np.sum(w * w, axis=-1, keepdims=True)
        y[..., -1] -= self.params.D
        return y

    def jacobian(self, x) -> np.ndarray:
        """Closed-form Jacobian as the product of two inversion Jacobians."""
        n = self.params.n
        y = np.array(x, dtype=float, copy=True)
        y[..., -1] += self.params.D
        yy = np.sum(y * y, axis=-1)[..., None, None]
        eye = np.eye(n)
        J1 = (eye - 2 * y[..., :, None] * y[..., None, :] / yy) / yy
        w = y / yy[..., 0]
        u = w - self._centre()
        uu = np.sum(u * u, axis=-1)[..., None, None]
        J2 = self._r2() * (eye - 2 * u[..., :, None] * u[..., None, :] / uu) / uu
        return J2 @ J1


def cayley_map(params: ProblemParams, x) -> np.ndarray:
    params.require_supercritical()
    return CayleyMap(params)(x)


def conformal_factor_check(params: ProblemParams, x) -> float:
    """Max relative deviation between the pulled-back hyperbolic metric and
    (|K|/(n(n-1))) U^{4/(n-2)} times the identity."""
    n = params.n
    phi = CayleyMap(params)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    z = phi(x)
    J = phi.jacobian(x)
    hyper = 4.0 / (1.0 - np.sum(z * z, axis=-1)) ** 2
    pull = hyper[:, None, None] * np.swapaxes(J, -1, -2) @ J
    U = standard_profile(params).value(x)
    target = abs(params.K) / (n * (n - 1)) * U ** (4.0 / (n - 2))
    dev = np.abs(pull - target[:, None, None] * np.eye(n)) / target[:, None, None]
    return float(dev.max())


def first_eigenfunction(z, i: int) -> np.ndarray:
    """Degree-one eigenfunction sinh(t) * z_i/|z| = 2 z_i/(1-|z|^2) (up to the factor 2)."""
    z = np.asarray(z, dtype=float)
    return z[..., i - 1] / (1.0 - np.sum(z * z, axis=-1))


def first_eigenfunction_weighted(z, i: int) -> np.ndarray:
    """The variant |z| z_i/(1-|z|^2); kept for comparison, it is not an eigenfunction."""
    z = np.asarray(z, dtype=float)
    return np.linalg.norm(z, axis=-1) * first_eigenfunction(z, i)


def sample_ball(n: int, R: float, count: int, seed: int = 0) -> np.ndarray:
    from scipy.stats import qmc

    # rejection from the cube; oversample by the inverse ball/cube volume ratio
    ratio = math.exp(0.5 * n * math.log(math.pi) - gammaln(0.5 * n + 1)) * (0.98 / 2) ** n
    draws = int(math.ceil(1.5 * count / ratio)) + 16
    while True:
        u = qmc.Halton(d=n, scramble=True, seed=seed).random(draws)
        pts = (2 * u - 1) * R
        pts = pts[np.sum(pts * pts, axis=1) < (0.98 * R) ** 2]
        if len(pts) >= count:
            return pts[:count]
        draws *= 2


def kernel_transfer_check(params: ProblemParams, i: int, count: int = 1000, seed: int = 0,
                          eigenfunction=first_eigenfunction) -> float:
    """Max relative spread of zhat_i / phi_1^i about its median on a ball sample."""
    params.require_supercritical()
    n = params.n
    R, _ = ball_radius(params)
    z = sample_ball(n, R, count, seed)
    target = eigenfunction(z, i)
    keep = np.abs(target) > 1e-3 * np.abs(target).max()
    z, target = z[keep], target[keep]
    x = CayleyMap(params).inverse(z)
    U = standard_profile(params).value(x)
    zhat = abs(params.K) ** (-(n - 2) / 4) * kernel_value(params, i, x) / U
    ratio = zhat / target
    med = np.median(ratio)
    if med == 0:
        raise ShootingError("kernel transfer ratio vanished")
    return float(np.max(np.abs(ratio - med)) / abs(med))
