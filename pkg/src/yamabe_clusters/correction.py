"""Correction profiles: the forcing E_p, the closed-form w_p (n >= 5), the explicit
n = 4 profiles, the boundary-layer solve for psi, and the constant f_n."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import eval_gegenbauer, gammaln, hyp2f1, roots_jacobi

from .bubbles import kernel_field, standard_profile
from .core import PreconditionError, ProblemParams, SecondFundamentalForm, denom, sphere_area
from .fields import Polynomial, RationalField, quadratic_form
from .quadrature import i_integral, integrate
from .spectral import CayleyMap, ball_radius, robin_ratio, robin_ratio_hypergeometric, solve_radial_mode


def _check_h(params: ProblemParams, h: SecondFundamentalForm) -> np.ndarray:
    if h.h.shape != (params.n - 1, params.n - 1):
        raise PreconditionError("second fundamental form must be (n-1)x(n-1)")
    return h.h


def beta(params: ProblemParams) -> float:
    n = params.n
    return 2 * n * (n - 2) * params.amplitude


def forcing_Ep(params: ProblemParams, h: SecondFundamentalForm, x) -> np.ndarray:
    """E_p = (8(n-1)/(n-2)) sum_ij h_ij d^2U/dx_i dx_j x_n."""
    hm = _check_h(params, h)
    n = params.n
    m = n - 1
    x = np.asarray(x, dtype=float)
    hess = standard_profile(params).hessian(x)[..., :m, :m]
    return 8 * (n - 1) / (n - 2) * np.einsum("...ij,ij->...", hess, hm) * x[..., -1]


def L_operator(q: Polynomial, params: ProblemParams, x) -> np.ndarray:
    """-denom * Lap q + 2n grad q . (x + D e_n) - 2n q."""
    n = params.n
    x = np.asarray(x, dtype=float)
    y = x.copy()
    y[..., -1] += params.D
    return (-denom(params, x) * q.laplacian(x) + 2 * n * np.sum(q.gradient(x) * y, axis=-1)
            - 2 * n * q(x))


def wp_field(params: ProblemParams, h: SecondFundamentalForm) -> RationalField:
    """w_p = (beta_n/4n) sum_ij h_ij x_i x_j (x_n - D) / denom^{n/2}.

    The sum runs over all (i, j); with a trace-free h the diagonal part
    solves the same equation, so no zero-diagonal assumption is needed.
    """
    n = params.n
    if n < 5:
        raise PreconditionError("closed-form w_p needs n >= 5; use the n = 4 profiles")
    hm = _check_h(params, h)
    shift = Polynomial.monomial(n, n - 1) + Polynomial.constant(n, -params.D)
    return RationalField(params, quadratic_form(hm, n) * shift * (beta(params) / (4 * n)), n / 2)


def wp_value(params: ProblemParams, h: SecondFundamentalForm, x) -> np.ndarray:
    return wp_field(params, h).value(x)


def wp_residual(params: ProblemParams, h: SecondFundamentalForm, x) -> tuple[np.ndarray, np.ndarray]:
    """(-c_n Lap w + c_n n(n+2)/denom^2 w - E_p, magnitude scale)."""
    n, c = params.n, params.c_n
    w = wp_field(params, h)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    lap = w.laplacian(x)
    pot = c * n * (n + 2) / denom(params, x) ** 2 * w.value(x)
    E = forcing_Ep(params, h, x)
    return -c * lap + pot - E, np.abs(c * lap) + np.abs(pot) + np.abs(E)


def wbar0_field(params: ProblemParams, h: SecondFundamentalForm) -> RationalField:
    """Leading n = 4 profile sum_{i != j} M_ij x_4 x_i x_j / denom^2, M = 2 h alpha_4/|K|^{1/2}."""
    if params.n != 4:
        raise PreconditionError("the leading profile w-bar is defined for n = 4 only")
    hm = _check_h(params, h)
    M = 2 * hm * params.amplitude
    off = M - np.diag(np.diag(M))
    return RationalField(params, quadratic_form(off, 4) * Polynomial.monomial(4, 3), 2.0)


def wbar0_value(params: ProblemParams, h: SecondFundamentalForm, x) -> np.ndarray:
    return wbar0_field(params, h).value(x)


def wbar0_remainder(params: ProblemParams, h: SecondFundamentalForm, x) -> np.ndarray:
    """(-6 Lap w-bar - E_p)(x) * (1 + |x|)^2."""
    w = wbar0_field(params, h)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return (-6 * w.laplacian(x) - forcing_Ep(params, h, x)) * (1 + np.linalg.norm(x, axis=-1)) ** 2


# --- n = 4 radial profiles ---------------------------------------------------------
# Written in u = r^2; L = ln(u - 1).  The 4D radial Laplacian is 4(2 f_u + u f_uu).

@dataclass(frozen=True)
class RadialProfile:
    """A function of u = r^2 with its first three u-derivatives."""

    f: callable
    fu: callable
    fuu: callable
    fuuu: callable

    def of_r(self, r):
        return self.f(np.asarray(r, dtype=float) ** 2)

    def radial_laplacian(self, r):
        u = np.asarray(r, dtype=float) ** 2
        return 4 * (2 * self.fu(u) + u * self.fuu(u))


def zp_profiles(params4: ProblemParams, c1: float = 0.0, c2: float = 0.0) -> tuple[RadialProfile, RadialProfile]:
    """Phi0(r) = (c1 + 3 r^4 - 2 (r^2-1)^2 ln(r^2-1)) / (16 r^2) and
    Phi1(r) = c2/r^2 + D ln(r^2-1)/(4 r^2) - D ln(r^2-1)/4."""
    if params4.n != 4:
        raise PreconditionError("z_p profiles are defined for n = 4")
    params4.require_supercritical()
    D = params4.D
    L = lambda u: np.log(u - 1.0)

    # Phi0 = c1/(16u) + 3u/16 - q/8 with q = (u - 2 + 1/u) L
    q_u = lambda u: (1 - u ** -2) * L(u) + 1 - 1 / u
    q_uu = lambda u: 2 * L(u) / u ** 3 + (u + 2) / u ** 2
    q_uuu = lambda u: -6 * L(u) / u ** 4 + 2 / (u ** 3 * (u - 1)) - (u + 4) / u ** 3
    phi0 = RadialProfile(
        f=lambda u: c1 / (16 * u) + 3 * u / 16 - (u - 2 + 1 / u) * L(u) / 8,
        fu=lambda u: -c1 / (16 * u ** 2) + 3 / 16 - q_u(u) / 8,
        fuu=lambda u: c1 / (8 * u ** 3) - q_uu(u) / 8,
        fuuu=lambda u: -3 * c1 / (8 * u ** 4) - q_uuu(u) / 8,
    )
    # Phi1 = c2/u - D p/4 with p = L (1 - 1/u)
    p_u = lambda u: 1 / u + L(u) / u ** 2
    p_uu = lambda u: -1 / u ** 2 + 1 / (u ** 2 * (u - 1)) - 2 * L(u) / u ** 3
    p_uuu = lambda u: (2 / u ** 3 - (3 * u - 2) / (u ** 3 * (u - 1) ** 2)
                       - 2 / (u ** 3 * (u - 1)) + 6 * L(u) / u ** 4)
    phi1 = RadialProfile(
        f=lambda u: c2 / u - D * L(u) * (1 - 1 / u) / 4,
        fu=lambda u: -c2 / u ** 2 - D * p_u(u) / 4,
        fuu=lambda u: 2 * c2 / u ** 3 - D * p_uu(u) / 4,
        fuuu=lambda u: -6 * c2 / u ** 4 - D * p_uuu(u) / 4,
    )
    return phi0, phi1


def profile_ode_residuals(params4: ProblemParams, r) -> tuple[np.ndarray, np.ndarray]:
    """-Delta Phi0 - ln(r^2-1) and -Delta Phi1 - D/(r^2-1) on r > 1."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 1):
        raise PreconditionError("radial profiles live on r > 1")
    phi0, phi1 = zp_profiles(params4)
    return (-phi0.radial_laplacian(r) - np.log(r * r - 1),
            -phi1.radial_laplacian(r) - params4.D / (r * r - 1))


def _u_y4(params4, x):
    x = np.asarray(x, dtype=float)
    y4 = x[..., 3] + params4.D
    return np.sum(x[..., :3] ** 2, axis=-1) + y4 ** 2, y4


def zp_value(params4: ProblemParams, x) -> np.ndarray:
    """z_p = A ((1/2) d Phi0/dx_4 - Phi1) with A = alpha_4/|K|^{1/2}."""
    phi0, phi1 = zp_profiles(params4)
    u, y4 = _u_y4(params4, x)
    return params4.amplitude * (phi0.fu(u) * y4 - phi1.f(u))


def zp_laplacian(params4: ProblemParams, x) -> np.ndarray:
    phi0, phi1 = zp_profiles(params4)
    u, y4 = _u_y4(params4, x)
    lap_d4_phi0 = y4 * (24 * phi0.fuu(u) + 8 * u * phi0.fuuu(u))
    lap_phi1 = 4 * (2 * phi1.fu(u) + u * phi1.fuu(u))
    return params4.amplitude * (0.5 * lap_d4_phi0 - lap_phi1)


def zp_residual(params4: ProblemParams, x) -> tuple[np.ndarray, np.ndarray]:
    """(-Lap z_p - U x_4, |U x_4|)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    rhs = standard_profile(params4).value(x) * x[:, 3]
    return -zp_laplacian(params4, x) - rhs, np.abs(rhs)


# --- decay ---------------------------------------------------------------------------

def decay_slopes(params: ProblemParams, h: SecondFundamentalForm, radii=(1e3, 1e4)) -> tuple[float, float]:
    """Log-log slopes of |w_p| and |grad w_p| along a generic ray."""
    w = wp_field(params, h)
    n = params.n
    direction = np.ones(n) / math.sqrt(n)
    pts = np.array([rr * direction for rr in radii])
    v = np.abs(w.value(pts))
    g = np.linalg.norm(w.gradient(pts), axis=-1)
    lr = np.log(radii)
    return float(np.diff(np.log(v))[0] / np.diff(lr)[0]), float(np.diff(np.log(g))[0] / np.diff(lr)[0])


# --- exact-in-angle integration of polynomial * denom^{-s} ---------------------------

def sphere_monomial_integral(exps) -> float:
    """int over S^{m-1} of prod theta_j^{a_j}."""
    if any(a % 2 for a in exps):
        return 0.0
    m = len(exps)
    logv = sum(gammaln((a + 1) / 2) for a in exps) - gammaln((sum(exps) + m) / 2)
    return 2.0 * math.exp(logv)


def _radial_power_integral(a: float, s: float, lam: float) -> float:
    """int_0^inf r^a (r^2 + lam)^{-s} dr via the Beta function."""
    p = (a + 1) / 2
    return 0.5 * math.exp((p - s) * math.log(lam) + gammaln(p) + gammaln(s - p) - gammaln(s))


def half_space_integral(params: ProblemParams, poly: Polynomial, s: float, rel_tol: float = 1e-10) -> float:
    """int_{R^n_+} P(x) denom^{-s} dx: angular parts exactly, (r, x_n) by nested quadrature."""
    n, D = params.n, params.D
    m = n - 1
    groups: dict[tuple[int, int], float] = {}
    for e, c in poly.terms:
        ang = sphere_monomial_integral(e[:m])
        if ang:
            key = (sum(e[:m]), e[m])
            groups[key] = groups.get(key, 0.0) + c * ang
    total = []
    floor = 1e-14 * max((abs(c) for c in groups.values()), default=0.0)
    for (deg, b), coef in sorted(groups.items()):
        if abs(coef) <= floor:
            continue
        def outer(xs, deg=deg, b=b):
            out = []
            for xn in np.atleast_1d(xs):
                lam = (xn + D) ** 2 - 1
                out.append(xn ** b * _radial_power_integral(m - 1 + deg, s, lam))
            return np.array(out)
        total.append(coef * integrate(outer, 0.0, math.inf, rel_tol=rel_tol, breakpoints=(1.0,)))
    return math.fsum(total)


def boundary_integral(params: ProblemParams, poly: Polynomial, s: float) -> float:
    """int_{R^{n-1}} P(x~, 0) (|x~|^2 + D^2 - 1)^{-s} dx~."""
    n, D = params.n, params.D
    m = n - 1
    lam = D * D - 1
    total = []
    for e, c in poly.terms:
        if e[m]:
            continue
        ang = sphere_monomial_integral(e[:m])
        if ang:
            total.append(c * ang * _radial_power_integral(m - 1 + sum(e[:m]), s, lam))
    return math.fsum(total)


def orthogonality_check(params: ProblemParams, h: SecondFundamentalForm, i: int) -> float:
    """int_{R^n_+} w_p z_i dx."""
    w = wp_field(params, h)
    z = kernel_field(params, i)
    return half_space_integral(params, w.poly * z.poly, w.s + z.s)


def delta_order_terms(params: ProblemParams, h: SecondFundamentalForm) -> tuple[float, float]:
    """|K| int U^{(n+2)/(n-2)} w_p and (n-1) H int_bdry U^{n/(n-2)} w_p.

    The psi part of the correction has the form S(x~) chi(|x~|, x_n) with S the
    harmonic quadratic form of h, so its contribution to either integral is
    an angular average of S and vanishes identically; it is omitted.
    """
    n, A = params.n, params.amplitude
    w = wp_field(params, h)
    interior = abs(params.K) * A ** ((n + 2) / (n - 2)) * half_space_integral(params, w.poly, w.s + (n + 2) / 2)
    boundary = (n - 1) * params.H * A ** (n / (n - 2)) * boundary_integral(params, w.poly, w.s + n / 2)
    return interior, boundary


# --- psi: boundary-layer solve on the hyperbolic ball -------------------------------

def _gegenbauer_log_norm(k: np.ndarray, lam: float) -> np.ndarray:
    return (math.log(math.pi) + (1 - 2 * lam) * math.log(2) + gammaln(k + 2 * lam) - gammaln(k + 1)
            - np.log(k + lam) - 2 * gammaln(lam))


@dataclass
class PsiModeSolution:
    """psi_12 on the half-space, represented on the ball B_R as
    sum_l a_l (z_1 z_2/|z|^2) C_{l-2}^{(n+2)/2}(z_n/|z|) gamma_l(t)/gamma_l(T).

    The transported boundary datum is 2^{-n/2} (D^2-1) theta_1 theta_2/(1-theta_n)^2
    on the sphere |z| = R, and each mode satisfies gamma' - D gamma = g_l at t = T.
    """

    params: ProblemParams
    modes: int
    shooting_modes: int

    @cached_property
    def geometry(self) -> tuple[float, float]:
        return ball_radius(self.params)

    @property
    def lam(self) -> float:
        return (self.params.n + 2) / 2

    @cached_property
    def datum_coefficients(self) -> np.ndarray:
        """Gegenbauer coefficients of F(s) = (D^2-1)/(1-s)^2 (including 2^{-n/2})."""
        n, D = self.params.n, self.params.D
        K = self.modes
        s, w = roots_jacobi(K // 2 + 8, (n - 3) / 2, (n + 1) / 2)
        k = np.arange(K)
        inner = np.array([np.dot(w, eval_gegenbauer(kk, self.lam, s)) for kk in k]) * (D * D - 1)
        return 2.0 ** (-n / 2) * inner / np.exp(_gegenbauer_log_norm(k, self.lam))

    @cached_property
    def robin_ratios(self) -> np.ndarray:
        """mu_l for l = 2 .. modes+1: shooting for low modes, hypergeometric form above."""
        n = self.params.n
        _, T = self.geometry
        out = []
        for l in range(2, self.modes + 2):
            if l - 2 < self.shooting_modes:
                out.append(robin_ratio(solve_radial_mode(n, l, T)))
            else:
                out.append(robin_ratio_hypergeometric(n, l, T))
        return np.array(out)

    @property
    def solvability_margin(self) -> float:
        """mu_2 - D; positive means the inhomogeneous Robin problem is uniquely solvable."""
        return float(self.robin_ratios[0] - self.params.D)

    @cached_property
    def amplitudes(self) -> np.ndarray:
        """Boundary values a_l = g_l / (mu_l - D) of each mode."""
        margin = self.robin_ratios - self.params.D
        if np.min(margin) < 1e-4:
            raise PreconditionError("Robin problem is near resonance (mu_l close to D)")
        return self.datum_coefficients / margin

    def _pairing_terms(self) -> np.ndarray:
        n = self.params.n
        _, T = self.geometry
        k = np.arange(self.modes)
        norms = np.exp(_gegenbauer_log_norm(k, self.lam))
        weight = math.sinh(T) ** (n - 1) * sphere_area(n - 1) / ((n - 1) * (n + 1))
        return weight * self.datum_coefficients ** 2 * norms / (self.robin_ratios - self.params.D)

    def boundary_pairing(self) -> tuple[float, float]:
        """t_2 = int x_1 x_2 (|x~|^2+D^2-1)^{-n/2} psi_12(x~, 0) dx~ and an error estimate.

        Partial sums converge like 1/L, so two Richardson levels on L/4, L/2, L
        are applied.
        """
        S = np.cumsum(self._pairing_terms())
        L = self.modes
        s1, s2, s4 = S[L // 4 - 1], S[L // 2 - 1], S[L - 1]
        r12 = 2 * s2 - s1
        r24 = 2 * s4 - s2
        best = (4 * r24 - r12) / 3
        return float(best), float(abs(best - r24))

    def ball_partial_values(self, z, checkpoints) -> list[np.ndarray]:
        """Partial sums of phi(z) on B_R after each mode count in ``checkpoints``."""
        n = self.params.n
        _, T = self.geometry
        z = np.atleast_2d(np.asarray(z, dtype=float))
        rad = np.linalg.norm(z, axis=-1)
        rad = np.where(rad > 0, rad, 1e-300)
        t = 2 * np.arctanh(rad)
        ang = z[:, 0] * z[:, 1] / rad ** 2
        cos_polar = z[:, -1] / rad
        vT = -math.sinh(T / 2) ** 2
        v = -np.sinh(t / 2) ** 2
        ratio_sinh = np.sinh(t) / math.sinh(T)
        total = np.zeros(len(z))
        marks = set(checkpoints)
        out = []
        for k, a in enumerate(self.amplitudes[:max(checkpoints)]):
            l = k + 2
            prof = ratio_sinh ** l * hyp2f1(l + n, l - 1, l + n / 2, v) / hyp2f1(l + n, l - 1, l + n / 2, vT)
            total = total + a * eval_gegenbauer(k, self.lam, cos_polar) * prof
            if k + 1 in marks:
                out.append(ang * total)
        return out

    def ball_value(self, z) -> np.ndarray:
        """phi(z) on B_R."""
        return self.ball_partial_values(z, [self.modes])[0]

    def partial_values(self, x, checkpoints) -> list[np.ndarray]:
        """Partial sums of psi_12 at half-space points: rho(x) phi(Phi(x)), rho = (2/denom)^{(n-2)/2}."""
        n = self.params.n
        x = np.atleast_2d(np.asarray(x, dtype=float))
        rho = (2.0 / denom(self.params, x)) ** ((n - 2) / 2)
        return [rho * v for v in self.ball_partial_values(CayleyMap(self.params)(x), checkpoints)]

    def value(self, x) -> np.ndarray:
        return self.partial_values(x, [self.modes])[0]

    def truncated(self, modes: int) -> "PsiModeSolution":
        """Same solve restricted to the first ``modes`` modes, reusing computed ratios."""
        out = PsiModeSolution(self.params, modes, min(self.shooting_modes, modes))
        if "robin_ratios" in self.__dict__ or modes <= self.modes:
            out.__dict__["robin_ratios"] = self.robin_ratios[:modes]
        if "datum_coefficients" in self.__dict__:
            out.__dict__["datum_coefficients"] = self.datum_coefficients[:modes]
        return out

    def lowest_mode(self):
        """Shooting solution for the degree-two mode and its Robin data g_2."""
        _, T = self.geometry
        sol = solve_radial_mode(self.params.n, 2, T)
        return sol, float(self.datum_coefficients[0])


def psi_mode_solve(params: ProblemParams, modes: int = 1600, shooting_modes: int = 40) -> PsiModeSolution:
    if params.n < 5:
        raise PreconditionError("the psi mode solve is implemented for n >= 5")
    params.require_supercritical()
    return PsiModeSolution(params, modes, shooting_modes)


# --- the constant f_n ------------------------------------------------------------------

@dataclass(frozen=True)
class FConstants:
    f1: float
    f2: float
    f_n: float
    interior_part: float
    boundary_part: float
    psi_part: float
    psi_error: float


def f1_integral(params: ProblemParams) -> float:
    n, D = params.n, params.D
    f = lambda x: x * (x - D) / ((x + D) ** 2 - 1) ** ((n - 1) / 2)
    return integrate(f, 0.0, math.inf, rel_tol=1e-12, breakpoints=(D,))


def f_constants(params: ProblemParams, h: SecondFundamentalForm | None = None,
                psi: PsiModeSolution | None = None) -> FConstants:
    """f1, f2 = t_2 and f_n with  int (-c_n Lap V + c_n n(n+2)/denom^2 V) V = f_n ||h||^2.

    ||h||^2 is the full sum of squares.  Per unit ||h||^2 the quadratic form
    splits into an interior w-w term, a boundary w term and the psi term:
      (beta^2/4n) (2/((n-1)(n+1))) omega I_{n+1}^{n+2} f1
      - (beta/4n)^2 D (2/((n-1)(n+1))) omega (D^2-1)^{(3-n)/2} I_n^{n+2}
      + (beta/4n)^2 2 t_2.
    The factor 2/((n-1)(n+1)) is the sphere average of (theta^T h theta)^2 / ||h||^2.
    """
    n, D = params.n, params.D
    if n < 5:
        raise PreconditionError("f_n is defined for n >= 5")
    params.require_supercritical()
    b = beta(params)
    avg = 2.0 / ((n - 1) * (n + 1))
    f1 = f1_integral(params)
    interior = b * b / (4 * n) * avg * params.omega * i_integral(n + 1, n + 2) * f1
    boundary = -(b / (4 * n)) ** 2 * D * avg * params.omega * (D * D - 1) ** ((3 - n) / 2) * i_integral(n, n + 2)
    psi = psi or psi_mode_solve(params)
    t2, t2_err = psi.boundary_pairing()
    psi_part = (b / (4 * n)) ** 2 * 2 * t2
    fn = params.c_n * (interior + boundary + psi_part)
    return FConstants(f1, t2, fn, interior, boundary, psi_part, (b / (4 * n)) ** 2 * 2 * t2_err * params.c_n)


def f_n_displayed_coefficients(params: ProblemParams) -> tuple[float, float]:
    """The interior and boundary coefficients as printed with Gamma factors,
    reading omega_{n-4} as the area of the unit sphere in R^{n-3}.  Used only to
    document the factor-two discrepancy against the derivation above."""
    n, D = params.n, params.D
    b = beta(params)
    w = sphere_area(n - 3)
    g = math.exp(gammaln((n - 3) / 2) + gammaln((n + 5) / 2) - gammaln(n + 2))
    interior = w * math.pi * b * b * g / (4 * n * (n - 1) * (n + 3)) * f1_integral(params)
    g2 = math.exp(gammaln((n - 3) / 2) + gammaln((n + 3) / 2) - gammaln(n + 2))
    boundary = -D * b * b * w * math.pi * g2 * (D * D - 1) ** ((3 - n) / 2) / (16 * n * (n - 1) * (n - 3))
    return interior, boundary


@dataclass(frozen=True)
class OracleResult:
    value: float
    w_part: float
    psi_part: float
    psi_partial_sums: tuple[float, float, float]


def quadratic_form_oracle(params: ProblemParams, psi: PsiModeSolution | None = None, nodes: int = 24,
                          interior_modes: int = 240) -> OracleResult:
    """Direct quadrature of int E_p (w_p + psi_p) dx per unit ||h||^2 (equals f_n).

    Uses h_12 = h_21 = 1/2 so that psi_p = (beta/4n) psi_12, evaluates the
    integrand on the slice x = (r/sqrt2, r/sqrt2, 0, ..., x_n) and restores the
    x~-sphere average of (x_1 x_2)^2 analytically.  The (r, x_n) quarter plane
    is mapped to the unit square by r = a/(1-a), x_n = b/(1-b) and integrated
    with tensor Gauss-Legendre panels.  The psi term is evaluated with M/4,
    M/2 and M modes and extrapolated in 1/M.
    """
    n = params.n
    if interior_modes % 4:
        raise PreconditionError("interior_modes must be divisible by 4")
    psi = psi or psi_mode_solve(params)
    h = np.zeros((n - 1, n - 1))
    h[0, 1] = h[1, 0] = 0.5
    form = SecondFundamentalForm(h)
    g, gw = np.polynomial.legendre.leggauss(nodes)
    edges = np.array([0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 0.98, 0.995, 1.0])
    s = np.concatenate([lo + (hi - lo) * (g + 1) / 2 for lo, hi in zip(edges[:-1], edges[1:])])
    sw = np.concatenate([(hi - lo) / 2 * gw for lo, hi in zip(edges[:-1], edges[1:])])
    t = s / (1 - s)
    tw = sw / (1 - s) ** 2
    rr, xx = np.meshgrid(t, t, indexing="ij")
    ww = (np.outer(tw, tw) * rr ** (n - 2)).ravel()
    pts = np.zeros(rr.shape + (n,))
    pts[..., 0] = pts[..., 1] = rr / math.sqrt(2)
    pts[..., -1] = xx
    flat = pts.reshape(-1, n)
    E = forcing_Ep(params, form, flat)
    # the x~-sphere average of (x_1 x_2)^2 and division by ||h||^2 = 1/2
    scale = 4 * params.omega / ((n - 1) * (n + 1)) / 0.5
    w_part = scale * math.fsum(ww * E * wp_value(params, form, flat))
    M = interior_modes
    partials = psi.truncated(M).partial_values(flat, [M // 4, M // 2, M])
    p1, p2, p4 = (scale * beta(params) / (4 * n) * math.fsum(ww * E * v) for v in partials)
    psi_part = (4 * (2 * p4 - p2) - (2 * p2 - p1)) / 3
    return OracleResult(w_part + psi_part, w_part, psi_part, (p1, p2, p4))
