"""Special integrals I_m^alpha, phi_m, phi_hat_m, half-space moments, and a
deterministic adaptive Gauss-Kronrod integrator used as the independent oracle."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .core import PreconditionError, ProblemParams

# Kronrod 15-point nodes/weights on [-1, 1] with the embedded 7-point Gauss rule.
_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_WEIGHTS_K = np.concatenate([_WK[:-1], _WK[::-1]])
_WEIGHTS_G = np.zeros(15)
_WEIGHTS_G[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


class QuadratureError(RuntimeError):
    def __init__(self, message: str, best: "QuadratureResult"):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


def _panel(f, a: float, b: float):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    fx = np.asarray(f(c + h * _NODES), dtype=float)
    k = h * math.fsum(_WEIGHTS_K * fx)
    g = h * math.fsum(_WEIGHTS_G * fx)
    return k, abs(k - g)


def adaptive_integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-12,
    rel_tol: float = 0.0,
    max_panels: int = 20000,
    breakpoints: tuple[float, ...] = (),
    graded: bool = False,
) -> QuadratureResult:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature of a vectorised integrand.

    An infinite upper limit is compactified through t = a + s/(1-s).  With
    ``graded`` the first panels cluster geometrically toward ``a`` so that
    near-singular behaviour at the left end is resolved from the start.
    Panels are refined worst-first with ties broken by position, so the result
    is a deterministic function of the inputs.
    """
    if math.isinf(a):
        raise ValueError("lower limit must be finite")
    g = f
    lo, hi = a, b
    if math.isinf(b):
        def g(s, _f=f, _a=a):
            s = np.asarray(s, dtype=float)
            one = 1.0 - s
            with np.errstate(divide="ignore", invalid="ignore"):
                out = _f(_a + s / one) / one ** 2
            return np.where(one > 0, out, 0.0)
        lo, hi = 0.0, 1.0
        breakpoints = tuple(p / (1.0 + p) for p in breakpoints)
    edges = [lo, *sorted(p for p in breakpoints if lo < p < hi), hi]
    if graded:
        width = hi - lo
        extra = [lo + width * 10.0 ** (-k) for k in range(1, 9)]
        edges = sorted(set(edges + [e for e in extra if lo < e < hi]))
    heap = []
    evaluations = 0
    for left, right in zip(edges[:-1], edges[1:]):
        val, err = _panel(g, left, right)
        evaluations += 15
        heap.append((-err, left, right, val))
    heapq.heapify(heap)
    while True:
        total = math.fsum(item[3] for item in heap)
        err_total = math.fsum(-item[0] for item in heap)
        if err_total <= max(tol, rel_tol * abs(total)):
            return QuadratureResult(total, err_total, evaluations)
        if len(heap) >= max_panels:
            raise QuadratureError(
                f"adaptive quadrature did not converge (estimate {total}, error {err_total})",
                QuadratureResult(total, err_total, evaluations),
            )
        neg_err, left, right, _ = heapq.heappop(heap)
        mid = 0.5 * (left + right)
        if not left < mid < right:
            raise QuadratureError(
                "interval subdivision reached floating-point resolution",
                QuadratureResult(total, err_total, evaluations),
            )
        for l2, r2 in ((left, mid), (mid, right)):
            val, err = _panel(g, l2, r2)
            evaluations += 15
            heapq.heappush(heap, (-err, l2, r2, val))


def integrate(f, a, b, rel_tol: float = 1e-11, tol: float = 0.0, **kw) -> float:
    """Convenience wrapper returning only the value."""
    return adaptive_integrate(f, a, b, tol=tol, rel_tol=rel_tol, **kw).value


# --- closed-form special integrals -------------------------------------------------

def i_integral(m: float, alpha: float) -> float:
    """I_m^alpha = int_0^inf rho^alpha / (1+rho^2)^m drho via the Beta function."""
    if not m > 0 or alpha < 0:
        raise PreconditionError(f"I_m^alpha needs m>0 and alpha>=0 (got m={m}, alpha={alpha})")
    if alpha + 1 >= 2 * m:
        raise PreconditionError(f"I_m^alpha diverges for alpha+1 >= 2m (m={m}, alpha={alpha})")
    return 0.5 * math.exp(gammaln((alpha + 1) / 2) + gammaln(m - (alpha + 1) / 2) - gammaln(m))


def _check_D(D: float) -> None:
    if not D > 1:
        raise PreconditionError(f"D={D} must exceed 1")


def phi(m: float, D: float) -> float:
    """phi_m(D) = int_D^inf (t^2-1)^{-m} dt."""
    if m <= 0.5:
        raise PreconditionError(f"phi_m diverges for m <= 1/2 (m={m})")
    _check_D(D)
    # factor (t-1)^{-m}(t+1)^{-m} to keep precision near t = D close to 1
    f = lambda t: ((t - 1.0) * (t + 1.0)) ** (-m)
    return adaptive_integrate(f, D, math.inf, tol=0.0, rel_tol=1e-14, graded=True).value


def phi_hat(m: float, D: float) -> float:
    """phi_hat_m(D) = int_D^inf (t-D)^2 (t^2-1)^{-m} dt."""
    if m <= 1.5:
        raise PreconditionError(f"phi_hat_m diverges for m <= 3/2 (m={m})")
    _check_D(D)
    f = lambda t: (t - D) ** 2 * ((t - 1.0) * (t + 1.0)) ** (-m)
    return adaptive_integrate(f, D, math.inf, tol=0.0, rel_tol=1e-14, graded=True).value


def phi_three_halves(D: float) -> float:
    """Closed form of phi_{3/2}."""
    _check_D(D)
    return D / math.sqrt(D * D - 1.0) - 1.0


def half_space_moment(params: ProblemParams, alpha: float, m: float) -> float:
    """int_{R^n_+} |x~|^alpha / denom^m dx in closed form."""
    n, D = params.n, params.D
    if not n + alpha < 2 * m:
        raise PreconditionError("half-space moment diverges unless n + alpha < 2m")
    return params.omega * i_integral(m, n - 2 + alpha) * phi((2 * m - n - alpha + 1) / 2, D)


def boundary_moment(params: ProblemParams, alpha: float, m: float) -> float:
    """int_{R^{n-1}} |x~|^alpha / (|x~|^2 + D^2 - 1)^m dx~ in closed form."""
    n, D = params.n, params.D
    if not n - 1 + alpha < 2 * m:
        raise PreconditionError("boundary moment diverges unless n - 1 + alpha < 2m")
    _check_D(D)
    return params.omega * (D * D - 1) ** ((n + alpha - 1 - 2 * m) / 2) * i_integral(m, n - 2 + alpha)


def weighted_moment(params: ProblemParams, alpha: float, m: float) -> float:
    """int_{R^n_+} x_n^2 |x~|^alpha / denom^m dx in closed form."""
    n, D = params.n, params.D
    if not n + 2 + alpha < 2 * m:
        raise PreconditionError("weighted moment diverges unless n + 2 + alpha < 2m")
    return params.omega * i_integral(m, n - 2 + alpha) * phi_hat((2 * m - n - alpha + 1) / 2, D)


# --- nested-quadrature oracles -------------------------------------------------------

def _radial_slice(params: ProblemParams, alpha: float, m: float, lam_sq: float) -> float:
    """omega * int_0^inf r^{n-2+alpha} / (r^2 + lam_sq)^m dr, by quadrature."""
    p = params.n - 2 + alpha
    scale = math.sqrt(lam_sq)
    f = lambda r: r ** p / (r * r + lam_sq) ** m
    return params.omega * integrate(f, 0.0, math.inf, rel_tol=1e-12, breakpoints=(scale,))


def half_space_moment_oracle(params: ProblemParams, alpha: float, m: float, weight_power: int = 0) -> float:
    """Nested quadrature: radial slice in x~ for each x_n, then integrate in x_n."""
    D = params.D

    def outer(xs):
        return np.array([
            x ** weight_power * _radial_slice(params, alpha, m, (x + D) ** 2 - 1.0) for x in np.atleast_1d(xs)
        ])

    return integrate(outer, 0.0, math.inf, rel_tol=1e-10, breakpoints=(1.0,))


def boundary_moment_oracle(params: ProblemParams, alpha: float, m: float) -> float:
    return _radial_slice(params, alpha, m, params.D ** 2 - 1.0)


# --- identity suites -------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityCheck:
    name: str
    lhs: float
    rhs: float

    @property
    def rel_error(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.lhs), abs(self.rhs), 1e-300)


def i_integral_oracle(m: float, alpha: float) -> float:
    """I_m^alpha by adaptive quadrature."""
    return integrate(lambda r: r ** alpha / (1 + r * r) ** m, 0.0, math.inf, rel_tol=1e-13, breakpoints=(1.0,))


def recursion_suite(n_values=range(4, 11)) -> list[IdentityCheck]:
    """The three one-step recursions of I_m^alpha on an admissible grid and the
    chain linking I_n^n, I_n^{n-2}, I_{n-1}^{n-2}, I_{n-2}^{n-2} to I_{n-1}^n."""
    I = i_integral
    out = []
    for m in (1.5, 2.0, 2.5, 3.0, 4.0, 5.5, 7.0):
        for alpha in (0.0, 1.0, 2.0, 3.0, 4.5):
            if alpha + 3 < 2 * m:
                out.append(IdentityCheck(f"I[{m},{alpha}] = 2m/(a+1) I[m+1,a+2]", I(m, alpha),
                                         2 * m / (alpha + 1) * I(m + 1, alpha + 2)))
                out.append(IdentityCheck(f"I[{m},{alpha}] = 2m/(2m-a-1) I[m+1,a]", I(m, alpha),
                                         2 * m / (2 * m - alpha - 1) * I(m + 1, alpha)))
                out.append(IdentityCheck(f"I[{m},{alpha}] = (2m-a-3)/(a+1) I[m,a+2]", I(m, alpha),
                                         (2 * m - alpha - 3) / (alpha + 1) * I(m, alpha + 2)))
    for n in n_values:
        base = I(n - 1, n)
        out += [
            IdentityCheck(f"n={n}: I[n,n] = I[n,n-2]", I(n, n), I(n, n - 2)),
            IdentityCheck(f"n={n}: I[n,n] = (n-3)/(2(n-1)) I[n-1,n]", I(n, n), (n - 3) / (2 * (n - 1)) * base),
            IdentityCheck(f"n={n}: I[n-1,n-2] = (n-3)/(n-1) I[n-1,n]", I(n - 1, n - 2), (n - 3) / (n - 1) * base),
            IdentityCheck(f"n={n}: I[n-2,n-2] = 2(n-2)/(n-1) I[n-1,n]", I(n - 2, n - 2),
                          2 * (n - 2) / (n - 1) * base),
        ]
    return out


def varphi_identities(n: int, D: float) -> list[IdentityCheck]:
    """phi_{(n+1)/2} and phi_{(n-1)/2} in terms of the next lower index, plus the
    phi_hat reduction, each side by independent quadrature.

    At n = 4 the second identity would need phi_{1/2}, which diverges; the
    closed form of phi_{3/2} is checked instead.
    """
    out = [IdentityCheck(
        f"n={n}, D={D}: phi[(n+1)/2]",
        phi((n + 1) / 2, D),
        D / ((n - 1) * (D * D - 1) ** ((n - 1) / 2)) - (n - 2) / (n - 1) * phi((n - 1) / 2, D),
    )]
    if n >= 5:
        out.append(IdentityCheck(
            f"n={n}, D={D}: phi[(n-1)/2]",
            phi((n - 1) / 2, D),
            D / ((n - 3) * (D * D - 1) ** ((n - 3) / 2)) - (n - 4) / (n - 3) * phi((n - 3) / 2, D),
        ))
    else:
        out.append(IdentityCheck(f"n={n}, D={D}: phi[3/2] closed form", phi(1.5, D), phi_three_halves(D)))
    m = (n + 1) / 2
    out.append(IdentityCheck(
        f"n={n}, D={D}: phi_hat[(n+1)/2]",
        phi_hat(m, D),
        phi(m - 1, D) + (D * D + 1) * phi(m, D) - D / ((m - 1) * (D * D - 1) ** (m - 1)),
    ))
    return out
