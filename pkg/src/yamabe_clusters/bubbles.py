"""Standard bubbles on the half-space, the linearised kernel, and PDE residuals.

The outward normal of the half-space is -e_n, so a normal derivative is
minus the x_n derivative on {x_n = 0}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import PreconditionError, ProblemParams, denom
from .fields import Polynomial, RationalField


@dataclass(frozen=True)
class Bubble:
    params: ProblemParams
    delta: float = 1.0
    center: np.ndarray = field(default=None)  # tangential coordinates of the boundary concentration point

    def __post_init__(self) -> None:
        self.params.require_supercritical()
        if not self.delta > 0:
            raise PreconditionError("bubble width delta must be positive")
        c = np.zeros(self.params.n - 1) if self.center is None else np.asarray(self.center, dtype=float)
        if c.shape != (self.params.n - 1,):
            raise PreconditionError("bubble center must have n-1 tangential coordinates")
        object.__setattr__(self, "center", c)

    def _rescale(self, x):
        x = np.asarray(x, dtype=float)
        y = np.concatenate([self.center, [0.0]])
        return (x - y) / self.delta


def standard_profile(params: ProblemParams) -> RationalField:
    """U(x) = alpha_n |K|^{-(n-2)/4} denom^{-(n-2)/2}."""
    n = params.n
    return RationalField(params, Polynomial.constant(n, params.amplitude), (n - 2) / 2)


def bubble_value(b: Bubble, x) -> np.ndarray:
    n = b.params.n
    scale = b.delta ** (-(n - 2) / 2)
    return scale * standard_profile(b.params).value(b._rescale(x))


def bubble_derivatives(b: Bubble, x) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and Laplacian of U_{delta,y} at x."""
    n = b.params.n
    U = standard_profile(b.params)
    z = b._rescale(x)
    scale = b.delta ** (-(n - 2) / 2)
    return scale * U.gradient(z) / b.delta, scale * U.laplacian(z) / b.delta ** 2


def interior_residual(b: Bubble, x, exponent_shift: float = 0.0) -> np.ndarray:
    """-c_n Delta U - K U^{(n+2)/(n-2) + shift}.  A nonzero shift is a negative control."""
    p = b.params
    u = bubble_value(b, x)
    _, lap = bubble_derivatives(b, x)
    return -p.c_n * lap - p.K * u ** ((p.n + 2) / (p.n - 2) + exponent_shift)


def interior_scale(b: Bubble, x) -> np.ndarray:
    """Magnitude used to turn the interior residual into a relative one."""
    p = b.params
    u = bubble_value(b, x)
    _, lap = bubble_derivatives(b, x)
    return np.abs(p.c_n * lap) + np.abs(p.K * u ** ((p.n + 2) / (p.n - 2)))


def _boundary_points(n: int, x_tilde) -> np.ndarray:
    xt = np.atleast_2d(np.asarray(x_tilde, dtype=float))
    return np.concatenate([xt, np.zeros((xt.shape[0], 1))], axis=1)


def boundary_residual(b: Bubble, x_tilde) -> np.ndarray:
    """(2/(n-2)) dU/dnu - H U^{n/(n-2)} on {x_n = 0}."""
    p = b.params
    x = _boundary_points(p.n, x_tilde)
    grad, _ = bubble_derivatives(b, x)
    u = bubble_value(b, x)
    return (2 / (p.n - 2)) * (-grad[..., -1]) - p.H * u ** (p.n / (p.n - 2))


def boundary_scale(b: Bubble, x_tilde) -> np.ndarray:
    p = b.params
    x = _boundary_points(p.n, x_tilde)
    u = bubble_value(b, x)
    return 2 * p.H * u ** (p.n / (p.n - 2))


def kernel_field(params: ProblemParams, i: int) -> RationalField:
    """Kernel element z_i of the linearised operator (1-based index i).

    For i < n this is dU/dx_i; for i = n it is the dilation generator
    ((n-2)/2) A (|x|^2 + 1 - D^2) denom^{-n/2}.
    """
    n = params.n
    if not 1 <= i <= n:
        raise PreconditionError(f"kernel index must lie in 1..{n}")
    A = params.amplitude
    if i < n:
        poly = Polynomial.monomial(n, i - 1, coeff=A * (2 - n))
    else:
        sq = Polynomial.constant(n, 1.0 - params.D ** 2)
        for k in range(n):
            sq = sq + Polynomial.monomial(n, k, k)
        poly = sq * (A * (n - 2) / 2)
    return RationalField(params, poly, n / 2)


def kernel_value(params: ProblemParams, i: int, x) -> np.ndarray:
    params.require_supercritical()
    return kernel_field(params, i).value(x)


def kernel_value_generator_form(params: ProblemParams, x) -> np.ndarray:
    """z_n written as ((2-n)/2)U - grad U.(x + D e_n) + D dU/dx_n."""
    n = params.n
    U = standard_profile(params)
    x = np.asarray(x, dtype=float)
    y = x.copy()
    y[..., -1] += params.D
    g = U.gradient(x)
    return (2 - n) / 2 * U.value(x) - np.sum(g * y, axis=-1) + params.D * g[..., -1]


def linearized_residuals(params: ProblemParams, i: int, x, field_override: RationalField | None = None):
    """Interior and boundary residuals of the linearised problem for v = z_i.

    ``x`` is a batch of interior points; the boundary residual is evaluated at
    their projections onto {x_n = 0}.  Returns (interior, boundary,
    interior_scale, boundary_scale).
    """
    params.require_supercritical()
    n, K, H = params.n, params.K, params.H
    v = kernel_field(params, i) if field_override is None else field_override
    U = standard_profile(params)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    u = U.value(x)
    pot = (n + 2) / (n - 2) * K * u ** (4 / (n - 2))
    lap = v.laplacian(x)
    val = v.value(x)
    interior = -params.c_n * lap - pot * val
    interior_mag = np.abs(params.c_n * lap) + np.abs(pot * val)
    xb = x.copy()
    xb[:, -1] = 0.0
    ub = U.value(xb)
    vb = v.value(xb)
    dnu = -v.gradient(xb)[:, -1]
    bpot = n / (n - 2) * H * ub ** (2 / (n - 2))
    boundary = 2 / (n - 2) * dnu - bpot * vb
    boundary_mag = np.abs(2 / (n - 2) * dnu) + np.abs(bpot * vb)
    return interior, boundary, interior_mag, boundary_mag


def sample_points(n: int, count: int, seed: int = 0, radius: float = 3.0) -> np.ndarray:
    """Quasi-random points in the half-space (scrambled Halton, fixed seed)."""
    from scipy.stats import qmc

    u = qmc.Halton(d=n, scramble=True, seed=seed).random(count)
    pts = (2 * u - 1) * radius
    pts[:, -1] = np.abs(pts[:, -1])
    return pts
