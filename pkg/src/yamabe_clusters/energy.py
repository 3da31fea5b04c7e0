"""Energy constants of a single building block and of the cluster interaction,
their quadrature oracles, the cancellation identities, and the n = 4 log-rate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import PreconditionError, ProblemParams, SecondFundamentalForm
from .correction import delta_order_terms, f_constants, wbar0_field
from .quadrature import (
    boundary_moment_oracle,
    half_space_moment_oracle,
    i_integral,
    phi,
    phi_hat,
    phi_three_halves,
)


def _require(params: ProblemParams, n_min: int = 4) -> None:
    if params.n < n_min:
        raise PreconditionError(f"needs n >= {n_min} (got n={params.n})")
    params.require_supercritical()


def _kpow(params: ProblemParams) -> float:
    """|K|^{(n-2)/2}."""
    return abs(params.K) ** ((params.n - 2) / 2)


def pi_norm_sq(h: SecondFundamentalForm, n: int) -> float:
    """Norm of the trace-free form as it enters the expansion: Frobenius for n >= 5,
    upper-triangle sum for n = 4 (the convention matching the log-rate)."""
    return h.upper_norm_sq if n == 4 else h.norm_sq


def const_a(params: ProblemParams) -> float:
    n = params.n
    _require(params)
    return (params.alpha_n ** params.trace_exp * params.omega * i_integral(n - 1, n)
            * (n - 3) / ((n - 1) * math.sqrt(n * (n - 1))))


def const_E(params: ProblemParams, phi_index: float | None = None) -> float:
    """Bubble energy a_n |K|^{-(n-2)/2} [-(n-1) phi_{(n+1)/2} + D/(D^2-1)^{(n-1)/2}].

    ``phi_index`` overrides the subscript (used only to test the alternative
    reading phi_{(n-1)/2} against the oracle).
    """
    n, D = params.n, params.D
    idx = (n + 1) / 2 if phi_index is None else phi_index
    return const_a(params) / _kpow(params) * (-(n - 1) * phi(idx, D) + D / (D * D - 1) ** ((n - 1) / 2))


def const_E_oracle(params: ProblemParams) -> float:
    """-(1/n)|K| int U^{2*} + H int_bdry U^{2#}, each integral by nested quadrature."""
    _require(params)
    n, A = params.n, params.amplitude
    interior = A ** params.crit_exp * half_space_moment_oracle(params, 0.0, n)
    boundary = A ** params.trace_exp * boundary_moment_oracle(params, 0.0, n - 1)
    return -abs(params.K) / n * interior + params.H * boundary


def const_c(params: ProblemParams) -> float:
    n, D = params.n, params.D
    _require(params)
    return (2 * (n - 2) * params.omega * params.alpha_n ** 2 * i_integral(n - 1, n)
            / (_kpow(params) * (D * D - 1) ** ((n - 3) / 2)))


def const_c_oracle(params: ProblemParams) -> float:
    """(n-1) int_{R^{n-1}} U(x~, 0)^2 dx~ by radial quadrature."""
    _require(params)
    n = params.n
    return (n - 1) * params.amplitude ** 2 * boundary_moment_oracle(params, 0.0, n - 2)


def const_b_curvature_part(params: ProblemParams) -> float:
    """The part of b_n that does not involve f_n (n >= 5)."""
    n, D = params.n, params.D
    return ((n - 2) / (n - 1) * params.alpha_n ** 2 * params.omega * i_integral(n - 1, n) / _kpow(params)
            * (4 * (n - 3) * phi_hat((n - 1) / 2, D) + phi((n - 3) / 2, D)))


def const_b(params: ProblemParams, f_n: float | None = None) -> float:
    """b_n = f_n/2 + curvature part for n >= 5; b_4 = (192 pi^2 + alpha_4^2 omega_3 I_3^4)/|K|."""
    _require(params)
    n = params.n
    if n == 4:
        if f_n is not None:
            raise PreconditionError("f_n is not defined for n = 4")
        return (192 * math.pi ** 2 + params.alpha_n ** 2 * params.omega * i_integral(3, 4)) / abs(params.K)
    if f_n is None:
        raise PreconditionError("b_n for n >= 5 needs f_n")
    return 0.5 * f_n + const_b_curvature_part(params)


def const_d_h(params: ProblemParams) -> tuple[float, float]:
    """d_n = alpha^{2*} omega I_{(n+2)/2}^{n-2};  h_n = 2(n-1) alpha^{2#} omega I_{n/2}^{n-2}/sqrt(n(n-1))."""
    n = params.n
    if n < 4:
        raise PreconditionError("needs n >= 4")
    d = params.alpha_n ** params.crit_exp * params.omega * i_integral((n + 2) / 2, n - 2)
    h = (2 * (n - 1) * params.alpha_n ** params.trace_exp * params.omega * i_integral(n / 2, n - 2)
         / math.sqrt(n * (n - 1)))
    return d, h


def interaction_coefficient(params: ProblemParams) -> float:
    _require(params)
    return const_d_h(params)[0] / _kpow(params)


@dataclass(frozen=True)
class InteractionOracle:
    interior: float
    boundary: float

    @property
    def total(self) -> float:
        return self.interior + self.boundary


def interaction_oracle(params: ProblemParams) -> InteractionOracle:
    """Leading interaction terms assembled by quadrature.

    interior: (alpha_n/|K|^{(n-2)/4}) K int U^{2*-1}   (negative)
    boundary: 2(n-1) (alpha_n/|K|^{(n-2)/4}) H int_bdry U^{2#-1}
    Their sum equals d_n/|K|^{(n-2)/2} when d_n = h_n.
    """
    _require(params)
    n, A = params.n, params.amplitude
    interior = A * params.K * A ** (params.crit_exp - 1) * half_space_moment_oracle(params, 0.0, (n + 2) / 2)
    boundary = (2 * (n - 1) * A * params.H * A ** (params.trace_exp - 1)
                * boundary_moment_oracle(params, 0.0, n / 2))
    return InteractionOracle(interior, boundary)


def interaction_closed_parts(params: ProblemParams) -> InteractionOracle:
    """-d_n phi_{3/2}/|K|^{(n-2)/2} and h_n D/(sqrt(D^2-1) |K|^{(n-2)/2})."""
    d, h = const_d_h(params)
    D = params.D
    return InteractionOracle(-d * phi_three_halves(D) / _kpow(params), h * D / math.sqrt(D * D - 1) / _kpow(params))


@dataclass(frozen=True)
class CancellationResult:
    ric_residual: float
    rbar_residual: float
    rbar_residual_alt_base: float
    delta_order_residual: float
    delta_order_terms: tuple[float, float]


def cancellation_checks(params: ProblemParams, h: SecondFundamentalForm | None = None) -> CancellationResult:
    """The curvature-term identity 2 phi_{(n-3)/2} - (n-3)(n-1) phi_hat_{(n+1)/2} = 0,
    the scalar-curvature identity with base (D^2-1) (and the (D-1) variant for
    comparison), and the delta-order balance of w_p."""
    _require(params, 5)
    n, D = params.n, params.D
    ric = 2 * phi((n - 3) / 2, D) - (n - 3) * (n - 1) * phi_hat((n + 1) / 2, D)
    head = -(n - 4) * phi((n - 3) / 2, D) - (n - 3) * phi((n - 1) / 2, D)
    rbar = head + D / (D * D - 1) ** ((n - 3) / 2)
    rbar_alt = head + D / (D - 1) ** ((n - 3) / 2)
    if h is None:
        hm = np.zeros((n - 1, n - 1))
        hm[0, 1] = hm[1, 0] = 1 / math.sqrt(2)
        h = SecondFundamentalForm(hm)
    interior, boundary = delta_order_terms(params, h)
    return CancellationResult(ric, rbar, rbar_alt, interior - boundary, (interior, boundary))


# --- n = 4 logarithmic rate ------------------------------------------------------------

def _panel_nodes(edges, order: int):
    g, w = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(lo + (hi - lo) * (g + 1) / 2)
        ws.append((hi - lo) / 2 * w)
    return np.concatenate(xs), np.concatenate(ws)


def _geometric_edges(L: float, first: float = 0.25, ratio: float = 2.0) -> list[float]:
    edges = [0.0, first]
    while edges[-1] * ratio < L:
        edges.append(edges[-1] * ratio)
    edges.append(L)
    return edges


def _unit_pair_energy(params4: ProblemParams, half_width: float, order: int) -> float:
    """int over [-L, L]^3 x [0, L] of |grad g|^2 for g = x_4 x_1 x_2/denom^2.

    g is odd in x_1 and x_2 and even in x_3, so |grad g|^2 is even in every
    tangential coordinate and only the positive orthant is sampled.
    """
    D = params4.D
    x, wx = _panel_nodes(_geometric_edges(half_width), order)
    X2, X3, X4 = np.meshgrid(x, x, x, indexing="ij")
    W = wx[:, None, None] * wx[None, :, None] * wx[None, None, :]
    base = X2 ** 2 + X3 ** 2 + (X4 + D) ** 2 - 1
    total = []
    for x1, w1 in zip(x, wx):
        d = base + x1 * x1
        inv2 = 1 / (d * d)
        inv3 = inv2 / d
        q = x1 * X2
        g1 = X4 * X2 * inv2 - 4 * X4 * q * x1 * inv3
        g2 = X4 * x1 * inv2 - 4 * X4 * q * X2 * inv3
        g3 = -4 * X4 * q * X3 * inv3
        g4 = q * inv2 - 4 * X4 * q * (X4 + D) * inv3
        total.append(w1 * math.fsum((W * (g1 * g1 + g2 * g2 + g3 * g3 + g4 * g4)).ravel()))
    return 8.0 * math.fsum(total)


def cube_gradient_energy(params4: ProblemParams, h: SecondFundamentalForm, half_width: float,
                         order: int = 6) -> float:
    """int over Q^+ = [-L, L]^3 x [0, L] of |grad w-bar|^2.

    w-bar = sum_{i<j} 2 M_ij x_4 x_i x_j/denom^2.  Gradients of different pairs
    are orthogonal in L^2 of the symmetric cube (the cross terms are odd in some
    tangential coordinate) and all pairs give the same energy by permutation of
    the tangential axes, so the energy is sum_{i<j} (2 M_ij)^2 times the energy
    of the unit pair, computed by tensor Gauss-Legendre on geometric panels.
    """
    wbar0_field(params4, h)  # validates n and the shape of h
    M = 2 * h.h * params4.amplitude
    pair_weight = sum((2 * M[i, j]) ** 2 for i in range(3) for j in range(i + 1, 3))
    return pair_weight * _unit_pair_energy(params4, half_width, order)


def cube_gradient_energy_direct(params4: ProblemParams, h: SecondFundamentalForm, half_width: float,
                                order: int = 6) -> float:
    """The same integral over the full tangential cube without the pair reduction (slow; cross-check)."""
    w = wbar0_field(params4, h)
    xp, wp = _panel_nodes(_geometric_edges(half_width), order)
    x = np.concatenate([-xp[::-1], xp])
    wx = np.concatenate([wp[::-1], wp])
    X2, X3, X4 = np.meshgrid(x, x, xp, indexing="ij")
    W = wx[:, None, None] * wx[None, :, None] * wp[None, None, :]
    total = []
    for x1, w1 in zip(x, wx):
        g = w.gradient(np.stack([np.full(X2.shape, x1), X2, X3, X4], axis=-1))
        total.append(w1 * math.fsum((W * np.sum(g * g, axis=-1)).ravel()))
    return math.fsum(total)


@dataclass(frozen=True)
class RateResult:
    slope: float
    expected: float
    energies: tuple[float, ...]
    deltas: tuple[float, ...]

    @property
    def rel_error(self) -> float:
        return abs(self.slope - self.expected) / abs(self.expected)


def grad_w0_rate(params4: ProblemParams, h: SecondFundamentalForm, deltas=(1e-3, 1e-4),
                 R: float = 1.0, order: int = 6) -> RateResult:
    """Slope of Q_delta = int_{Q^+_{R/(2 delta)}} |grad w-bar|^2 against |ln delta|.

    The expected slope is (64 pi^2/|K|) ||pi||^2 with ||pi||^2 the sum of
    h_ij^2 over i < j, the normalisation in which the displayed profile gives
    this rate.
    """
    if params4.n != 4:
        raise PreconditionError("the logarithmic rate is an n = 4 statement")
    deltas = tuple(sorted(deltas, reverse=True))
    if len(deltas) < 2 or deltas[0] > 1e-2:
        raise PreconditionError("need at least two deltas, all <= 1e-2")
    energies = tuple(float(cube_gradient_energy(params4, h, R / (2 * d), order)) for d in deltas)
    logs = np.array([abs(math.log(d)) for d in deltas])
    slope = float(np.polyfit(logs, np.array(energies), 1)[0])
    expected = 64 * math.pi ** 2 / abs(params4.K) * h.upper_norm_sq
    return RateResult(slope, expected, energies, deltas)


# --- building block and constant bundle ---------------------------------------------

def zeta(n: int, delta: float) -> float:
    return delta * delta * abs(math.log(delta)) if n == 4 else delta * delta


def building_block_energy(E: float, b: float, c: float, pi_norm_sq: float, n: int, delta: float, eps: float) -> float:
    """Leading order E - zeta_n(delta) b ||pi||^2 + eps delta c."""
    if delta < 0 or eps < 0:
        raise PreconditionError("delta and eps must be nonnegative")
    z = zeta(n, delta) if delta > 0 else 0.0
    return E - z * b * pi_norm_sq + eps * delta * c


@dataclass(frozen=True)
class EnergyConstants:
    n: int
    a_n: float
    E: float
    b_n: float
    c_n_const: float
    d_n: float
    h_n: float
    f_n: float | None
    provenance: dict = field(default_factory=dict)


def assemble_constants(params: ProblemParams, f_n: float | None = None) -> EnergyConstants:
    """Closed-form constants; f_n from the psi mode solve when n >= 5 and not supplied."""
    _require(params)
    n = params.n
    prov = {k: "closed_form" for k in ("a_n", "E", "c_n_const", "d_n", "h_n")}
    if n >= 5 and f_n is None:
        f_n = f_constants(params).f_n
        prov["f_n"] = "quadrature"
    elif n >= 5:
        prov["f_n"] = "supplied"
    prov["b_n"] = "closed_form" if n == 4 else "closed_form+f_n"
    d, hh = const_d_h(params)
    return EnergyConstants(
        n=n, a_n=const_a(params), E=const_E(params), b_n=const_b(params, f_n if n >= 5 else None),
        c_n_const=const_c(params), d_n=d, h_n=hh, f_n=f_n, provenance=prov,
    )
