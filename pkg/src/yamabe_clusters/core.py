"""Problem parameters and shared scalar quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln


class PreconditionError(ValueError):
    """Raised when inputs violate a hypothesis of the model (maps to CLI exit 2)."""


def sphere_area(d: int | float) -> float:
    """Surface area of the unit sphere S^{d-1} sitting in R^d."""
    return 2.0 * math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d))


@dataclass(frozen=True)
class ProblemParams:
    n: int
    K: float
    H: float
    D: float = field(init=False)
    c_n: float = field(init=False)
    alpha_n: float = field(init=False)
    crit_exp: float = field(init=False)
    trace_exp: float = field(init=False)
    omega: float = field(init=False)

    def __post_init__(self) -> None:
        n = self.n
        if n < 3:
            raise PreconditionError(f"dimension n={n} must be at least 3")
        if not self.K < 0:
            raise PreconditionError(f"scalar curvature K={self.K} must be negative (K<0 hypothesis)")
        if not self.H > 0:
            raise PreconditionError(f"boundary mean curvature H={self.H} must be positive (H>0 hypothesis)")
        object.__setattr__(self, "D", math.sqrt(n * (n - 1)) * self.H / math.sqrt(abs(self.K)))
        object.__setattr__(self, "c_n", 4.0 * (n - 1) / (n - 2))
        object.__setattr__(self, "alpha_n", (4.0 * n * (n - 1)) ** ((n - 2) / 4.0))
        object.__setattr__(self, "crit_exp", 2.0 * n / (n - 2))
        object.__setattr__(self, "trace_exp", 2.0 * (n - 1) / (n - 2))
        object.__setattr__(self, "omega", sphere_area(n - 1))

    @property
    def supercritical(self) -> bool:
        """True when D > 1, the regime where bubbles exist."""
        return self.D > 1.0

    @property
    def amplitude(self) -> float:
        """Prefactor alpha_n |K|^{-(n-2)/4} of the standard bubble."""
        return self.alpha_n / abs(self.K) ** ((self.n - 2) / 4.0)

    def require_supercritical(self) -> None:
        if not self.supercritical:
            raise PreconditionError(
                f"D={self.D:.6g} must exceed 1 (bubbling regime); increase H or decrease |K|"
            )


def make_params(n: int, K: float, H: float) -> ProblemParams:
    return ProblemParams(int(n), float(K), float(H))


def params_from_D(n: int, D: float, K: float = -1.0) -> ProblemParams:
    """Build parameters with a prescribed D at curvature K."""
    H = D * math.sqrt(abs(K)) / math.sqrt(n * (n - 1))
    return make_params(n, K, H)


@dataclass(frozen=True)
class SecondFundamentalForm:
    h: np.ndarray

    def __post_init__(self) -> None:
        h = np.array(self.h, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise PreconditionError("second fundamental form must be a square matrix")
        if not np.allclose(h, h.T, atol=1e-14):
            raise PreconditionError("second fundamental form must be symmetric")
        if abs(np.trace(h)) > 1e-12 * max(1.0, np.abs(h).max()):
            raise PreconditionError("second fundamental form must be trace-free")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def norm_sq(self) -> float:
        """Full Frobenius sum of squares over all index pairs."""
        return float(np.sum(self.h ** 2))

    @property
    def upper_norm_sq(self) -> float:
        """Sum of squares over i<j only; the normalisation used for the n=4 log rate."""
        return float(np.sum(np.triu(self.h, 1) ** 2))


def off_diagonal_form(dim: int, value: float = 1.0 / math.sqrt(2.0), i: int = 0, j: int = 1) -> SecondFundamentalForm:
    h = np.zeros((dim, dim))
    h[i, j] = h[j, i] = value
    return SecondFundamentalForm(h)


@dataclass(frozen=True)
class HessianForm:
    Q: np.ndarray

    def __post_init__(self) -> None:
        Q = np.array(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or not np.allclose(Q, Q.T):
            raise PreconditionError("Hessian form must be a symmetric square matrix")
        if np.linalg.eigvalsh(Q).min() <= 0:
            raise PreconditionError("Hessian form must be positive definite (non-degenerate minimum)")
        Q.setflags(write=False)
        object.__setattr__(self, "Q", Q)


def denom(params: ProblemParams, x) -> np.ndarray:
    """|x~|^2 + (x_n + D)^2 - 1 for points x of shape (..., n)."""
    x = np.asarray(x, dtype=float)
    return np.sum(x[..., :-1] ** 2, axis=-1) + (x[..., -1] + params.D) ** 2 - 1.0
