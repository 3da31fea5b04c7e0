"""Polynomials in n variables and closed-form calculus for fields P(x) * denom(x)^{-s}."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ProblemParams, denom


@dataclass(frozen=True)
class Polynomial:
    """Sparse polynomial: mapping from exponent tuples to coefficients."""

    n: int
    terms: tuple[tuple[tuple[int, ...], float], ...]

    @classmethod
    def from_dict(cls, n: int, terms: dict) -> "Polynomial":
        merged: dict[tuple[int, ...], float] = {}
        for exps, c in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != n:
                raise ValueError("exponent tuple has wrong length")
            merged[exps] = merged.get(exps, 0.0) + float(c)
        return cls(n, tuple(sorted((e, c) for e, c in merged.items() if c != 0.0)))

    @classmethod
    def monomial(cls, n: int, *indices: int, coeff: float = 1.0) -> "Polynomial":
        """Product of the 0-based coordinates listed in ``indices``."""
        e = [0] * n
        for i in indices:
            e[i] += 1
        return cls.from_dict(n, {tuple(e): coeff})

    @classmethod
    def constant(cls, n: int, c: float) -> "Polynomial":
        return cls.from_dict(n, {(0,) * n: c})

    def __add__(self, other: "Polynomial") -> "Polynomial":
        d = dict(self.terms)
        for e, c in other.terms:
            d[e] = d.get(e, 0.0) + c
        return Polynomial.from_dict(self.n, d)

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial.from_dict(self.n, {e: c * other for e, c in self.terms})
        d: dict = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = d.get(e, 0.0) + c1 * c2
        return Polynomial.from_dict(self.n, d)

    __rmul__ = __mul__

    def derivative(self, i: int) -> "Polynomial":
        d: dict = {}
        for e, c in self.terms:
            if e[i] > 0:
                e2 = list(e)
                e2[i] -= 1
                d[tuple(e2)] = d.get(tuple(e2), 0.0) + c * e[i]
        return Polynomial.from_dict(self.n, d)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for e, c in self.terms:
            term = np.full(x.shape[:-1], c)
            for i, p in enumerate(e):
                if p:
                    term = term * x[..., i] ** p
            out = out + term
        return out

    def gradient(self, x) -> np.ndarray:
        return np.stack([self.derivative(i)(x) for i in range(self.n)], axis=-1)

    def hessian(self, x) -> np.ndarray:
        rows = []
        for i in range(self.n):
            di = self.derivative(i)
            rows.append(np.stack([di.derivative(j)(x) for j in range(self.n)], axis=-1))
        return np.stack(rows, axis=-2)

    def laplacian(self, x) -> np.ndarray:
        return sum(self.derivative(i).derivative(i)(x) for i in range(self.n))


def quadratic_form(h: np.ndarray, n: int) -> Polynomial:
    """sum_{ij} h_ij x_i x_j over the tangential coordinates."""
    q = Polynomial.constant(n, 0.0)
    m = h.shape[0]
    for i in range(m):
        for j in range(m):
            if h[i, j] != 0.0:
                q = q + Polynomial.monomial(n, i, j, coeff=h[i, j])
    return q


@dataclass(frozen=True)
class RationalField:
    """f(x) = P(x) * denom(x)^{-s}; derivatives in closed form."""

    params: ProblemParams
    poly: Polynomial
    s: float

    def _shift(self, x):
        y = np.array(x, dtype=float, copy=True)
        y[..., -1] += self.params.D
        return y

    def value(self, x) -> np.ndarray:
        return self.poly(x) * denom(self.params, x) ** (-self.s)

    def gradient(self, x) -> np.ndarray:
        d = denom(self.params, x)
        y = self._shift(x)
        s = self.s
        P = self.poly(x)[..., None]
        return (self.poly.gradient(x) * d[..., None] ** (-s)
                - 2 * s * P * y * d[..., None] ** (-s - 1))

    def hessian(self, x) -> np.ndarray:
        d = denom(self.params, x)[..., None, None]
        y = self._shift(x)
        s, n = self.s, self.params.n
        P = self.poly(x)[..., None, None]
        gP = self.poly.gradient(x)
        g_grad = -2 * s * y[..., :, None] * d ** (-s - 1)
        eye = np.eye(n)
        g_hess = -2 * s * eye * d ** (-s - 1) + 4 * s * (s + 1) * y[..., :, None] * y[..., None, :] * d ** (-s - 2)
        cross = gP[..., :, None] * np.swapaxes(g_grad, -1, -2) + g_grad * gP[..., None, :]
        return self.poly.hessian(x) * d ** (-s) + cross + P * g_hess

    def laplacian(self, x) -> np.ndarray:
        d = denom(self.params, x)
        y = self._shift(x)
        s, n = self.s, self.params.n
        P = self.poly(x)
        ysq = np.sum(y * y, axis=-1)
        lap_g = -2 * s * n * d ** (-s - 1) + 4 * s * (s + 1) * ysq * d ** (-s - 2)
        grad_dot = np.sum(self.poly.gradient(x) * y, axis=-1)
        return self.poly.laplacian(x) * d ** (-s) - 4 * s * grad_dot * d ** (-s - 1) + P * lap_g


def central_difference_gradient(f, x, step=None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    h = 1e-5 * (1 + np.linalg.norm(x)) if step is None else step
    out = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        out[i] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def central_difference_laplacian(f, x, step=None) -> float:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    h = 1e-3 * (1 + np.linalg.norm(x)) if step is None else step
    f0 = f(x)
    total = 0.0
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        # fourth-order stencil
        total += (-f(x + 2 * e) + 16 * f(x + e) - 30 * f0 + 16 * f(x - e) - f(x - 2 * e)) / (12 * h * h)
    return float(total)
