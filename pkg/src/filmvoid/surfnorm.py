"""Anisotropic surface densities: norms on R^2, their duals, and the
sampled dual-representation residual  phi(nu) = max_xi |nu.xi| / phi*(xi).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class NormError(ValueError):
    pass


@dataclass(frozen=True)
class SurfaceNorm:
    """Norm family on R^2.

    kind:
      "euclid"  -- |nu|
      "lq"      -- || diag(w) nu ||_q  with q in [1, inf], w > 0
      "matrix"  -- || A nu ||_2 with A invertible
      "custom"  -- arbitrary callable (dual by angular sampling only)
    """

    kind: str
    q: float = 2.0
    weights: tuple[float, float] = (1.0, 1.0)
    A: tuple[tuple[float, float], tuple[float, float]] | None = None
    fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind == "lq":
            if not (self.q >= 1.0):
                raise NormError("need q >= 1")
            if min(self.weights) <= 0:
                raise NormError("weights must be positive")
        elif self.kind == "matrix":
            A = np.asarray(self.A, dtype=float)
            if A.shape != (2, 2) or abs(np.linalg.det(A)) < 1e-14:
                raise NormError("A must be an invertible 2x2 matrix")
        elif self.kind == "custom":
            if self.fn is None:
                raise NormError("custom norm needs a callable")
        elif self.kind != "euclid":
            raise NormError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def euclidean(cls) -> "SurfaceNorm":
        return cls("euclid")

    @classmethod
    def lq(cls, q: float, weights=(1.0, 1.0)) -> "SurfaceNorm":
        return cls("lq", q=q, weights=tuple(float(w) for w in weights))

    @classmethod
    def matrix(cls, A) -> "SurfaceNorm":
        A = np.asarray(A, dtype=float)
        return cls("matrix", A=((A[0, 0], A[0, 1]), (A[1, 0], A[1, 1])))

    def __call__(self, nu: np.ndarray) -> np.ndarray:
        """phi(nu), vectorized over trailing shape (..., 2)."""
        nu = np.asarray(nu, dtype=float)
        if self.kind == "euclid":
            return np.sqrt(nu[..., 0] ** 2 + nu[..., 1] ** 2)
        if self.kind == "lq":
            w = np.asarray(self.weights)
            z = np.abs(nu) * w
            if np.isinf(self.q):
                return np.max(z, axis=-1)
            return (z[..., 0] ** self.q + z[..., 1] ** self.q) ** (1.0 / self.q)
        if self.kind == "matrix":
            A = np.asarray(self.A)
            z = nu @ A.T
            return np.sqrt(z[..., 0] ** 2 + z[..., 1] ** 2)
        return np.asarray(self.fn(nu), dtype=float)

    def has_analytic_dual(self) -> bool:
        return self.kind in ("euclid", "lq", "matrix")

    def dual_analytic(self, xi: np.ndarray) -> np.ndarray:
        """phi*(xi) in closed form for the euclid / lq / matrix families."""
        xi = np.asarray(xi, dtype=float)
        if self.kind == "euclid":
            return np.sqrt(xi[..., 0] ** 2 + xi[..., 1] ** 2)
        if self.kind == "lq":
            w = np.asarray(self.weights)
            z = np.abs(xi) / w
            if np.isinf(self.q):
                return z[..., 0] + z[..., 1]
            if self.q == 1.0:
                return np.max(z, axis=-1)
            qd = self.q / (self.q - 1.0)
            return (z[..., 0] ** qd + z[..., 1] ** qd) ** (1.0 / qd)
        if self.kind == "matrix":
            Ait = np.linalg.inv(np.asarray(self.A)).T
            z = xi @ Ait.T
            return np.sqrt(z[..., 0] ** 2 + z[..., 1] ** 2)
        raise NormError("no analytic dual for this family")


def unit_circle(n: int) -> np.ndarray:
    th = 2.0 * np.pi * np.arange(n) / n
    return np.stack([np.cos(th), np.sin(th)], axis=-1)


def phi_dual(norm: SurfaceNorm, xi: np.ndarray, angular_samples: int = 720) -> float:
    """phi*(xi) = max_nu (nu.xi)/phi(nu); analytic where available."""
    xi = np.asarray(xi, dtype=float)
    if norm.has_analytic_dual():
        return float(norm.dual_analytic(xi))
    if angular_samples < 8:
        raise NormError("need angular_samples >= 8")
    nus = unit_circle(angular_samples)
    vals = norm(nus)
    if np.any(vals <= 0):
        raise NormError("degenerate norm: phi vanishes on the unit circle")
    return float(np.max((nus @ xi) / vals))


def dual_norm_residual(norm: SurfaceNorm, nu: np.ndarray, angular_samples: int = 720) -> float:
    """| phi(nu) - max over sampled xi of |nu.xi| / phi*(xi) |.

    The sampled max never exceeds phi(nu), so the residual is the sampling
    gap of the dual-representation identity and shrinks as the angular
    resolution grows.
    """
    nu = np.asarray(nu, dtype=float)
    xis = unit_circle(angular_samples)
    if norm.has_analytic_dual():
        duals = norm.dual_analytic(xis)
    else:
        duals = np.array([phi_dual(norm, xi, angular_samples) for xi in xis])
    recovered = np.max(np.abs(xis @ nu) / duals)
    return float(abs(float(norm(nu)) - recovered))
