"""Bulk elastic energy densities with p-growth in the symmetrized gradient.

Two built-in families:

* ``hooke``   -- quadratic density  mu |e|^2 + lambda/2 tr(e)^2  (p = 2),
* ``ppow``    -- c |zeta^T + zeta|^p  for any exponent p > 1.

Both vanish at 0, are convex, depend only on the symmetric part of their
argument and satisfy the two-sided growth bound
c1 |zeta^T+zeta|^p <= f(zeta) <= c2 (|zeta^T+zeta|^p + 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DensityError(ValueError):
    pass


@dataclass(frozen=True)
class ElasticDensity:
    kind: str  # "hooke" | "ppow"
    p: float = 2.0
    mu: float = 1.0
    lam: float = 0.0
    c: float = 1.0

    def __post_init__(self):
        if self.p <= 1.0 or not np.isfinite(self.p):
            raise DensityError("exponent must satisfy p > 1")
        if self.kind == "hooke":
            if self.p != 2.0:
                raise DensityError("hooke form forces p = 2")
            if self.mu <= 0 or self.lam < 0:
                raise DensityError("need mu > 0 and lambda >= 0")
        elif self.kind == "ppow":
            if self.c <= 0:
                raise DensityError("need c > 0")
        else:
            raise DensityError(f"unknown density kind {self.kind!r}")

    @classmethod
    def hooke(cls, mu: float = 1.0, lam: float = 0.0) -> "ElasticDensity":
        return cls("hooke", p=2.0, mu=mu, lam=lam)

    @classmethod
    def ppow(cls, p: float, c: float = 1.0) -> "ElasticDensity":
        return cls("ppow", p=p, c=c)

    # -- evaluation ------------------------------------------------------

    def energy_voigt(self, strain: np.ndarray) -> np.ndarray:
        """Density at symmetric strains given as (..., 3) = (e_xx, e_yy, e_xy)."""
        exx, eyy, exy = strain[..., 0], strain[..., 1], strain[..., 2]
        if self.kind == "hooke":
            return self.mu * (exx**2 + eyy**2 + 2.0 * exy**2) + 0.5 * self.lam * (exx + eyy) ** 2
        frob2 = exx**2 + eyy**2 + 2.0 * exy**2
        return self.c * (4.0 * frob2) ** (self.p / 2.0)

    def hooke_voigt_matrix(self) -> np.ndarray:
        """3x3 matrix D with f = 1/2 eps^T D eps, eps = (e_xx, e_yy, 2 e_xy)."""
        if self.kind != "hooke":
            raise DensityError("voigt matrix only defined for the hooke form")
        m, l = self.mu, self.lam
        return np.array(
            [[2 * m + l, l, 0.0], [l, 2 * m + l, 0.0], [0.0, 0.0, m]]
        )


def eval_f(density: ElasticDensity, zeta: np.ndarray) -> float:
    """Density at an arbitrary (not necessarily symmetric) 2x2 matrix."""
    zeta = np.asarray(zeta, dtype=float)
    if zeta.shape != (2, 2) or not np.all(np.isfinite(zeta)):
        raise DensityError("zeta must be a finite 2x2 matrix")
    e = 0.5 * (zeta + zeta.T)
    return float(density.energy_voigt(np.array([e[0, 0], e[1, 1], e[0, 1]])))


def check_growth(
    density: ElasticDensity, sample_count: int = 1000, seed: int = 0
) -> tuple[float, float]:
    """Empirical growth constants (c1, c2) on random + axis-aligned samples.

    Returns the extreme values of the quotient f(zeta) / |s|^p over the
    sample directions, s = zeta^T + zeta, so that
    c1 |s|^p <= f(zeta) <= c2 (|s|^p + 1) holds at every scale for the
    p-homogeneous built-in families; homogeneity is checked on a dilated
    copy of each sample.
    """
    if sample_count < 1:
        raise DensityError("need sample_count >= 1")
    rng = np.random.default_rng(seed)
    mats = list(rng.standard_normal((sample_count, 2, 2)))
    mats += [np.eye(2), np.diag([1.0, -1.0]), np.array([[0.0, 1.0], [1.0, 0.0]])]
    c1 = np.inf
    c2 = 0.0
    for z in mats:
        s = z + z.T
        ns = float(np.sqrt(np.sum(s * s)))
        val = eval_f(density, z)
        if ns > 1e-12:
            ratio = val / ns**density.p
            c1 = min(c1, ratio)
            c2 = max(c2, ratio)
            # the built-in families are p-homogeneous in the symmetric part,
            # so direction samples bound all scales
            scaled = eval_f(density, 2.0 * z) / (2.0 * ns) ** density.p
            if abs(scaled - ratio) > 1e-8 * max(1.0, abs(ratio)):
                raise DensityError("density violates p-homogeneity")
    if not np.isfinite(c1) or c1 <= 0:
        raise DensityError("could not bound the density from below on the samples")
    return float(c1), float(c2)
