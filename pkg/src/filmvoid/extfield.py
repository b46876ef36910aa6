"""Fields with a tagged infinity state and the bounded metric they carry.

A point value is either a vector in R^2 or the single point "infinity".
Values are mapped onto the unit sphere S^2 by the inverse stereographic
projection psi (infinity -> north pole) and compared with the chordal
distance |psi(a) - psi(b)|, which is bounded by 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, cell_average


@dataclass(frozen=True)
class ExtendedField:
    """Nodal field with values in R^2 or infinity.

    ``values`` holds finite vectors where ``finite`` is True; entries under
    a False mask are ignored (the value there is infinity).
    """

    values: np.ndarray  # (ny+1, nx+1, 2)
    finite: np.ndarray  # (ny+1, nx+1) bool

    def __post_init__(self):
        if self.values.shape[:2] != self.finite.shape or self.values.shape[-1] != 2:
            raise ValueError("values/finite shape mismatch")
        if not np.all(np.isfinite(self.values[self.finite])):
            raise ValueError("non-finite entries under a finite mask")

    @classmethod
    def finite_field(cls, u: np.ndarray) -> "ExtendedField":
        u = np.asarray(u, dtype=float)
        return cls(u, np.ones(u.shape[:2], dtype=bool))

    @classmethod
    def infinite_on(cls, u: np.ndarray, mask: np.ndarray) -> "ExtendedField":
        """Field equal to u off ``mask`` and infinity on it."""
        u = np.array(u, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        u[mask] = 0.0  # placeholder under the mask
        return cls(u, ~mask)


def stereographic(field: ExtendedField) -> np.ndarray:
    """Inverse stereographic image on S^2, shape (ny+1, nx+1, 3).

    psi(u) = (2u, |u|^2 - 1) / (|u|^2 + 1) and psi(infinity) = (0,0,1).
    """
    u = field.values
    n2 = u[..., 0] ** 2 + u[..., 1] ** 2
    denom = n2 + 1.0
    out = np.empty(u.shape[:2] + (3,))
    out[..., 0] = 2.0 * u[..., 0] / denom
    out[..., 1] = 2.0 * u[..., 1] / denom
    out[..., 2] = (n2 - 1.0) / denom
    out[~field.finite] = (0.0, 0.0, 1.0)
    return out


def dbar(u: ExtendedField, w: ExtendedField, grid: Grid) -> float:
    """Integral over the grid box of the chordal distance between u and w.

    Cell values are the bilinear (4-corner) averages of the nodal
    distances.  Symmetric, zero iff the fields agree nodewise, and
    bounded by 2 * area.
    """
    grid.check_field(u.values, 2)
    grid.check_field(w.values, 2)
    d = np.linalg.norm(stereographic(u) - stereographic(w), axis=-1)
    return float(np.sum(cell_average(d)) * grid.cell_area)
