"""Uniform tensor grids on rectangular domains and nodal-field helpers.

Fields are stored node-wise as numpy arrays of shape (ny+1, nx+1) for
scalars and (ny+1, nx+1, 2) for vector fields, indexed [row=j, col=i]
with node coordinates (x0 + i*hx, y0 + j*hy).  Bulk integrals use one
midpoint value per cell obtained from the bilinear interpolant; cell
gradients use centered differences of the four corner values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TOL = 1e-9


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    """Uniform grid on the box (x0,x1) x (y0,y1) with nx*ny cells.

    Film grids cover omega x (-1, M+1) with omega = (0,L); the substrate
    band is omega x (-1,0).  Build them with :meth:`film`, which checks
    that the lines y=0 and y=M coincide with grid lines.  Plain boxes
    (void configurations, metric tests) use :meth:`box`.
    """

    x0: float
    x1: float
    y0: float
    y1: float
    nx: int
    ny: int
    film_cap: float | None = None  # M for film grids, None otherwise

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise GridError("need nx, ny >= 2")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise GridError("empty box")

    @classmethod
    def film(cls, L: float, M: float, nx: int, ny: int) -> "Grid":
        if L <= 0 or M <= 0:
            raise GridError("need L > 0 and M > 0")
        hy = (M + 2.0) / ny
        for y in (0.0, M):
            j = (y + 1.0) / hy
            if abs(j - round(j)) > _TOL:
                raise GridError(
                    f"line y={y} is not a grid line; pick ny so that both 0 "
                    f"and M={M} land on grid lines (e.g. ny a multiple of "
                    f"{_min_film_ny(M)})"
                )
        return cls(0.0, L, -1.0, M + 1.0, nx, ny, film_cap=M)

    @classmethod
    def box(cls, x0: float, x1: float, y0: float, y1: float, nx: int, ny: int) -> "Grid":
        return cls(x0, x1, y0, y1, nx, ny)

    # -- geometry ------------------------------------------------------

    @property
    def L(self) -> float:
        return self.x1 - self.x0

    @property
    def M(self) -> float:
        if self.film_cap is None:
            raise GridError("not a film grid")
        return self.film_cap

    @property
    def hx(self) -> float:
        return (self.x1 - self.x0) / self.nx

    @property
    def hy(self) -> float:
        return (self.y1 - self.y0) / self.ny

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    def xs(self) -> np.ndarray:
        return self.x0 + self.hx * np.arange(self.nx + 1)

    def ys(self) -> np.ndarray:
        return self.y0 + self.hy * np.arange(self.ny + 1)

    def node_shape(self) -> tuple[int, int]:
        return (self.ny + 1, self.nx + 1)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        xc = self.x0 + self.hx * (np.arange(self.nx) + 0.5)
        yc = self.y0 + self.hy * (np.arange(self.ny) + 0.5)
        return xc, yc

    # -- film-specific node bands --------------------------------------

    def substrate_rows(self) -> np.ndarray:
        """Indices j of node rows with y_j <= 0 (substrate band closure)."""
        return np.nonzero(self.ys() <= _TOL)[0]

    def top_rows(self) -> np.ndarray:
        """Indices j of node rows with y_j >= M (top band closure)."""
        return np.nonzero(self.ys() >= self.M - _TOL)[0]

    # -- field constructors --------------------------------------------

    def zeros_scalar(self) -> np.ndarray:
        return np.zeros(self.node_shape())

    def zeros_vector(self) -> np.ndarray:
        return np.zeros(self.node_shape() + (2,))

    def check_field(self, a: np.ndarray, components: int | None = None):
        want = self.node_shape() if components is None else self.node_shape() + (components,)
        if a.shape != want:
            raise GridError(f"field shape {a.shape} does not match grid {want}")


def _min_film_ny(M: float) -> int:
    # y_j = -1 + j*(M+2)/ny puts 0 and M on grid lines iff ny is a
    # multiple of the numerator of M+2 in lowest terms
    from fractions import Fraction

    return Fraction(M + 2).limit_denominator(10**6).numerator


def snap_film_ny(M: float, ny: int) -> int:
    """Smallest valid film-grid ny that is >= the requested one."""
    base = _min_film_ny(M)
    return int(np.ceil(ny / base)) * base


# -- cell-midpoint operators -------------------------------------------


def cell_average(a: np.ndarray) -> np.ndarray:
    """Bilinear interpolant at cell centers: mean of the 4 corners."""
    return 0.25 * (a[:-1, :-1] + a[:-1, 1:] + a[1:, :-1] + a[1:, 1:])


def cell_gradient(a: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Centered-difference gradient of a nodal scalar at cell centers."""
    ax = (a[:-1, 1:] + a[1:, 1:] - a[:-1, :-1] - a[1:, :-1]) / (2.0 * grid.hx)
    ay = (a[1:, :-1] + a[1:, 1:] - a[:-1, :-1] - a[:-1, 1:]) / (2.0 * grid.hy)
    return ax, ay


def cell_strain(u: np.ndarray, grid: Grid) -> np.ndarray:
    """Symmetric gradient of a nodal vector field at cell centers.

    Returns an (ny, nx, 3) array in the order (e_xx, e_yy, e_xy).
    """
    uxx, uxy = cell_gradient(u[:, :, 0], grid)
    uyx, uyy = cell_gradient(u[:, :, 1], grid)
    return np.stack([uxx, uyy, 0.5 * (uxy + uyx)], axis=-1)


# -- plain-text grid dumps ---------------------------------------------


def write_grid_dump(path, a: np.ndarray, grid: Grid):
    """Dump a nodal scalar field: header `# nx ny L M`, one row per line."""
    M = grid.film_cap if grid.film_cap is not None else grid.y1 - grid.y0
    with open(path, "w") as f:
        f.write(f"# {grid.nx} {grid.ny} {grid.L!r} {M!r}\n")
        for row in a:
            f.write(" ".join(repr(float(v)) for v in row) + "\n")


def read_grid_dump(path) -> tuple[np.ndarray, dict]:
    with open(path) as f:
        header = f.readline().strip()
        if not header.startswith("#"):
            raise GridError("missing header line")
        parts = header[1:].split()
        meta = {
            "nx": int(parts[0]),
            "ny": int(parts[1]),
            "L": float(parts[2]),
            "M": float(parts[3]),
        }
        a = np.loadtxt(f)
    if a.shape != (meta["ny"] + 1, meta["nx"] + 1):
        raise GridError("dump shape does not match header")
    return a, meta
