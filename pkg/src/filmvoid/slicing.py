"""One-dimensional sections of fields and sets, the slice functional, and
numerical checks of the Fubini and collapse lower-bound identities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import VoidSet, segment_box_clip
from .grid import Grid, cell_strain
from .surfnorm import SurfaceNorm, phi_dual
from .sharp import void_perimeter

_TOL = 1e-12


@dataclass(frozen=True)
class SliceLine:
    xi: tuple[float, float]  # unit direction
    y: tuple[float, float]  # base point on the hyperplane xi.y = 0

    def __post_init__(self):
        if abs(np.hypot(*self.xi) - 1.0) > 1e-9:
            raise ValueError("direction must be a unit vector")
        if abs(self.xi[0] * self.y[0] + self.xi[1] * self.y[1]) > 1e-9:
            raise ValueError("base point must lie on the hyperplane xi.y = 0")

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([self.y[0] + t * self.xi[0], self.y[1] + t * self.xi[1]], axis=-1)


@dataclass(frozen=True)
class Slice1D:
    """Sampled scalar section u(y + t xi) . xi with the set section of B."""

    t0: float
    t1: float
    ts: np.ndarray
    vals: np.ndarray
    sections: tuple[tuple[float, float], ...]  # B along the line, merged

    def is_empty(self) -> bool:
        return self.ts.size == 0


def _line_box_interval(line: SliceLine, grid: Grid):
    t0, t1 = -np.inf, np.inf
    for k, (lo, hi) in enumerate(((grid.x0, grid.x1), (grid.y0, grid.y1))):
        p, d = line.y[k], line.xi[k]
        if abs(d) < _TOL:
            if not (lo - _TOL <= p <= hi + _TOL):
                return None
        else:
            ta, tb = (lo - p) / d, (hi - p) / d
            t0 = max(t0, min(ta, tb))
            t1 = min(t1, max(ta, tb))
    if t1 - t0 <= _TOL:
        return None
    return t0, t1


def _bilinear_sample(a: np.ndarray, grid: Grid, pts: np.ndarray) -> np.ndarray:
    gx = np.clip((pts[..., 0] - grid.x0) / grid.hx, 0.0, grid.nx - 1e-12)
    gy = np.clip((pts[..., 1] - grid.y0) / grid.hy, 0.0, grid.ny - 1e-12)
    i = np.floor(gx).astype(int)
    j = np.floor(gy).astype(int)
    fx = gx - i
    fy = gy - j
    return (
        a[j, i] * (1 - fx) * (1 - fy)
        + a[j, i + 1] * fx * (1 - fy)
        + a[j + 1, i] * (1 - fx) * fy
        + a[j + 1, i + 1] * fx * fy
    )


def take_slice(
    u: np.ndarray, B: VoidSet, grid: Grid, xi, y, step: float | None = None
) -> Slice1D:
    """Section of u . xi along the line y + t xi, with B's parameter intervals.

    The scalar section is sampled by bilinear interpolation; the set
    section comes from exact line/void intersection.
    """
    line = SliceLine(tuple(float(c) for c in xi), tuple(float(c) for c in y))
    iv = _line_box_interval(line, grid)
    if iv is None:
        return Slice1D(0.0, 0.0, np.empty(0), np.empty(0), ())
    t0, t1 = iv
    if step is None:
        step = 0.5 * min(grid.hx, grid.hy)
    n = max(2, int(np.ceil((t1 - t0) / step)) + 1)
    ts = np.linspace(t0, t1, n)
    pts = line.point(ts)
    vals = _bilinear_sample(u[:, :, 0], grid, pts) * line.xi[0] + _bilinear_sample(
        u[:, :, 1], grid, pts
    ) * line.xi[1]
    secs = [
        (max(a, t0), min(b, t1))
        for a, b in B.line_sections(np.asarray(line.y), np.asarray(line.xi))
        if min(b, t1) - max(a, t0) > _TOL
    ]
    return Slice1D(t0, t1, ts, vals, tuple(secs))


def _complement(t0, t1, sections):
    out = []
    cur = t0
    for a, b in sections:
        if a - cur > _TOL:
            out.append((cur, a))
        cur = max(cur, b)
    if t1 - cur > _TOL:
        out.append((cur, t1))
    return out


def F_eps_xi(sl: Slice1D, eps: float, p: float, dual_value: float) -> float:
    """Slice functional: eps * int |v'|^p off the set section, plus the
    number of section endpoints interior to the parameter interval divided
    by the dual norm value."""
    if eps <= 0 or p <= 1 or dual_value <= 0:
        raise ValueError("need eps > 0, p > 1 and a positive dual value")
    if sl.is_empty():
        return 0.0
    grad_part = 0.0
    for a, b in _complement(sl.t0, sl.t1, sl.sections):
        m = max(1, int(np.ceil((b - a) / max(np.mean(np.diff(sl.ts)), 1e-12))))
        tt = np.linspace(a, b, m + 1)
        vv = np.interp(tt, sl.ts, sl.vals)
        dv = np.abs(np.diff(vv) / np.diff(tt)) ** p
        grad_part += float(np.sum(dv * np.diff(tt)))
    count = sum(
        1
        for a, b in sl.sections
        for endpoint in (a, b)
        if sl.t0 + 1e-9 < endpoint < sl.t1 - 1e-9
    )
    return eps * grad_part + count / dual_value


def _line_fan(grid: Grid, xi, spacing: float):
    """Midpoint fan of parallel lines with direction xi covering the box."""
    xi = np.asarray(xi, dtype=float)
    perp = np.array([-xi[1], xi[0]])
    corners = np.array(
        [[grid.x0, grid.y0], [grid.x1, grid.y0], [grid.x0, grid.y1], [grid.x1, grid.y1]]
    )
    c = corners @ perp
    cmin, cmax = float(np.min(c)), float(np.max(c))
    n = int(np.ceil((cmax - cmin) / spacing))
    offsets = cmin + spacing * (np.arange(n) + 0.5)
    return [tuple(o * perp) for o in offsets]


def fubini_residual(
    u: np.ndarray,
    B: VoidSet,
    grid: Grid,
    xi,
    eps: float,
    p: float,
    norm: SurfaceNorm,
    line_spacing: float,
    step: float | None = None,
) -> tuple[float, float, float]:
    """(lhs, rhs, |lhs - rhs|) for the direction-wise slicing identity.

    lhs sums the slice functional over a midpoint fan of lines; rhs is the
    bulk quadrature of eps |e(u) xi . xi|^p off B plus the anisotropic
    crossing weight of the void boundary.
    """
    xi = np.asarray(xi, dtype=float)
    dual = phi_dual(norm, xi)
    lhs = 0.0
    for y in _line_fan(grid, xi, line_spacing):
        sl = take_slice(u, B, grid, xi, y, step=step)
        lhs += F_eps_xi(sl, eps, p, dual) * line_spacing

    strain = cell_strain(u, grid)
    exixi = (
        strain[..., 0] * xi[0] ** 2
        + strain[..., 1] * xi[1] ** 2
        + 2.0 * strain[..., 2] * xi[0] * xi[1]
    )
    w = 1.0 - B.cell_fractions(grid)
    bulk = float(np.sum(np.abs(exixi) ** p * w) * grid.cell_area)
    surf = 0.0
    for s in B.boundary_segments():
        nu = np.asarray(s.nu)
        surf += abs(nu @ xi) / dual * segment_box_clip(s, grid)
    rhs = eps * bulk + surf
    return lhs, rhs, abs(lhs - rhs)


def collapse_lowerbound_check(
    configs,
    limit_cracks,
    limit_void: VoidSet,
    norm: SurfaceNorm,
    tol: float = 1e-9,
) -> dict:
    """Surface lower-bound report for a collapsing sequence of void sets.

    The limit surface (cracks counted twice plus the limit void perimeter)
    must not exceed the liminf of the sharp perimeters along the sequence.
    """
    lhs = float(sum(2.0 * float(norm(np.asarray(s.nu))) * s.length for s in limit_cracks))
    grid = configs[0].grid if configs else None
    if grid is not None and not limit_void.is_empty():
        lhs += void_perimeter(limit_void, grid, norm)
    surfaces = [void_perimeter(cfg.void, cfg.grid, norm) for cfg in configs]
    gaps = [s - lhs for s in surfaces]
    return {
        "limit_surface": lhs,
        "surfaces": surfaces,
        "gaps": gaps,
        "ok": (not gaps) or gaps[-1] >= -tol,
    }
