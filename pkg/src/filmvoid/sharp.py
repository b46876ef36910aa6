"""Sharp and relaxed energies for film and void configurations.

The film energy integrates the elastic density over the region below the
profile and adds the graph length; its relaxed form prices interior
vertical cuts twice, after propagating them up to the graph.  The void
energy integrates over the complement of the void and adds the
anisotropic perimeter; its relaxed form adds internal cracks at twice
their anisotropic length, and the Dirichlet variant charges boundary
detachment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elasticity import ElasticDensity
from .geometry import (
    Profile,
    Segment,
    VoidSet,
    merge_intervals,
    segment_box_clip,
    subgraph_cell_fractions,
)
from .grid import Grid, cell_strain
from .surfnorm import SurfaceNorm

_TOL = 1e-9


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------------
# configurations
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class FilmConfig:
    grid: Grid
    profile: Profile
    u: np.ndarray  # nodal displacement, zero above the graph
    cuts: tuple[Segment, ...] = ()
    u0: np.ndarray | None = None  # substrate datum on the full grid (rows y<=0 used)

    def __post_init__(self):
        self.grid.check_field(self.u, 2)
        if self.grid.film_cap is None:
            raise ConfigError("film configurations need a film grid")
        lo, hi = self.profile.domain()
        if abs(lo - self.grid.x0) > _TOL or abs(hi - self.grid.x1) > _TOL:
            raise ConfigError("profile domain must match omega")

    def validate(self):
        g = self.grid
        xs, ys = np.meshgrid(g.xs(), g.ys())
        h = self.profile.value(xs[0])
        above = ys > h[None, :] + _TOL
        if np.any(np.abs(self.u[above]) > _TOL):
            raise ConfigError("displacement must vanish strictly above the graph")
        if self.u0 is not None:
            rows = g.substrate_rows()
            if not np.allclose(self.u[rows], self.u0[rows], atol=1e-9):
                raise ConfigError("displacement must match the substrate datum")
        for s in self.cuts:
            for pt in (s.a, s.b):
                if pt[1] > self.profile.lower_value(pt[0]) + 1e-6:
                    raise ConfigError("cut leaves the closed subgraph")


@dataclass(frozen=True)
class VoidConfig:
    grid: Grid
    void: VoidSet
    u: np.ndarray
    jumps: tuple[Segment, ...] = ()
    dirichlet_edges: tuple[tuple[str, float, float], ...] = ()  # (side, lo, hi)
    u0: np.ndarray | None = None
    trace_tol: float | None = None

    def __post_init__(self):
        self.grid.check_field(self.u, 2)
        for side, lo, hi in self.dirichlet_edges:
            if side not in ("left", "right", "bottom", "top") or hi <= lo:
                raise ConfigError("bad Dirichlet edge")

    def validate(self):
        g = self.grid
        xs, ys = np.meshgrid(g.xs(), g.ys())
        pts = np.stack([xs, ys], axis=-1)
        inside = self.void.contains(pts)
        if np.any(np.abs(self.u[inside]) > _TOL):
            raise ConfigError("displacement must vanish on the void")


# ----------------------------------------------------------------------
# film energies
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class FilmEnergy:
    bulk: float
    graph_surface: float
    cut_surface: float
    note: str = ""

    @property
    def total(self) -> float:
        return self.bulk + self.graph_surface + self.cut_surface

    def row(self, label: str) -> str:
        return f"{label},{self.bulk!r},{self.graph_surface!r},{self.cut_surface!r},{self.total!r}"


def film_bulk(cfg: FilmConfig, density: ElasticDensity) -> float:
    """Elastic energy over the film region 0 < y < h(x), exact cell fractions."""
    g = cfg.grid
    fr = subgraph_cell_fractions(cfg.profile, g)
    _, yc = g.cell_centers()
    fr = np.where((yc > 0)[:, None], fr, 0.0)  # y=0 is a grid line
    f = density.energy_voigt(cell_strain(cfg.u, g))
    return float(np.sum(f * fr) * g.cell_area)


def energy_G(cfg: FilmConfig, density: ElasticDensity) -> FilmEnergy:
    """Sharp film energy: smooth profile, no cuts."""
    if cfg.profile.kind != "smooth":
        raise ConfigError("sharp film energy needs a smooth profile (use energy_G_relaxed)")
    if cfg.cuts:
        raise ConfigError("sharp film energy admits no cuts (use energy_G_relaxed)")
    cfg.validate()
    return FilmEnergy(film_bulk(cfg, density), cfg.profile.graph_surface(), 0.0)


def vertical_extension(cuts, profile: Profile):
    """Propagate vertical cuts up to the graph; non-vertical input is flagged.

    Returns (extended segments, infinite) where ``infinite`` reports that
    some segment was not vertical, so its upward shadow fills a
    two-dimensional region of infinite length.
    """
    out = []
    for s in cuts:
        if not s.is_vertical():
            return [], True
        x = 0.5 * (s.a[0] + s.b[0])
        lo = min(s.a[1], s.b[1])
        top = profile.lower_value(x)
        if top > lo + _TOL:
            out.append(Segment.vertical(x, lo, top))
    return out, False


def energy_G_relaxed(cfg: FilmConfig, density: ElasticDensity) -> FilmEnergy:
    """Relaxed film energy: generalized graph length plus doubled cuts."""
    cfg.validate()
    ext, infinite = vertical_extension(cfg.cuts, cfg.profile)
    if infinite:
        return FilmEnergy(
            np.inf, np.inf, np.inf, note="non-vertical cut: upward extension has infinite length"
        )
    cut_surface = 2.0 * sum(s.length for s in ext)
    return FilmEnergy(film_bulk(cfg, density), cfg.profile.graph_surface(), cut_surface)


# ----------------------------------------------------------------------
# void energies
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class VoidEnergy:
    bulk: float
    void_surface: float
    crack_surface: float
    dirichlet_void: float = 0.0
    dirichlet_mismatch: float = 0.0

    @property
    def total(self) -> float:
        return (
            self.bulk
            + self.void_surface
            + self.crack_surface
            + self.dirichlet_void
            + self.dirichlet_mismatch
        )

    def row(self, label: str) -> str:
        return f"{label},{self.bulk!r},{self.void_surface!r},{self.crack_surface!r},{self.total!r}"


def void_bulk(cfg: VoidConfig, density: ElasticDensity) -> float:
    g = cfg.grid
    fr = 1.0 - cfg.void.cell_fractions(g)
    f = density.energy_voigt(cell_strain(cfg.u, g))
    return float(np.sum(f * fr) * g.cell_area)


def void_perimeter(void: VoidSet, grid: Grid, norm: SurfaceNorm) -> float:
    """Anisotropic perimeter of the void inside the open box."""
    return float(
        sum(norm(np.asarray(s.nu)) * segment_box_clip(s, grid) for s in void.boundary_segments())
    )


def _crack_length_outside(seg: Segment, void: VoidSet) -> float:
    """Length of the segment off the closed void; interior overlap is an error."""
    if void.is_empty():
        return seg.length
    a = np.asarray(seg.a)
    d = np.asarray(seg.b) - a
    sections = void.line_sections(a, d)
    covered = 0.0
    for t0, t1 in sections:
        t0, t1 = max(t0, 0.0), min(t1, 1.0)
        if t1 - t0 <= _TOL:
            continue
        mid = a + 0.5 * (t0 + t1) * d
        if void.contains(mid[None])[0]:
            raise ConfigError("jump segment runs strictly inside the void")
        covered += t1 - t0  # portion along the void boundary: not counted
    return float(seg.length * (1.0 - covered))


def energy_F(cfg: VoidConfig, density: ElasticDensity, norm: SurfaceNorm) -> VoidEnergy:
    """Sharp void energy; requires a crack-free configuration."""
    if cfg.jumps:
        raise ConfigError("sharp void energy admits no jump set (use energy_F_relaxed)")
    cfg.validate()
    return VoidEnergy(void_bulk(cfg, density), void_perimeter(cfg.void, cfg.grid, norm), 0.0)


def energy_F_relaxed(cfg: VoidConfig, density: ElasticDensity, norm: SurfaceNorm) -> VoidEnergy:
    """Relaxed void energy: perimeter plus cracks counted twice."""
    cfg.validate()
    crack = 2.0 * sum(
        float(norm(np.asarray(s.nu))) * _crack_length_outside(s, cfg.void) for s in cfg.jumps
    )
    return VoidEnergy(void_bulk(cfg, density), void_perimeter(cfg.void, cfg.grid, norm), crack)


# ----------------------------------------------------------------------
# Dirichlet variant
# ----------------------------------------------------------------------

_SIDE_NORMALS = {
    "left": (-1.0, 0.0),
    "right": (1.0, 0.0),
    "bottom": (0.0, -1.0),
    "top": (0.0, 1.0),
}


def _void_contact_intervals(void: VoidSet, grid: Grid, side: str):
    """Intervals along a box side where the void closure touches it."""
    out = []
    coord = {"left": grid.x0, "right": grid.x1, "bottom": grid.y0, "top": grid.y1}[side]
    axis = 0 if side in ("left", "right") else 1
    for (x0, x1, y0, y1) in void.rects:
        lohi = (x0, x1) if axis == 1 else (y0, y1)
        flush = (x0, x1, y0, y1)[2 * axis] if side in ("left", "bottom") else (x0, x1, y0, y1)[2 * axis + 1]
        if abs(flush - coord) < _TOL:
            out.append(lohi)
    if void.polygon:
        n = len(void.polygon)
        for i in range(n):
            (xa, ya), (xb, yb) = void.polygon[i], void.polygon[(i + 1) % n]
            fixed = (xa, xb) if axis == 0 else (ya, yb)
            run = (ya, yb) if axis == 0 else (xa, xb)
            if abs(fixed[0] - coord) < _TOL and abs(fixed[1] - coord) < _TOL:
                out.append((min(run), max(run)))
    return merge_intervals(out)


def _overlap(a0, a1, ivals) -> float:
    return sum(max(0.0, min(a1, b1) - max(a0, b0)) for b0, b1 in ivals)


def energy_FDir_relaxed(
    cfg: VoidConfig, density: ElasticDensity, norm: SurfaceNorm
) -> VoidEnergy:
    """Relaxed void energy with Dirichlet boundary terms.

    Adds the anisotropic length of void boundary on the Dirichlet part,
    and twice the weighted length of the Dirichlet part (off the void)
    where the nodal boundary trace detaches from the datum.
    """
    base = energy_F_relaxed(cfg, density, norm)
    if not cfg.dirichlet_edges:
        return base
    if cfg.u0 is None:
        raise ConfigError("Dirichlet edges need a datum u0")
    g = cfg.grid
    tol = cfg.trace_tol
    if tol is None:
        tol = 1e-9 * float(np.max(np.abs(cfg.u0))) + 1e-12

    d_void = 0.0
    d_mis = 0.0
    mism = np.max(np.abs(cfg.u - cfg.u0), axis=-1) > tol
    for side, lo, hi in cfg.dirichlet_edges:
        _check_edge_on_boundary(g, side, lo, hi)
        nu_omega = np.asarray(_SIDE_NORMALS[side])
        contact = _void_contact_intervals(cfg.void, g, side)
        # the void normal on a flush piece is the outward normal of the box
        d_void += norm(nu_omega) * _overlap(lo, hi, contact)
        # walk the grid boundary edges on this side
        if side in ("left", "right"):
            coords = g.ys()
            line = mism[:, 0] if side == "left" else mism[:, -1]
        else:
            coords = g.xs()
            line = mism[0, :] if side == "bottom" else mism[-1, :]
        for k in range(len(coords) - 1):
            a, b = coords[k], coords[k + 1]
            seg_lo, seg_hi = max(a, lo), min(b, hi)
            if seg_hi - seg_lo <= _TOL:
                continue
            if line[k] and line[k + 1]:
                free = (seg_hi - seg_lo) - _overlap(seg_lo, seg_hi, contact)
                d_mis += 2.0 * float(norm(nu_omega)) * free
    return VoidEnergy(base.bulk, base.void_surface, base.crack_surface, float(d_void), float(d_mis))


def _check_edge_on_boundary(grid: Grid, side: str, lo: float, hi: float):
    span = (grid.y0, grid.y1) if side in ("left", "right") else (grid.x0, grid.x1)
    if lo < span[0] - _TOL or hi > span[1] + _TOL:
        raise ConfigError("Dirichlet edge leaves the domain boundary")
