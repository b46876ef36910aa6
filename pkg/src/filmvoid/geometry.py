"""Film profiles, jump segments and void sets, with the exact
piecewise-linear area computations used by the bulk quadratures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_TOL = 1e-12


class GeometryError(ValueError):
    pass


# ----------------------------------------------------------------------
# profiles
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    """Film height h: (0,L) -> [0,M].

    Two representations:

    * smooth -- nodal values on a uniform x-grid, read piecewise-linearly;
    * bv     -- contiguous linear pieces (xa, xb, ha, hb) whose endpoint
      mismatches at interior breakpoints are jumps of the profile.
    """

    kind: str  # "smooth" | "bv"
    xs: np.ndarray | None = None
    hs: np.ndarray | None = None
    pieces: tuple[tuple[float, float, float, float], ...] = ()
    cap: float = np.inf

    def __post_init__(self):
        if self.kind == "smooth":
            if self.xs is None or self.hs is None or len(self.xs) != len(self.hs):
                raise GeometryError("smooth profile needs matching xs/hs")
            if np.any(np.diff(self.xs) <= 0):
                raise GeometryError("xs must be strictly increasing")
        elif self.kind == "bv":
            if not self.pieces:
                raise GeometryError("bv profile needs at least one piece")
            for (xa, xb, _, _) in self.pieces:
                if xb <= xa:
                    raise GeometryError("degenerate piece")
            for (_, xb, _, _), (xa2, _, _, _) in zip(self.pieces, self.pieces[1:]):
                if abs(xb - xa2) > _TOL:
                    raise GeometryError("pieces must be contiguous")
        else:
            raise GeometryError(f"unknown profile kind {self.kind!r}")
        lo, hi = self.range()
        if lo < -1e-9 or (np.isfinite(self.cap) and hi > self.cap + 1e-9):
            raise GeometryError("profile leaves [0, M]")

    @classmethod
    def smooth(cls, xs, hs, cap: float = np.inf) -> "Profile":
        return cls("smooth", xs=np.asarray(xs, dtype=float), hs=np.asarray(hs, dtype=float), cap=cap)

    @classmethod
    def flat(cls, L: float, height: float, n: int = 2, cap: float = np.inf) -> "Profile":
        xs = np.linspace(0.0, L, n + 1)
        return cls.smooth(xs, np.full(n + 1, float(height)), cap=cap)

    @classmethod
    def bv(cls, pieces, cap: float = np.inf) -> "Profile":
        return cls("bv", pieces=tuple(tuple(float(v) for v in p) for p in pieces), cap=cap)

    @classmethod
    def step(cls, L: float, x_jump: float, left: float, right: float, cap: float = np.inf) -> "Profile":
        return cls.bv([(0.0, x_jump, left, left), (x_jump, L, right, right)], cap=cap)

    # -- basic queries ---------------------------------------------------

    def domain(self) -> tuple[float, float]:
        if self.kind == "smooth":
            return float(self.xs[0]), float(self.xs[-1])
        return self.pieces[0][0], self.pieces[-1][1]

    def range(self) -> tuple[float, float]:
        if self.kind == "smooth":
            return float(np.min(self.hs)), float(np.max(self.hs))
        vals = [v for p in self.pieces for v in (p[2], p[3])]
        return min(vals), max(vals)

    def segments(self) -> list[tuple[float, float, float, float]]:
        """Linear pieces (xa, xb, ha, hb) of the graph."""
        if self.kind == "smooth":
            return [
                (float(self.xs[i]), float(self.xs[i + 1]), float(self.hs[i]), float(self.hs[i + 1]))
                for i in range(len(self.xs) - 1)
            ]
        return [tuple(p) for p in self.pieces]

    def jumps(self) -> list[tuple[float, float]]:
        """Interior jump locations with magnitudes."""
        if self.kind == "smooth":
            return []
        out = []
        for (_, xb, _, hb), (_, _, ha2, _) in zip(self.pieces, self.pieces[1:]):
            if abs(ha2 - hb) > _TOL:
                out.append((xb, abs(ha2 - hb)))
        return out

    def value(self, x: np.ndarray) -> np.ndarray:
        """Pointwise height (right-continuous at breakpoints)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "smooth":
            return np.interp(x, self.xs, self.hs)
        out = np.empty_like(x, dtype=float)
        for xa, xb, ha, hb in self.pieces:
            m = (x >= xa - _TOL) & (x < xb)
            if xb == self.pieces[-1][1]:
                m |= x >= xb - _TOL
            t = np.clip((x[m] - xa) / (xb - xa), 0.0, 1.0)
            out[m] = ha + t * (hb - ha)
        return out

    def lower_value(self, x: float) -> float:
        """min of the two one-sided limits at x (graph height from below)."""
        if self.kind == "smooth":
            return float(np.interp(x, self.xs, self.hs))
        vals = []
        for xa, xb, ha, hb in self.pieces:
            if xa - _TOL <= x <= xb + _TOL:
                t = np.clip((x - xa) / (xb - xa), 0.0, 1.0)
                vals.append(ha + t * (hb - ha))
        if not vals:
            raise GeometryError(f"x={x} outside profile domain")
        return float(min(vals))

    def graph_surface(self) -> float:
        """Length of the generalized graph: arc lengths plus interior jumps."""
        s = sum(np.hypot(xb - xa, hb - ha) for xa, xb, ha, hb in self.segments())
        return float(s + sum(j for _, j in self.jumps()))

    def integral(self) -> float:
        return float(sum((xb - xa) * 0.5 * (ha + hb) for xa, xb, ha, hb in self.segments()))


def _area_above_level(xa, xb, ha, hb, y):
    """integral over (xa,xb) of max(h(x) - y, 0) for linear h, vectorized in y."""
    y = np.asarray(y, dtype=float)
    lo, hi = (ha, hb) if ha <= hb else (hb, ha)
    w = xb - xa
    full = w * (0.5 * (ha + hb) - y)
    out = np.where(y <= lo, full, 0.0)
    mid = (y > lo) & (y < hi)
    if np.any(mid) and hi > lo:
        out = np.where(mid, w * (hi - y) ** 2 / (2.0 * (hi - lo)), out)
    return np.where(y >= hi, 0.0, out)


def subgraph_cell_fractions(profile: Profile, grid) -> np.ndarray:
    """Exact area fraction of {y < h(x)} in each grid cell, shape (ny, nx).

    Uses clamp(t,0,c) = max(t,0) - max(t-c,0) columnwise on the linear
    pieces of the profile, so partial cells at the graph carry their exact
    subgraph area.
    """
    xs = grid.xs()
    ys = grid.ys()
    fr = np.zeros((grid.ny, grid.nx))
    cuts = sorted({xa for xa, _, _, _ in profile.segments()} | {p[1] for p in profile.segments()})
    for i in range(grid.nx):
        x0, x1 = xs[i], xs[i + 1]
        # split the cell column at profile breakpoints
        pts = [x0] + [c for c in cuts if x0 + _TOL < c < x1 - _TOL] + [x1]
        above_lo = np.zeros(grid.ny)
        above_hi = np.zeros(grid.ny)
        for a, b in zip(pts, pts[1:]):
            xm = 0.5 * (a + b)
            for xa, xb, ha, hb in profile.segments():
                if xa - _TOL <= xm <= xb + _TOL:
                    t0 = (a - xa) / (xb - xa)
                    t1 = (b - xa) / (xb - xa)
                    h0 = ha + t0 * (hb - ha)
                    h1 = ha + t1 * (hb - ha)
                    above_lo += _area_above_level(a, b, h0, h1, ys[:-1])
                    above_hi += _area_above_level(a, b, h0, h1, ys[1:])
                    break
        fr[:, i] = (above_lo - above_hi) / grid.cell_area
    return np.clip(fr, 0.0, 1.0)


# ----------------------------------------------------------------------
# jump sets
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    """Oriented segment with unit normal."""

    a: tuple[float, float]
    b: tuple[float, float]
    nu: tuple[float, float]

    def __post_init__(self):
        d = np.subtract(self.b, self.a)
        n = np.asarray(self.nu, dtype=float)
        if np.hypot(*d) <= _TOL:
            raise GeometryError("zero-length segment")
        if abs(np.hypot(*n) - 1.0) > 1e-9:
            raise GeometryError("normal must be a unit vector")
        if abs(d @ n) > 1e-9 * np.hypot(*d):
            raise GeometryError("normal must be orthogonal to the segment")

    @classmethod
    def vertical(cls, x: float, y0: float, y1: float) -> "Segment":
        return cls((x, min(y0, y1)), (x, max(y0, y1)), (1.0, 0.0))

    @property
    def length(self) -> float:
        return float(np.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1]))

    def is_vertical(self, tol: float = 1e-12) -> bool:
        return abs(self.b[0] - self.a[0]) <= tol * max(1.0, self.length)


# ----------------------------------------------------------------------
# void sets
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class VoidSet:
    """Finite union of disjoint axis-aligned rectangles, or a simple polygon.

    Rectangles are (x0, x1, y0, y1); the polygon is a CCW vertex list.
    """

    rects: tuple[tuple[float, float, float, float], ...] = ()
    polygon: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.rects and self.polygon:
            raise GeometryError("give rectangles or a polygon, not both")
        for (x0, x1, y0, y1) in self.rects:
            if x1 <= x0 or y1 <= y0:
                raise GeometryError("degenerate rectangle")
        rs = self.rects
        for i in range(len(rs)):
            for k in range(i + 1, len(rs)):
                if _rects_overlap(rs[i], rs[k]):
                    raise GeometryError("rectangles must have disjoint interiors")
        if self.polygon:
            if len(self.polygon) < 3:
                raise GeometryError("polygon needs >= 3 vertices")
            if _shoelace(self.polygon) <= 0:
                raise GeometryError("polygon must be CCW")

    @classmethod
    def empty(cls) -> "VoidSet":
        return cls()

    @classmethod
    def rectangle(cls, x0, x1, y0, y1) -> "VoidSet":
        return cls(rects=((float(x0), float(x1), float(y0), float(y1)),))

    @classmethod
    def rectangles(cls, rects) -> "VoidSet":
        return cls(rects=tuple(tuple(float(v) for v in r) for r in rects))

    @classmethod
    def from_polygon(cls, vertices) -> "VoidSet":
        return cls(polygon=tuple((float(x), float(y)) for x, y in vertices))

    def is_empty(self) -> bool:
        return not self.rects and not self.polygon

    def area(self) -> float:
        if self.polygon:
            return _shoelace(self.polygon)
        return float(sum((x1 - x0) * (y1 - y0) for x0, x1, y0, y1 in self.rects))

    def boundary_segments(self) -> list[Segment]:
        """Boundary pieces with outer normals (w.r.t. the void)."""
        segs = []
        for (x0, x1, y0, y1) in self.rects:
            segs.append(Segment((x0, y0), (x1, y0), (0.0, -1.0)))
            segs.append(Segment((x1, y0), (x1, y1), (1.0, 0.0)))
            segs.append(Segment((x1, y1), (x0, y1), (0.0, 1.0)))
            segs.append(Segment((x0, y1), (x0, y0), (-1.0, 0.0)))
        if self.polygon:
            n = len(self.polygon)
            for i in range(n):
                a = self.polygon[i]
                b = self.polygon[(i + 1) % n]
                d = np.subtract(b, a)
                ln = np.hypot(*d)
                segs.append(Segment(a, b, (d[1] / ln, -d[0] / ln)))
        return segs

    def contains(self, pts: np.ndarray, open_set: bool = True) -> np.ndarray:
        """Membership test, vectorized over (..., 2) points."""
        pts = np.asarray(pts, dtype=float)
        tol = _TOL if open_set else -_TOL
        inside = np.zeros(pts.shape[:-1], dtype=bool)
        for (x0, x1, y0, y1) in self.rects:
            inside |= (
                (pts[..., 0] > x0 + tol)
                & (pts[..., 0] < x1 - tol)
                & (pts[..., 1] > y0 + tol)
                & (pts[..., 1] < y1 - tol)
            )
        if self.polygon:
            inside |= _polygon_contains(self.polygon, pts, tol)
        return inside

    def cell_fractions(self, grid) -> np.ndarray:
        """Exact area fraction of the void in each grid cell."""
        fr = np.zeros((grid.ny, grid.nx))
        xs, ys = grid.xs(), grid.ys()
        for (x0, x1, y0, y1) in self.rects:
            wx = np.clip(np.minimum(x1, xs[1:]) - np.maximum(x0, xs[:-1]), 0.0, None)
            wy = np.clip(np.minimum(y1, ys[1:]) - np.maximum(y0, ys[:-1]), 0.0, None)
            fr += np.outer(wy, wx) / grid.cell_area
        if self.polygon:
            for j in range(grid.ny):
                for i in range(grid.nx):
                    cell = [(xs[i], ys[j]), (xs[i + 1], ys[j]), (xs[i + 1], ys[j + 1]), (xs[i], ys[j + 1])]
                    clipped = clip_polygon(list(self.polygon), cell)
                    if len(clipped) >= 3:
                        fr[j, i] += _shoelace(clipped) / grid.cell_area
        return np.clip(fr, 0.0, 1.0)

    def line_sections(self, p: np.ndarray, xi: np.ndarray) -> list[tuple[float, float]]:
        """Parameter intervals {t : p + t*xi in void}, merged."""
        ivals = []
        for r in self.rects:
            iv = _slab_interval(p, xi, r)
            if iv is not None:
                ivals.append(iv)
        if self.polygon:
            ivals += _polygon_line_sections(self.polygon, p, xi)
        return merge_intervals(ivals)


def _rects_overlap(r, s) -> bool:
    return (
        min(r[1], s[1]) - max(r[0], s[0]) > _TOL
        and min(r[3], s[3]) - max(r[2], s[2]) > _TOL
    )


def _shoelace(poly) -> float:
    x = np.array([p[0] for p in poly])
    y = np.array([p[1] for p in poly])
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _polygon_contains(poly, pts, tol) -> np.ndarray:
    x, y = pts[..., 0], pts[..., 1]
    inside = np.zeros(x.shape, dtype=bool)
    n = len(poly)
    for i in range(n):
        (xa, ya), (xb, yb) = poly[i], poly[(i + 1) % n]
        crosses = (ya > y) != (yb > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = xa + (y - ya) * (xb - xa) / (yb - ya)
        inside ^= crosses & (x < xint)
    return inside


def clip_polygon(subject: list, clip_rect: list) -> list:
    """Sutherland-Hodgman clip of a polygon by a convex CCW window."""
    output = list(subject)
    n = len(clip_rect)
    for i in range(n):
        if not output:
            return []
        ca = clip_rect[i]
        cb = clip_rect[(i + 1) % n]
        inp = output
        output = []
        s = inp[-1]

        def inside(p):
            return (cb[0] - ca[0]) * (p[1] - ca[1]) - (cb[1] - ca[1]) * (p[0] - ca[0]) >= -_TOL

        def intersection(p, q):
            dc = (ca[0] - cb[0], ca[1] - cb[1])
            dp = (p[0] - q[0], p[1] - q[1])
            n1 = ca[0] * cb[1] - ca[1] * cb[0]
            n2 = p[0] * q[1] - p[1] * q[0]
            den = dc[0] * dp[1] - dc[1] * dp[0]
            return ((n1 * dp[0] - n2 * dc[0]) / den, (n1 * dp[1] - n2 * dc[1]) / den)

        for e in inp:
            if inside(e):
                if not inside(s):
                    output.append(intersection(s, e))
                output.append(e)
            elif inside(s):
                output.append(intersection(s, e))
            s = e
    return output


def _slab_interval(p, xi, rect):
    """Parameter interval of {p + t xi} inside a closed rectangle, or None."""
    t0, t1 = -np.inf, np.inf
    for k, (lo, hi) in enumerate(((rect[0], rect[1]), (rect[2], rect[3]))):
        if abs(xi[k]) < _TOL:
            if not (lo - _TOL <= p[k] <= hi + _TOL):
                return None
        else:
            ta = (lo - p[k]) / xi[k]
            tb = (hi - p[k]) / xi[k]
            t0 = max(t0, min(ta, tb))
            t1 = min(t1, max(ta, tb))
    if t1 - t0 <= _TOL:
        return None
    return (t0, t1)


def _polygon_line_sections(poly, p, xi):
    ts = []
    n = len(poly)
    for i in range(n):
        (xa, ya), (xb, yb) = poly[i], poly[(i + 1) % n]
        ex, ey = xb - xa, yb - ya
        den = xi[0] * (-ey) + xi[1] * ex
        if abs(den) < _TOL:
            continue
        # solve p + t xi = a + s e
        rx, ry = xa - p[0], ya - p[1]
        t = (rx * (-ey) + ry * ex) / den
        s = (xi[0] * ry - xi[1] * rx) / den
        if -_TOL <= s <= 1 + _TOL:
            ts.append(t)
    ts.sort()
    out = []
    for ta, tb in zip(ts[::2], ts[1::2]):
        if tb - ta > _TOL:
            out.append((ta, tb))
    return out


def merge_intervals(ivals, tol: float = _TOL) -> list[tuple[float, float]]:
    if not ivals:
        return []
    ivals = sorted(ivals)
    out = [list(ivals[0])]
    for a, b in ivals[1:]:
        if a <= out[-1][1] + tol:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


def segment_box_clip(seg: Segment, box) -> float:
    """Length of the part of a segment inside the open box (x0,x1)x(y0,y1)."""
    a = np.asarray(seg.a)
    d = np.asarray(seg.b) - a
    iv = _slab_interval(a, d, (box.x0, box.x1, box.y0, box.y1))
    if iv is None:
        return 0.0
    t0, t1 = max(iv[0], 0.0), min(iv[1], 1.0)
    if t1 <= t0:
        return 0.0
    # drop portions running along the box boundary
    mid = a + 0.5 * (t0 + t1) * d
    if (
        abs(mid[0] - box.x0) < _TOL
        or abs(mid[0] - box.x1) < _TOL
        or abs(mid[1] - box.y0) < _TOL
        or abs(mid[1] - box.y1) < _TOL
    ):
        return 0.0
    return float((t1 - t0) * np.hypot(*d))
