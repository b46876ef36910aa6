"""Recovery constructions: smooth graphs approximating jumpy profiles with
vertical cuts, optimal-transition phase fields around a graph, and
volume-preserving rescalings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import GeometryError, Profile
from .grid import Grid
from .wells import DOUBLE_WELL, Well, transition_profile

_TOL = 1e-12


@dataclass(frozen=True)
class RecoveryParams:
    target: float = 0.02  # requested closeness of the report entries
    delta: float = 1.0 / 256.0  # dip half-width at each cut
    sigma: float = 1.0 / 2048.0  # mollifier width
    samples: int = 4097  # nodes of the constructed smooth profile
    transition_mult: float = 3.5  # phase-field transition half-width, in units of eps

    def __post_init__(self):
        if not (0 < self.sigma < self.delta):
            raise GeometryError("need 0 < sigma < delta")


@dataclass(frozen=True)
class GraphApproxReport:
    l1_err: float
    surface_err: float
    surface: float
    target_surface: float

    def within(self, eps: float) -> bool:
        return self.l1_err <= eps and self.surface_err <= eps


def _bump_kernel(radius: int) -> np.ndarray:
    t = np.arange(-radius, radius + 1) / (radius + 1.0)
    w = np.exp(-1.0 / np.maximum(1.0 - t * t, 1e-300))
    return w / np.sum(w)


def graph_approx(
    h: Profile, cuts, params: RecoveryParams, cap: float | None = None
) -> tuple[Profile, GraphApproxReport]:
    """Smooth profile g that dips to the bottom of each vertical cut.

    At a cut location the graph descends to the cut's lower endpoint over
    a trapezoid of half-width delta and returns, so the arc length picks
    up twice the cut length; the whole curve is then mollified with a
    compactly supported kernel of width sigma.  The report carries
    ||g-h||_L1 and the distance of the arc length to the relaxed surface
    target (generalized graph length plus twice the cut lengths).
    """
    from .sharp import vertical_extension

    x0, x1 = h.domain()
    ext, infinite = vertical_extension(cuts, h)
    if infinite:
        raise GeometryError("cuts must be vertical")
    locs = sorted(0.5 * (s.a[0] + s.b[0]) for s in ext)
    for a, b in zip(locs, locs[1:]):
        if b - a <= 4.0 * params.delta:
            raise GeometryError("cut dips overlap: decrease delta")
    for x in locs:
        if x - x0 <= params.delta or x1 - x <= params.delta:
            raise GeometryError("cut too close to the boundary of omega")

    xs = np.linspace(x0, x1, params.samples)
    g = h.value(xs)
    for s in ext:
        x = 0.5 * (s.a[0] + s.b[0])
        ybot = min(s.a[1], s.b[1])
        # trapezoidal dip: flat bottom of half-width delta/2, steep walls
        rise = (np.abs(xs - x) - 0.5 * params.delta) / (0.5 * params.delta)
        dip = ybot + np.clip(rise, 0.0, None) * max(h.range()[1] - ybot, 1.0)
        g = np.minimum(g, dip)

    radius = max(1, int(round(params.sigma / (xs[1] - xs[0]))))
    kernel = _bump_kernel(radius)
    gpad = np.concatenate([np.full(radius, g[0]), g, np.full(radius, g[-1])])
    g = np.convolve(gpad, kernel, mode="valid")
    g = np.clip(g, 0.0, cap if cap is not None else np.inf)

    smooth = Profile.smooth(xs, g, cap=cap if cap is not None else np.inf)
    target = h.graph_surface() + 2.0 * sum(s.length for s in ext)
    surface = smooth.graph_surface()
    l1 = float(np.trapezoid(np.abs(g - h.value(xs)), xs))
    return smooth, GraphApproxReport(l1, abs(surface - target), surface, target)


# ----------------------------------------------------------------------
# phase-field recovery
# ----------------------------------------------------------------------


def _signed_vertical(profile: Profile, grid: Grid) -> np.ndarray:
    xs, ys = np.meshgrid(grid.xs(), grid.ys())
    return ys - profile.value(grid.xs())[None, :]


def _polyline_distance(pts: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from points (n,2) to a polyline (m,2): exact point-segment
    minimum for small polylines, nearest dense sample otherwise."""
    a = poly[:-1]
    d = poly[1:] - a
    nseg = len(a)
    n = len(pts)
    if n * nseg <= 2 * 10**8:
        best = np.full(n, np.inf)
        chunk = max(1, int(2 * 10**7 / max(nseg, 1)))
        for s in range(0, n, chunk):
            p = pts[s : s + chunk]
            w = p[:, None, :] - a[None, :, :]
            t = np.clip(
                (w * d[None, :, :]).sum(-1) / np.maximum((d * d).sum(-1)[None, :], 1e-300),
                0.0,
                1.0,
            )
            proj = a[None, :, :] + t[:, :, None] * d[None, :, :]
            dist = np.sqrt(((p[:, None, :] - proj) ** 2).sum(-1))
            best[s : s + chunk] = dist.min(axis=1)
        return best
    # dense resample + KD tree; error at most half the sample spacing
    from scipy.spatial import cKDTree

    seg_len = np.sqrt((d * d).sum(-1))
    spacing = max(np.mean(seg_len) * 0.5, np.max(seg_len) / 64.0)
    samples = [poly[0]]
    for ai, di, li in zip(a, d, seg_len):
        k = max(1, int(np.ceil(li / spacing)))
        tt = (np.arange(k) + 1.0) / k
        samples.append(ai[None, :] + tt[:, None] * di[None, :])
    cloud = np.vstack(samples)
    tree = cKDTree(cloud)
    return tree.query(pts, k=1)[0]


def phasefield_recovery(
    profile: Profile,
    grid: Grid,
    eps: float,
    well: Well = DOUBLE_WELL,
    cuts=(),
    transition_mult: float = 3.5,
    band: float = 24.0,
) -> np.ndarray:
    """Phase field q(dist/eps) hugging the graph: 1 well below, 0 well above.

    The signed distance to a subgraph boundary never decreases along a
    column, so the field is columnwise non-increasing for any graph.  When
    the profile carries vertical cuts, each cut gets a two-sided transition
    factor opening a zero slot of half-width transition_mult * eps around
    it, which prices the cut at twice its length (the slot's two walls are
    full transitions); a narrow dip in the graph alone is invisible once
    eps exceeds its width.  The boundary bands are re-imposed at the end.
    """
    q = transition_profile(well)
    dvert = _signed_vertical(profile, grid)
    cut = band * eps
    need = np.abs(dvert) <= cut * np.sqrt(1.0 + _max_slope(profile) ** 2)
    dist = np.abs(dvert)
    if np.any(need):
        xs, ys = np.meshgrid(grid.xs(), grid.ys())
        pts = np.stack([xs[need], ys[need]], axis=-1)
        poly = _graph_polyline(profile)
        dist[need] = _polyline_distance(pts, poly)
    signed = np.where(dvert <= 0.0, -dist, dist)
    v = q(signed / eps)
    if cuts:
        X, Y = np.meshgrid(grid.xs(), grid.ys())
        for s in cuts:
            if not s.is_vertical():
                raise GeometryError("cuts must be vertical")
            xc = 0.5 * (s.a[0] + s.b[0])
            ybot = min(s.a[1], s.b[1])
            wall = q(transition_mult - np.abs(X - xc) / eps)
            gate = q((Y - ybot) / eps)
            v = np.minimum(v, np.maximum(wall, gate))
    return _impose_bands(v, grid)


def _graph_polyline(profile: Profile) -> np.ndarray:
    pts = []
    for xa, xb, ha, hb in profile.segments():
        if not pts:
            pts.append((xa, ha))
        elif abs(pts[-1][0] - xa) > _TOL or abs(pts[-1][1] - ha) > _TOL:
            pts.append((xa, ha))  # vertical jump edge of the generalized graph
        pts.append((xb, hb))
    return np.asarray(pts)


def _max_slope(profile: Profile) -> float:
    return max(abs(hb - ha) / (xb - xa) for xa, xb, ha, hb in profile.segments())


def _impose_bands(v: np.ndarray, grid: Grid) -> np.ndarray:
    v = np.clip(v, 0.0, 1.0)
    if grid.film_cap is not None:
        v[grid.substrate_rows()] = 1.0
        v[grid.top_rows()] = 0.0
        v = np.minimum.accumulate(v, axis=0)
    return v


# ----------------------------------------------------------------------
# volume rescaling
# ----------------------------------------------------------------------


def volume_rescale(h: Profile, m: float, M: float, truncation: float = 1e-6) -> Profile:
    """Rescale the profile to prescribed volume: h* = h / r, r = (int h)/m.

    Profiles touching the cap M are first truncated to M - truncation so
    the rescaled profile stays strictly below the cap.
    """
    x0, x1 = h.domain()
    if not (0.0 < m < M * (x1 - x0)):
        raise GeometryError("volume target must satisfy 0 < m < M * L")
    hs_max = h.range()[1]
    work = h
    if hs_max >= M - 1e-12:
        delta = truncation * M
        work = _truncate(h, M - delta)
    vol = work.integral()
    if vol <= 0:
        raise GeometryError("cannot rescale a zero-volume profile")
    r = vol / m
    if work.range()[1] / r > M + 1e-12:
        raise GeometryError("rescaling would exceed the height cap; infeasible target")
    return _scale(work, 1.0 / r, cap_hint=M)


def _truncate(h: Profile, level: float) -> Profile:
    if h.kind == "smooth":
        return Profile.smooth(h.xs, np.minimum(h.hs, level), cap=h.cap)
    pieces = []
    for xa, xb, ha, hb in h.pieces:
        if ha <= level and hb <= level:
            pieces.append((xa, xb, ha, hb))
        elif ha >= level and hb >= level:
            pieces.append((xa, xb, level, level))
        else:
            xc = xa + (level - ha) / (hb - ha) * (xb - xa)
            if ha < level:
                pieces.append((xa, xc, ha, level))
                pieces.append((xc, xb, level, level))
            else:
                pieces.append((xa, xc, level, level))
                pieces.append((xc, xb, level, hb))
    return Profile.bv(pieces, cap=h.cap)


def _scale(h: Profile, factor: float, cap_hint: float) -> Profile:
    cap = h.cap if np.isfinite(h.cap) else cap_hint
    if h.kind == "smooth":
        return Profile.smooth(h.xs, h.hs * factor, cap=cap)
    return Profile.bv([(xa, xb, ha * factor, hb * factor) for xa, xb, ha, hb in h.pieces], cap=cap)
