import numpy as np
import pytest

from filmvoid.geometry import (
    GeometryError,
    Profile,
    Segment,
    VoidSet,
    clip_polygon,
    merge_intervals,
    subgraph_cell_fractions,
)
from filmvoid.grid import Grid, GridError, read_grid_dump, snap_film_ny, write_grid_dump


# -- grids ---------------------------------------------------------------


def test_film_grid_lines():
    g = Grid.film(1.0, 1.0, 8, 12)
    ys = g.ys()
    assert np.any(np.abs(ys) < 1e-12)
    assert np.any(np.abs(ys - 1.0) < 1e-12)


def test_film_grid_rejects_bad_ny():
    with pytest.raises(GridError):
        Grid.film(1.0, 1.0, 8, 256)  # 0 not on a grid line for M=1


def test_snap_ny():
    assert snap_film_ny(1.0, 256) == 258
    assert snap_film_ny(1.0, 3) == 3
    assert snap_film_ny(0.5, 8) == 10  # M+2 = 5/2: multiples of 5


def test_too_small_grid():
    with pytest.raises(GridError):
        Grid.box(0, 1, 0, 1, 1, 4)


def test_grid_dump_roundtrip(tmp_path):
    g = Grid.film(2.0, 1.0, 5, 6)
    a = np.arange((g.ny + 1) * (g.nx + 1), dtype=float).reshape(g.node_shape()) / 7.0
    path = tmp_path / "field.txt"
    write_grid_dump(path, a, g)
    first = path.read_text().splitlines()[0]
    assert first.startswith("# 5 6 ")
    b, meta = read_grid_dump(path)
    assert np.array_equal(a, b)
    assert meta["nx"] == 5 and meta["ny"] == 6


# -- profiles ------------------------------------------------------------


def test_flat_profile_surface():
    p = Profile.flat(1.0, 0.5)
    assert p.graph_surface() == pytest.approx(1.0)
    assert p.integral() == pytest.approx(0.5)


def test_linear_profile_surface():
    a = 0.75
    p = Profile.smooth(np.array([0.0, 1.0]), np.array([0.0, a]))
    assert p.graph_surface() == pytest.approx(np.sqrt(1 + a**2))


def test_step_profile_generalized_graph():
    p = Profile.step(1.0, 0.5, 1.0, 0.0)
    assert p.graph_surface() == pytest.approx(2.0)  # 1 of flat pieces + jump 1
    assert p.jumps() == [(0.5, 1.0)]
    assert p.lower_value(0.5) == pytest.approx(0.0)
    assert p.value(np.array([0.25, 0.75])) == pytest.approx([1.0, 0.0])


def test_profile_leaves_range_rejected():
    with pytest.raises(GeometryError):
        Profile.flat(1.0, 2.0, cap=1.0)
    with pytest.raises(GeometryError):
        Profile.smooth(np.array([0.0, 1.0]), np.array([-0.5, 0.5]))


def test_subgraph_fractions_match_refined_oracle():
    # oracle: count midpoints of a fine subgrid below the graph
    rng = np.random.default_rng(11)
    g = Grid.film(1.0, 1.0, 6, 9)
    xs = np.linspace(0.0, 1.0, 7)
    hs = rng.uniform(0.1, 0.9, 7)
    p = Profile.smooth(xs, hs, cap=1.0)
    fr = subgraph_cell_fractions(p, g)
    k = 400
    for j, i in [(0, 0), (3, 2), (4, 5), (8, 3)]:
        x0, y0 = g.x0 + i * g.hx, g.y0 + j * g.hy
        xm = x0 + (np.arange(k) + 0.5) / k * g.hx
        ym = y0 + (np.arange(k) + 0.5) / k * g.hy
        below = (ym[:, None] < p.value(xm)[None, :]).mean()
        assert fr[j, i] == pytest.approx(below, abs=2e-3)


def test_subgraph_fractions_exact_flat():
    g = Grid.film(1.0, 1.0, 4, 6)
    p = Profile.flat(1.0, 0.25, cap=1.0)  # 0.25 = half a cell above y=0 (hy=0.5)
    fr = subgraph_cell_fractions(p, g)
    assert np.allclose(fr[:2], 1.0)  # below y=0
    assert fr[2] == pytest.approx(0.5)
    assert np.allclose(fr[3:], 0.0)


# -- segments ------------------------------------------------------------


def test_segment_validation():
    with pytest.raises(GeometryError):
        Segment((0, 0), (0, 0), (1, 0))
    with pytest.raises(GeometryError):
        Segment((0, 0), (1, 0), (1, 0))  # normal parallel to segment
    with pytest.raises(GeometryError):
        Segment((0, 0), (1, 0), (0, 2))  # not unit
    s = Segment.vertical(0.3, 0.8, 0.2)
    assert s.length == pytest.approx(0.6)
    assert s.is_vertical()


# -- void sets -----------------------------------------------------------


def test_rectangle_area_and_fractions():
    g = Grid.box(0, 1, 0, 1, 4, 4)
    E = VoidSet.rectangle(0.25, 0.75, 0.25, 0.75)
    assert E.area() == pytest.approx(0.25)
    fr = E.cell_fractions(g)
    assert fr.sum() * g.cell_area == pytest.approx(0.25)
    assert fr[1, 1] == pytest.approx(1.0)
    assert fr[0, 0] == pytest.approx(0.0)


def test_overlapping_rectangles_rejected():
    with pytest.raises(GeometryError):
        VoidSet.rectangles([(0, 0.5, 0, 0.5), (0.25, 0.75, 0.25, 0.75)])


def test_polygon_area_matches_shoelace():
    tri = VoidSet.from_polygon([(0.2, 0.2), (0.8, 0.2), (0.2, 0.8)])
    assert tri.area() == pytest.approx(0.18)
    g = Grid.box(0, 1, 0, 1, 10, 10)
    assert tri.cell_fractions(g).sum() * g.cell_area == pytest.approx(0.18, abs=1e-12)


def test_polygon_must_be_ccw():
    with pytest.raises(GeometryError):
        VoidSet.from_polygon([(0.2, 0.2), (0.2, 0.8), (0.8, 0.2)])


def test_clip_polygon_area():
    sq = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    win = [(0.5, -0.5), (1.5, -0.5), (1.5, 0.5), (0.5, 0.5)]
    out = clip_polygon(sq, win)
    xs = [p[0] for p in out]
    ys = [p[1] for p in out]
    area = 0.5 * abs(sum(x0 * y1 - x1 * y0 for (x0, y0), (x1, y1) in zip(out, out[1:] + out[:1])))
    assert area == pytest.approx(0.25)
    assert min(xs) >= 0.5 - 1e-12 and max(ys) <= 0.5 + 1e-12


def test_line_sections_rectangle():
    E = VoidSet.rectangle(0.25, 0.75, 0.25, 0.75)
    secs = E.line_sections(np.array([0.0, 0.5]), np.array([1.0, 0.0]))
    assert len(secs) == 1
    assert secs[0][0] == pytest.approx(0.25)
    assert secs[0][1] == pytest.approx(0.75)
    assert E.line_sections(np.array([0.0, 0.9]), np.array([1.0, 0.0])) == []


def test_abutting_rects_merge_on_line():
    E = VoidSet.rectangles([(0.2, 0.4, 0.2, 0.8), (0.4, 0.6, 0.2, 0.8)])
    secs = E.line_sections(np.array([0.0, 0.5]), np.array([1.0, 0.0]))
    assert len(secs) == 1
    assert secs[0] == (pytest.approx(0.2), pytest.approx(0.6))


def test_merge_intervals():
    assert merge_intervals([(0, 1), (1, 2), (3, 4)]) == [(0, 2), (3, 4)]
