import numpy as np
import pytest

from filmvoid.extfield import ExtendedField, dbar, stereographic
from filmvoid.grid import Grid, GridError


def unit_box(n=4):
    return Grid.box(0.0, 1.0, 0.0, 1.0, n, n)


def rand_field(rng, grid, p_inf=0.2):
    u = rng.standard_normal(grid.node_shape() + (2,)) * rng.choice([0.1, 1.0, 30.0])
    mask = rng.random(grid.node_shape()) < p_inf
    return ExtendedField.infinite_on(u, mask)


def test_identity():
    g = unit_box()
    rng = np.random.default_rng(0)
    u = rand_field(rng, g)
    assert dbar(u, u, g) == 0.0


def test_antipodal_poles():
    g = unit_box()
    zero = ExtendedField.finite_field(g.zeros_vector())
    inf = ExtendedField.infinite_on(g.zeros_vector(), np.ones(g.node_shape(), bool))
    assert dbar(zero, inf, g) == pytest.approx(2.0 * g.area, abs=1e-12)


def test_unit_vector_to_zero():
    # psi((1,0)) = (1,0,0), psi(0) = (0,0,-1): chordal distance sqrt(2)
    g = unit_box()
    one = g.zeros_vector()
    one[:, :, 0] = 1.0
    d = dbar(ExtendedField.finite_field(one), ExtendedField.finite_field(g.zeros_vector()), g)
    assert d == pytest.approx(np.sqrt(2.0) * g.area, rel=1e-12)


def test_stereographic_inverse_identity():
    # phi(psi(u)) = u for the projection from the north pole
    rng = np.random.default_rng(5)
    g = unit_box(2)
    u = rng.standard_normal(g.node_shape() + (2,)) * 5
    s = stereographic(ExtendedField.finite_field(u))
    back = s[..., :2] / (1.0 - s[..., 2])[..., None]
    assert np.allclose(back, u, atol=1e-12)
    assert np.allclose(np.linalg.norm(s, axis=-1), 1.0, atol=1e-12)


def test_metric_axioms_random_triples():
    g = unit_box(3)
    rng = np.random.default_rng(42)
    for _ in range(300):
        u, w, z = (rand_field(rng, g) for _ in range(3))
        duw = dbar(u, w, g)
        dwu = dbar(w, u, g)
        assert duw == dwu
        assert duw <= 2.0 * g.area + 1e-12
        assert duw + dbar(w, z, g) >= dbar(u, z, g) - 1e-12
        assert dbar(u, u, g) == 0.0


def test_zero_iff_equal_nodewise():
    g = unit_box(3)
    rng = np.random.default_rng(1)
    u = rand_field(rng, g, p_inf=0.0)
    w = ExtendedField.finite_field(u.values.copy())
    assert dbar(u, w, g) == 0.0
    bumped = u.values.copy()
    bumped[2, 2, 0] += 1e-6
    assert dbar(ExtendedField.finite_field(bumped), w, g) > 0.0


def test_grid_mismatch_rejected():
    u = ExtendedField.finite_field(unit_box(3).zeros_vector())
    w = ExtendedField.finite_field(unit_box(4).zeros_vector())
    with pytest.raises(GridError):
        dbar(u, w, unit_box(4))


def test_infinite_mask_consistency():
    vals = np.full((3, 3, 2), np.nan)
    with pytest.raises(ValueError):
        ExtendedField(vals, np.ones((3, 3), bool))
