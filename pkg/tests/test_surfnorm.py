import numpy as np
import pytest

from filmvoid.surfnorm import NormError, SurfaceNorm, dual_norm_residual, phi_dual, unit_circle


def brute_dual(norm, xi, n):
    # independent sampled max of (nu.xi)/phi(nu)
    best = -np.inf
    for k in range(n):
        th = 2 * np.pi * k / n
        nu = np.array([np.cos(th), np.sin(th)])
        best = max(best, float(nu @ xi) / float(norm(nu)))
    return best


def test_euclid_self_dual():
    for th in (0.0, 0.3, 1.2, 4.0):
        xi = np.array([np.cos(th), np.sin(th)])
        assert phi_dual(SurfaceNorm.euclidean(), xi) == pytest.approx(1.0)


def test_l1_dual_is_linf():
    assert phi_dual(SurfaceNorm.lq(1.0), np.array([1.0, 0.0])) == pytest.approx(1.0)
    xi = np.array([1.0, 1.0]) / np.sqrt(2)
    assert phi_dual(SurfaceNorm.lq(1.0), xi) == pytest.approx(1 / np.sqrt(2))


def test_matrix_dual_analytic_vs_sampled():
    norm = SurfaceNorm.matrix([[2.0, 0.0], [0.0, 1.0]])
    assert phi_dual(norm, np.array([1.0, 0.0])) == pytest.approx(0.5)
    rng = np.random.default_rng(0)
    for _ in range(20):
        th = rng.uniform(0, 2 * np.pi)
        xi = np.array([np.cos(th), np.sin(th)])
        sampled = brute_dual(norm, xi, 4000)
        assert phi_dual(norm, xi) == pytest.approx(sampled, abs=2e-6)


def test_custom_norm_sampled_dual():
    norm = SurfaceNorm("custom", fn=lambda nu: np.sqrt(nu[..., 0] ** 2 + nu[..., 1] ** 2))
    assert phi_dual(norm, np.array([0.0, 1.0]), 720) == pytest.approx(1.0, abs=1e-4)
    with pytest.raises(NormError):
        phi_dual(norm, np.array([0.0, 1.0]), 4)


def test_degenerate_weights_rejected():
    with pytest.raises(NormError):
        SurfaceNorm.lq(2.0, (1.0, 0.0))
    with pytest.raises(NormError):
        SurfaceNorm.matrix([[1.0, 2.0], [2.0, 4.0]])


def test_residual_euclid_cosine_gap():
    # brute-force gap bound: 1 - cos(pi/n) for the worst offset
    n = 360
    res = dual_norm_residual(SurfaceNorm.euclidean(), np.array([0.0, 1.0]), n)
    assert res <= 1.0 - np.cos(np.pi / n) + 1e-12
    assert res <= 1e-4


def test_residual_l1_midpoint():
    nu = np.array([1.0, 1.0]) / np.sqrt(2)
    assert dual_norm_residual(SurfaceNorm.lq(1.0), nu, 720) <= 1e-3


def test_residual_monotone_under_doubling():
    rng = np.random.default_rng(7)
    norms = [SurfaceNorm.euclidean(), SurfaceNorm.lq(1.0), SurfaceNorm.matrix([[2, 0], [0, 1]])]
    for norm in norms:
        for _ in range(10):
            th = rng.uniform(0, 2 * np.pi)
            nu = np.array([np.cos(th), np.sin(th)])
            r1 = dual_norm_residual(norm, nu, 180)
            r2 = dual_norm_residual(norm, nu, 360)
            assert r2 <= r1 + 1e-12


def test_sampled_biduality():
    # phi**(nu) recovered from sampled duals stays within the sampling gap
    for norm in (SurfaceNorm.lq(3.0, (1.5, 0.5)), SurfaceNorm.matrix([[1.0, 0.3], [0.0, 2.0]])):
        xis = unit_circle(1440)
        duals = norm.dual_analytic(xis)
        for th in np.linspace(0.1, 2 * np.pi, 9):
            nu = np.array([np.cos(th), np.sin(th)])
            bidual = np.max((xis @ nu) / duals)
            assert abs(bidual - float(norm(nu))) <= 5e-5 * float(norm(nu))
