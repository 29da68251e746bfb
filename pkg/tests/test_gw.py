import numpy as np
import pytest

from wlmetric.exceptions import MarginalMismatch, NotAMetric, ShapeMismatch, TooLarge
from wlmetric.gw import (
    KStepCouplingChain,
    check_metric,
    diagonal_layer,
    diameter,
    diameter_lb,
    distortion_k,
    eccentricity,
    invariant_gap,
    make_product_kstep,
    mms_chain,
    optimal_layer,
    product_layer,
    random_coupling,
    random_layer,
    random_mcms,
    tlb_lower_bound,
    tlb_matrix,
    validate_mcms,
)
from wlmetric.wl import kstep_kernel, wl_distance

TWO_NEAR = mms_chain([[0, 1], [1, 0]], [0.5, 0.5])
TWO_FAR = mms_chain([[0, 3], [3, 0]], [0.5, 0.5])


def test_two_point_invariants():
    np.testing.assert_allclose(eccentricity(TWO_NEAR), [[0.5], [0.5]])
    np.testing.assert_allclose(eccentricity(TWO_FAR), [[1.5], [1.5]])
    assert diameter(TWO_NEAR) == pytest.approx(0.5)
    assert diameter_lb(TWO_NEAR, TWO_FAR) == pytest.approx(1.0)


def test_two_point_tlb():
    # Point-labeled chains: labels {0, 1} against {0, 3}, each uniform.
    # After one step every state sees the full uniform label distribution,
    # so each entry is W({0, 1}, {0, 3}) = (0 + 2) / 2 = 1.
    np.testing.assert_allclose(tlb_matrix(TWO_NEAR, TWO_FAR, 1), np.ones((2, 2)))
    assert tlb_lower_bound(TWO_NEAR, TWO_FAR, 1) == pytest.approx(1.0)


def test_two_point_distortion():
    # Matching x_i with y_i, then independent steps: each of the two anchor
    # pairs averages |d_X - d_Y| over (0, 3, 1, 2) / 4 = 1.5.
    gamma = np.eye(2) / 2
    nu = make_product_kstep(TWO_NEAR, TWO_FAR, 1)
    assert distortion_k(TWO_NEAR, TWO_FAR, gamma, nu) == pytest.approx(1.5)


def test_constant_kernel_depth_does_not_matter(rng):
    for _ in range(5):
        pts_x, pts_y = rng.random((4, 2)), rng.random((5, 2))
        dx = np.linalg.norm(pts_x[:, None] - pts_x[None], axis=2)
        dy = np.linalg.norm(pts_y[:, None] - pts_y[None], axis=2)
        mx = mms_chain(dx, rng.dirichlet(np.ones(4)))
        my = mms_chain(dy, rng.dirichlet(np.ones(5)))
        assert tlb_lower_bound(mx, my, 2) == pytest.approx(tlb_lower_bound(mx, my, 1), abs=1e-12)
        assert tlb_lower_bound(mx, my, 3, k1_fast=True) == pytest.approx(tlb_lower_bound(mx, my, 1), abs=1e-12)


def test_tlb_parallel_matches_serial(rng):
    mx, my = random_mcms(4, rng), random_mcms(3, rng)
    np.testing.assert_array_equal(tlb_matrix(mx, my, 2, n_jobs=2), tlb_matrix(mx, my, 2))


def test_check_metric_rejections():
    with pytest.raises(NotAMetric):
        check_metric(np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0.0]]))
    with pytest.raises(NotAMetric):
        check_metric(np.array([[0, 0], [0, 0.0]]))
    with pytest.raises(NotAMetric):
        check_metric(np.array([[0, 1], [2, 0.0]]))
    with pytest.raises(ShapeMismatch):
        validate_mcms(np.eye(2), [0.5, 0.5], np.zeros((3, 3)))


def test_check_metric_sampled_branch(rng):
    pts = rng.random((70, 2))
    check_metric(np.linalg.norm(pts[:, None] - pts[None], axis=2))


def test_layers_are_feasible(rng):
    mx, my = random_mcms(4, rng), random_mcms(3, rng)
    cost = rng.random((4, 3))
    for layer in (product_layer(mx, my), random_layer(mx, my, rng), optimal_layer(mx, my, cost)):
        KStepCouplingChain((layer, layer)).check(mx.kernel, my.kernel)


def test_composed_chain_marginals(rng):
    mx, my = random_mcms(3, rng), random_mcms(4, rng)
    nu = KStepCouplingChain((random_layer(mx, my, rng), random_layer(mx, my, rng), product_layer(mx, my)))
    comp = nu.composed()
    np.testing.assert_allclose(comp.sum(axis=3), np.broadcast_to(kstep_kernel(mx.kernel, 3).rows[:, None], (3, 4, 3)))
    np.testing.assert_allclose(comp.sum(axis=2), np.broadcast_to(kstep_kernel(my.kernel, 3).rows[None], (3, 4, 4)))


def test_infeasible_inputs_rejected(rng):
    mx, my = random_mcms(3, rng), random_mcms(3, rng)
    nu = make_product_kstep(mx, my, 1)
    with pytest.raises(MarginalMismatch):
        distortion_k(mx, my, np.eye(3), nu)
    bad = product_layer(mx, my).copy()
    bad[0, 0] = np.eye(3) / 3
    with pytest.raises(MarginalMismatch):
        distortion_k(mx, my, np.outer(mx.stationary, my.stationary), KStepCouplingChain((bad,)))


def test_size_limit(rng):
    big = random_mcms(33, rng)
    with pytest.raises(TooLarge):
        product_layer(big, big)


def test_diagonal_coupling_zero_distortion(rng):
    for _ in range(5):
        m = random_mcms(int(rng.integers(2, 8)), rng)
        gamma = np.diag(m.stationary)
        for k in (1, 2, 3):
            nu = KStepCouplingChain(tuple(diagonal_layer(m) for _ in range(k)))
            assert distortion_k(m, m, gamma, nu) <= 1e-12


def _sample_pairs(rng, mx, my, k, count):
    cost = np.abs(eccentricity(mx) - eccentricity(my).T)
    for s in range(count):
        gamma = random_coupling(mx.stationary, my.stationary, rng)
        if s == 0:
            steps = (product_layer(mx, my),) * k
        elif s == 1:
            steps = (optimal_layer(mx, my, cost),) * k
        else:
            steps = tuple(random_layer(mx, my, rng) for _ in range(k))
        yield gamma, KStepCouplingChain(steps)


def test_lower_bounds_below_distortion(rng):
    for _ in range(6):
        mx, my = random_mcms(int(rng.integers(2, 6)), rng), random_mcms(int(rng.integers(2, 6)), rng)
        ex, ey = eccentricity(mx), eccentricity(my)
        for k in (1, 2):
            ecc = wl_distance(mx.as_lmmc(ex), my.as_lmmc(ey), k)
            tlb = tlb_lower_bound(mx, my, k)
            for gamma, nu in _sample_pairs(rng, mx, my, k, 4):
                dis = distortion_k(mx, my, gamma, nu)
                assert ecc <= dis + 1e-7
                assert tlb <= dis + 1e-7
                assert diameter_lb(mx, my) <= dis + 1e-7
                assert invariant_gap(ex, ey, gamma, nu) <= dis + 1e-7
