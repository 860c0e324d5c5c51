import numpy as np
import pytest

from credalcp import kernels
from credalcp.simplex import (
    DirichletParams,
    build_grid,
    dirichlet_relative_nonconformity,
    inner_score,
    kl_divergence,
    so_kernel_args,
    tv_distance,
    wasserstein1,
)

PAIRS = [
    (kernels.tv_scores_numpy, kernels.tv_scores_numba),
    (kernels.kl_scores_numpy, kernels.kl_scores_numba),
    (kernels.ws_scores_numpy, kernels.ws_scores_numba),
    (kernels.inner_scores_numpy, kernels.inner_scores_numba),
]


def random_batch(k, m=500, seed=0):
    rng = np.random.default_rng(seed)
    points = rng.dirichlet(np.ones(k), size=m)
    # mix in boundary points: zero out one coordinate of some rows
    idx = rng.integers(0, k, size=m // 5)
    rows = rng.integers(0, m, size=m // 5)
    points[rows, idx] = 0.0
    dead = points.sum(axis=1) == 0.0
    points[dead, 0] = 1.0
    points /= points.sum(axis=1, keepdims=True)
    pred = rng.dirichlet(np.ones(k))
    return np.ascontiguousarray(points), np.ascontiguousarray(pred)


@pytest.mark.skipif(not kernels.NUMBA_ENABLED, reason="numba path disabled")
@pytest.mark.parametrize("k", [2, 3, 6, 10])
def test_numba_and_numpy_paths_agree(k):
    points, pred = random_batch(k, seed=k)
    for np_fn, nb_fn in PAIRS:
        np.testing.assert_allclose(nb_fn(points, pred), np_fn(points, pred), rtol=1e-13, atol=1e-15)
    theta = DirichletParams(1.0 + np.random.default_rng(k).uniform(0.01, 4.0, size=k))
    coeff, log_peak = so_kernel_args(theta)
    np.testing.assert_allclose(
        kernels.so_scores_numba(points, coeff, log_peak),
        kernels.so_scores_numpy(points, coeff, log_peak),
        rtol=1e-13,
        atol=1e-15,
    )


def test_batch_matches_scalar_functions():
    grid = build_grid(3, 12)
    _, pred = random_batch(3, seed=7)
    from credalcp.simplex import SimplexPoint, make_point

    q = make_point(pred)
    scalar = {
        "tv": np.array([tv_distance(grid.point(i), q) for i in range(grid.size)]),
        "kl": np.array([kl_divergence(grid.point(i), q) for i in range(grid.size)]),
        "ws": np.array([wasserstein1(grid.point(i), q) for i in range(grid.size)]),
        "inner": np.array([inner_score(grid.point(i), q) for i in range(grid.size)]),
    }
    np.testing.assert_array_equal(kernels.tv_scores(grid.points, q.probs), scalar["tv"])
    np.testing.assert_array_equal(kernels.kl_scores(grid.points, q.probs), scalar["kl"])
    np.testing.assert_array_equal(kernels.ws_scores(grid.points, q.probs), scalar["ws"])
    np.testing.assert_array_equal(kernels.inner_scores(grid.points, q.probs), scalar["inner"])

    theta = DirichletParams(np.array([2.5, 1.5, 3.0]))
    coeff, log_peak = so_kernel_args(theta)
    so_scalar = np.array(
        [dirichlet_relative_nonconformity(grid.point(i), theta) for i in range(grid.size)]
    )
    np.testing.assert_array_equal(kernels.so_scores(grid.points, coeff, log_peak), so_scalar)


def test_so_scores_clipped_at_zero():
    # a nearly flat concentration makes the relative likelihood hover at 1
    theta = DirichletParams(np.full(3, 1.0 + 1e-15))
    coeff, log_peak = so_kernel_args(theta)
    grid = build_grid(3, 20)
    scores = kernels.so_scores(grid.points, coeff, log_peak)
    assert np.all(scores >= 0.0)
    assert np.all(scores <= 1e-9)


def test_kl_zero_times_log_zero_convention():
    points = np.array([[0.0, 1.0], [0.5, 0.5]])
    pred = np.array([0.5, 0.5])
    out = kernels.kl_scores_numpy(points, pred)
    assert np.isfinite(out).all()
    assert abs(out[0] - np.log(2)) <= 1e-12
    assert out[1] == 0.0
