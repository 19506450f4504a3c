import numpy as np
import pytest
from scipy import optimize

from ellipart import exceptions as ex
from ellipart.config import Config
from ellipart.rch import project_capped_simplex, rch_step, solve_rch_qp


@pytest.mark.parametrize(
    "y, D, expected",
    [
        ([0.5, 0.5, 0.5], 1.0, [1 / 3, 1 / 3, 1 / 3]),
        ([1.0, 0.0, 0.0], 0.5, [0.5, 0.25, 0.25]),
        ([1.0, 0.0, 0.0], 1.0, [1.0, 0.0, 0.0]),
        ([3.0, 1.0], 1.0, [1.0, 0.0]),
        ([0.2, 0.3, 0.5], 1.0, [0.2, 0.3, 0.5]),
        ([9.0, -4.0, 2.0], 1 / 3, [1 / 3, 1 / 3, 1 / 3]),
    ],
)
def test_project_capped_simplex(y, D, expected):
    assert np.allclose(project_capped_simplex(np.array(y), D), expected)


def test_projection_is_feasible(rng):
    for _ in range(20):
        y = rng.normal(scale=3.0, size=12)
        u = project_capped_simplex(y, 0.2)
        assert u.sum() == pytest.approx(1.0)
        assert np.all(u >= 0)
        assert np.all(u <= 0.2 + 1e-12)


def test_projection_rejects_infeasible_cap():
    with pytest.raises(ex.InfeasibleD):
        project_capped_simplex(np.zeros(3), 0.2)


def test_singleton_hulls():
    solution = solve_rch_qp(np.array([[1.0, 2.0]]), np.array([[-1.0, 0.0]]), 1.0)
    assert np.allclose(solution.c, [1.0, 2.0])
    assert np.allclose(solution.d, [-1.0, 0.0])
    assert np.allclose(solution.w, [2.0, 2.0])
    assert solution.objective == pytest.approx(4.0)


def test_balanced_sets_with_smallest_cap_meet_at_centroids(rng):
    X = rng.normal(size=(10, 3))
    Y = rng.normal(size=(10, 3)) + 1.0
    solution = solve_rch_qp(X, Y, 1 / 10)
    assert np.linalg.norm(solution.c - X.mean(axis=0)) <= 1e-7
    assert np.linalg.norm(solution.d - Y.mean(axis=0)) <= 1e-7


def test_full_hulls_give_nearest_vertices():
    X = np.array([[2.0, 0.0], [3.0, 0.0], [2.5, 1.0]])
    Y = np.array([[-2.0, 0.0], [-3.0, 0.0], [-2.5, -1.0]])
    solution = solve_rch_qp(X, Y, 1.0)
    assert np.allclose(solution.c, [2.0, 0.0], atol=1e-4)
    assert np.allclose(solution.d, [-2.0, 0.0], atol=1e-4)
    assert solution.alpha == pytest.approx(float(solution.c @ solution.w))
    assert solution.beta == pytest.approx(float(solution.d @ solution.w))


def test_reduced_hulls_shrink_towards_the_centroid():
    X = np.array([[2.0, 0.0], [3.0, 0.0]])
    Y = np.array([[-2.0, 0.0], [-3.0, 0.0]])
    solution = solve_rch_qp(X, Y, 0.5)
    assert np.allclose(solution.c, [2.5, 0.0])
    assert np.allclose(solution.d, [-2.5, 0.0])


def test_weights_respect_the_cap(rng):
    X = rng.normal(size=(20, 2))
    Y = rng.normal(size=(15, 2)) + 0.5
    D = 0.25
    solution = solve_rch_qp(X, Y, D)
    for weights in (solution.u, solution.v):
        assert weights.sum() == pytest.approx(1.0)
        assert np.all(weights >= 0)
        assert np.all(weights <= D + 1e-12)


def test_qp_rejects_bad_input():
    with pytest.raises(ex.InfeasibleD):
        solve_rch_qp(np.zeros((3, 2)), np.ones((5, 2)), 0.2)
    with pytest.raises(ex.DimensionMismatch):
        solve_rch_qp(np.zeros((3, 2)), np.ones((3, 3)), 1.0)


def test_rch_step_on_disjoint_sets_keeps_everything(rng):
    X = rng.normal(size=(30, 2))
    Y = rng.normal(size=(25, 2)) + 30.0
    split = rch_step(X, Y, Config())
    assert split.disjoint
    assert split.solution.disjoint
    assert list(split.x_plus) == list(range(30))
    assert list(split.y_minus) == list(range(25))
    assert split.mve_x_plus is not None and split.mve_y_minus is not None


def test_rch_step_on_overlapping_sets_splits_by_the_slab(rng):
    X = rng.normal(size=(60, 2))
    Y = rng.normal(size=(40, 2)) + np.array([1.0, 0.0])
    split = rch_step(X, Y, Config())
    sol = split.solution
    assert not split.disjoint
    assert 0 < len(split.x_plus) < len(X)
    assert 0 < len(split.y_minus) < len(Y)
    tol = 1e-9 * max(1.0, abs(sol.alpha))
    assert np.all(X[split.x_plus] @ sol.w >= sol.alpha - tol)
    assert np.all(Y[split.y_minus] @ sol.w <= sol.beta + 1e-9 * max(1.0, abs(sol.beta)))


def test_rch_step_on_identical_sets_has_no_slab(rng):
    X = rng.normal(size=(8, 2))
    with pytest.raises(ex.DegenerateSlab):
        rch_step(X, X.copy(), Config())


def test_rch_step_leaves_small_sides_without_ellipsoid():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [1.001, 0.998]])
    Y = np.array([[0.0, 1.0], [1.0, 0.0], [0.002, 1.003]])
    split = rch_step(X, Y, Config())
    assert not split.disjoint
    assert len(split.x_plus) == 2
    assert len(split.y_minus) == 2
    assert split.mve_x_plus is None
    assert split.mve_y_minus is None


def test_rch_step_on_plain_xor_has_no_slab():
    # Both diagonals have their midpoint at (0.5, 0.5).
    X = np.array([[0.0, 0.0], [1.0, 1.0]])
    Y = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ex.DegenerateSlab):
        rch_step(X, Y, Config())


def test_smallest_cap_gives_centroids_on_random_instances():
    rng = np.random.default_rng(11)
    for _ in range(50):
        N = int(rng.integers(3, 30))
        n = int(rng.integers(2, 6))
        X = rng.normal(size=(N, n))
        Y = rng.normal(size=(N, n)) + rng.uniform(-2, 2, size=n)
        solution = solve_rch_qp(X, Y, 1 / N)
        assert np.linalg.norm(solution.c - X.mean(axis=0)) <= 1e-6
        assert np.linalg.norm(solution.d - Y.mean(axis=0)) <= 1e-6


def multistart_objective(X, Y, D, rng, starts=100):
    """
    Best objective found by SLSQP from random starting weights.
    """
    N, M = len(X), len(Y)

    def objective(z):
        r = X.T @ z[:N] - Y.T @ z[N:]
        return 0.5 * float(r @ r)

    def gradient(z):
        r = X.T @ z[:N] - Y.T @ z[N:]
        return np.concatenate([X @ r, -(Y @ r)])

    constraints = [
        {"type": "eq", "fun": lambda z: z[:N].sum() - 1},
        {"type": "eq", "fun": lambda z: z[N:].sum() - 1},
    ]
    best = np.inf
    for _ in range(starts):
        start = np.concatenate([rng.dirichlet(np.ones(N)), rng.dirichlet(np.ones(M))])
        result = optimize.minimize(
            objective,
            start,
            jac=gradient,
            method="SLSQP",
            bounds=[(0.0, D)] * (N + M),
            constraints=constraints,
            options={"ftol": 1e-15, "maxiter": 1000},
        )
        best = min(best, objective(np.clip(result.x, 0.0, D)))
    return best


@pytest.mark.parametrize("seed", [0, 1])
def test_objective_matches_multistart_search(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(3, 2))
    Y = rng.normal(size=(3, 2)) + np.array([1.5, 0.0])
    solution = solve_rch_qp(X, Y, 0.5, tol_qp=1e-12)
    assert solution.objective == pytest.approx(
        multistart_objective(X, Y, 0.5, rng), abs=1e-8
    )


def test_solution_moves_with_the_data(rng):
    X = rng.normal(size=(12, 2))
    Y = rng.normal(size=(12, 2)) + np.array([3.0, 1.0])
    shift = np.array([10.0, -7.0])
    before = solve_rch_qp(X, Y, 0.25, tol_qp=1e-12)
    after = solve_rch_qp(X + shift, Y + shift, 0.25, tol_qp=1e-12)
    assert after.objective == pytest.approx(before.objective, abs=1e-8)
    assert np.allclose(after.w, before.w, atol=1e-4)
    assert np.allclose(after.c, before.c + shift, atol=1e-3)
    assert np.allclose(after.d, before.d + shift, atol=1e-3)
