import numpy as np
import pytest

from ellipart import exceptions as ex
from ellipart.geometry import (
    Ellipsoid,
    affine_rank,
    contains,
    distance_to_point,
    expand_to_cover,
    intersects,
    level,
    levels,
    mve_fit,
    semi_axes,
    try_fit,
    volume_measure,
)


def axis_ellipse(center, a, b):
    return Ellipsoid.from_center(np.array(center, float), np.diag([1 / a, 1 / b]))


@pytest.mark.parametrize(
    "shape, offset, error",
    [
        ([[1.0, 0.5], [0.0, 1.0]], [0.0, 0.0], ex.InvalidEllipsoid),
        ([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0], ex.InvalidEllipsoid),
        ([[1.0, 0.0], [0.0, 0.0]], [0.0, 0.0], ex.InvalidEllipsoid),
        ([[1.0, 0.0], [0.0, np.nan]], [0.0, 0.0], ex.InvalidEllipsoid),
        ([[1.0, 0.0], [0.0, 1.0]], [0.0, 0.0, 0.0], ex.DimensionMismatch),
        ([1.0, 2.0], [0.0, 0.0], ex.InvalidEllipsoid),
    ],
)
def test_invalid_ellipsoids_are_rejected(shape, offset, error):
    with pytest.raises(error):
        Ellipsoid(np.array(shape), np.array(offset))


def test_ellipsoid_arrays_are_read_only():
    e = Ellipsoid.ball(np.zeros(2), 1.0)
    with pytest.raises(ValueError):
        e.shape[0, 0] = 5.0


def test_ball_center_and_boundary():
    e = Ellipsoid.ball(np.array([1.0, -2.0]), 0.5)
    assert np.allclose(e.center, [1.0, -2.0])
    assert level(e, np.array([1.5, -2.0])) == pytest.approx(1.0)
    assert not e.is_point
    assert Ellipsoid.ball(np.zeros(2), 0.5, degenerate=True).is_point


def test_quadratic_form_matches_level(rng):
    e = axis_ellipse((1.0, 2.0), 3.0, 0.5)
    P, q, r = e.quadratic_form()
    for x in rng.normal(size=(5, 2)):
        assert x @ P @ x + 2 * q @ x + r == pytest.approx(level(e, x) ** 2 - 1)


def test_affine_rank():
    assert affine_rank(np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])) == 1
    assert affine_rank(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])) == 2
    assert affine_rank(np.array([[3.0, 3.0]])) == 0


def test_mve_of_square_is_circumscribed_circle():
    square = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
    solution = mve_fit(square)
    e = solution.ellipsoid
    assert np.allclose(e.center, 0.0, atol=1e-12)
    assert np.allclose(e.shape, np.eye(2) / np.sqrt(2))
    assert np.allclose(solution.support_weights, 0.25)


def test_mve_contains_every_point(rng):
    points = rng.normal(size=(60, 3)) @ rng.normal(size=(3, 3))
    solution = mve_fit(points)
    assert np.all(levels(solution.ellipsoid, points) <= 1 + 1e-9)
    assert solution.duality_gap <= 1e-7
    assert solution.support_weights.sum() == pytest.approx(1.0)
    assert np.all(solution.support_weights >= 0)


def test_mve_support_points_touch_the_boundary(rng):
    points = rng.normal(size=(40, 2))
    solution = mve_fit(points, tol_fit=1e-10)
    support = solution.support_weights > 1e-6
    assert np.allclose(levels(solution.ellipsoid, points[support]), 1.0, atol=1e-4)


def test_mve_does_not_depend_on_point_order(rng):
    points = rng.normal(size=(30, 2))
    first = mve_fit(points)
    order = rng.permutation(len(points))
    second = mve_fit(points[order])
    assert np.array_equal(first.ellipsoid.shape, second.ellipsoid.shape)
    assert np.array_equal(first.ellipsoid.offset, second.ellipsoid.offset)
    assert np.array_equal(first.support_weights[order], second.support_weights)


def test_mve_is_affine_equivariant(rng):
    points = rng.normal(size=(50, 2))
    T = np.array([[2.0, 0.5], [0.0, 0.5]])
    moved = points @ T.T + np.array([10.0, -3.0])
    ratio = volume_measure(mve_fit(moved).ellipsoid) / volume_measure(
        mve_fit(points).ellipsoid
    )
    assert ratio == pytest.approx(abs(np.linalg.det(T)), rel=1e-4)


@pytest.mark.parametrize(
    "points, error",
    [
        (np.array([[0.0, 0.0], [1.0, 1.0]]), ex.TooFewPoints),
        (np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]), ex.RankDeficient),
    ],
)
def test_mve_rejects_degenerate_sets(points, error):
    with pytest.raises(error):
        mve_fit(points)
    assert try_fit(points) is None


def test_mve_iteration_cap(rng):
    with pytest.raises(ex.NonConvergence):
        mve_fit(rng.normal(size=(200, 2)), tol_fit=1e-12, max_iter=2)


def textbook_mve_volume(points, eps=1e-5, max_iter=1_000_000):
    """
    Plain Khachiyan iteration without away steps, scaled to cover every point.
    """
    N, n = points.shape
    d = n + 1
    Q = np.hstack([points, np.ones((N, 1))]).T
    u = np.full(N, 1.0 / N)
    for _ in range(max_iter):
        omega = np.einsum("ij,ij->j", Q, np.linalg.solve((Q * u) @ Q.T, Q))
        j = int(np.argmax(omega))
        if omega[j] <= d * (1 + eps):
            break
        step = (omega[j] - d) / (d * (omega[j] - 1))
        u = (1 - step) * u
        u[j] += step
    c = points.T @ u
    E = np.linalg.inv((points.T * u) @ points - np.outer(c, c)) / n
    X = points - c
    E = E / np.einsum("ij,jk,ik->i", X, E, X).max()
    return 1 / np.sqrt(np.linalg.det(E))


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("n", [2, 3])
def test_mve_volume_matches_plain_khachiyan(seed, n):
    rng = np.random.default_rng(seed)
    points = rng.normal(size=(12, n)) @ rng.normal(size=(n, n))
    ours = volume_measure(mve_fit(points).ellipsoid)
    reference = textbook_mve_volume(points)
    assert ours <= reference * (1 + 1e-6)
    assert ours == pytest.approx(reference, rel=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("n", [2, 3, 5, 10])
def test_mve_duality_gap_certificate(n):
    tol_fit = 1e-7
    rng = np.random.default_rng(n)
    for _ in range(25):
        points = rng.normal(size=(3 * n + 5, n))
        solution = mve_fit(points, tol_fit)
        assert solution.duality_gap <= n * tol_fit
        assert np.all(levels(solution.ellipsoid, points) <= 1 + 1e-9)

        # Recompute the certificate from the returned weights.
        u = solution.support_weights
        assert u.sum() == pytest.approx(1.0)
        assert np.all(u >= -1e-12)
        lifted = np.hstack([points, np.ones((len(points), 1))])
        inv = np.linalg.inv((lifted * u[:, None]).T @ lifted)
        omega = np.einsum("ij,jk,ik->i", lifted, inv, lifted)
        assert omega.max() <= (n + 1) * (1 + n * tol_fit)


def test_contains_and_dimension_checks():
    e = Ellipsoid.ball(np.zeros(2), 1.0)
    assert contains(e, np.array([0.6, 0.8]))
    assert not contains(e, np.array([0.7, 0.8]))
    with pytest.raises(ex.DimensionMismatch):
        level(e, np.zeros(3))
    with pytest.raises(ex.DimensionMismatch):
        levels(e, np.zeros((4, 3)))


@pytest.mark.parametrize(
    "second_center, expected",
    [
        ((1.5, 0.0), True),
        ((2.0, 0.0), True),
        ((3.0, 0.0), False),
        ((0.0, 0.0), True),
    ],
)
def test_intersects_unit_balls(second_center, expected):
    e1 = Ellipsoid.ball(np.zeros(2), 1.0)
    e2 = Ellipsoid.ball(np.array(second_center), 1.0)
    assert intersects(e1, e2) is expected
    assert intersects(e2, e1) is expected


@pytest.mark.parametrize(
    "ball_center, expected",
    [
        # Neither center lies in the other ellipsoid for these.
        ((0.0, 1.1), True),
        ((0.0, 1.3), False),
    ],
)
def test_intersects_flat_ellipse_and_ball(ball_center, expected):
    flat = axis_ellipse((0.0, 0.0), 3.0, 0.2)
    ball = Ellipsoid.ball(np.array(ball_center), 1.0)
    assert intersects(flat, ball) is expected
    assert intersects(ball, flat) is expected


def test_intersects_dimension_mismatch():
    with pytest.raises(ex.DimensionMismatch):
        intersects(Ellipsoid.ball(np.zeros(2), 1.0), Ellipsoid.ball(np.zeros(3), 1.0))


def random_ellipse(rng):
    angle = rng.uniform(0, np.pi)
    R = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    axes = rng.uniform(0.3, 2.0, size=2)
    shape = R @ np.diag(1 / axes) @ R.T
    return Ellipsoid.from_center(rng.uniform(-3, 3, size=2), shape)


def test_intersects_agrees_with_grid_sampling():
    rng = np.random.default_rng(7)
    ticks = np.linspace(-6, 6, 481)
    grid = np.stack(np.meshgrid(ticks, ticks), axis=-1).reshape(-1, 2)
    found = 0
    for _ in range(100):
        e1, e2 = random_ellipse(rng), random_ellipse(rng)
        # Smallest max(level) over the grid; grid spacing is 0.025 and no
        # semi-axis is below 0.3, so a common point has a grid neighbour
        # with both levels below 1.07.
        worst = np.maximum(levels(e1, grid), levels(e2, grid)).min()
        if intersects(e1, e2):
            found += 1
            assert worst <= 1.07
        else:
            assert worst > 1
    assert 0 < found < 100


@pytest.mark.parametrize(
    "ellipsoid, point, expected",
    [
        (Ellipsoid.ball(np.zeros(2), 1.0), (3.0, 4.0), 4.0),
        (Ellipsoid.ball(np.zeros(2), 1.0), (0.3, 0.3), 0.0),
        (axis_ellipse((0.0, 0.0), 2.0, 1.0), (5.0, 0.0), 3.0),
        (axis_ellipse((0.0, 0.0), 2.0, 1.0), (0.0, -4.0), 3.0),
        (axis_ellipse((1.0, 1.0), 1.0, 1.0), (1.0, 3.0), 1.0),
    ],
)
def test_distance_to_point(ellipsoid, point, expected):
    assert distance_to_point(ellipsoid, np.array(point)) == pytest.approx(expected)


def test_expand_to_cover_scales_about_the_center():
    e = axis_ellipse((1.0, 0.0), 2.0, 1.0)
    x = np.array([1.0, 3.0])
    expanded = expand_to_cover(e, x)
    assert level(expanded, x) == pytest.approx(1.0)
    assert np.allclose(expanded.center, e.center)
    assert expand_to_cover(e, np.array([1.0, 0.0])) is e


def test_expand_to_cover_keeps_point_marker():
    e = Ellipsoid.ball(np.zeros(2), 1e-6, degenerate=True)
    expanded = expand_to_cover(e, np.array([1.0, 0.0]))
    assert expanded.is_point
    assert expanded.degenerate_radius == pytest.approx(1.0)


def test_volume_measure_and_semi_axes():
    assert volume_measure(Ellipsoid.ball(np.zeros(2), 3.0)) == pytest.approx(9.0)
    lengths, directions = semi_axes(axis_ellipse((0.0, 0.0), 1.0, 3.0))
    assert np.allclose(lengths, [3.0, 1.0])
    assert np.allclose(np.abs(directions[:, 0]), [0.0, 1.0])
