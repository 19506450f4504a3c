"""
Ellipsoids of the form ``{x | ||Ax + b|| <= 1}`` and the primitives the
partitioner and the rule engine are built on: minimum volume (Löwner-John)
ellipsoid fitting, membership, intersection, distance and expansion.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from . import exceptions as ex

log = logging.getLogger(__name__)

_SYMMETRY_TOL = 1e-10
_RANK_RTOL = 1e-10
_REFRESH_EVERY = 64


def as_points(points: np.ndarray) -> np.ndarray:
    """
    Returns ``points`` as a 2-D float array with one point per row.
    """
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"Expected a matrix of points, got shape {arr.shape}")
    return arr


def _as_vector(x: np.ndarray, dimension: int) -> np.ndarray:
    vec = np.asarray(x, dtype=float)
    if vec.ndim != 1 or vec.shape[0] != dimension:
        actual = vec.shape[-1] if vec.ndim else 0
        raise ex.DimensionMismatch(dimension, actual)
    return vec


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """
    The set ``{x | ||Ax + b|| <= 1}``.

    Args:
        shape: The symmetric positive definite matrix ``A``.
        offset: The vector ``b``. The center is ``-A^-1 b``.
        degenerate_radius: Set for the tiny balls standing in for isolated
            training points.
    Raises:
        InvalidEllipsoid
    """

    shape: np.ndarray
    offset: np.ndarray
    degenerate_radius: Optional[float] = None

    def __post_init__(self):
        A = np.array(self.shape, dtype=float)
        b = np.array(self.offset, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
            raise ex.InvalidEllipsoid(f"shape matrix must be square, got {A.shape}")
        if b.shape != (A.shape[0],):
            raise ex.DimensionMismatch(A.shape[0], b.size, "offset")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ex.InvalidEllipsoid("non-finite entries")

        scale = max(float(np.abs(A).max()), np.finfo(float).tiny)
        if np.abs(A - A.T).max() > _SYMMETRY_TOL * scale:
            raise ex.InvalidEllipsoid("shape matrix is not symmetric")
        A = (A + A.T) / 2
        try:
            linalg.cholesky(A, lower=True)
        except linalg.LinAlgError:
            raise ex.InvalidEllipsoid("shape matrix is not positive definite")

        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "shape", A)
        object.__setattr__(self, "offset", b)

    @classmethod
    def from_center(
        cls,
        center: np.ndarray,
        shape: np.ndarray,
        degenerate_radius: Optional[float] = None,
    ) -> "Ellipsoid":
        """
        Builds ``{x | ||A(x - center)|| <= 1}``.
        """
        A = np.asarray(shape, dtype=float)
        c = np.asarray(center, dtype=float)
        return cls(A, -A @ c, degenerate_radius)

    @classmethod
    def ball(
        cls, center: np.ndarray, radius: float, degenerate: bool = False
    ) -> "Ellipsoid":
        """
        Builds the Euclidean ball of ``radius`` around ``center``.

        Args:
            degenerate: Marks the ball as a stand-in for an isolated point.
        """
        c = np.asarray(center, dtype=float)
        A = np.eye(c.shape[0]) / radius
        return cls.from_center(c, A, radius if degenerate else None)

    @property
    def dimension(self) -> int:
        return self.shape.shape[0]

    @property
    def is_point(self) -> bool:
        return self.degenerate_radius is not None

    @cached_property
    def center(self) -> np.ndarray:
        c = -linalg.solve(self.shape, self.offset, assume_a="pos")
        c.setflags(write=False)
        return c

    @cached_property
    def gram(self) -> np.ndarray:
        """
        ``A^T A``, the matrix of the quadratic form centered on :attr:`center`.
        """
        H = self.shape.T @ self.shape
        return (H + H.T) / 2

    def quadratic_form(self) -> Tuple[np.ndarray, np.ndarray, float]:
        """
        Returns:
            ``(A^T A, A^T b, b^T b - 1)``, so that the ellipsoid is
            ``{x | x^T P x + 2 q^T x + r <= 0}``.
        """
        linear = self.shape.T @ self.offset
        return self.gram, linear, float(self.offset @ self.offset) - 1


@dataclass(frozen=True, eq=False)
class MveSolution:
    """
    Result of :func:`mve_fit`.

    Args:
        ellipsoid: The minimum volume ellipsoid.
        support_weights: Dual weights per input point (in input order),
            nonnegative and summing to 1. Points with positive weight touch
            the boundary.
        duality_gap: Relative optimality certificate at return.
        iterations: Coordinate ascent iterations used.
    """

    ellipsoid: Ellipsoid
    support_weights: np.ndarray
    duality_gap: float
    iterations: int


def affine_rank(points: np.ndarray) -> int:
    """
    Dimension of the affine hull of ``points``.
    """
    P = as_points(points)
    if P.shape[0] < 2:
        return 0
    s = linalg.svdvals(P - P.mean(axis=0))
    if s[0] == 0:
        return 0
    return int(np.sum(s > s[0] * _RANK_RTOL))


def _khachiyan(
    points: np.ndarray, tol: float, max_iter: int
) -> Tuple[np.ndarray, float, int]:
    """
    Khachiyan's barycentric coordinate ascent with Todd-Yildirim away steps on
    the lifted points ``(p, 1)``.

    Returns:
        ``(weights, gap, iterations)``
    """
    N, n = points.shape
    d = n + 1
    L = np.hstack([points, np.ones((N, 1))])
    u = np.full(N, 1.0 / N)

    def refresh():
        M = (L * u[:, None]).T @ L
        Minv = linalg.cho_solve(linalg.cho_factor(M), np.eye(d))
        return Minv, np.einsum("ij,jk,ik->i", L, Minv, L)

    Minv, omega = refresh()
    gap = np.inf
    for iteration in range(1, max_iter + 1):
        j = int(np.argmax(omega))
        support = np.flatnonzero(u > 0)
        k = int(support[np.argmin(omega[support])])
        eps_plus = omega[j] / d - 1
        eps_minus = 1 - omega[k] / d
        gap = max(eps_plus, eps_minus)
        if gap <= tol:
            return u, max(eps_plus, 0.0), iteration

        drop = False
        if eps_plus >= eps_minus:
            i = j
            t = (omega[j] - d) / (d * (omega[j] - 1))
        else:
            i = k
            bound = u[k] / (1 - u[k]) if u[k] < 1 else np.inf
            lam = (d - omega[k]) / (d * (omega[k] - 1)) if omega[k] > 1 else bound
            if lam >= bound:
                lam, drop = bound, True
            if lam * (omega[k] - 1) >= 1 - 1e-12:
                lam, drop = 0.5 * bound, False
            t = -lam

        s = t / (1 - t)
        denom = 1 + s * omega[i]
        g_vec = Minv @ L[i]
        g = L @ g_vec
        u *= 1 - t
        u[i] += t
        if drop:
            u[i] = 0.0

        if iteration % _REFRESH_EVERY == 0 or drop or denom <= 1e-8:
            u = np.clip(u, 0.0, None)
            u /= u.sum()
            Minv, omega = refresh()
        else:
            Minv = (Minv - s * np.outer(g_vec, g_vec) / denom) / (1 - t)
            omega = (omega - s * g * g / denom) / (1 - t)

    raise ex.NonConvergence("mve_fit", max_iter, float(gap))


def mve_fit(
    points: np.ndarray, tol_fit: float = 1e-7, max_iter: int = 100_000
) -> MveSolution:
    """
    Fits the minimum volume ellipsoid covering ``points``.

    The returned ellipsoid contains every point and is ``(1 + tol_fit)``
    optimal. Points are processed in lexicographic order, so the result does
    not depend on the input order.

    Args:
        points: ``N x n`` matrix, ``N > n``.
        tol_fit: Relative optimality tolerance.
        max_iter: Iteration cap.
    Raises:
        TooFewPoints, RankDeficient, NonConvergence
    """
    P = as_points(points)
    N, n = P.shape
    if N <= n:
        raise ex.TooFewPoints(N, n)
    rank = affine_rank(P)
    if rank < n:
        raise ex.RankDeficient(rank, n)

    order = np.lexsort(P.T[::-1])
    Q = P[order]
    # Dual weights are affine invariant, so iterate on standardized points.
    mean = Q.mean(axis=0)
    scale = np.abs(Q - mean).max()
    u, gap, iterations = _khachiyan((Q - mean) / scale, tol_fit, max_iter)
    log.debug(
        "MVE of %d points converged in %d iterations, gap %.2e", N, iterations, gap
    )

    c = Q.T @ u
    X = Q - c
    sigma = (X * u[:, None]).T @ X
    evals, evecs = linalg.eigh((sigma + sigma.T) / 2)
    A = (evecs / np.sqrt(n * evals)) @ evecs.T
    A = (A + A.T) / 2

    # Close the remaining optimality slack so every point is inside.
    reach = np.linalg.norm((Q - c) @ A, axis=1).max()
    A = A / reach

    weights = np.empty(N)
    weights[order] = u
    return MveSolution(Ellipsoid.from_center(c, A), weights, gap, iterations)


def try_fit(
    points: np.ndarray, tol_fit: float = 1e-7, max_iter: int = 100_000
) -> Optional[Ellipsoid]:
    """
    Like :func:`mve_fit` but returns ``None`` for point sets that have no
    full dimensional minimum volume ellipsoid.
    """
    try:
        return mve_fit(points, tol_fit, max_iter).ellipsoid
    except (ex.TooFewPoints, ex.RankDeficient) as e:
        log.debug("No ellipsoid for %d points: %s", len(points), e)
        return None


def levels(e: Ellipsoid, points: np.ndarray) -> np.ndarray:
    """
    Vectorized :func:`level` over the rows of ``points``.
    """
    P = as_points(points)
    if P.shape[1] != e.dimension:
        raise ex.DimensionMismatch(e.dimension, P.shape[1])
    return np.linalg.norm(P @ e.shape.T + e.offset, axis=1)


def level(e: Ellipsoid, x: np.ndarray) -> float:
    """
    Returns ``||Ax + b||``; ``x`` is inside ``e`` iff this is at most 1.
    """
    vec = _as_vector(x, e.dimension)
    return float(np.linalg.norm(e.shape @ vec + e.offset))


def contains(e: Ellipsoid, x: np.ndarray, tol_membership: float = 1e-9) -> bool:
    return level(e, x) <= 1 + tol_membership


def _canonical_key(e: Ellipsoid) -> Tuple[float, ...]:
    return tuple(e.center.tolist() + e.shape.ravel().tolist())


def intersects(
    e1: Ellipsoid, e2: Ellipsoid, tol: float = 1e-9, max_iter: int = 200
) -> bool:
    """
    Checks whether two ellipsoids share a point, i.e. whether
    ``min_x max(level(e1, x), level(e2, x)) <= 1 + tol``.

    The minimax is found through its concave dual
    ``max_t min_x t*level(e1, x)^2 + (1 - t)*level(e2, x)^2``, refined by
    bisection on ``t``. Each trial point is either a common point (primal
    certificate) or proves the ellipsoids apart (dual certificate).
    Tangent ellipsoids count as intersecting.
    """
    if e1.dimension != e2.dimension:
        raise ex.DimensionMismatch(e1.dimension, e2.dimension, "ellipsoid")
    if _canonical_key(e2) < _canonical_key(e1):
        e1, e2 = e2, e1

    if level(e2, e1.center) <= 1 + tol or level(e1, e2.center) <= 1 + tol:
        return True

    bound = (1 + tol) ** 2
    H1, H2 = e1.gram, e2.gram
    r1, r2 = H1 @ e1.center, H2 @ e2.center
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        t = (lo + hi) / 2
        x = linalg.solve(t * H1 + (1 - t) * H2, t * r1 + (1 - t) * r2, assume_a="pos")
        q1 = level(e1, x) ** 2
        q2 = level(e2, x) ** 2
        if max(q1, q2) <= bound:
            return True
        if t * q1 + (1 - t) * q2 > bound:
            return False
        if q1 > q2:
            lo = t
        else:
            hi = t
        if hi - lo <= 1e-16:
            break

    log.debug("Ellipsoids are tangent within tolerance; reporting an intersection")
    return True


def distance_to_point(e: Ellipsoid, x: np.ndarray, max_iter: int = 500) -> float:
    """
    Euclidean distance from ``x`` to ``e``, 0 for points inside.

    Solves the secular equation of the nearest boundary point by Newton's
    method in the eigenbasis of ``A^T A``.

    Raises:
        NonConvergence
    """
    vec = _as_vector(x, e.dimension)
    h, V = linalg.eigh(e.gram)
    p = V.T @ (vec - e.center)
    hp2 = h * p * p
    if hp2.sum() <= 1:
        return 0.0

    mu = 0.0
    for _ in range(max_iter):
        denom = 1 + mu * h
        f = np.sum(hp2 / denom**2) - 1
        fprime = -2 * np.sum(h * hp2 / denom**3)
        step = -f / fprime
        mu += step
        if abs(step) <= 1e-15 * mu or abs(f) <= 1e-15:
            return float(np.linalg.norm(mu * h * p / (1 + mu * h)))

    raise ex.NonConvergence("distance_to_point", max_iter, float(abs(f)))


def expand_to_cover(e: Ellipsoid, x: np.ndarray) -> Ellipsoid:
    """
    Scales ``e`` uniformly about its center until ``x`` lies on its boundary.
    Returns ``e`` itself when ``x`` is already inside.
    """
    reach = level(e, x)
    if reach <= 1:
        return e
    radius = e.degenerate_radius * reach if e.is_point else None
    return Ellipsoid(e.shape / reach, e.offset / reach, radius)


def volume_measure(e: Ellipsoid) -> float:
    """
    ``1 / det(A)``, which is ``sqrt(det((A^T A)^-1))``: the volume up to the
    constant of the unit ball.
    """
    _, logdet = np.linalg.slogdet(e.shape)
    return float(np.exp(-logdet))


def semi_axes(e: Ellipsoid) -> Tuple[np.ndarray, np.ndarray]:
    """
    Returns:
        ``(lengths, directions)``; ``directions[:, i]`` is the axis of
        length ``lengths[i]``, longest first.
    """
    evals, evecs = linalg.eigh(e.shape)
    lengths = 1 / evals
    order = np.argsort(lengths)[::-1]
    return lengths[order], evecs[:, order]
