"""
Nearest points of two reduced convex hulls and the separating slab through
them.

The reduced convex hull of ``X`` with cap ``D`` is the set of convex
combinations ``X^T u`` with every weight ``u_i <= D``. Its nearest point to
the reduced hull of ``Y`` solves::

    min 1/2 |X^T u - Y^T v|^2   s.t.  sum(u) = sum(v) = 1,  0 <= u, v <= D
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import exceptions as ex
from .config import DEFAULT_CONFIG, Config
from .geometry import Ellipsoid, as_points, intersects, try_fit

log = logging.getLogger(__name__)

_FEASIBILITY_RTOL = 1e-12
_DEGENERATE_NORM = 1e-10
_SIDE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class RchSolution:
    """
    Weights and nearest points of two reduced convex hulls.

    The slab is bounded by ``{x | x.w = alpha}`` through ``c`` and
    ``{x | x.w = beta}`` through ``d``; ``X`` lies on the ``x.w >= alpha``
    side.
    """

    u: np.ndarray
    v: np.ndarray
    c: np.ndarray
    d: np.ndarray
    w: np.ndarray
    alpha: float
    beta: float
    gap: float
    iterations: int
    disjoint: bool = False

    @property
    def objective(self) -> float:
        return 0.5 * float(self.w @ self.w)


@dataclass(frozen=True, eq=False)
class RchSplit:
    """
    Result of one :func:`rch_step`.

    Args:
        x_plus: Indices of ``X`` on the ``X`` side of the slab.
        y_minus: Indices of ``Y`` on the ``Y`` side of the slab.
        mve_x_plus: Minimum volume ellipsoid of ``X[x_plus]``, ``None`` when
            it does not exist.
        mve_y_minus: Same for ``Y[y_minus]``.
        disjoint: The ellipsoids of the full sets do not intersect; the split
            then keeps every point.
        solution: The hull solution the slab was taken from.
    """

    x_plus: np.ndarray
    y_minus: np.ndarray
    mve_x_plus: Optional[Ellipsoid]
    mve_y_minus: Optional[Ellipsoid]
    disjoint: bool
    solution: RchSolution


def project_capped_simplex(y: np.ndarray, D: float) -> np.ndarray:
    """
    Euclidean projection of ``y`` onto ``{u | sum(u) = 1, 0 <= u <= D}``.

    The projection is ``clip(y - tau, 0, D)`` for the threshold ``tau`` that
    makes it sum to 1. The sum is piecewise linear and non-increasing in
    ``tau`` with breakpoints at ``y_i`` and ``y_i - D``, so ``tau`` is found
    by evaluating it on the sorted breakpoints and interpolating.

    Raises:
        InfeasibleD
    """
    y = np.asarray(y, dtype=float)
    N = y.shape[0]
    if D <= 0 or D * N < 1 - _FEASIBILITY_RTOL:
        raise ex.InfeasibleD(D, N, N)
    if D * N <= 1 + _FEASIBILITY_RTOL:
        return np.full(N, 1.0 / N)

    ys = np.sort(y)
    prefix = np.concatenate([[0.0], np.cumsum(ys)])
    taus = np.unique(np.concatenate([ys, ys - D]))

    hi = np.searchsorted(ys, taus + D, side="left")
    lo = np.searchsorted(ys, taus, side="right")
    lo = np.minimum(lo, hi)
    mass = D * (N - hi) + (prefix[hi] - prefix[lo]) - taus * (hi - lo)

    k = int(np.flatnonzero(mass >= 1)[-1])
    if mass[k] == 1 or k == len(taus) - 1:
        tau = taus[k]
    else:
        step = (taus[k + 1] - taus[k]) / (mass[k] - mass[k + 1])
        tau = taus[k] + (mass[k] - 1) * step
    return np.clip(y - tau, 0.0, D)


def _frank_wolfe_vertex(g: np.ndarray, D: float) -> np.ndarray:
    # Minimizer of <g, s> over the capped simplex: fill D on the smallest
    # gradients first.
    s = np.zeros_like(g)
    order = np.argsort(g, kind="stable")
    full = min(len(g), int(np.floor((1 + _FEASIBILITY_RTOL) / D)))
    s[order[:full]] = D
    if full < len(g):
        s[order[full]] = max(1.0 - full * D, 0.0)
    return s


def solve_rch_qp(
    X: np.ndarray,
    Y: np.ndarray,
    D: float,
    tol_qp: float = 1e-9,
    max_iter: int = 50_000,
) -> RchSolution:
    """
    Finds the nearest points of the reduced convex hulls of ``X`` and ``Y``.

    Projected gradient on the product of the two capped simplices, with a
    Barzilai-Borwein trial step and exact line search along the projected
    direction, so the objective never increases. Stops once the Frank-Wolfe
    duality gap is below ``tol_qp`` (relative to the squared data scale).

    Args:
        X: ``N x n`` points.
        Y: ``M x n`` points.
        D: Weight cap, at least ``1 / min(N, M)``.
    Raises:
        InfeasibleD, NonConvergence
    """
    X = as_points(X)
    Y = as_points(Y)
    if X.shape[1] != Y.shape[1]:
        raise ex.DimensionMismatch(X.shape[1], Y.shape[1])
    N, M = X.shape[0], Y.shape[0]
    if N == 0 or M == 0 or D <= 0 or D * min(N, M) < 1 - _FEASIBILITY_RTOL:
        raise ex.InfeasibleD(D, N, M)
    D = min(D, 1.0)

    scale = max(float(np.abs(np.vstack([X, Y])).max()), 1.0)
    threshold = tol_qp * scale**2
    lipschitz = np.linalg.norm(X, 2) ** 2 + np.linalg.norm(Y, 2) ** 2
    step = 1.0 / max(lipschitz, np.finfo(float).tiny)

    u = np.full(N, 1.0 / N)
    v = np.full(M, 1.0 / M)
    r = X.T @ u - Y.T @ v
    gap = np.inf
    for iteration in range(1, max_iter + 1):
        gu = X @ r
        gv = -(Y @ r)
        gap = float(gu @ (u - _frank_wolfe_vertex(gu, D)))
        gap += float(gv @ (v - _frank_wolfe_vertex(gv, D)))
        if gap <= threshold:
            break

        du = project_capped_simplex(u - step * gu, D) - u
        dv = project_capped_simplex(v - step * gv, D) - v
        dr = X.T @ du - Y.T @ dv
        curvature = float(dr @ dr)
        slope = float(gu @ du + gv @ dv)
        if slope >= 0:
            # The trial step went nowhere; fall back to the safe step size.
            if step <= 1.0 / lipschitz:
                break
            step = 1.0 / lipschitz
            continue

        theta = 1.0 if curvature <= 0 else min(1.0, -slope / curvature)
        u = u + theta * du
        v = v + theta * dv
        r = r + theta * dr

        # Barzilai-Borwein: |dz|^2 / <dz, H dz> with H = K^T K.
        if curvature > 0:
            step = float(du @ du + dv @ dv) / curvature
        else:
            step = 1.0 / lipschitz
    else:
        raise ex.NonConvergence("solve_rch_qp", max_iter, gap)

    log.debug("RCH QP (D=%.4g) converged in %d iterations, gap %.2e", D, iteration, gap)
    c = X.T @ u
    d = Y.T @ v
    w = c - d
    return RchSolution(
        u=u,
        v=v,
        c=c,
        d=d,
        w=w,
        alpha=float(c @ w),
        beta=float(d @ w),
        gap=max(gap, 0.0),
        iterations=iteration,
    )


def rch_step(X: np.ndarray, Y: np.ndarray, config: Config = DEFAULT_CONFIG) -> RchSplit:
    """
    Splits ``X`` and ``Y`` by the slab between their reduced convex hulls,
    with the cap ``D = 1 / min(|X|, |Y|)``.

    When both sets have a minimum volume ellipsoid and the two ellipsoids do
    not intersect, the sets are already separated and the split keeps all
    points.

    Raises:
        DegenerateSlab: The reduced hulls share their nearest point.
    """
    X = as_points(X)
    Y = as_points(Y)
    if X.shape[1] != Y.shape[1]:
        raise ex.DimensionMismatch(X.shape[1], Y.shape[1])
    n = X.shape[1]

    mve_x = try_fit(X, config.tol_fit, config.max_iter_fit) if len(X) > n else None
    mve_y = try_fit(Y, config.tol_fit, config.max_iter_fit) if len(Y) > n else None

    D = 1.0 / min(len(X), len(Y))
    solution = solve_rch_qp(X, Y, D, config.tol_qp, config.max_iter_qp)

    if (
        mve_x is not None
        and mve_y is not None
        and not intersects(mve_x, mve_y, config.tol_membership)
    ):
        log.debug("Ellipsoids of %d and %d points are disjoint", len(X), len(Y))
        return RchSplit(
            x_plus=np.arange(len(X)),
            y_minus=np.arange(len(Y)),
            mve_x_plus=mve_x,
            mve_y_minus=mve_y,
            disjoint=True,
            solution=replace(solution, disjoint=True),
        )

    scale = max(float(np.abs(np.vstack([X, Y])).max()), 1.0)
    norm = float(np.linalg.norm(solution.w))
    if norm <= _DEGENERATE_NORM * scale:
        raise ex.DegenerateSlab(norm)

    w = solution.w
    alpha, beta = solution.alpha, solution.beta
    x_plus = np.flatnonzero(X @ w >= alpha - _SIDE_TOL * max(1.0, abs(alpha)))
    y_minus = np.flatnonzero(Y @ w <= beta + _SIDE_TOL * max(1.0, abs(beta)))

    def fit_side(P: np.ndarray, idx: np.ndarray) -> Optional[Ellipsoid]:
        if len(idx) == len(P):
            return mve_x if P is X else mve_y
        if len(idx) <= n:
            return None
        return try_fit(P[idx], config.tol_fit, config.max_iter_fit)

    log.debug(
        "Slab |w|=%.4g keeps %d/%d and %d/%d points",
        norm,
        len(x_plus),
        len(X),
        len(y_minus),
        len(Y),
    )
    return RchSplit(
        x_plus=x_plus,
        y_minus=y_minus,
        mve_x_plus=fit_side(X, x_plus),
        mve_y_minus=fit_side(Y, y_minus),
        disjoint=False,
        solution=solution,
    )
