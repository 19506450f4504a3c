"""
Sequential partitioning of a two-label training set into labelled minimum
volume ellipsoids.

Each iteration separates the current working sets by the slab between
their reduced convex hulls, shrinks each side until its ellipsoid holds at
most ``n_imp`` points of the other label, records the ellipsoids and removes
the points they were fit to. Whatever cannot be separated further is
covered by one terminal ellipsoid per label, or kept as tiny balls around
the individual points.
"""

import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import exceptions as ex
from .config import DEFAULT_CONFIG, Config
from .datasets import LabeledDataset, constant_features, jitter_values
from .geometry import Ellipsoid, as_points, levels, try_fit
from .rch import rch_step

log = logging.getLogger(__name__)

POSITIVE = 1
NEGATIVE = -1

MAIN = "main"
TERMINAL = "terminal"
LEFTOVER = "leftover"

_POINT_RADIUS_FRAC = 1e-6


@dataclass(frozen=True, eq=False)
class Cell:
    """
    One labelled ellipsoid of a partition.

    Args:
        id: Position in :attr:`PartitionModel.cells`.
        label: ``+1`` or ``-1``.
        origin: ``"main"`` for ellipsoids of the separating loop,
            ``"terminal"`` for the final ellipsoid of a label and
            ``"leftover"`` for balls around isolated points.
        n: Training points with label ``+1`` inside, over the full set.
        m: Training points with label ``-1`` inside, over the full set.
        impurity: Points of the other label inside when it was created.
        iteration: Loop iteration that created it, 0 for the terminal step.
    """

    id: int
    label: int
    ellipsoid: Ellipsoid
    origin: str
    n: int = 0
    m: int = 0
    impurity: int = 0
    iteration: int = 0


@dataclass(frozen=True)
class IterationRecord:
    """
    What one iteration of the separating loop did.
    """

    iteration: int
    created: Tuple[int, ...]
    removed_pos: int
    removed_neg: int
    impurity: Tuple[int, ...]
    disjoint: bool
    normal: Tuple[float, ...]
    alpha: float
    beta: float


@dataclass(frozen=True, eq=False)
class PartitionModel:
    """
    A trained partition: labelled ellipsoids plus the training points their
    counts are measured on.
    """

    cells: Tuple[Cell, ...]
    points: np.ndarray
    labels: np.ndarray
    config: Config = DEFAULT_CONFIG
    iterations: int = 0
    history: Tuple[IterationRecord, ...] = ()
    break_reason: str = ""
    trained_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def __post_init__(self):
        points = as_points(self.points).copy()
        labels = np.asarray(self.labels, dtype=int).copy()
        points.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "history", tuple(self.history))

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def totals(self) -> Tuple[int, int]:
        """
        ``(N, M)``: training points labelled ``+1`` and ``-1``.
        """
        n = int(np.sum(self.labels == POSITIVE))
        return n, len(self.labels) - n

    @property
    def ellipsoids_pos(self) -> List[Ellipsoid]:
        return [c.ellipsoid for c in self.cells if c.label == POSITIVE]

    @property
    def ellipsoids_neg(self) -> List[Ellipsoid]:
        return [c.ellipsoid for c in self.cells if c.label == NEGATIVE]

    @property
    def train_counts(self) -> List[Tuple[int, int]]:
        return [(c.n, c.m) for c in self.cells]

    @property
    def leftovers(self) -> List[Cell]:
        return [c for c in self.cells if c.origin == LEFTOVER]

    @cached_property
    def membership(self) -> np.ndarray:
        """
        ``cells x points`` matrix; entry ``(i, j)`` is true when training
        point ``j`` lies in cell ``i``.
        """
        return membership_matrix(
            [c.ellipsoid for c in self.cells], self.points, self.config.tol_membership
        )


def membership_matrix(
    ellipsoids: Sequence[Ellipsoid], points: np.ndarray, tol_membership: float
) -> np.ndarray:
    if not len(ellipsoids):
        return np.zeros((0, len(points)), dtype=bool)
    return np.array([levels(e, points) <= 1 + tol_membership for e in ellipsoids])


class _WorkingPoints:
    """
    The training points as seen by the partitioner. Features that are
    constant over a working set get uniform noise from a table drawn once per
    run, so re-jittering a point always gives the same value.
    """

    def __init__(self, points: np.ndarray, config: Config):
        self.original = points
        self.values = points.copy()
        self.radius_frac = config.jitter_radius_frac
        self._noise = np.random.default_rng(config.seed).uniform(
            -1.0, 1.0, size=points.shape
        )

    def __getitem__(self, idx: np.ndarray) -> np.ndarray:
        return self.values[idx]

    def jitter_constant(self, idx: np.ndarray) -> bool:
        """
        Jitters the features constant over the points at ``idx``.

        Returns:
            Whether any feature was jittered.
        """
        constant = constant_features(self.values[idx])
        if not constant.size:
            return False
        log.warning(
            "Jittering constant features %s of %d points", constant.tolist(), len(idx)
        )
        rows = np.asarray(idx)[:, None]
        self.values[rows, constant] = jitter_values(
            self.original[rows, constant], self._noise[rows, constant], self.radius_frac
        )
        return True


@dataclass(frozen=True, eq=False)
class Refinement:
    """
    Result of :func:`refine_side`.

    Args:
        indices: The points kept.
        ellipsoid: Their minimum volume ellipsoid, ``None`` when it does not
            exist.
        impurity: Points of the other label inside ``ellipsoid``.
        within_budget: Whether the ellipsoid exists and its impurity is
            within the budget.
    """

    indices: np.ndarray
    ellipsoid: Optional[Ellipsoid]
    impurity: Optional[int]
    within_budget: bool


def _refine(
    work: _WorkingPoints,
    side: np.ndarray,
    other: np.ndarray,
    config: Config,
    ellipsoid: Optional[Ellipsoid] = None,
) -> Refinement:
    n = work.values.shape[1]
    impurity: Optional[int] = None
    while True:
        if len(side) <= n:
            log.debug("%d points left, too few for an ellipsoid", len(side))
            return Refinement(side, None, impurity, False)
        if work.jitter_constant(side):
            ellipsoid = None
        if ellipsoid is None:
            ellipsoid = try_fit(work[side], config.tol_fit, config.max_iter_fit)
            if ellipsoid is None:
                return Refinement(side, None, impurity, False)

        inside = levels(ellipsoid, work[other]) <= 1 + config.tol_membership
        impurity = int(np.sum(inside))
        if impurity <= config.n_imp:
            return Refinement(side, ellipsoid, impurity, True)

        try:
            split = rch_step(work[side], work[other], config)
        except ex.DegenerateSlab:
            return Refinement(side, ellipsoid, impurity, False)

        kept = side[split.x_plus]
        if len(kept) == 0 or len(kept) == len(side):
            return Refinement(side, ellipsoid, impurity, False)
        log.debug(
            "Refined %d -> %d points (impurity %d)", len(side), len(kept), impurity
        )
        side, ellipsoid = kept, split.mve_x_plus


def refine_side(
    S: np.ndarray, O: np.ndarray, config: Config = DEFAULT_CONFIG
) -> Refinement:
    """
    Shrinks ``S`` by repeated slab splits against ``O`` until the ellipsoid
    of what is left holds at most ``config.n_imp`` points of ``O``.

    Stops early, with ``within_budget`` false, when the remaining points have
    no ellipsoid or the slab no longer separates anything.

    Returns:
        A :class:`Refinement` whose indices point into ``S``.
    """
    S = as_points(S)
    O = as_points(O)
    if S.shape[1] != O.shape[1]:
        raise ex.DimensionMismatch(S.shape[1], O.shape[1])
    work = _WorkingPoints(np.vstack([S, O]), config)
    other = np.arange(len(S), len(S) + len(O))
    return _refine(work, np.arange(len(S)), other, config)


def _point_radius(points: np.ndarray) -> float:
    diagonal = float(np.linalg.norm(np.ptp(points, axis=0)))
    return _POINT_RADIUS_FRAC * (diagonal if diagonal > 0 else 1.0)


def partition(
    X: np.ndarray, Y: np.ndarray, config: Config = DEFAULT_CONFIG
) -> PartitionModel:
    """
    Partitions points ``X`` (label ``+1``) and ``Y`` (label ``-1``) into
    labelled ellipsoids.

    Raises:
        EmptyInput, DimensionMismatch
    """
    X = as_points(X)
    Y = as_points(Y)
    if len(X) == 0 or len(Y) == 0:
        raise ex.EmptyInput(len(X), len(Y))
    if X.shape[1] != Y.shape[1]:
        raise ex.DimensionMismatch(X.shape[1], Y.shape[1])

    n = X.shape[1]
    points = np.vstack([X, Y])
    labels = np.concatenate([np.full(len(X), POSITIVE), np.full(len(Y), NEGATIVE)])
    work = _WorkingPoints(points, config)
    pos = np.arange(len(X))
    neg = np.arange(len(X), len(points))

    cells: List[Cell] = []
    history: List[IterationRecord] = []

    def add_cell(
        label: int, e: Ellipsoid, origin: str, impurity: int, iteration: int
    ) -> int:
        cells.append(
            Cell(len(cells), label, e, origin, impurity=impurity, iteration=iteration)
        )
        return len(cells) - 1

    log.info("Partitioning %d + %d points in %d dimensions", len(X), len(Y), n)
    iteration = 0
    break_reason = "working sets exhausted"
    while len(pos) > n and len(neg) > n:
        iteration += 1
        work.jitter_constant(pos)
        work.jitter_constant(neg)
        try:
            split = rch_step(work[pos], work[neg], config)
        except ex.DegenerateSlab as e:
            log.info("Iteration %d: %s", iteration, e)
            break_reason = "degenerate slab"
            break

        sol = split.solution
        if split.disjoint:
            created = (
                add_cell(POSITIVE, split.mve_x_plus, MAIN, 0, iteration),
                add_cell(NEGATIVE, split.mve_y_minus, MAIN, 0, iteration),
            )
            history.append(
                IterationRecord(
                    iteration,
                    created,
                    len(pos),
                    len(neg),
                    (0, 0),
                    True,
                    tuple(sol.w.tolist()),
                    sol.alpha,
                    sol.beta,
                )
            )
            log.info(
                "Iteration %d: working sets are separated, "
                "2 ellipsoids cover %d + %d points",
                iteration,
                len(pos),
                len(neg),
            )
            pos = pos[:0]
            neg = neg[:0]
            break_reason = "disjoint"
            break

        if not len(split.x_plus) and not len(split.y_minus):
            break_reason = "empty split"
            break

        created_ids: List[int] = []
        impurities: List[int] = []
        removed = {POSITIVE: pos[:0], NEGATIVE: neg[:0]}
        sides = (
            (POSITIVE, pos[split.x_plus], neg, split.mve_x_plus),
            (NEGATIVE, neg[split.y_minus], pos, split.mve_y_minus),
        )
        for label, side, other, start in sides:
            if not len(side):
                continue
            refined = _refine(work, side, other, config, start)
            if not refined.within_budget:
                log.warning(
                    "Iteration %d: %d points of label %+d "
                    "cannot meet the impurity budget",
                    iteration,
                    len(side),
                    label,
                )
                continue
            created_ids.append(
                add_cell(label, refined.ellipsoid, MAIN, refined.impurity, iteration)
            )
            impurities.append(refined.impurity)
            removed[label] = refined.indices

        if not created_ids:
            break_reason = "cannot be separated further"
            break

        pos = np.setdiff1d(pos, removed[POSITIVE])
        neg = np.setdiff1d(neg, removed[NEGATIVE])
        history.append(
            IterationRecord(
                iteration,
                tuple(created_ids),
                len(removed[POSITIVE]),
                len(removed[NEGATIVE]),
                tuple(impurities),
                False,
                tuple(sol.w.tolist()),
                sol.alpha,
                sol.beta,
            )
        )
        log.info(
            "Iteration %d: %d ellipsoids, removed %d + %d points, "
            "impurity %s, %d + %d left",
            iteration,
            len(created_ids),
            len(removed[POSITIVE]),
            len(removed[NEGATIVE]),
            impurities,
            len(pos),
            len(neg),
        )

    radius = _point_radius(points)
    for label, rest in ((POSITIVE, pos), (NEGATIVE, neg)):
        if not len(rest):
            continue
        if len(rest) > n:
            work.jitter_constant(rest)
            e = try_fit(work[rest], config.tol_fit, config.max_iter_fit)
            if e is not None:
                add_cell(label, e, TERMINAL, 0, 0)
                log.info(
                    "Terminal ellipsoid for %d points of label %+d", len(rest), label
                )
                continue
        log.warning(
            "Keeping %d points of label %+d as isolated points", len(rest), label
        )
        for i in rest:
            ball = Ellipsoid.ball(work[i], radius, degenerate=True)
            add_cell(label, ball, LEFTOVER, 0, 0)

    # Counts are measured on the full training set, not the working sets.
    member = membership_matrix(
        [c.ellipsoid for c in cells], work.values, config.tol_membership
    )
    counted = []
    for c in cells:
        n_in = int(np.sum(member[c.id] & (labels == POSITIVE)))
        m_in = int(np.sum(member[c.id] & (labels == NEGATIVE)))
        impurity = c.impurity
        if c.origin == TERMINAL:
            impurity = m_in if c.label == POSITIVE else n_in
        counted.append(
            Cell(
                c.id, c.label, c.ellipsoid, c.origin, n_in, m_in, impurity, c.iteration
            )
        )

    log.info(
        "Partition done after %d iterations (%s): %d ellipsoids",
        len(history),
        break_reason,
        len(counted),
    )
    return PartitionModel(
        cells=tuple(counted),
        points=work.values,
        labels=labels,
        config=config,
        iterations=len(history),
        history=tuple(history),
        break_reason=break_reason,
    )


@dataclass(frozen=True, eq=False)
class OneVsRest:
    """
    One partition model per class, or a single model for two classes (class
    1 is then the ``+1`` label).
    """

    classes: Tuple[str, ...]
    models: Tuple[PartitionModel, ...]
    feature_names: Tuple[str, ...] = ()
    selection: Optional[str] = None

    @property
    def dimension(self) -> int:
        return self.models[0].dimension

    @property
    def binary(self) -> bool:
        return len(self.models) == 1


def train_multiclass(
    dataset: LabeledDataset, config: Config = DEFAULT_CONFIG
) -> List[PartitionModel]:
    """
    Trains one partition model per class against all other classes. With two
    classes a single model is returned, with class 1 as label ``+1``.

    Raises:
        EmptyInput
    """
    k = dataset.n_classes
    if k < 2:
        raise ex.EmptyInput(len(dataset), 0)
    if k == 2:
        return [partition(dataset.class_points(1), dataset.class_points(0), config)]

    models = []
    for label in range(k):
        log.info("Training class '%s' against the rest", dataset.class_names[label])
        models.append(
            partition(
                dataset.points[dataset.labels == label],
                dataset.points[dataset.labels != label],
                config,
            )
        )
    return models


def train_ensemble(
    dataset: LabeledDataset,
    config: Config = DEFAULT_CONFIG,
    selection: Optional[str] = None,
) -> OneVsRest:
    return OneVsRest(
        classes=dataset.class_names,
        models=tuple(train_multiclass(dataset, config)),
        feature_names=dataset.feature_names,
        selection=selection,
    )
