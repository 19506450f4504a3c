"""
Classification of new points by ellipsoid membership, with a Bayesian trust
score and an abstain flag on every prediction.

A point inside exactly one ellipsoid takes that ellipsoid's label (rule
``R1``). Inside several, the counts of their intersection decide (``R2a``),
or those of their union when the intersection holds no training point
(``R2b``); ellipsoids that all share one label give that label. A point
outside every ellipsoid expands its nearest ellipsoid(s) to reach it and is
then treated like an interior point (``Case3``).
"""

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import exceptions as ex
from .config import DEFAULT_CONFIG, Config
from .geometry import distance_to_point, expand_to_cover, level, levels
from .partition import NEGATIVE, POSITIVE, PartitionModel

log = logging.getLogger(__name__)

SINGLE = "Single"
INTERSECTION = "Intersection"
UNION_FALLBACK = "UnionFallback"
EXPANDED = "Expanded"

RULES = {
    SINGLE: "R1",
    INTERSECTION: "R2a",
    UNION_FALLBACK: "R2b",
    EXPANDED: "Case3",
}


@dataclass(frozen=True)
class Region:
    """
    The cell a test point is evaluated in.

    Args:
        member_ids: ``(cell id, label)`` of every ellipsoid the point is in.
        kind: ``Single``, ``Intersection``, ``UnionFallback`` or ``Expanded``.
        counts: ``(n, m)`` training points labelled ``+1`` / ``-1`` in the
            region.
        basis: How the counts were taken for ``Expanded`` regions
            (``Single``, ``Intersection`` or ``UnionFallback``); equal to
            ``kind`` otherwise.
    """

    member_ids: Tuple[Tuple[int, int], ...]
    kind: str
    counts: Tuple[int, int]
    basis: str

    @property
    def rule(self) -> str:
        return RULES[self.kind]


@dataclass(frozen=True)
class TrustReport:
    """
    A prediction and how far to trust it.

    Args:
        label: ``+1`` or ``-1``.
        posterior: Probability of ``label`` given the region.
        odds_ratio: ``posterior / (1 - posterior)``, infinite for certainty.
        abstain: The posterior is too close to 0.5 to commit to a label.
        region: Where the point was evaluated.
        rule_fired: ``R1``, ``R2a``, ``R2b`` or ``Case3``.
    """

    label: int
    posterior: float
    odds_ratio: float
    abstain: bool
    region: Region
    rule_fired: str

    @property
    def positive_posterior(self) -> float:
        return self.posterior if self.label == POSITIVE else 1.0 - self.posterior


def posteriors(
    counts: Tuple[int, int], totals: Tuple[int, int], smoothed: Optional[int]
) -> Tuple[float, float]:
    """
    Posterior probabilities of both labels given a region.

    Priors come from the training totals ``(N, M)`` and likelihoods from the
    region counts ``(n, m)``, both with add-one smoothing on the ``smoothed``
    label and its complement for the other label. Without a ``smoothed``
    label both labels get the add-one term.

    Returns:
        ``(P(+1 | region), P(-1 | region))``, summing to 1.
    Raises:
        InvalidCounts
    """
    n, m = counts
    N, M = totals
    if n < 0 or m < 0 or N < 1 or M < 1 or n > N or m > M:
        raise ex.InvalidCounts((n, m), (N, M))

    if smoothed == POSITIVE:
        prior_pos, prior_neg = N + 1, M
        like_pos, like_neg = n + 1, m
    elif smoothed == NEGATIVE:
        prior_pos, prior_neg = N, M + 1
        like_pos, like_neg = n, m + 1
    elif smoothed is None:
        prior_pos, prior_neg = N + 1, M + 1
        like_pos, like_neg = n + 1, m + 1
    else:
        raise ValueError(f"Labels are +1 and -1, got {smoothed!r}")

    # The shared normalizers of priors and likelihoods cancel.
    joint_pos = float(prior_pos * like_pos)
    joint_neg = float(prior_neg * like_neg)
    total = joint_pos + joint_neg
    return joint_pos / total, joint_neg / total


def trust_score(
    counts: Tuple[int, int], totals: Tuple[int, int], predicted: int
) -> float:
    """
    Posterior probability of ``predicted`` given a region with ``counts``,
    with the add-one smoothing on the predicted label.

    Raises:
        InvalidCounts
    """
    p_pos, p_neg = posteriors(counts, totals, predicted)
    return p_pos if predicted == POSITIVE else p_neg


def odds_ratio(posterior: float) -> float:
    if posterior >= 1.0:
        return float("inf")
    return posterior / (1.0 - posterior)


def _check_point(model: PartitionModel, z: np.ndarray) -> np.ndarray:
    vec = np.asarray(z, dtype=float)
    if vec.ndim != 1 or vec.shape[0] != model.dimension:
        raise ex.DimensionMismatch(model.dimension, vec.shape[-1] if vec.ndim else 0)
    return vec


def _counts(model: PartitionModel, mask: np.ndarray) -> Tuple[int, int]:
    return (
        int(np.sum(mask & (model.labels == POSITIVE))),
        int(np.sum(mask & (model.labels == NEGATIVE))),
    )


def _region_from_masks(
    model: PartitionModel, ids: List[int], masks: np.ndarray, expanded: bool
) -> Region:
    member_ids = tuple((i, model.cells[i].label) for i in ids)
    if len(ids) == 1:
        basis, counts = SINGLE, _counts(model, masks[0])
    else:
        inside_all = np.logical_and.reduce(masks, axis=0)
        if inside_all.any():
            basis, counts = INTERSECTION, _counts(model, inside_all)
        else:
            basis = UNION_FALLBACK
            counts = _counts(model, np.logical_or.reduce(masks, axis=0))
    return Region(member_ids, EXPANDED if expanded else basis, counts, basis)


def locate(
    model: PartitionModel, z: np.ndarray, config: Optional[Config] = None
) -> Region:
    """
    Finds the region of ``model`` that ``z`` is evaluated in.

    Raises:
        EmptyModel, DimensionMismatch
    """
    config = config or model.config
    if not model.cells:
        raise ex.EmptyModel()
    z = _check_point(model, z)

    bound = 1 + config.tol_membership
    hits = [c.id for c in model.cells if level(c.ellipsoid, z) <= bound]
    if hits:
        return _region_from_masks(model, hits, model.membership[hits], expanded=False)

    distances = np.array([distance_to_point(c.ellipsoid, z) for c in model.cells])
    nearest = float(distances.min())
    tied = np.flatnonzero(distances <= nearest * (1 + config.tie_tolerance)).tolist()
    masks = np.array(
        [
            levels(expand_to_cover(model.cells[i].ellipsoid, z), model.points) <= bound
            for i in tied
        ]
    )
    log.debug(
        "Point outside all ellipsoids, expanding %s (distance %.4g)", tied, nearest
    )
    return _region_from_masks(model, tied, masks, expanded=True)


def classify(
    model: PartitionModel, z: np.ndarray, config: Optional[Config] = None
) -> TrustReport:
    """
    Predicts the label of ``z`` and how far to trust it.

    When every ellipsoid of the region carries the same label, that is the
    prediction, and the trust score says how well the training points in the
    region agree with it. A region mixing both labels predicts the strict
    majority of its counts. On a tie both labels are smoothed alike, so the
    priors decide.

    Raises:
        EmptyModel, DimensionMismatch
    """
    config = config or model.config
    region = locate(model, z, config)
    n, m = region.counts
    totals = model.totals
    member_labels = {label for _, label in region.member_ids}

    if n != m:
        if len(member_labels) == 1:
            label = member_labels.pop()
        else:
            label = POSITIVE if n > m else NEGATIVE
        posterior = trust_score(region.counts, totals, label)
    else:
        p_pos, p_neg = posteriors(region.counts, totals, None)
        label = POSITIVE if p_pos >= p_neg else NEGATIVE
        posterior = max(p_pos, p_neg)

    return TrustReport(
        label=label,
        posterior=posterior,
        odds_ratio=odds_ratio(posterior),
        abstain=abs(posterior - 0.5) < config.abstain_band,
        region=region,
        rule_fired=region.rule,
    )


def predict_multiclass(
    models: Sequence[PartitionModel], z: np.ndarray, config: Optional[Config] = None
) -> Tuple[int, TrustReport]:
    """
    Predicts the class of ``z`` with one-vs-rest models.

    A single model stands for two classes, class 1 being its ``+1`` label.
    Otherwise the class whose model gives the highest posterior to its
    ``+1`` label wins; ties go to the class with more training points, then
    to the lower class index.

    Returns:
        ``(class index, report)``. For several models the report is the
        winning model's, restated for its ``+1`` label: the posterior is the
        probability of the chosen class, even when that model on its own
        would have predicted ``-1``.
    """
    if not models:
        raise ex.EmptyModel()
    if len(models) == 1:
        report = classify(models[0], z, config)
        return (1 if report.label == POSITIVE else 0), report

    reports = [classify(model, z, config) for model in models]
    best = max(
        range(len(models)),
        key=lambda i: (reports[i].positive_posterior, models[i].totals[0], -i),
    )
    band = (config or models[best].config).abstain_band
    posterior = reports[best].positive_posterior
    return best, replace(
        reports[best],
        label=POSITIVE,
        posterior=posterior,
        odds_ratio=odds_ratio(posterior),
        abstain=abs(posterior - 0.5) < band,
    )
