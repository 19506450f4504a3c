"""
Held-out evaluation: stratified split or k-fold, one-vs-rest training per
fold, and accuracy with and without abstentions.
"""

import logging
from dataclasses import dataclass, field
from os import PathLike
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .classifier import TrustReport, predict_multiclass
from .config import DEFAULT_CONFIG, Config
from .datasets import LabeledDataset, kfold, split
from .partition import OneVsRest, train_ensemble

log = logging.getLogger(__name__)

PathType = Union[str, "PathLike[str]"]
RegionKey = Tuple[int, int, str, Tuple[int, ...], Tuple[int, int]]

PREDICTION_COLUMNS = ["row", "label", "posterior", "odds_ratio", "rule", "abstain"]
REGION_COLUMNS = [
    "fold",
    "model",
    "rule",
    "members",
    "n",
    "m",
    "trust",
    "hits",
    "misses",
]


@dataclass(frozen=True)
class Prediction:
    """
    One predicted record.

    Args:
        row: Record index in the input.
        label: Predicted class name.
        report: Trust report of the deciding model.
        truth: True class name, when known.
    """

    row: int
    label: str
    report: TrustReport
    truth: Optional[str] = None

    @property
    def correct(self) -> Optional[bool]:
        return None if self.truth is None else self.truth == self.label


@dataclass
class RegionStats:
    counts: Tuple[int, int]
    trust: float
    hits: int = 0
    misses: int = 0


@dataclass
class EvaluationReport:
    """
    Args:
        predictions: Every held-out prediction, in fold order.
        regions: Per region statistics keyed by
            ``(fold, model, rule, member cell ids, counts)``; expanded
            regions with the same members can differ in their counts.
    """

    predictions: List[Prediction] = field(default_factory=list)
    regions: Dict[RegionKey, RegionStats] = field(default_factory=dict)
    folds: int = 1

    def add(self, fold: int, model: int, prediction: Prediction) -> None:
        """
        Records a held-out prediction and scores it against its region.
        """
        self.predictions.append(prediction)
        region = prediction.report.region
        members = tuple(i for i, _ in region.member_ids)
        key = (fold, model, prediction.report.rule_fired, members, region.counts)
        stats = self.regions.setdefault(
            key, RegionStats(region.counts, prediction.report.posterior)
        )
        if prediction.correct:
            stats.hits += 1
        else:
            stats.misses += 1

    @property
    def accuracy(self) -> float:
        if not self.predictions:
            return float("nan")
        return float(np.mean([p.correct for p in self.predictions]))

    @property
    def abstentions(self) -> int:
        return sum(p.report.abstain for p in self.predictions)

    @property
    def committed_accuracy(self) -> Optional[float]:
        """
        Accuracy over the predictions that did not abstain, ``None`` when all
        of them abstained.
        """
        committed = [p.correct for p in self.predictions if not p.report.abstain]
        if not committed:
            return None
        return float(np.mean(committed))

    def region_table(self) -> pd.DataFrame:
        rows = [
            {
                "fold": fold,
                "model": model,
                "rule": rule,
                "members": " ".join(str(i) for i in members),
                "n": stats.counts[0],
                "m": stats.counts[1],
                "trust": stats.trust,
                "hits": stats.hits,
                "misses": stats.misses,
            }
            for (fold, model, rule, members, _), stats in sorted(self.regions.items())
        ]
        return pd.DataFrame(rows, columns=REGION_COLUMNS)


def predict(
    ensemble: OneVsRest, points: np.ndarray, config: Optional[Config] = None
) -> List[Tuple[int, int, TrustReport]]:
    """
    Classifies every row of ``points``.

    Returns:
        ``(class index, deciding model index, report)`` per row.
    """
    results = []
    for z in np.asarray(points, dtype=float):
        cls, report = predict_multiclass(ensemble.models, z, config)
        results.append((cls, 0 if ensemble.binary else cls, report))
    return results


def _fold_indices(
    dataset: LabeledDataset, config: Config
) -> Sequence[Tuple[np.ndarray, np.ndarray]]:
    if config.folds:
        return kfold(dataset, config.folds, config.seed)
    return [split(dataset, config.test_fraction, config.seed)]


def evaluate(
    dataset: LabeledDataset, config: Config = DEFAULT_CONFIG
) -> EvaluationReport:
    """
    Trains on each training fold and predicts the matching held-out records.
    """
    folds = _fold_indices(dataset, config)
    report = EvaluationReport(folds=len(folds))
    for fold, (train, test) in enumerate(folds):
        ensemble = train_ensemble(dataset.subset(train), config)
        log.info(
            "Fold %d: trained on %d records, %d ellipsoids",
            fold,
            len(train),
            sum(len(m.cells) for m in ensemble.models),
        )
        results = predict(ensemble, dataset.points[test], config)
        for row, (cls, model, trust) in zip(test, results):
            truth = dataset.class_names[dataset.labels[row]]
            prediction = Prediction(int(row), dataset.class_names[cls], trust, truth)
            report.add(fold, model, prediction)

    log.info(
        "Accuracy %.4f over %d predictions, %d abstentions",
        report.accuracy,
        len(report.predictions),
        report.abstentions,
    )
    return report


def write_predictions(predictions: Sequence[Prediction], path: PathType) -> None:
    """
    Writes one CSV line per prediction with the columns
    ``row, label, posterior, odds_ratio, rule, abstain``.
    """
    frame = pd.DataFrame(
        [
            {
                "row": p.row,
                "label": p.label,
                "posterior": p.report.posterior,
                "odds_ratio": p.report.odds_ratio,
                "rule": p.report.rule_fired,
                "abstain": p.report.abstain,
            }
            for p in predictions
        ],
        columns=PREDICTION_COLUMNS,
    )
    frame.to_csv(path, index=False, float_format="%.17g")
