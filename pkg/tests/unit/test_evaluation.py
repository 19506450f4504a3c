import numpy as np
import pandas as pd

from ellipart.classifier import Region, TrustReport
from ellipart.config import Config
from ellipart.evaluation import (
    PREDICTION_COLUMNS,
    REGION_COLUMNS,
    EvaluationReport,
    Prediction,
    evaluate,
    predict,
    write_predictions,
)
from ellipart.partition import train_ensemble


def test_evaluate_separated_blobs(separated_blobs):
    report = evaluate(separated_blobs, Config(test_fraction=0.2))

    assert report.folds == 1
    assert len(report.predictions) == 20
    assert report.accuracy == 1.0
    assert report.abstentions == 0
    assert report.committed_accuracy == 1.0
    assert min(p.report.posterior for p in report.predictions) > 0.9


def test_evaluate_with_folds(separated_blobs):
    report = evaluate(separated_blobs, Config(folds=4))

    assert report.folds == 4
    assert sorted(p.row for p in report.predictions) == list(range(100))
    assert report.accuracy == 1.0

    table = report.region_table()
    assert list(table.columns) == REGION_COLUMNS
    assert set(table["fold"]) == {0, 1, 2, 3}
    assert table["hits"].sum() == 100
    assert table["misses"].sum() == 0


def _abstaining(row: int, label: str, truth: str) -> Prediction:
    region = Region(((0, 1), (1, -1)), "Intersection", (5, 5), "Intersection")
    report = TrustReport(1, 0.5, 1.0, True, region, "R2a")
    return Prediction(row, label, report, truth)


def test_all_abstained_has_no_committed_accuracy():
    report = EvaluationReport(
        predictions=[_abstaining(0, "a", "a"), _abstaining(1, "a", "b")]
    )

    assert report.abstentions == 2
    assert report.accuracy == 0.5
    assert report.committed_accuracy is None


def test_predict_names_the_deciding_model(three_blobs):
    ensemble = train_ensemble(three_blobs, Config())
    results = predict(ensemble, np.array([[20.0, 0.0], [0.0, 20.0]]))
    assert [(cls, model) for cls, model, _ in results] == [(1, 1), (2, 2)]


def test_empty_report():
    report = EvaluationReport()
    assert np.isnan(report.accuracy)
    assert report.committed_accuracy is None
    assert report.region_table().empty


def test_write_predictions(tmp_path, separated_blobs):
    report = evaluate(separated_blobs, Config())
    path = tmp_path / "predictions.csv"
    write_predictions(report.predictions, path)

    frame = pd.read_csv(path)
    assert list(frame.columns) == PREDICTION_COLUMNS
    assert len(frame) == len(report.predictions)
    assert set(frame["rule"]) <= {"R1", "R2a", "R2b", "Case3"}
    assert frame["label"].astype(str).tolist() == [p.label for p in report.predictions]


def _expanded(row: int, counts, truth: str) -> Prediction:
    region = Region(((0, 1),), "Expanded", counts, "Single")
    report = TrustReport(1, 0.9, 9.0, False, region, "Case3")
    return Prediction(row, "a", report, truth)


def test_expanded_regions_are_keyed_by_their_counts():
    report = EvaluationReport()
    report.add(0, 0, _expanded(0, (4, 1), "a"))
    report.add(0, 0, _expanded(1, (9, 2), "b"))
    report.add(0, 0, _expanded(2, (4, 1), "a"))

    table = report.region_table()
    assert len(table) == 2
    assert table[["n", "m", "hits", "misses"]].values.tolist() == [
        [4, 1, 2, 0],
        [9, 2, 0, 1],
    ]
