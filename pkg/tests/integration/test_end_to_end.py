"""
Whole-pipeline scenarios: train, classify, store and reload.
"""

import numpy as np
import pytest

from ellipart.classifier import RULES, classify, posteriors
from ellipart.config import Config
from ellipart.datasets import (
    LabeledDataset,
    gen_circles,
    gen_gaussians,
    gen_moons,
    gen_xor,
    ovr_report,
)
from ellipart.evaluation import evaluate
from ellipart.geometry import level, levels, mve_fit
from ellipart.partition import (
    MAIN,
    NEGATIVE,
    POSITIVE,
    TERMINAL,
    partition,
    train_ensemble,
)
from ellipart.store import load_ensemble, save_ensemble


def _binary(d: LabeledDataset):
    return d.class_points(1), d.class_points(0)


def test_xor_corners_are_classified_with_certainty():
    d = gen_xor()
    model = partition(*_binary(d), Config())

    for z, label in zip(d.points, d.labels):
        report = classify(model, z)
        assert report.label == (POSITIVE if label == 1 else NEGATIVE)
        assert report.posterior == 1.0
        assert report.rule_fired == "R1"


@pytest.mark.slow
@pytest.mark.parametrize(
    "dataset, n_imp",
    [
        (gen_circles(n_points=200, noise=0.05, seed=0), 5),
        (gen_moons(n_points=200, noise=0.05, seed=0), 2),
    ],
    ids=["circles", "moons"],
)
def test_curved_classes_are_covered_within_budget(dataset, n_imp):
    X, Y = _binary(dataset)
    config = Config(n_imp=n_imp)
    model = partition(X, Y, config)

    assert model.iterations <= 8
    assert all(c.impurity <= config.n_imp for c in model.cells if c.origin == MAIN)
    assert model.membership.any(axis=0).all()

    assert evaluate(dataset, config).accuracy >= 0.95


def test_coincident_classes_abstain(rng):
    X = rng.normal(size=(50, 2))
    model = partition(X, X.copy(), Config())

    reports = [classify(model, z) for z in X]
    abstained = sum(r.abstain for r in reports)
    assert abstained / len(reports) >= 0.9
    assert all(r.posterior == 0.5 for r in reports)


def test_reloaded_ensemble_predicts_bit_for_bit(tmp_path, rng, three_blobs):
    ensemble = train_ensemble(three_blobs, Config(n_imp=2))
    path = tmp_path / "three.json"
    save_ensemble(ensemble, path)
    loaded = load_ensemble(path)

    for z in rng.uniform(-5, 25, size=(1000, 2)):
        for before, after in zip(ensemble.models, loaded.models):
            a = classify(before, z)
            b = classify(after, z)
            assert (a.label, a.posterior, a.rule_fired) == (
                b.label,
                b.posterior,
                b.rule_fired,
            )


def test_isolated_points_cover_themselves():
    d = gen_xor()
    model = partition(*_binary(d), Config())
    for cell, z in zip(model.cells, model.points):
        assert levels(cell.ellipsoid, z[None, :])[0] <= 1


@pytest.mark.slow
def test_one_rule_per_prediction_and_complementary_posteriors(rng):
    d = gen_gaussians(n_per_class=60, separation=1.5, seed=2)
    model = partition(*_binary(d), Config(n_imp=3))

    for z in rng.uniform(-4, 6, size=(10_000, 2)):
        report = classify(model, z)
        assert report.rule_fired in RULES.values()
        assert report.rule_fired == RULES[report.region.kind]
        assert 0.0 <= report.posterior <= 1.0
        for label in (POSITIVE, NEGATIVE):
            p_pos, p_neg = posteriors(report.region.counts, model.totals, label)
            assert p_pos + p_neg == pytest.approx(1.0, abs=1e-12)


def test_coincident_classes_abstain_on_held_out_points():
    # Class 0 of the draw is the training sample, class 1 the held-out one.
    d = gen_gaussians(n_per_class=100, separation=0.0, seed=4)
    X = d.class_points(0)
    model = partition(X, X.copy(), Config())

    reports = [classify(model, z) for z in d.class_points(1)]
    assert sum(r.abstain for r in reports) / len(reports) >= 0.9
    assert all(r.region.counts[0] == r.region.counts[1] for r in reports)


def _brute_force_counts(model, inside):
    n = sum(1 for hit, y in zip(inside, model.labels) if hit and y == POSITIVE)
    m = sum(1 for hit, y in zip(inside, model.labels) if hit and y == NEGATIVE)
    return n, m


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_counts_match_exhaustive_scans(seed):
    d = gen_gaussians(n_per_class=40, separation=1.0 + 0.1 * seed, seed=seed)
    config = Config(n_imp=2)
    model = partition(*_binary(d), config)
    bound = 1 + config.tol_membership

    scans = {
        c.id: np.array([level(c.ellipsoid, p) <= bound for p in model.points])
        for c in model.cells
    }
    for c in model.cells:
        n, m = _brute_force_counts(model, scans[c.id])
        assert (c.n, c.m) == (n, m)
        opposite = m if c.label == POSITIVE else n
        if c.origin == TERMINAL:
            assert c.impurity == opposite
        elif c.origin == MAIN:
            assert c.impurity <= min(opposite, config.n_imp)

    rng = np.random.default_rng(seed)
    queries = model.points + rng.normal(scale=0.05, size=model.points.shape)
    for z in queries:
        hits = [c.id for c in model.cells if level(c.ellipsoid, z) <= bound]
        if not hits:
            continue
        stacked = np.array([scans[i] for i in hits])
        inside = stacked.all(axis=0)
        if len(hits) > 1 and not inside.any():
            inside = stacked.any(axis=0)
        region = classify(model, z).region
        assert [i for i, _ in region.member_ids] == hits
        assert region.counts == _brute_force_counts(model, inside)

    report = ovr_report(d)
    ea = mve_fit(d.class_points(0)).ellipsoid
    eb = mve_fit(d.class_points(1)).ellipsoid
    for points, counts in (
        (d.class_points(0), (report.in_a, report.out_a)),
        (d.class_points(1), (report.in_b, report.out_b)),
    ):
        both = sum(1 for p in points if max(level(ea, p), level(eb, p)) <= bound)
        assert counts == (both, len(points) - both)
