"""
Model files: a JSON document holding every ellipsoid, the training points
the region counts are taken on, the configuration and the training history.

Floats are written in their shortest round-trip form, so a loaded model
reproduces every prediction of the saved one bit for bit.
"""

import json
import logging
from os import PathLike
from typing import Any, Dict, Union

import numpy as np
from dateutil.parser import isoparse

from . import exceptions as ex
from .config import Config
from .geometry import Ellipsoid
from .partition import Cell, IterationRecord, OneVsRest, PartitionModel

log = logging.getLogger(__name__)

FORMAT_VERSION = 1

PathType = Union[str, "PathLike[str]"]


###############################################################################
# Encoding
###############################################################################
def model_to_dict(model: PartitionModel) -> Dict[str, Any]:
    return {
        "dimension": model.dimension,
        "totals": list(model.totals),
        "config": model.config.to_dict(),
        "iterations": model.iterations,
        "break_reason": model.break_reason,
        "trained_at": model.trained_at.isoformat(),
        "cells": [
            {
                "id": c.id,
                "label": c.label,
                "origin": c.origin,
                "n": c.n,
                "m": c.m,
                "impurity": c.impurity,
                "iteration": c.iteration,
                "shape": c.ellipsoid.shape.tolist(),
                "offset": c.ellipsoid.offset.tolist(),
                "degenerate_radius": c.ellipsoid.degenerate_radius,
            }
            for c in model.cells
        ],
        "points": model.points.tolist(),
        "labels": model.labels.tolist(),
        "history": [
            {
                "iteration": r.iteration,
                "created": list(r.created),
                "removed_pos": r.removed_pos,
                "removed_neg": r.removed_neg,
                "impurity": list(r.impurity),
                "disjoint": r.disjoint,
                "normal": list(r.normal),
                "alpha": r.alpha,
                "beta": r.beta,
            }
            for r in model.history
        ],
    }


def ensemble_to_dict(ensemble: OneVsRest) -> Dict[str, Any]:
    return {
        "classes": list(ensemble.classes),
        "feature_names": list(ensemble.feature_names),
        "selection": ensemble.selection,
        "models": [model_to_dict(m) for m in ensemble.models],
    }


###############################################################################
# Decoding
###############################################################################
def _cell_from_dict(data: Dict[str, Any], dimension: int) -> Cell:
    shape = np.array(data["shape"], dtype=float)
    offset = np.array(data["offset"], dtype=float)
    if shape.shape != (dimension, dimension) or offset.shape != (dimension,):
        raise ex.CorruptModel(
            f"cell {data.get('id')} does not have dimension {dimension}"
        )
    try:
        ellipsoid = Ellipsoid(shape, offset, data.get("degenerate_radius"))
    except ex.GeometryException as e:
        raise ex.CorruptModel(f"cell {data.get('id')}: {e}")
    return Cell(
        id=int(data["id"]),
        label=int(data["label"]),
        ellipsoid=ellipsoid,
        origin=data["origin"],
        n=int(data["n"]),
        m=int(data["m"]),
        impurity=int(data["impurity"]),
        iteration=int(data["iteration"]),
    )


def model_from_dict(data: Dict[str, Any]) -> PartitionModel:
    """
    Raises:
        CorruptModel
    """
    try:
        dimension = int(data["dimension"])
        cells = [_cell_from_dict(c, dimension) for c in data["cells"]]
        points = np.array(data["points"], dtype=float)
        labels = np.array(data["labels"], dtype=int)
        history = [
            IterationRecord(
                iteration=r["iteration"],
                created=tuple(r["created"]),
                removed_pos=r["removed_pos"],
                removed_neg=r["removed_neg"],
                impurity=tuple(r["impurity"]),
                disjoint=r["disjoint"],
                normal=tuple(r["normal"]),
                alpha=r["alpha"],
                beta=r["beta"],
            )
            for r in data["history"]
        ]
        model = PartitionModel(
            cells=tuple(cells),
            points=points,
            labels=labels,
            config=Config.from_dict(data["config"]),
            iterations=int(data["iterations"]),
            history=tuple(history),
            break_reason=data["break_reason"],
            trained_at=isoparse(data["trained_at"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ex.CorruptModel(f"{type(e).__name__}: {e}")

    if points.ndim != 2 or points.shape[1] != dimension or len(labels) != len(points):
        raise ex.CorruptModel("training points do not match the model dimension")
    if [c.id for c in cells] != list(range(len(cells))):
        raise ex.CorruptModel("cell ids are not consecutive")
    return model


def ensemble_from_dict(data: Dict[str, Any]) -> OneVsRest:
    try:
        models = tuple(model_from_dict(m) for m in data["models"])
        classes = tuple(data["classes"])
        feature_names = tuple(data.get("feature_names", ()))
        selection = data.get("selection")
    except (KeyError, TypeError) as e:
        raise ex.CorruptModel(f"{type(e).__name__}: {e}")
    if not models:
        raise ex.CorruptModel("no models")
    if len({m.dimension for m in models}) != 1:
        raise ex.CorruptModel("models have different dimensions")
    expected = 1 if len(classes) == 2 else len(classes)
    if len(models) != expected:
        raise ex.CorruptModel(f"{len(models)} models for {len(classes)} classes")
    return OneVsRest(classes, models, feature_names, selection)


###############################################################################
# Files
###############################################################################
def _write(document: Dict[str, Any], path: PathType) -> None:
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(document, f, indent=1)
            f.write("\n")
    except OSError as e:
        raise ex.IoError(str(path), e.strerror or str(e))
    log.info("Saved model to %s", path)


def _read(path: PathType, kind: str) -> Dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            document = json.load(f)
    except OSError as e:
        raise ex.IoError(str(path), e.strerror or str(e))
    except json.JSONDecodeError as e:
        raise ex.CorruptModel(f"not a JSON document ({e})")

    if not isinstance(document, dict):
        raise ex.CorruptModel("not a JSON object")
    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise ex.VersionMismatch(version, FORMAT_VERSION)
    if document.get("kind") != kind:
        raise ex.CorruptModel(
            f"expected a '{kind}' model, got {document.get('kind')!r}"
        )
    return document


def save(model: PartitionModel, path: PathType) -> None:
    """
    Writes a single partition model.

    Raises:
        IoError
    """
    document = {"format_version": FORMAT_VERSION, "kind": "partition"}
    document.update(model_to_dict(model))
    _write(document, path)


def load(path: PathType) -> PartitionModel:
    """
    Reads a file written by :func:`save`, validating every ellipsoid.

    Raises:
        IoError, VersionMismatch, CorruptModel
    """
    return model_from_dict(_read(path, "partition"))


def save_ensemble(ensemble: OneVsRest, path: PathType) -> None:
    """
    Writes a one-vs-rest ensemble.

    Raises:
        IoError
    """
    document = {"format_version": FORMAT_VERSION, "kind": "one_vs_rest"}
    document.update(ensemble_to_dict(ensemble))
    _write(document, path)


def load_ensemble(path: PathType) -> OneVsRest:
    """
    Reads a file written by :func:`save_ensemble`.

    Raises:
        IoError, VersionMismatch, CorruptModel
    """
    return ensemble_from_dict(_read(path, "one_vs_rest"))
