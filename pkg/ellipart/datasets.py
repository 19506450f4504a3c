"""
Labelled point sets: CSV input and output, synthetic generators, constant
feature jitter, stratified splits and the class overlap diagnostic.
"""

import logging
from dataclasses import dataclass
from os import PathLike
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.datasets import make_circles, make_moons
from sklearn.model_selection import StratifiedKFold, train_test_split

from . import exceptions as ex
from .geometry import affine_rank, as_points, levels, mve_fit, volume_measure
from .selection import Node, parse_selection, render_selection, select_rows

log = logging.getLogger(__name__)

LABEL_COLUMN = "label"

PathType = Union[str, "PathLike[str]"]


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """
    A matrix of points with one integer class label per row.

    Args:
        points: ``records x features`` matrix of finite reals.
        labels: Class index per record, drawn from ``0 .. k - 1``.
        feature_names: One name per feature.
        class_names: One name per class index.
    """

    points: np.ndarray
    labels: np.ndarray
    feature_names: Tuple[str, ...] = ()
    class_names: Tuple[str, ...] = ()

    def __post_init__(self):
        points = as_points(self.points).copy()
        labels = np.asarray(self.labels).astype(int)
        if points.shape[1] < 1:
            raise ex.InvalidParam("points", points.shape, "need at least one feature")
        if labels.shape != (points.shape[0],):
            raise ex.InvalidParam("labels", labels.shape, "need one label per record")
        if not np.all(np.isfinite(points)):
            raise ex.InvalidParam("points", "non-finite", "all values must be finite")

        k = int(labels.max()) + 1 if labels.size else 0
        if labels.size and (labels.min() < 0 or len(np.unique(labels)) != k):
            raise ex.InvalidParam(
                "labels", sorted(set(labels.tolist())), "must be contiguous from 0"
            )

        feature_names = tuple(self.feature_names) or tuple(
            f"x{i}" for i in range(points.shape[1])
        )
        class_names = tuple(self.class_names) or tuple(str(i) for i in range(k))
        if len(feature_names) != points.shape[1]:
            raise ex.InvalidParam(
                "feature_names", feature_names, "one name per feature"
            )
        if len(class_names) < k:
            raise ex.InvalidParam("class_names", class_names, "one name per class")

        points.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", feature_names)
        object.__setattr__(self, "class_names", class_names)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    @property
    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def class_points(self, label: int) -> np.ndarray:
        return self.points[self.labels == label]

    def subset(self, indices: Sequence[int]) -> "LabeledDataset":
        """
        Returns the records at ``indices``, keeping every class name.
        """
        idx = np.asarray(indices, dtype=int)
        return LabeledDataset(
            self.points[idx], self.labels[idx], self.feature_names, self.class_names
        )

    def with_points(self, points: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(points, self.labels, self.feature_names, self.class_names)


###############################################################################
# CSV
###############################################################################
def _class_order(values: Sequence[str]) -> List[str]:
    unique = sorted(set(values))
    try:
        return sorted(unique, key=float)
    except ValueError:
        return unique


def _resolve_column(frame: pd.DataFrame, column: Union[str, int]) -> str:
    if isinstance(column, str) and column in frame.columns:
        return column
    try:
        return frame.columns[int(column)]
    except (TypeError, ValueError, IndexError):
        raise ex.MissingLabel(column)


def _read_frame(
    path: PathType, has_header: bool, selection: Union[None, str, Node]
) -> pd.DataFrame:
    try:
        frame = pd.read_csv(
            path,
            header=0 if has_header else None,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
        )
    except pd.errors.EmptyDataError:
        raise ex.EmptyFile(str(path))
    frame.columns = [str(c).strip() for c in frame.columns]
    if frame.empty:
        raise ex.EmptyFile(str(path))
    frame = frame.apply(lambda col: col.str.strip())

    if selection is not None:
        node = parse_selection(selection) if isinstance(selection, str) else selection
        mask = select_rows(frame, node)
        log.info(
            "Selection '%s' keeps %d of %d rows",
            render_selection(node),
            int(mask.sum()),
            len(frame),
        )
        frame = frame[mask]
        if frame.empty:
            raise ex.EmptyFile(str(path))
    return frame


def _parse_features(frame: pd.DataFrame, names: Sequence[str]) -> np.ndarray:
    columns = []
    for name in names:
        if name not in frame.columns:
            raise ex.UnknownColumnException(name, list(frame.columns))
        values = pd.to_numeric(frame[name], errors="coerce").to_numpy(dtype=float)
        bad = ~np.isfinite(values)
        if bad.any():
            first = int(np.flatnonzero(bad)[0])
            raise ex.ParseError(
                int(frame.index[first]) + 1, name, frame[name].iloc[first]
            )
        columns.append(values)
    return np.column_stack(columns)


def load_csv(
    path: PathType,
    label_column: Union[str, int] = LABEL_COLUMN,
    has_header: bool = True,
    selection: Union[None, str, Node] = None,
    drop: Sequence[str] = (),
) -> LabeledDataset:
    """
    Reads a comma separated file into a :class:`LabeledDataset`.

    Every column except the label (and ``drop``) is a feature and must hold a
    real number in every row. Labels are arbitrary strings, mapped to class
    indices in sorted (numeric when possible) order.

    Args:
        path: File to read.
        label_column: Name of the label column, or its position.
        has_header: Whether the first line holds column names. Without one,
            columns are named by position.
        selection: Row selection expression; only matching rows are kept.
        drop: Columns to leave out of the features.
    Raises:
        EmptyFile, MissingLabel, ParseError, SelectionException
    """
    frame = _read_frame(path, has_header, selection)
    label = _resolve_column(frame, label_column)
    for column in drop:
        if column not in frame.columns:
            raise ex.UnknownColumnException(column, list(frame.columns))
    features = [c for c in frame.columns if c != label and c not in drop]
    if not features:
        raise ex.InvalidParam("features", features, "need at least one feature column")
    points = _parse_features(frame, features)

    raw_labels = frame[label].tolist()
    for position, value in enumerate(raw_labels):
        if value == "":
            raise ex.ParseError(int(frame.index[position]) + 1, label, value)
    class_names = _class_order(raw_labels)
    lookup = {name: i for i, name in enumerate(class_names)}

    dataset = LabeledDataset(
        points,
        np.array([lookup[v] for v in raw_labels]),
        tuple(features),
        tuple(class_names),
    )
    log.info(
        "Loaded %d records with %d features and %d classes from %s",
        len(dataset),
        dataset.n,
        dataset.n_classes,
        path,
    )
    return dataset


def load_points(
    path: PathType,
    feature_names: Sequence[str] = (),
    has_header: bool = True,
    label_column: Union[None, str, int] = None,
    selection: Union[None, str, Node] = None,
) -> Tuple[np.ndarray, np.ndarray, Optional[List[str]]]:
    """
    Reads the feature columns of a comma separated file, e.g. to predict
    them.

    Args:
        feature_names: Columns to read, in order. By default every column
            except the label column.
        label_column: Optional label column; its values are returned too.
    Returns:
        ``(points, row numbers, labels or None)``; row numbers count records
        from 0.
    """
    frame = _read_frame(path, has_header, selection)
    label = None
    if label_column is not None and (
        not has_header or str(label_column) in frame.columns
    ):
        label = _resolve_column(frame, label_column)
    names = list(feature_names) if has_header and feature_names else [
        c for c in frame.columns if c != label
    ]
    points = _parse_features(frame, names)
    labels = frame[label].tolist() if label is not None else None
    return points, frame.index.to_numpy(), labels


def save_csv(d: LabeledDataset, path: PathType) -> None:
    """
    Writes ``d`` with a header line and the class names in a ``label``
    column. Reals are written with 17 significant digits.
    """
    frame = pd.DataFrame(d.points, columns=list(d.feature_names))
    frame[LABEL_COLUMN] = [d.class_names[i] for i in d.labels]
    frame.to_csv(path, index=False, float_format="%.17g")


###############################################################################
# Generators
###############################################################################
def _check_size(name: str, value: int, minimum: int) -> None:
    if value < minimum:
        raise ex.InvalidParam(name, value, f"must be >= {minimum}")


def _check_noise(noise: float) -> None:
    if not noise >= 0:
        raise ex.InvalidParam("noise", noise, "must be >= 0")


def gen_xor(support_radius: float = 0.0, seed: int = 0) -> LabeledDataset:
    """
    The outputs of a 2-input XOR gate: ``(0, 0)`` and ``(1, 1)`` have label 1,
    ``(0, 1)`` and ``(1, 0)`` label 0.

    Each diagonal pair is collinear, so no ellipsoid covers it. A positive
    ``support_radius`` adds one extra point per label, drawn uniformly in a
    disk of that radius around ``(1, 1)`` (label 1) and ``(0, 1)``
    (label 0).
    """
    if support_radius < 0:
        raise ex.InvalidParam("support_radius", support_radius, "must be >= 0")
    points = [(0.0, 0.0), (1.0, 1.0), (0.0, 1.0), (1.0, 0.0)]
    labels = [1, 1, 0, 0]
    if support_radius > 0:
        rng = np.random.default_rng(seed)
        for anchor, label in (((1.0, 1.0), 1), ((0.0, 1.0), 0)):
            radius = support_radius * np.sqrt(rng.uniform())
            angle = rng.uniform(0, 2 * np.pi)
            points.append(
                (anchor[0] + radius * np.cos(angle), anchor[1] + radius * np.sin(angle))
            )
            labels.append(label)
    return LabeledDataset(np.array(points), np.array(labels), ("x", "y"), ("0", "1"))


def gen_circles(
    n_points: int = 200, noise: float = 0.0, seed: int = 0, factor: float = 0.5
) -> LabeledDataset:
    """
    Two concentric rings; the outer one (radius 1) has label 0 and the inner
    one (radius ``factor``) label 1. ``noise`` is the standard deviation of
    the Gaussian noise added to every coordinate.
    """
    _check_size("n_points", n_points, 4)
    _check_noise(noise)
    if not 0 < factor < 1:
        raise ex.InvalidParam("factor", factor, "must be in (0, 1)")
    points, labels = make_circles(
        n_samples=n_points,
        shuffle=False,
        noise=noise,
        random_state=seed,
        factor=factor,
    )
    return LabeledDataset(points, labels, ("x", "y"), ("0", "1"))


def gen_moons(n_points: int = 200, noise: float = 0.0, seed: int = 0) -> LabeledDataset:
    """
    Two interleaved half rings; the upper one has label 0.
    """
    _check_size("n_points", n_points, 4)
    _check_noise(noise)
    points, labels = make_moons(
        n_samples=n_points, shuffle=False, noise=noise, random_state=seed
    )
    return LabeledDataset(points, labels, ("x", "y"), ("0", "1"))


def gen_gaussians(
    n_per_class: int = 100, separation: float = 0.0, seed: int = 0, dimension: int = 2
) -> LabeledDataset:
    """
    Two standard normal blobs; class 1 is shifted by ``separation`` along the
    first axis, so ``separation = 0`` makes the classes fully overlap.
    """
    _check_size("n_per_class", n_per_class, 2)
    _check_size("dimension", dimension, 1)
    if not np.isfinite(separation):
        raise ex.InvalidParam("separation", separation, "must be finite")
    rng = np.random.default_rng(seed)
    points = rng.normal(size=(2 * n_per_class, dimension))
    points[n_per_class:, 0] += separation
    labels = np.repeat([0, 1], n_per_class)
    names = ("x", "y") if dimension == 2 else tuple(f"x{i}" for i in range(dimension))
    return LabeledDataset(points, labels, names, ("0", "1"))


###############################################################################
# Jitter
###############################################################################
def constant_features(points: np.ndarray) -> np.ndarray:
    """
    Indices of the features that take a single value over ``points``.
    """
    P = as_points(points)
    if P.shape[0] < 2:
        return np.array([], dtype=int)
    return np.flatnonzero(np.ptp(P, axis=0) == 0)


def jitter_values(
    values: np.ndarray, noise: np.ndarray, radius_frac: float
) -> np.ndarray:
    """
    Adds ``noise`` (drawn from ``[-1, 1)``) scaled to a half-width of
    ``radius_frac * max(1, |value|)``.
    """
    return values + noise * radius_frac * np.maximum(1.0, np.abs(values))


def jitter_constant_features(
    d: LabeledDataset, radius_frac: float = 0.01, seed: int = 0
) -> LabeledDataset:
    """
    Adds uniform noise to every feature that is constant over ``d``, so the
    point set gets full affine rank. Returns ``d`` itself when no feature is
    constant.
    """
    if not radius_frac > 0:
        raise ex.InvalidParam("radius_frac", radius_frac, "must be > 0")
    constant = constant_features(d.points)
    if not constant.size:
        return d

    log.warning(
        "Jittering constant features %s with radius %g",
        [d.feature_names[i] for i in constant],
        radius_frac,
    )
    rng = np.random.default_rng(seed)
    points = np.array(d.points)
    noise = rng.uniform(-1.0, 1.0, size=(len(d), constant.size))
    points[:, constant] = jitter_values(points[:, constant], noise, radius_frac)
    return d.with_points(points)


###############################################################################
# Splits
###############################################################################
def _check_class_sizes(d: LabeledDataset, required: int) -> None:
    for label, count in enumerate(d.class_counts):
        if count < required:
            raise ex.ClassTooSmall(d.class_names[label], int(count), required)


def split(
    d: LabeledDataset, test_fraction: float = 0.2, seed: int = 0
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Stratified train / test split.

    Returns:
        ``(train_indices, test_indices)``, both sorted.
    Raises:
        ClassTooSmall
    """
    if not 0 < test_fraction < 1:
        raise ex.InvalidParam("test_fraction", test_fraction, "must be in (0, 1)")
    _check_class_sizes(d, 2)
    try:
        train, test = train_test_split(
            np.arange(len(d)),
            test_size=test_fraction,
            random_state=seed,
            stratify=d.labels,
        )
    except ValueError as e:
        raise ex.InvalidParam("test_fraction", test_fraction, str(e))
    return np.sort(train), np.sort(test)


def kfold(
    d: LabeledDataset, k: int = 4, seed: int = 0
) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    Stratified k-fold split; every record is in exactly one test fold.

    Returns:
        ``k`` pairs of sorted ``(train_indices, test_indices)``.
    Raises:
        ClassTooSmall
    """
    if k < 2:
        raise ex.InvalidParam("k", k, "must be >= 2")
    _check_class_sizes(d, k)
    folds = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    return list(folds.split(d.points, d.labels))


###############################################################################
# Overlap diagnostic
###############################################################################
@dataclass(frozen=True)
class OvrReport:
    """
    How much the minimum volume ellipsoids of two classes overlap.

    The overlap region is the minimum volume ellipsoid of the points lying in
    both class ellipsoids. When fewer than ``n + 1`` such points exist (or
    they are not full dimensional) it is absent and both ratios are 0.

    Args:
        volume_a: Volume measure of class a's ellipsoid.
        overlap_volume: Volume measure of the overlap ellipsoid, if any.
        ovr_a: ``overlap_volume / volume_a``.
        in_a: Points of class a lying in both class ellipsoids.
        out_a: The remaining points of class a.
    """

    class_a: str
    class_b: str
    volume_a: float
    volume_b: float
    overlap_volume: Optional[float]
    ovr_a: float
    ovr_b: float
    in_a: int
    out_a: int
    in_b: int
    out_b: int

    @property
    def has_overlap(self) -> bool:
        return self.overlap_volume is not None


def ovr_report(
    d: LabeledDataset,
    class_a: int = 0,
    class_b: int = 1,
    tol_fit: float = 1e-7,
    tol_membership: float = 1e-9,
) -> OvrReport:
    """
    Computes the overlap ratio of classes ``class_a`` and ``class_b``.

    Raises:
        TooFewPoints, RankDeficient
    """
    for label in (class_a, class_b):
        if not 0 <= label < d.n_classes:
            raise ex.InvalidParam("class", label, f"must be in [0, {d.n_classes})")
    A = d.class_points(class_a)
    B = d.class_points(class_b)
    ea = mve_fit(A, tol_fit).ellipsoid
    eb = mve_fit(B, tol_fit).ellipsoid

    def in_both(P: np.ndarray) -> np.ndarray:
        bound = 1 + tol_membership
        return (levels(ea, P) <= bound) & (levels(eb, P) <= bound)

    mask_a = in_both(A)
    mask_b = in_both(B)
    shared = np.vstack([A[mask_a], B[mask_b]])

    volume_a = volume_measure(ea)
    volume_b = volume_measure(eb)
    overlap_volume = None
    if len(shared) > d.n and affine_rank(shared) == d.n:
        overlap_volume = volume_measure(mve_fit(shared, tol_fit).ellipsoid)
    else:
        log.info("Only %d points in both ellipsoids; no overlap region", len(shared))

    report = OvrReport(
        class_a=d.class_names[class_a],
        class_b=d.class_names[class_b],
        volume_a=volume_a,
        volume_b=volume_b,
        overlap_volume=overlap_volume,
        ovr_a=overlap_volume / volume_a if overlap_volume is not None else 0.0,
        ovr_b=overlap_volume / volume_b if overlap_volume is not None else 0.0,
        in_a=int(mask_a.sum()),
        out_a=int((~mask_a).sum()),
        in_b=int(mask_b.sum()),
        out_b=int((~mask_b).sum()),
    )
    log.debug("Overlap report: %s", report)
    return report
