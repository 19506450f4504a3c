import logging
from os import PathLike
from typing import Optional, Union

import matplotlib
import numpy as np
from matplotlib.figure import Figure
from matplotlib.patches import Ellipse

from . import exceptions as ex
from .datasets import LabeledDataset
from .geometry import semi_axes
from .partition import POSITIVE, OneVsRest

log = logging.getLogger(__name__)

PathType = Union[str, "PathLike[str]"]

CELL_GID_PREFIX = "ellipsoid-"


def plot_partition(
    ensemble: OneVsRest,
    path: PathType,
    dataset: Optional[LabeledDataset] = None,
    title: Optional[str] = None,
) -> int:
    """
    Draws the ellipsoids of a 2-feature model as an SVG file, optionally over
    the points of ``dataset`` coloured by class.

    Every ellipsoid becomes one group whose id starts with ``ellipsoid-``.

    Returns:
        The number of ellipsoids drawn.
    Raises:
        PlotDimension
    """
    if ensemble.dimension != 2:
        raise ex.PlotDimension(ensemble.dimension)
    if dataset is not None and dataset.n != 2:
        raise ex.PlotDimension(dataset.n)

    palette = matplotlib.colormaps["tab10"]
    with matplotlib.rc_context({"svg.hashsalt": "ellipart", "svg.fonttype": "none"}):
        fig = Figure(figsize=(6, 6))
        ax = fig.add_subplot()

        if dataset is not None:
            for label, name in enumerate(dataset.class_names):
                P = dataset.class_points(label)
                ax.scatter(P[:, 0], P[:, 1], s=8, color=palette(label % 10), label=name)

        drawn = 0
        for model_index, model in enumerate(ensemble.models):
            for cell in model.cells:
                if ensemble.binary:
                    cls = 1 if cell.label == POSITIVE else 0
                else:
                    cls = model_index if cell.label == POSITIVE else None
                lengths, directions = semi_axes(cell.ellipsoid)
                angle = np.degrees(np.arctan2(directions[1, 0], directions[0, 0]))
                patch = Ellipse(
                    xy=tuple(cell.ellipsoid.center),
                    width=2 * lengths[0],
                    height=2 * lengths[1],
                    angle=angle,
                    fill=False,
                    linewidth=1.0,
                    linestyle="-" if cls is not None else ":",
                    edgecolor=palette(cls % 10) if cls is not None else "grey",
                )
                patch.set_gid(f"{CELL_GID_PREFIX}{model_index}-{cell.id}")
                ax.add_patch(patch)
                drawn += 1

        ax.set_aspect("equal")
        ax.autoscale_view()
        names = ensemble.feature_names or ("x0", "x1")
        ax.set_xlabel(names[0])
        ax.set_ylabel(names[1])
        if title:
            ax.set_title(title)
        if dataset is not None:
            ax.legend(loc="best", fontsize="small")
        fig.savefig(path, format="svg")

    log.info("Wrote %d ellipsoids to %s", drawn, path)
    return drawn
