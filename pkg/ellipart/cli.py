"""
Command line front end::

    ellipart synth circles --n-points 200 --noise 0.05 --out circles.csv
    ellipart train circles.csv --n-imp 5 --out circles.model.json
    ellipart predict circles.model.json circles.csv --out predictions.csv
    ellipart eval circles.csv --folds 4
    ellipart ovr circles.csv
    ellipart plot circles.model.json circles.csv --out circles.svg
"""

import argparse
import itertools
import logging
import sys
from typing import Optional, Sequence

from . import __version__
from . import exceptions as ex
from .config import DEFAULT_CONFIG, Config
from .datasets import (
    LabeledDataset,
    gen_circles,
    gen_gaussians,
    gen_moons,
    gen_xor,
    jitter_constant_features,
    load_csv,
    load_points,
    ovr_report,
    save_csv,
)
from .evaluation import Prediction, evaluate, predict, write_predictions
from .partition import OneVsRest, train_ensemble
from .plot import plot_partition
from .selection import conjoin, parse_selection, render_selection
from .store import load_ensemble, save_ensemble

log = logging.getLogger(__name__)

SYNTH_KINDS = ("xor", "circles", "moons", "gaussians")


###############################################################################
# Arguments
###############################################################################
def _add_input_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("csv", help="comma separated input file")
    parser.add_argument(
        "--label-col",
        default="label",
        help="name (or position) of the label column (default: %(default)s)",
    )
    parser.add_argument(
        "--no-header",
        dest="header",
        action="store_false",
        help="the file has no header line; columns are named by position",
    )
    parser.add_argument(
        "--filter",
        action="append",
        default=[],
        metavar="EXPR",
        help="keep only rows matching EXPR, e.g. 'sex = Male and age >= 30'; "
        "repeated filters are combined with 'and'",
    )
    parser.add_argument(
        "--drop",
        action="append",
        default=[],
        metavar="COL",
        help="leave column COL out of the features",
    )


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    d = DEFAULT_CONFIG
    parser.add_argument("--n-imp", type=int, default=d.n_imp, help="impurity budget")
    parser.add_argument("--seed", type=int, default=d.seed)
    parser.add_argument("--tol-fit", type=float, default=d.tol_fit)
    parser.add_argument("--tol-qp", type=float, default=d.tol_qp)
    parser.add_argument("--abstain-band", type=float, default=d.abstain_band)
    parser.add_argument(
        "--jitter",
        type=float,
        default=d.jitter_radius_frac,
        help="relative radius of the noise added to constant features",
    )
    parser.add_argument(
        "--folds", type=int, default=d.folds, help="cross validation folds, 0 to split"
    )
    parser.add_argument("--test-fraction", type=float, default=d.test_fraction)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ellipart",
        description="Classify points with labelled minimum volume ellipsoids.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="log more (repeat for debug output)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    train = commands.add_parser("train", help="partition a labelled CSV file")
    _add_input_args(train)
    _add_config_args(train)
    train.add_argument("--out", required=True, help="model file to write")

    pred = commands.add_parser("predict", help="classify the rows of a CSV file")
    pred.add_argument("model", help="model file written by 'train'")
    _add_input_args(pred)
    pred.add_argument("--abstain-band", type=float, default=None)
    pred.add_argument("--out", default="-", help="prediction CSV (default: stdout)")

    ev = commands.add_parser("eval", help="held-out accuracy and trust per region")
    _add_input_args(ev)
    _add_config_args(ev)
    ev.add_argument("--out", default=None, help="also write the predictions here")

    ovr = commands.add_parser("ovr", help="overlap ratio of every pair of classes")
    _add_input_args(ovr)
    ovr.add_argument("--tol-fit", type=float, default=DEFAULT_CONFIG.tol_fit)

    synth = commands.add_parser("synth", help="generate a synthetic dataset")
    synth.add_argument("kind", choices=SYNTH_KINDS)
    synth.add_argument("--n-points", type=int, default=200)
    synth.add_argument("--noise", type=float, default=0.0)
    synth.add_argument("--separation", type=float, default=0.0)
    synth.add_argument("--support-radius", type=float, default=0.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True)

    plot = commands.add_parser("plot", help="draw a 2-feature model as SVG")
    plot.add_argument("model")
    plot.add_argument("csv", nargs="?", help="points to draw under the ellipsoids")
    plot.add_argument("--label-col", default="label")
    plot.add_argument("--no-header", dest="header", action="store_false")
    plot.add_argument("--out", required=True)

    return parser


def config_from_args(args: argparse.Namespace) -> Config:
    return Config(
        n_imp=args.n_imp,
        seed=args.seed,
        tol_fit=args.tol_fit,
        tol_qp=args.tol_qp,
        abstain_band=args.abstain_band,
        jitter_radius_frac=args.jitter,
        folds=args.folds,
        test_fraction=args.test_fraction,
    )


def _selection(args: argparse.Namespace) -> Optional[str]:
    if not args.filter:
        return None
    return render_selection(conjoin([parse_selection(f) for f in args.filter]))


def _load(args: argparse.Namespace) -> LabeledDataset:
    return load_csv(
        args.csv,
        label_column=args.label_col,
        has_header=args.header,
        selection=_selection(args),
        drop=args.drop,
    )


def _plural(count: int, word: str) -> str:
    return f"{count} {word}" + ("" if count == 1 else "s")


###############################################################################
# Commands
###############################################################################
def _load_jittered(args: argparse.Namespace, config: Config) -> LabeledDataset:
    return jitter_constant_features(
        _load(args), config.jitter_radius_frac, config.seed
    )


def cmd_train(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    dataset = _load_jittered(args, config)
    ensemble = train_ensemble(dataset, config, selection=_selection(args))

    for index, model in enumerate(ensemble.models):
        if not ensemble.binary:
            print(f"class {ensemble.classes[index]} vs rest:")
        for record in model.history:
            print(
                f"  iteration {record.iteration}: "
                f"{_plural(len(record.created), 'ellipsoid')}, "
                f"removed {record.removed_pos} + {record.removed_neg} points, "
                f"impurity {list(record.impurity)}"
                + (" (disjoint)" if record.disjoint else "")
            )
        if model.break_reason:
            print(f"  stopped: {model.break_reason}")

    iterations = sum(m.iterations for m in ensemble.models)
    ellipsoids = sum(len(m.cells) - len(m.leftovers) for m in ensemble.models)
    isolated = sum(len(m.leftovers) for m in ensemble.models)
    print(
        f"{_plural(iterations, 'iteration')}, {_plural(ellipsoids, 'ellipsoid')}, "
        f"{_plural(isolated, 'isolated point')}"
    )
    save_ensemble(ensemble, args.out)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    ensemble = load_ensemble(args.model)
    config = ensemble.models[0].config
    if args.abstain_band is not None:
        config = config.evolve(abstain_band=args.abstain_band)

    points, rows, _ = load_points(
        args.csv,
        feature_names=[f for f in ensemble.feature_names if f not in args.drop],
        has_header=args.header,
        label_column=args.label_col,
        selection=_selection(args),
    )
    if points.shape[1] != ensemble.dimension:
        raise ex.DimensionMismatch(ensemble.dimension, points.shape[1], "input file")

    predictions = [
        Prediction(int(row), ensemble.classes[cls], report)
        for row, (cls, _, report) in zip(rows, predict(ensemble, points, config))
    ]
    write_predictions(predictions, sys.stdout if args.out == "-" else args.out)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    report = evaluate(_load_jittered(args, config), config)

    committed = report.committed_accuracy
    if committed is None:
        committed_text = "n/a (all predictions abstained)"
    else:
        committed_text = f"{committed:.4f}"
    print(f"folds: {report.folds}")
    print(f"predictions: {len(report.predictions)}")
    print(f"accuracy: {report.accuracy:.4f}")
    print(f"abstentions: {report.abstentions}")
    print(f"accuracy without abstentions: {committed_text}")
    print()
    print(report.region_table().to_string(index=False, float_format="%.4f"))
    if args.out:
        write_predictions(report.predictions, args.out)
    return 0


def cmd_ovr(args: argparse.Namespace) -> int:
    dataset = _load(args)
    print("class_a,class_b,ovr_a,ovr_b,in_a,out_a,in_b,out_b")
    for a, b in itertools.combinations(range(dataset.n_classes), 2):
        r = ovr_report(dataset, a, b, tol_fit=args.tol_fit)
        print(
            f"{r.class_a},{r.class_b},{r.ovr_a:.6f},{r.ovr_b:.6f},"
            f"{r.in_a},{r.out_a},{r.in_b},{r.out_b}"
        )
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    if args.kind == "xor":
        dataset = gen_xor(args.support_radius, args.seed)
    elif args.kind == "circles":
        dataset = gen_circles(args.n_points, args.noise, args.seed)
    elif args.kind == "moons":
        dataset = gen_moons(args.n_points, args.noise, args.seed)
    else:
        dataset = gen_gaussians(args.n_points // 2, args.separation, args.seed)
    save_csv(dataset, args.out)
    print(f"wrote {len(dataset)} records to {args.out}")
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    ensemble: OneVsRest = load_ensemble(args.model)
    dataset = None
    if args.csv:
        dataset = load_csv(
            args.csv, label_column=args.label_col, has_header=args.header
        )
    drawn = plot_partition(ensemble, args.out, dataset)
    print(f"wrote {_plural(drawn, 'ellipsoid')} to {args.out}")
    return 0


COMMANDS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "ovr": cmd_ovr,
    "synth": cmd_synth,
    "plot": cmd_plot,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )

    try:
        return COMMANDS[args.command](args)
    except ex.EllipartException as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
