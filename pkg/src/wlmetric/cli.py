"""Command line interface.

    wlmetric dist --method {wl|wllb|wwl} --k INT --q FLOAT --labels {raw|degree|f2|g} A.json B.json
    wlmetric matrix --method ... --k ... --q ... --labels ... --dataset DIR --out matrix.csv [--jobs INT]
    wlmetric knn --matrix matrix.csv --classes classes.txt --folds 10 --seed INT
    wlmetric kernel --matrix matrix.csv --gamma FLOAT --out kernel.csv
    wlmetric wltest A.json B.json [--max-rounds INT]

Exit status: 0 on success, 2 for invalid input, 3 for file errors.
"""
from __future__ import annotations

import argparse
import sys

from .exceptions import DataIOError, PairFailure, ValidationError, WLMetricError
from .graphs import DEFAULT_Q, wl_test
from .harness.io import (
    load_edgelist_json,
    load_tudataset,
    read_classes,
    read_matrix_csv,
    write_classes,
    write_matrix_csv,
)
from .harness.pipeline import LABEL_ALIASES, METHODS, distance_matrix, kernel_export, knn_classify

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 2, 3


def _add_distance_options(p):
    p.add_argument("--method", choices=METHODS, default="wl")
    p.add_argument("--k", type=int, default=1, help="depth")
    p.add_argument("--q", type=float, default=DEFAULT_Q, help="random-walk laziness in [0, 1)")
    p.add_argument("--labels", choices=tuple(LABEL_ALIASES), default="raw", help="relabeling scheme")


def build_parser():
    parser = argparse.ArgumentParser(prog="wlmetric", description="WL distances between labeled graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="distance between two edge-list JSON graphs")
    _add_distance_options(p)
    p.add_argument("a")
    p.add_argument("b")

    p = sub.add_parser("matrix", help="pairwise distances over a TUDataset directory")
    _add_distance_options(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--classes-out", help="also write the graph class labels here")

    p = sub.add_parser("knn", help="cross-validated 1-NN accuracy from a distance matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--classes", required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("kernel", help="exp(-gamma * d) from a distance matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("wltest", help="WL color refinement test on two graphs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--max-rounds", type=int, default=None)
    return parser


def run(args, out=sys.stdout):
    if args.command == "dist":
        dm = distance_matrix(
            [load_edgelist_json(args.a), load_edgelist_json(args.b)], args.method, args.k, args.q, args.labels
        )
        print(f"{dm.entries[0, 1]:.17g}", file=out)
    elif args.command == "matrix":
        ds = load_tudataset(args.dataset)
        dm = distance_matrix(ds, args.method, args.k, args.q, args.labels, n_jobs=args.jobs)
        meta = {"method": args.method, "dataset": ds.name, "n_graphs": len(ds), **dm.params}
        write_matrix_csv(args.out, dm.entries, meta)
        if args.classes_out:
            write_classes(args.classes_out, ds.class_labels)
    elif args.command == "knn":
        res = knn_classify(read_matrix_csv(args.matrix), read_classes(args.classes), args.folds, args.seed)
        print(f"accuracy {res.mean:.6f} +/- {res.std:.6f}", file=out)
    elif args.command == "kernel":
        kern = kernel_export(read_matrix_csv(args.matrix), args.gamma)
        write_matrix_csv(args.out, kern, {"gamma": args.gamma, "source": str(args.matrix)})
    elif args.command == "wltest":
        r = wl_test(load_edgelist_json(args.a), load_edgelist_json(args.b), args.max_rounds)
        print("indistinguishable" if r is None else f"distinguished at round {r}", file=out)
    return EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except PairFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc.cause, DataIOError) else EXIT_INVALID
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except DataIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except WLMetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
