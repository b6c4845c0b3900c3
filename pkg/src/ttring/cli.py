"""Command-line front end.

    ttring table1    [--ranks 3,6,9,12] [--seed N] [--eps E] [--out FILE] ...
    ttring table2    ...
    ttring roundtrip ...
    ttring profile   --experiment table1 --R 6 --core 4
    ttring round     --in net.json --eps 1e-10 --out rounded.json
    ttring convert   --in net.json --to tt --out train.json [--check]

Core numbers on the command line are 1-based.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from contextlib import contextmanager

import numpy as np

from . import netfile
from .dense import DenseSizeError, rel_error
from .experiments import (
    DEFAULT_PROFILE_CORE,
    ExperimentConfig,
    experiment_ring,
    report_records,
    run_experiment,
    scaled_profile,
)
from .linalg import SvdConvergenceError
from .tr import RingMatrix, TensorRing, _tr_round_impl, tr_contract, tr_norm, tr_round, tr_to_tt, tt_to_tr
from .tt import TensorTrain, TrainMatrix, tt_contract, tt_round

EXPERIMENTS = {"table1": "matmul", "table2": "hadamard", "roundtrip": "tt_to_tr_roundtrip"}


class CliError(Exception):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("need at least one value")
    return vals


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ttring", description="Tensor train and tensor ring rank experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("table1", "rank of A A^T rounded as a ring and as a train"),
        ("table2", "rank of x * x rounded as a ring and as a train"),
        ("roundtrip", "rounded train of x * x converted back to a ring and rounded"),
    ):
        e = sub.add_parser(name, help=help_text)
        e.add_argument("--ranks", type=_int_list, default=(3, 6, 9, 12), help="comma-separated R values")
        e.add_argument("--seed", type=int, default=0)
        e.add_argument("--eps", type=_nonneg_float, default=1e-10, help="rounding tolerance")
        e.add_argument("--out", help="report file (default: standard output)")
        e.add_argument("--format", choices=("csv", "json"), default="csv")
        e.add_argument("--columns", type=lambda s: tuple(c.strip() for c in s.split(",")),
                       help="comma-separated subset of report columns")
        e.add_argument("--jobs", type=_positive_int, default=1, help="rows computed concurrently")
        e.add_argument("--dim", type=_positive_int, default=6, help="mode size")
        e.add_argument("--d", type=_positive_int, default=None, help="number of cores")
        e.add_argument("--profile", metavar="PATH", help="also write a scaled singular profile CSV")
        e.add_argument("--profile-core", type=_positive_int, help="core for --profile (1-based)")
        e.add_argument("--profile-R", type=_positive_int, help="R for --profile (default: largest)")
        if name == "roundtrip":
            e.add_argument("--ring-rank", type=_positive_int, default=3,
                           help="ring rank requested when converting the train back")
        e.set_defaults(func=cmd_experiment)

    pr = sub.add_parser("profile", help="scaled singular profile of one core")
    pr.add_argument("--experiment", choices=tuple(EXPERIMENTS), default="table1")
    pr.add_argument("--R", type=_positive_int, default=6)
    pr.add_argument("--in", dest="infile", help="ring file instead of an experiment ring")
    pr.add_argument("--core", type=_positive_int, help="core number (1-based)")
    pr.add_argument("--seed", type=int, default=0)
    pr.add_argument("--eps", type=_nonneg_float, default=1e-10)
    pr.add_argument("--dim", type=_positive_int, default=6)
    pr.add_argument("--d", type=_positive_int, default=None)
    pr.add_argument("--out", help="profile CSV (default: standard output)")
    pr.set_defaults(func=cmd_profile)

    rd = sub.add_parser("round", help="round a network file")
    rd.add_argument("--in", dest="infile", required=True)
    rd.add_argument("--eps", type=_nonneg_float, default=1e-10)
    rd.add_argument("--out", required=True)
    rd.set_defaults(func=cmd_round)

    cv = sub.add_parser("convert", help="convert between train and ring files")
    cv.add_argument("--in", dest="infile", required=True)
    cv.add_argument("--to", choices=("tt", "tr"), required=True)
    cv.add_argument("--out", required=True)
    cv.add_argument("--cut-edge", type=int, default=0, help="ring edge to open (0-based, tr to tt)")
    cv.add_argument("--ring-rank", type=_positive_int, default=1, help="ring rank to create (tt to tr)")
    cv.add_argument("--check", action="store_true", help="verify the result against the dense tensor")
    cv.set_defaults(func=cmd_convert)
    return p


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_profile(path, profile: np.ndarray) -> None:
    with _output(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "scaled_sigma"])
        for i, v in enumerate(profile, start=1):
            w.writerow([i, repr(float(v))])


def cmd_experiment(args) -> int:
    kind = EXPERIMENTS[args.command]
    core = (args.profile_core - 1) if args.profile_core else DEFAULT_PROFILE_CORE[kind]
    cfg = ExperimentConfig(
        kind=kind,
        R_values=args.ranks,
        seed=args.seed,
        epsilon=args.eps,
        d=args.d,
        dim=args.dim,
        profile_core=core if args.profile else None,
        profile_R=args.profile_R,
        roundtrip_R1=getattr(args, "ring_rank", 3),
        jobs=args.jobs,
    )
    report = run_experiment(cfg)
    records = report_records(report)
    header = list(records[0])
    if args.columns:
        unknown = [c for c in args.columns if c not in header]
        if unknown:
            raise CliError(f"unknown column(s) {', '.join(unknown)}; available: {', '.join(header)}")
        header = list(args.columns)
    with _output(args.out) as fh:
        if args.format == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for rec in records:
                w.writerow([rec[c] for c in header])
        else:
            doc = {
                "experiment": kind,
                "seed": cfg.seed,
                "epsilon": cfg.epsilon,
                "rows": [
                    {
                        **{c: rec[c] for c in header},
                        "tr_rounded_ranks": list(row.tr_rounded_ranks),
                        "tt_rounded_ranks": list(row.tt_rounded_ranks),
                        "ratio_exact": str(row.ratio),
                    }
                    for rec, row in zip(records, report.rows)
                ],
            }
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    if args.profile:
        _write_profile(args.profile, report.profile)
    return 0


def cmd_profile(args) -> int:
    if args.infile:
        ring = netfile.load(args.infile)
        if not isinstance(ring, (TensorRing, RingMatrix)):
            raise CliError("profile input must be a ring (kind tr or tr_matrix)")
        default_core = ring.d
    else:
        kind = EXPERIMENTS[args.experiment]
        ring = experiment_ring(kind, args.R, args.seed, dim=args.dim, d=args.d)
        default_core = DEFAULT_PROFILE_CORE[kind] + 1
    core = args.core if args.core is not None else default_core
    if not 1 <= core <= ring.d:
        raise CliError(f"--core must lie in [1, {ring.d}], got {core}")
    if ring.d == 1:
        raise CliError("a single-core ring has no edge to truncate")
    _, spectra = _tr_round_impl(ring, args.eps)
    _write_profile(args.out, scaled_profile(spectra, core - 1, tr_norm(ring), ring.d, ring.ranks[0]))
    return 0


def _ranks_text(x) -> str:
    return " ".join(str(r) for r in x.ranks)


def cmd_round(args) -> int:
    x = netfile.load(args.infile)
    if isinstance(x, (TensorTrain, TrainMatrix)):
        y = tt_round(x, args.eps)
    else:
        y = tr_round(x, args.eps)
    netfile.save(y, args.out)
    print(f"pre:  {_ranks_text(x)}")
    print(f"post: {_ranks_text(y)}")
    return 0


def cmd_convert(args) -> int:
    x = netfile.load(args.infile)
    is_train = isinstance(x, (TensorTrain, TrainMatrix))
    if is_train and args.to == "tt" or not is_train and args.to == "tr":
        raise CliError(f"input is already of kind {netfile.kind_of(x)}; nothing to convert")
    if is_train:
        y = tt_to_tr(x, args.ring_rank)
    else:
        if not 0 <= args.cut_edge < x.d:
            raise CliError(f"--cut-edge must lie in [0, {x.d - 1}], got {args.cut_edge}")
        y = tr_to_tt(x, args.cut_edge)
    if args.check:
        src = tt_contract(x) if is_train else tr_contract(x)
        dst = tr_contract(y) if is_train else tt_contract(y)
        if not is_train and args.cut_edge:
            d = x.d
            width = len(x.phys_shapes[0])
            perm = [w * d + (j + args.cut_edge) % d for w in range(width) for j in range(d)]
            src = type(src)(np.transpose(src.array, perm))
        err = rel_error(dst, src) if np.any(src.array) else float(np.max(np.abs(dst.array)))
        if err > 1e-10:
            raise CliError(f"check failed: relative error {err:.3e}")
        print(f"check: relative error {err:.3e}")
    netfile.save(y, args.out)
    print(f"{netfile.kind_of(x)} {_ranks_text(x)} -> {netfile.kind_of(y)} {_ranks_text(y)}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, netfile.NetworkFormatError, DenseSizeError, SvdConvergenceError,
            ValueError, TypeError, OSError) as exc:
        print(f"ttring: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
