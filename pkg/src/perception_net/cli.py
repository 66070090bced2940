"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
Diagnostics (ejection counts, degeneracy notices) go to stderr; output CSVs
stay machine-consumable.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .data import Dataset, ScoreReport, load_csv, write_scores
from .errors import DataFormatError, InvalidInputError, PerceptionError
from .evaluate import (
    NETWORK,
    SINGLE,
    markdown_summary,
    mean_metrics,
    run_benchmark,
    sweep_degrade,
    sweep_neuron_count,
    sweep_subsample_size,
    write_report,
)
from .network import (
    NetworkConfig,
    fit_network,
    fit_single,
    load_model,
    predict,
    save_model,
)
from .neuron import score_curve


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise _UsageError(message)


def _parse_decimals(text: str) -> int | None:
    if text == "auto":
        return None
    try:
        d = int(text)
    except ValueError:
        raise _UsageError(f"--decimals must be 'auto' or 0..6, got {text!r}") from None
    if not 0 <= d <= 6:
        raise _UsageError(f"--decimals must be 'auto' or 0..6, got {text!r}")
    return d


def _threads(args) -> int | None:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("PERCEPTION_NET_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise _UsageError(f"PERCEPTION_NET_THREADS must be an integer, got {env!r}") from None
    return None  # library default: available parallelism


def _add_io_flags(p: _Parser, output_required: bool = True):
    p.add_argument("input", help="input CSV (header row required)")
    p.add_argument("--label-col", default=None, metavar="NAME",
                   help="name of a 0/1 label column to exclude from features")
    p.add_argument("--decimals", default="auto", metavar="auto|0..6",
                   help="decimal accuracy; 'auto' infers per feature (default)")
    if output_required:
        p.add_argument("--output", required=True, metavar="PATH",
                       help="where to write the score CSV")


def _add_net_flags(p: _Parser):
    p.add_argument("--neurons", type=int, default=256, metavar="K")
    p.add_argument("--seed", type=int, default=0, metavar="U64")
    p.add_argument("--threads", type=int, default=None, metavar="K",
                   help="worker threads (default: available parallelism; "
                        "env PERCEPTION_NET_THREADS as fallback)")
    p.add_argument("--subsample-min", type=int, default=None, metavar="S",
                   help="override the lower draw bound min(10, N)")
    p.add_argument("--subsample-max", type=int, default=None, metavar="S",
                   help="override the upper draw bound min(1000, N)")
    p.add_argument("--fixed-subsample", type=int, default=None, metavar="S",
                   help="force every unit to draw exactly S observations")
    p.add_argument("--no-eject", action="store_true",
                   help="skip in-subsample anomaly ejection")
    p.add_argument("--no-replacement", action="store_true",
                   help="draw subsample indices without replacement")


def _config_from(args) -> NetworkConfig:
    return NetworkConfig(
        n_neurons=args.neurons,
        seed=args.seed,
        decimals=_parse_decimals(args.decimals),
        size_min=args.subsample_min,
        size_max=args.subsample_max,
        fixed_size=args.fixed_subsample,
        eject=not args.no_eject,
        replacement=not args.no_replacement,
    )


def _load(args) -> Dataset:
    return load_csv(args.input, label_column=args.label_col)


def cmd_score(args) -> int:
    ds = _load(args)
    model = fit_single(ds.matrix, decimals=_parse_decimals(args.decimals))
    if model.degenerate:
        print(f"notice: {ds.name}: zero contrast (S=0); detector never fires",
              file=sys.stderr)
    scores = model.scores(ds.matrix)
    votes = np.where(scores > 0.0, 1, -1)
    write_scores(ScoreReport(scores, votes, (scores > 0.0).astype(np.int8)),
                 args.output)
    print(f"{ds.name}: {int((scores > 0).sum())} of {ds.n_obs} flagged",
          file=sys.stderr)
    return 0


def cmd_net_score(args) -> int:
    ds = _load(args)
    threads = _threads(args)
    model = fit_network(ds.matrix, _config_from(args), threads=threads)
    _diagnose(model)
    out = predict(model, ds.matrix, threads=threads)
    write_scores(ScoreReport(out.score_sum, out.vote_sum,
                             out.anomaly.astype(np.int8)), args.output)
    print(f"{ds.name}: {int(out.anomaly.sum())} of {ds.n_obs} flagged",
          file=sys.stderr)
    return 0


def _diagnose(model):
    ejected = sum(u.ejected for u in model.units)
    degenerate = sum(u.degenerate for u in model.units)
    print(f"trained {model.n_neurons} units; {ejected} points ejected in-subsample; "
          f"{degenerate} degenerate units", file=sys.stderr)


def cmd_fit(args) -> int:
    ds = _load(args)
    model = fit_network(ds.matrix, _config_from(args), threads=_threads(args))
    _diagnose(model)
    save_model(model, args.model)
    print(f"model written to {args.model}", file=sys.stderr)
    return 0


def cmd_predict(args) -> int:
    ds = _load(args)
    model = load_model(args.model)
    out = predict(model, ds.matrix, threads=_threads(args))
    write_scores(ScoreReport(out.score_sum, out.vote_sum,
                             out.anomaly.astype(np.int8)), args.output)
    print(f"{ds.name}: {int(out.anomaly.sum())} of {ds.n_obs} flagged",
          file=sys.stderr)
    return 0


def cmd_bench(args) -> int:
    names = sorted(f for f in os.listdir(args.datasets) if f.endswith(".csv"))
    if not names:
        raise DataFormatError(f"no CSV files in {args.datasets}")
    datasets = []
    for f in names:
        try:
            datasets.append(load_csv(os.path.join(args.datasets, f),
                                     label_column=args.label_col))
        except PerceptionError as exc:
            print(f"skipping {f}: {exc}", file=sys.stderr)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    rows = run_benchmark(datasets, methods=methods,
                         seeds=tuple(range(args.seeds)),
                         config=NetworkConfig(n_neurons=args.neurons,
                                              decimals=_parse_decimals(args.decimals)),
                         threads=_threads(args))
    os.makedirs(args.output_dir, exist_ok=True)
    write_report(rows, os.path.join(args.output_dir, "report.csv"))
    with open(os.path.join(args.output_dir, "summary.md"), "w", encoding="utf-8") as fh:
        fh.write(markdown_summary(rows))
    for ds in datasets:
        if ds.labels is None:
            continue
        for m in methods:
            mm = mean_metrics(rows, ds.name, m)
            print(f"{ds.name} {m}: auc={mm['auc']:.3f} f1={mm.get('f1', 0.0):.3f}",
                  file=sys.stderr)
    return 0


def _int_list(text: str, flag: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise _UsageError(f"{flag} expects a comma-separated integer list") from None


def cmd_sweep(args) -> int:
    threads = _threads(args)
    cfg = _config_from(args)
    if args.kind == "curve":
        ds = _load(args)
        if ds.n_features != 1:
            raise InvalidInputError("score curves need a single-column dataset")
        col = ds.matrix[:, 0]
        from .neuron import fit_values

        model = fit_values(col, decimals=_parse_decimals(args.decimals))
        lo, hi = (float(col.min()), float(col.max())) if args.range is None \
            else _parse_range(args.range)
        z, devs, scores, beyond = score_curve(model, lo, hi)
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write("z,deviation,score,beyond_total_dev\n")
            for zi, ni, fi, bi in zip(z, devs, scores, beyond):
                fh.write(f"{zi:.9g},{int(ni)},{fi:.9g},{int(bi)}\n")
        return 0

    ds = _load(args)
    seeds = tuple(range(args.seeds))
    if args.kind == "neurons":
        curve = sweep_neuron_count(ds, _int_list(args.counts, "--counts"), seeds,
                                   cfg, threads)
        curve.write_csv(args.output, x_name="n_neurons")
    elif args.kind == "subsample":
        curve = sweep_subsample_size(ds, _int_list(args.sizes, "--sizes"), seeds,
                                     cfg, threads)
        curve.write_csv(args.output, x_name="subsample_size")
    else:  # degrade
        curve = sweep_degrade(ds, _int_list(args.keeps, "--keeps"), seeds,
                              cfg, threads)
        curve.write_csv(args.output, x_name="keep")
    return 0


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise _UsageError(f"--range expects LO:HI, got {text!r}") from None


def build_parser() -> _Parser:
    p = _Parser(prog="perception-net",
                description="Parameter-free anomaly scoring: single detector "
                            "and subsampling ensemble.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("score", help="fit one detector on the whole file and score it")
    _add_io_flags(ps)
    ps.set_defaults(fn=cmd_score)

    pn = sub.add_parser("net-score", help="fit the ensemble and score the same file")
    _add_io_flags(pn)
    _add_net_flags(pn)
    pn.set_defaults(fn=cmd_net_score)

    pf = sub.add_parser("fit", help="train the ensemble and persist it")
    _add_io_flags(pf, output_required=False)
    _add_net_flags(pf)
    pf.add_argument("--model", required=True, metavar="PATH")
    pf.set_defaults(fn=cmd_fit)

    pp = sub.add_parser("predict", help="score a file with a persisted model")
    pp.add_argument("input")
    pp.add_argument("--label-col", default=None, metavar="NAME")
    pp.add_argument("--model", required=True, metavar="PATH")
    pp.add_argument("--output", required=True, metavar="PATH")
    pp.add_argument("--threads", type=int, default=None, metavar="K")
    pp.set_defaults(fn=cmd_predict)

    pb = sub.add_parser("bench", help="run the benchmark over a datasets directory")
    pb.add_argument("--datasets", required=True, metavar="DIR")
    pb.add_argument("--output-dir", required=True, metavar="DIR")
    pb.add_argument("--label-col", default="label", metavar="NAME")
    pb.add_argument("--decimals", default="auto")
    pb.add_argument("--methods", default=f"{SINGLE},{NETWORK}")
    pb.add_argument("--seeds", type=int, default=10)
    pb.add_argument("--neurons", type=int, default=256)
    pb.add_argument("--threads", type=int, default=None)
    pb.set_defaults(fn=cmd_bench)

    pw = sub.add_parser("sweep", help="reproduce the sweep experiments")
    pw.add_argument("--kind", required=True,
                    choices=("neurons", "subsample", "degrade", "curve"))
    _add_io_flags(pw)
    _add_net_flags(pw)
    pw.add_argument("--seeds-count", dest="seeds", type=int, default=10)
    pw.add_argument("--counts", default="16,32,64,128,256",
                    help="unit counts for --kind neurons")
    pw.add_argument("--sizes", default="10,30,100,300,1000",
                    help="fixed subsample sizes for --kind subsample")
    pw.add_argument("--keeps", default="32,64,128,192,224,256",
                    help="retained unit counts for --kind degrade")
    pw.add_argument("--range", default=None, metavar="LO:HI",
                    help="value range for --kind curve (default: data range)")
    pw.set_defaults(fn=cmd_sweep)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, PerceptionError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        raise
    except Exception as exc:  # noqa: BLE001 - the CLI boundary maps everything
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
