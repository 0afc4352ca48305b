"""Command-line entry point.

Exit codes: 0 success, 1 configuration/usage error, 2 data or I/O error,
3 training divergence or other runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import RunConfig, load_config, with_seed, with_strategy
from .data import DatasetSpec, make_blobs, write_csv
from .errors import ConfigurationError, DataError, DivergenceError, HybridALError
from .experiment import ablate_dsal, compare, execute
from .serialize import (
    OutputError,
    export_embeddings,
    read_manifest,
    write_comparison,
    write_curve,
    write_manifest,
)
from .strategies import Kind

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _kinds(text: str) -> list[Kind]:
    try:
        return [Kind(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError:
        choices = ",".join(k.value for k in Kind)
        raise argparse.ArgumentTypeError(f"strategies must be drawn from {choices}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file (key = value)")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--jobs", type=int, default=1, help="parallel runs for compare/ablate")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="hybrid-al", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", parents=[common], help="one run: curve.csv + manifest.json")
    p.add_argument("--manifest", help="repeat the run recorded in a manifest instead of --config")

    p = sub.add_parser("compare", parents=[common], help="several strategies over several seeds")
    p.add_argument("--strategies", type=_kinds, default=[Kind.LCD, Kind.RANDOM])
    p.add_argument("--seeds", type=_ints)

    p = sub.add_parser("ablate", parents=[common], help="DSAL hard:easy ratio sweep")
    p.add_argument("--ratios", type=_floats, default=[0.0, 0.25, 0.5, 0.75, 1.0])
    p.add_argument("--seeds", type=_ints)

    p = sub.add_parser("make-data", parents=[common], help="write a synthetic blobs CSV")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--classes", type=int)
    p.add_argument("--spread", type=float)
    p.add_argument("--weights", type=_floats)
    p.add_argument("--output", default="data.csv", help="file name inside --out-dir")

    sub.add_parser("export-embeddings", parents=[common],
                   help="run, then write the final model's embedding of every pool sample")
    return parser


def _config(args) -> RunConfig:
    if not args.config:
        raise ConfigurationError("--config is required")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = with_seed(cfg, args.seed)
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out}: {exc}") from exc
    return out


def _write_table(table, out: Path) -> None:
    write_comparison(table, out / "comparison.csv")
    for row, manifests in zip(table.rows, table.manifests):
        for curve, manifest in zip(row.curves, manifests):
            run_dir = out / "runs" / row.label / f"seed{curve.seed}"
            run_dir.mkdir(parents=True, exist_ok=True)
            write_curve(curve, run_dir / "curve.csv")
            write_manifest(manifest, run_dir / "manifest.json")
    for row in table.rows:
        print(f"{row.label}: AUC {row.auc_mean:.4f} +- {row.auc_std:.4f} "
              f"final acc {row.mean_accuracy[-1]:.4f}")


def _seeds(args, cfg: RunConfig) -> list[int]:
    if args.seeds:
        return args.seeds
    return [cfg.master_seed]


def cmd_run(args) -> None:
    if args.manifest:
        cfg = read_manifest(args.manifest).config
        if args.seed is not None:
            cfg = with_seed(cfg, args.seed)
    else:
        cfg = _config(args)
    out = _out_dir(args)
    result = execute(cfg)
    write_curve(result.curve, out / "curve.csv")
    write_manifest(result.manifest, out / "manifest.json")
    last = result.curve.points[-1]
    print(f"{result.curve.strategy}: {len(result.curve.points)} points, "
          f"final accuracy {last.test_accuracy:.4f} at {last.labeled_fraction:.2%} labeled")


def cmd_compare(args) -> None:
    cfg = _config(args)
    cfgs = [with_strategy(replace(cfg, name=""), kind=k) for k in args.strategies]
    _write_table(compare(cfgs, _seeds(args, cfg), jobs=args.jobs), _out_dir(args))


def cmd_ablate(args) -> None:
    cfg = _config(args)
    _write_table(ablate_dsal(cfg, args.ratios, _seeds(args, cfg), jobs=args.jobs), _out_dir(args))


def cmd_make_data(args) -> None:
    spec = load_config(args.config).dataset if args.config else DatasetSpec()
    overrides = {k: v for k, v in {
        "n": args.n, "d": args.d, "num_classes": args.classes, "spread": args.spread,
        "weights": tuple(args.weights) if args.weights is not None else None, "seed": args.seed,
    }.items() if v is not None}
    try:
        spec = replace(spec, source="synthetic-blobs", path="", **overrides)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    dataset = make_blobs(spec)
    path = _out_dir(args) / args.output
    write_csv(dataset, path)
    print(f"wrote {len(dataset)} samples to {path}")


def cmd_export_embeddings(args) -> None:
    cfg = _config(args)
    out = _out_dir(args)
    result = execute(cfg)
    selected = result.last_batch.ids if result.last_batch else ()
    export_embeddings(result.model, result.pool, out / "embeddings.csv", selected)
    write_curve(result.curve, out / "curve.csv")
    write_manifest(result.manifest, out / "manifest.json")
    print(f"wrote embeddings for {result.pool.size} samples to {out / 'embeddings.csv'}")


COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "ablate": cmd_ablate,
    "make-data": cmd_make_data,
    "export-embeddings": cmd_export_embeddings,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OutputError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        if exc.partial_curve is not None and exc.partial_curve.points:
            try:
                write_curve(exc.partial_curve, Path(args.out_dir) / "curve.partial.csv")
            except OutputError:
                pass
        return EXIT_RUNTIME
    except HybridALError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
