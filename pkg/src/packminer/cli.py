"""Command line entry point: ``packminer <command> ...``.

Exit codes: 0 ok, 1 I/O or parse error, 2 usage error, 3 infeasible candidate family.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .candidates import FamilyError, ItemsetFamily, format_family, mine_frequent, parse_family
from .classify import Algorithm, ClassifyError, LabeledDataset, evaluate, read_labels
from .dataset import BinaryDataset, DatasetError, load
from .dtree import TreeError, TreeModel
from .extract import model_sets, write_itemsets
from .greedypack import greedy_pack
from .setpack import MODES, PROPAGATION, set_pack
from .synth import chain_toy, independent_toy, two_class_toy

log = logging.getLogger("packminer")

EXIT_IO = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_IO) -> None:
        super().__init__(message)
        self.code = code


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest(args: argparse.Namespace, inputs: list[str], **extra) -> dict:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command", "pack_command")}
    out = {
        "command": " ".join(["packminer"] + args._argv),
        "inputs": {p: _digest(p) for p in inputs},
        "seed": getattr(args, "seed", None),
        "flags": {k: v for k, v in flags.items() if not k.startswith("_")},
        "versions": {"packminer": __version__, "python": platform.python_version(), "numpy": np.__version__},
        "baseline": "all-trivial tree model",
    }
    out.update(extra)
    return out


def _read_dataset(path: str, fmt: str | None) -> BinaryDataset:
    if fmt is None:
        fmt = "csv01" if path.endswith(".csv") else "fimi"
    try:
        with open(path, "rb") as fh:
            return load(fh, fmt)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except (DatasetError, UnicodeDecodeError) as exc:
        raise CliError(f"{path}: {exc}") from exc


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _threads(args) -> int:
    n = args.threads
    if n is None:
        n = int(os.environ.get("PACKMINER_THREADS", "1") or 1)
    return n if n > 0 else (os.cpu_count() or 1)


def _pretty_report(report: dict) -> str:
    width = max(len(k) for k in report)
    lines = []
    for key, value in report.items():
        if isinstance(value, float):
            value = f"{value:.2f}"
        elif isinstance(value, (dict, list)):
            continue
        lines.append(f"{key:<{width}}  {value}")
    return "\n".join(lines) + "\n"


def _emit_report(args, report: dict) -> None:
    _write(args.report, _pretty_report(report) if args.pretty else _dumps(report))


def _model_outputs(args, ds: BinaryDataset, model: TreeModel, meta: dict, extra_report: dict) -> dict:
    baseline = TreeModel.trivial(ds).cost().total
    cost = model.cost()
    itemsets = model_sets(model)
    non_empty = [x for x in itemsets if x]
    report = {
        "n_rows": ds.n_rows,
        "n_attrs": ds.n_attrs,
        "baseline_bits": baseline,
        "model_bits": cost.total,
        "ratio_pct": 100.0 * cost.total / baseline,
        "n_trees": model.n_nontrivial(),
        "n_sets": len(non_empty) if args.drop_empty else len(itemsets),
        "n_sets_with_empty": len(itemsets),
        "n_sets_without_empty": len(non_empty),
        "cost": cost.to_dict(),
    }
    report.update(extra_report)
    report["manifest"] = meta
    if args.output:
        doc = model.to_json()
        doc["baseline_bits"] = baseline
        doc["manifest"] = meta
        _write(args.output, _dumps(doc))
    if args.emit_itemsets:
        _write(args.emit_itemsets, write_itemsets(non_empty if args.drop_empty else itemsets, ds.attr_names))
    if args.dot:
        _write(args.dot, model.graph().to_dot(ds.attr_names))
    return report


def cmd_pack_greedy(args) -> int:
    ds = _read_dataset(args.input, args.format)
    model, _ = greedy_pack(ds, use_cache=not args.no_cache)
    meta = manifest(args, [args.input], algorithm="greedy")
    _emit_report(args, _model_outputs(args, ds, model, meta, {"algorithm": "greedy"}))
    return 0


def _candidate_family(args, ds: BinaryDataset) -> ItemsetFamily:
    if args.candidates:
        try:
            with open(args.candidates, encoding="utf-8") as fh:
                fam = parse_family(fh.read(), ds.attr_names)
        except OSError as exc:
            raise CliError(f"cannot read {args.candidates}: {exc.strerror or exc}") from exc
        except FamilyError as exc:
            raise CliError(f"{args.candidates}: {exc}") from exc
        bad = sorted(i for i in fam.universe if i >= ds.n_attrs)
        if bad:
            raise CliError(f"candidate family uses attributes {bad} not in the dataset", EXIT_INFEASIBLE)
    else:
        fam = mine_frequent(ds, _minsup(args, ds), args.max_size)
    if args.max_size is not None:
        fam = fam.restrict_size(args.max_size)
    missing = [i for i in range(ds.n_attrs) if (i,) not in fam]
    if missing and args.no_repair:
        names = ", ".join(ds.attr_names[i] for i in missing)
        raise CliError(f"family lacks singletons for: {names}", EXIT_INFEASIBLE)
    return fam


def _minsup(args, ds: BinaryDataset) -> int:
    if args.minsup is not None:
        if args.minsup < 1:
            raise CliError("--minsup must be at least 1", EXIT_USAGE)
        return args.minsup
    if args.minsup_frac is not None:
        if not 0.0 < args.minsup_frac <= 1.0:
            raise CliError("--minsup-frac must lie in (0, 1]", EXIT_USAGE)
        return max(1, int(np.ceil(args.minsup_frac * ds.n_rows - 1e-12)))
    raise CliError("give --candidates, --minsup or --minsup-frac", EXIT_USAGE)


def cmd_pack_select(args) -> int:
    ds = _read_dataset(args.input, args.format)
    fam = _candidate_family(args, ds)
    result = set_pack(ds, fam, args.mode, args.propagate, use_cache=not args.no_cache)
    inputs = [args.input] + ([args.candidates] if args.candidates else [])
    meta = manifest(args, inputs, algorithm="select", forced_singletons=[ds.attr_names[i] for i in result.forced_singletons])
    extra = {
        "algorithm": "select",
        "mode": args.mode,
        "n_candidates": len(fam),
        "passes": result.passes,
    }
    report = _model_outputs(args, ds, result.model, meta, extra)
    if args.sources:
        doc = result.sources_json(list(ds.attr_names))
        doc["manifest"] = meta
        _write(args.sources, _dumps(doc))
    _emit_report(args, report)
    return 0


def cmd_mine(args) -> int:
    ds = _read_dataset(args.input, args.format)
    fam = mine_frequent(ds, _minsup(args, ds), args.max_size)
    _write(args.output, format_family(fam, ds.attr_names if args.names else None))
    return 0


def cmd_extract(args) -> int:
    try:
        with open(args.model, encoding="utf-8") as fh:
            doc = json.load(fh)
        model = TreeModel.from_json(doc)
    except OSError as exc:
        raise CliError(f"cannot read {args.model}: {exc.strerror or exc}") from exc
    except (ValueError, KeyError, TypeError, TreeError) as exc:
        raise CliError(f"{args.model}: malformed model ({exc})") from exc
    sets = model_sets(model, drop_empty=args.drop_empty)
    _write(args.output, write_itemsets(sets, model.attr_names if args.names else None))
    return 0


def cmd_stats(args) -> int:
    ds = _read_dataset(args.input, args.format)
    report = {
        "n_rows": ds.n_rows,
        "n_attrs": ds.n_attrs,
        "density_pct": round(100.0 * ds.density(), 6),
        "manifest": manifest(args, [args.input]),
    }
    _emit_report(args, report)
    return 0


def _labeled(args) -> LabeledDataset:
    if args.label_column:
        try:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise CliError(f"cannot read {args.input}: {exc.strerror or exc}") from exc
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise CliError(f"{args.input}: empty input")
        header = [h.strip() for h in rows[0]]
        if args.label_column not in header:
            raise CliError(f"{args.input}: no column named {args.label_column!r}")
        col = header.index(args.label_column)
        body = [r for r in rows[1:] if r and any(c.strip() for c in r)]
        labels = read_labels("\n".join(r[col].strip() for r in body))
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header[:col] + header[col + 1:])
        for r in body:
            writer.writerow(r[:col] + r[col + 1:])
        try:
            ds = load(buf.getvalue(), "csv01")
        except DatasetError as exc:
            raise CliError(f"{args.input}: {exc}") from exc
    elif args.labels:
        ds = _read_dataset(args.input, args.format)
        try:
            with open(args.labels, encoding="utf-8") as fh:
                labels = read_labels(fh.read())
        except OSError as exc:
            raise CliError(f"cannot read {args.labels}: {exc.strerror or exc}") from exc
    else:
        raise CliError("give --labels FILE or --label-column NAME", EXIT_USAGE)
    try:
        return LabeledDataset(ds, tuple(labels))
    except ClassifyError as exc:
        raise CliError(str(exc)) from exc


def cmd_classify(args) -> int:
    data = _labeled(args)
    algorithm = Algorithm(args.algorithm, mode=args.mode, minsup_frac=args.minsup_frac)
    try:
        report = evaluate(data, args.split, args.seed, algorithm, _threads(args), args.prior)
    except ClassifyError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    inputs = [args.input] + ([args.labels] if args.labels else [])
    report["manifest"] = manifest(args, inputs)
    _emit_report(args, report)
    return 0


def cmd_synth(args) -> int:
    if args.kind == "chain":
        ds, labels = chain_toy(args.rows, args.attrs, args.keep, args.seed), None
    elif args.kind == "independent":
        ds, labels = independent_toy(args.rows, args.attrs, args.seed), None
    else:
        ds, labels = two_class_toy(args.rows, args.attrs, args.keep, args.seed)
    from .dataset import to_fimi

    _write(args.output, to_fimi(ds))
    if labels is not None:
        if not args.labels_output:
            raise CliError("two-class data needs --labels-output", EXIT_USAGE)
        _write(args.labels_output, "".join(f"{v}\n" for v in labels))
    return 0


def _common_io(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="transaction file (FIMI .dat or 0/1 CSV)")
    p.add_argument("--format", choices=("fimi", "csv01"), help="input format (default: by extension)")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.add_argument("--pretty", action="store_true", help="plain-text report")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="worker count, 0 = auto (env PACKMINER_THREADS)")


def _model_io(p: argparse.ArgumentParser) -> None:
    p.add_argument("--output", "-o", help="model JSON path")
    p.add_argument("--emit-itemsets", help="itemset list path")
    p.add_argument("--dot", help="dependency graph as DOT")
    p.add_argument("--drop-empty", action="store_true", help="leave the empty itemset out of the set count and list")
    p.add_argument("--no-cache", action="store_true", help="recompute every candidate each pass")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="packminer", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    pack = sub.add_parser("pack", help="build a tree model")
    pack_sub = pack.add_subparsers(dest="pack_command", required=True)
    greedy = pack_sub.add_parser("greedy", help="greedy splitting directly from data")
    _common_io(greedy)
    _model_io(greedy)
    greedy.set_defaults(func=cmd_pack_greedy)

    select = pack_sub.add_parser("select", help="trees restricted to a candidate itemset family")
    _common_io(select)
    _model_io(select)
    select.add_argument("--candidates", help="candidate family file")
    select.add_argument("--minsup", type=int, help="mine frequent itemsets with this absolute support")
    select.add_argument("--minsup-frac", type=float, help="minimum support as a fraction of rows")
    select.add_argument("--max-size", type=int, help="drop candidates with more items than this")
    select.add_argument("--mode", choices=MODES, default="exhaustive")
    select.add_argument("--propagate", choices=PROPAGATION, default="ancestors")
    select.add_argument("--sources", help="write per-attribute source sets and marking order (JSON)")
    select.add_argument("--no-repair", action="store_true", help="fail instead of adding missing singletons")
    select.set_defaults(func=cmd_pack_select)

    mine = sub.add_parser("mine", help="write the frequent itemset family")
    _common_io(mine)
    mine.add_argument("--minsup", type=int)
    mine.add_argument("--minsup-frac", type=float)
    mine.add_argument("--max-size", type=int)
    mine.add_argument("--output", "-o")
    mine.add_argument("--names", action="store_true", help="write attribute names instead of ids")
    mine.set_defaults(func=cmd_mine)

    extract = sub.add_parser("extract", help="itemsets implied by a saved model")
    extract.add_argument("model", help="model JSON from pack")
    extract.add_argument("--output", "-o")
    extract.add_argument("--drop-empty", action="store_true")
    extract.add_argument("--names", action="store_true", help="write attribute names instead of ids")
    extract.set_defaults(func=cmd_extract)

    stats = sub.add_parser("stats", help="rows, attributes and density")
    _common_io(stats)
    stats.set_defaults(func=cmd_stats)

    cls = sub.add_parser("classify", help="holdout accuracy of compression-based classification")
    _common_io(cls)
    cls.add_argument("--labels", help="label file, one label per transaction")
    cls.add_argument("--label-column", help="name of the label column in a CSV input")
    cls.add_argument("--split", type=float, default=0.9, help="training fraction")
    cls.add_argument("--algorithm", choices=("greedy", "select"), default="greedy")
    cls.add_argument("--mode", choices=MODES, default="exhaustive")
    cls.add_argument("--minsup-frac", type=float, default=None)
    cls.add_argument("--prior", action="store_true", help="add -log2 of the class fraction")
    cls.set_defaults(func=cmd_classify)

    synth = sub.add_parser("synth", help="write a synthetic toy dataset in FIMI format")
    synth.add_argument("kind", choices=("chain", "independent", "two-class"))
    synth.add_argument("--rows", type=int, default=2000)
    synth.add_argument("--attrs", type=int, default=10)
    synth.add_argument("--keep", type=float, default=0.9, help="chain copy probability")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--output", "-o")
    synth.add_argument("--labels-output")
    synth.set_defaults(func=cmd_synth)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.command == "classify" and args.algorithm == "select" and args.minsup_frac is None:
        parser.error("--algorithm select needs --minsup-frac")
    start = time.perf_counter()
    try:
        code = args.func(args)
    except CliError as exc:
        print(f"packminer: {exc}", file=sys.stderr)
        return exc.code
    log.info("wall time %.3f s", time.perf_counter() - start)
    return code


if __name__ == "__main__":
    sys.exit(main())
