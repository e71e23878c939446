"""Command-line front end.

Exit codes: 0 success, 1 analysis finding or degenerate data, 2 usage or
parse error. Reports go to standard output as one JSON object per line.
"""

from __future__ import annotations

import argparse
import contextlib
import hashlib
import io
import json
import os
import sys
from collections import Counter
from dataclasses import replace
from pathlib import Path

from . import __version__
from .agreement import cohens_kappa, krippendorff_alpha
from .core import AggregationFn, ReliabilityReport
from .engine import KrrConfig, k_curve, krr_bootstrap, krr_empirical
from .errors import DataError, InputError, KrrError
from .icc import icc_k, sb_curve
from .ingest import (
    align_replications,
    complete_case_filter,
    read_manifest,
    read_records,
    replication_ids,
    to_table,
    write_wide_csv,
)
from .simulate import GeneratorParams, generate, true_icc

SEED_ENV = "KRR_SEED"


class UsageError(InputError):
    pass


def default_seed() -> int:
    text = os.environ.get(SEED_ENV)
    if text is None:
        return 0
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={text!r} is not an integer") from None


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _scale_and_manifest(args):
    manifest = read_manifest(args.manifest) if getattr(args, "manifest", None) else None
    scale = args.scale or (manifest.scale if manifest else "interval")
    return scale, manifest


def load_tables(paths, scale, manifest=None):
    """One table per replication found across ``paths``, items aligned."""
    records = []
    for i, path in enumerate(paths):
        recs = read_records(path, scale)
        if len(paths) > 1:
            if len(replication_ids(recs)) > 1:
                raise UsageError(f"{path} holds several replications; pass it on its own")
            # files are replications even when their replication_id columns agree
            recs = [replace(r, replication_id=f"{i}:{r.replication_id}") for r in recs]
        records.extend(recs)
    alphabet = None
    if scale == "nominal":
        alphabet = manifest.alphabet if manifest and manifest.alphabet else sorted(
            {r.value for r in records}, key=str)
    tables = [to_table(records, rid, scale, alphabet) for rid in replication_ids(records)]
    if not tables:
        raise DataError("no ratings found")
    if len(tables) == 2:
        tables = list(align_replications(*tables))
    return tables


def _one_table(args):
    scale, manifest = _scale_and_manifest(args)
    tables = load_tables(args.paths, scale, manifest)
    if len(tables) != 1:
        raise UsageError(f"expected one replication, found {len(tables)}")
    table = tables[0]
    if getattr(args, "require", None):
        table = complete_case_filter(table, args.require)
    return table


def _emit(report: ReliabilityReport, out=None):
    print(report.to_json(), file=out or sys.stdout)


# -- commands ---------------------------------------------------------------


def cmd_validate(args) -> int:
    scale, manifest = _scale_and_manifest(args)
    findings = []
    records = read_records(args.paths[0], scale, findings=findings)
    for err in findings:
        print(f"finding: {err}")
    if manifest is not None:
        for rec in records:
            problem = manifest.check(rec.value)
            if problem:
                findings.append(problem)
                print(f"finding: line {rec.line}: {problem}")
        present = replication_ids(records)
        if manifest.replications and tuple(manifest.replications) != tuple(present):
            findings.append("replications")
            print(f"finding: manifest declares replications {list(manifest.replications)}, file has {present}")
    for rid in replication_ids(records):
        table = to_table(records, rid, scale)
        label = f"{rid}: " if rid else ""
        print(f"{label}{table.n} items, {table.k} slots, {table.n_missing} missing")
        per_item = Counter(table.counts().tolist())
        if len(per_item) > 1:
            dist = ", ".join(f"{c} ratings: {m} items" for c, m in sorted(per_item.items(), reverse=True))
            print(f"{label}ratings per item: {dist}")
        if manifest is not None and manifest.k is not None:
            short = [i for i, c in zip(table.item_ids, table.counts()) if c < manifest.k]
            if short:
                findings.append("redundancy")
                print(f"finding: {label}{len(short)} items have fewer than k={manifest.k} ratings, "
                      f"e.g. {short[:5]}")
    return 1 if findings else 0


def cmd_irr(args) -> int:
    table = _one_table(args)
    if args.coefficient == "icc":
        report = icc_k(table, 1)
    elif args.coefficient == "kappa":
        if not table.categorical:
            raise UsageError("kappa needs nominal ratings (--scale nominal)")
        if table.k != 2:
            raise UsageError(f"kappa compares exactly two rating columns, table has {table.k}")
        rows = table.to_rows()
        report = cohens_kappa([r[0] for r in rows], [r[1] for r in rows])
    else:
        metric = args.metric or ("nominal" if table.categorical else table.scale)
        report = krippendorff_alpha(table, metric)
    _emit(report)
    return 0


def _krr_config(args, k, categorical):
    agg = AggregationFn(args.agg, args.tie_break)
    metric = args.metric or ("nominal" if args.agg == "majority" or categorical else "interval")
    return KrrConfig(
        k=k, aggregation=agg, coefficient=args.coefficient, metric=metric,
        draws=args.draws, bootstrap_iterations=args.B, seed=args.seed, pairing=args.pairing,
    )


def cmd_krr(args) -> int:
    scale, manifest = _scale_and_manifest(args)
    tables = load_tables(args.paths, scale, manifest)
    if args.method == "empirical":
        if len(tables) != 2:
            raise UsageError(f"empirical kRR needs two replications, found {len(tables)}")
        k = args.k or min(t.k for t in tables)
        report = krr_empirical(tables[0], tables[1], _krr_config(args, k, tables[0].categorical))
    else:
        if len(tables) != 1:
            raise UsageError(f"--method {args.method} takes a single replication, found {len(tables)}")
        table = tables[0]
        if args.require:
            table = complete_case_filter(table, args.require)
        k = args.k or table.k
        if args.method == "bootstrap":
            report = krr_bootstrap(table, _krr_config(args, k, table.categorical))
        elif args.method == "icc":
            report = icc_k(table, k, mode=args.icc_mode, seed=args.seed)
        else:
            curve = sb_curve(table, args.pilot_k, k, args.seed)
            report = ReliabilityReport(
                "sb", k=k, value=curve[-1][1], n_items=table.n, seed=args.seed,
                coefficient=f"icc-oneway-pilot{args.pilot_k}",
            )
    _emit(report)
    args._reports.append(report.to_dict())
    return 0


def cmd_kcurve(args) -> int:
    scale, manifest = _scale_and_manifest(args)
    tables = load_tables(args.paths, scale, manifest)
    if len(tables) > 2:
        raise UsageError(f"at most two replications, found {len(tables)}")
    rep_b = tables[1] if len(tables) == 2 else None
    if rep_b is None:
        print("notice: one replication given; empirical series omitted", file=sys.stderr)
    cfg = _krr_config(args, 1, tables[0].categorical)
    rows = k_curve(tables[0], rep_b, cfg, k_max=args.k_max, pilot_k=args.pilot_k)
    points = [p for row in rows for p in row.values() if p is not None]
    print(f"seed={args.seed}", file=sys.stderr)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        if args.format == "csv":
            out.write("k,method,value,dispersion\n")
            for p in points:
                out.write(f"{p.k},{p.method},{p.value!r},{p.dispersion!r}\n")
        else:
            for p in points:
                out.write(json.dumps({"k": p.k, "method": p.method, "value": p.value,
                                      "dispersion": p.dispersion}) + "\n")
    finally:
        if args.out:
            out.close()
    return 0


def cmd_simulate(args) -> int:
    clip = tuple(args.clip) if args.clip else None
    try:
        params = GeneratorParams(args.mu, args.sigma2_phi, args.sigma2_eps, args.n, args.k,
                                 args.seed, clip, args.round_step)
    except ValueError as err:
        raise UsageError(str(err)) from None
    table = generate(params)
    write_wide_csv(table, args.out)
    truth = {
        "params": {"mu": params.mu, "sigma2_phi": params.sigma2_phi, "sigma2_eps": params.sigma2_eps,
                   "n": params.n, "k": params.k, "seed": params.seed,
                   "value_clip": list(clip) if clip else None, "round_step": params.round_step},
        "true_icc": {str(k): true_icc(params, k) for k in range(1, params.k + 1)}
        if params.sigma2_phi + params.sigma2_eps > 0 else None,
    }
    Path(str(args.out) + ".truth.json").write_text(json.dumps(truth, indent=2) + "\n", encoding="utf-8")
    print(json.dumps({"out": str(args.out), "n": params.n, "k": params.k, "seed": params.seed}))
    return 0


def cmd_replay(args) -> int:
    record = json.loads(Path(args.run_record).read_text(encoding="utf-8"))
    changed = [p for p, digest in record["inputs"].items() if file_digest(p) != digest]
    if changed:
        print(f"inputs changed since the record was made: {changed}", file=sys.stderr)
        return 1
    reports = []
    ns = build_parser().parse_args(record["argv"])
    ns.seed = record["seed"]
    ns._reports = reports
    ns.record = None
    with contextlib.redirect_stdout(io.StringIO()):
        ns.func(ns)
    same = reports == record["reports"]
    for rep in reports:
        print(json.dumps(rep))
    print("reproduced" if same else "MISMATCH", file=sys.stderr)
    return 0 if same else 1


# -- parser -----------------------------------------------------------------


def _common(p, paths="+"):
    p.add_argument("paths", nargs=paths, type=Path, help="long or wide CSV file(s)")
    p.add_argument("--scale", choices=["nominal", "ordinal", "interval", "ratio"])
    p.add_argument("--manifest", type=Path, help="key=value manifest (scale, min, max, alphabet, k)")


def _analysis(p):
    p.add_argument("--agg", choices=["mean", "median", "majority"], default="mean")
    p.add_argument("--tie-break", choices=["error", "lowest-label"], default="error")
    p.add_argument("--coefficient", choices=["alpha", "kappa"], default="alpha")
    p.add_argument("--metric", choices=["nominal", "ordinal", "interval", "ratio"],
                   help="alpha distance; default interval for mean/median, nominal for majority")
    p.add_argument("--draws", type=int, default=30, help="column draws per k (default 30)")
    p.add_argument("--B", type=int, default=100, help="bootstrap iterations (default 100)")
    p.add_argument("--pairing", choices=["independent", "consecutive"], default="independent")
    p.add_argument("--pilot-k", type=int, default=2)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="krr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"krr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse a dataset and report shape and problems")
    _common(p, paths=1)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("irr", help="reliability of single ratings")
    _common(p, paths=1)
    p.add_argument("--coefficient", choices=["alpha", "kappa", "icc"], default="alpha")
    p.add_argument("--metric", choices=["nominal", "ordinal", "interval", "ratio"])
    p.add_argument("--require", type=int, help="keep items with at least this many ratings")
    p.set_defaults(func=cmd_irr)

    p = sub.add_parser("krr", help="reliability of k-rating aggregates")
    _common(p)
    _analysis(p)
    p.add_argument("--method", choices=["empirical", "bootstrap", "icc", "sb"], default="empirical")
    p.add_argument("--k", type=int, help="redundancy to evaluate (default: full)")
    p.add_argument("--icc-mode", choices=["full", "subsample"], default="full")
    p.add_argument("--require", type=int, help="keep items with at least this many ratings")
    p.add_argument("--record", type=Path, help="also write a run record to this file")
    p.set_defaults(func=cmd_krr)

    p = sub.add_parser("kcurve", help="reliability against k for every method")
    _common(p)
    _analysis(p)
    p.add_argument("--k-max", type=int)
    p.add_argument("--out", type=Path)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_kcurve)

    p = sub.add_parser("simulate", help="generate one-way random-effects ratings")
    p.add_argument("--mu", type=float, default=5.0)
    p.add_argument("--sigma2-phi", type=float, default=1.0)
    p.add_argument("--sigma2-eps", type=float, default=1.0)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--k", type=int, default=13)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--clip", type=float, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--round-step", type=float)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("replay", help="re-run a krr run record and compare its reports")
    p.add_argument("run_record", type=Path, metavar="RECORD")
    p.set_defaults(func=cmd_replay)
    return parser


def _write_record(args, argv):
    resolved = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
                if k not in ("func", "_reports", "record", "paths")}
    record = {
        "command": args.command,
        "argv": [a for a in argv if a != "--record" and a != str(args.record)],
        "config": resolved,
        "inputs": {str(p): file_digest(p) for p in args.paths},
        "seed": args.seed,
        "version": __version__,
        "reports": args._reports,
    }
    Path(args.record).write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = default_seed()
        args._reports = []
        code = args.func(args)
        if getattr(args, "record", None):
            _write_record(args, argv)
        return code
    except (InputError, FileNotFoundError, IsADirectoryError, UnicodeDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except DataError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 1
    except (KrrError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())
