"""Command-line front end: ``explain``, ``eval``, ``count`` and ``oracle-check``.

Exit codes: 0 success, 1 unreadable input or invalid query, 2 enumeration
budget refused (also argparse usage errors), 3 oracle mismatch.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction

from . import engine, oracle
from .dtree import GraphPaths
from .engine import ExplanationError, Instance
from .formats import (
    format_features,
    load_instances,
    load_model,
    parse_feature_list,
    parse_point,
)
from .nbc import NbcBackend, lm_paxp_nbc

KINDS = ("axp", "lmpaxp", "minpaxp")
EXIT_INPUT, EXIT_BUDGET, EXIT_MISMATCH = 1, 2, 3
FIXPOINT_HELP = "repeat deletion passes until no feature can be dropped (lmpaxp)"


def decimal_str(x: Fraction, places: int = 4) -> str:
    with localcontext() as ctx:
        ctx.prec = 50
        d = (Decimal(x.numerator) / Decimal(x.denominator)).quantize(
            Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN)
    s = format(d, "f")
    return s.rstrip("0").rstrip(".") if "." in s else s


# ---------------------------------------------------------------------------
# explanation drivers


def _default_seed(backend, inst: Instance) -> frozenset:
    if isinstance(backend, GraphPaths):
        # fixing every feature tested on the instance's path gives precision 1
        return backend.trace(inst.values).tested
    return backend.meta.all_features


def _parse_order(text, meta):
    if text is None or text in engine.ORDER_POLICIES or text == "delta":
        return text
    # explicit removal order, e.g. "x2,x1,x3"
    return [min(parse_feature_list(tok, meta)) for tok in text.split(",") if tok.strip()]


def explain(backend, values, kind: str, delta, order=None, fixpoint: bool = False) -> frozenset:
    inst = Instance.of(backend, values)
    delta = engine.parse_delta(delta)
    if kind == "axp":
        if isinstance(backend, NbcBackend) and order in (None, "delta"):
            return backend.axp(inst.values)
        return engine.axp(backend, inst, order=None if order == "delta" else order,
                          seed=_default_seed(backend, inst))
    if kind == "lmpaxp":
        if isinstance(backend, NbcBackend) and (order is None or order == "delta"):
            return lm_paxp_nbc(backend, inst.values, delta, fixpoint=fixpoint)
        if order == "delta":
            raise ExplanationError("the 'delta' order applies to naive Bayes models only")
        return engine.lm_paxp(backend, inst, seed=_default_seed(backend, inst),
                              order=order, delta=delta, fixpoint=fixpoint)
    if kind == "minpaxp":
        return engine.min_paxp(backend, inst, delta=delta)
    raise ExplanationError(f"unknown explanation kind {kind!r}")


# ---------------------------------------------------------------------------
# eval report


@dataclass
class EvalRecord:
    instance: int
    delta: Fraction
    kind: str
    features: tuple = ()
    precision: Fraction | None = None
    seconds: float | None = None
    subset_minimal: bool | None = None
    error: str | None = None

    @property
    def length(self) -> int:
        return len(self.features)

    def as_json(self) -> dict:
        return {
            "type": "record",
            "instance": self.instance,
            "kind": self.kind,
            "delta": str(self.delta),
            "delta_decimal": decimal_str(self.delta),
            "features": list(self.features),
            "length": None if self.error else self.length,
            "precision": None if self.precision is None else str(self.precision),
            "precision_decimal": None if self.precision is None else decimal_str(self.precision),
            "subset_minimal": self.subset_minimal,
            "time_s": self.seconds,
            "error": self.error,
        }


@dataclass
class EvalAggregate:
    delta: Fraction
    kind: str
    records: list = field(default_factory=list)

    @property
    def ok(self) -> list:
        return [r for r in self.records if r.error is None]

    def as_json(self) -> dict:
        ok = self.ok
        lengths = [r.length for r in ok]
        checked = [r.subset_minimal for r in ok if r.subset_minimal is not None]
        times = [r.seconds for r in ok if r.seconds is not None]
        avg_prec = sum((r.precision for r in ok), Fraction(0)) / len(ok) if ok else None
        avg_len = Fraction(sum(lengths), len(lengths)) if ok else None
        return {
            "type": "aggregate",
            "kind": self.kind,
            "delta": str(self.delta),
            "delta_decimal": decimal_str(self.delta),
            "instances": len(self.records),
            "errors": len(self.records) - len(ok),
            "length_max": max(lengths) if ok else None,
            "length_min": min(lengths) if ok else None,
            "length_avg": None if avg_len is None else decimal_str(avg_len, 2),
            "precision_avg": None if avg_prec is None else str(avg_prec),
            "precision_avg_decimal": None if avg_prec is None else decimal_str(avg_prec),
            "subset_minimal_pct": (decimal_str(Fraction(100 * sum(checked), len(checked)), 1)
                                   if checked else None),
            "time_avg_s": sum(times) / len(times) if times else None,
        }


@dataclass(frozen=True)
class EvalConfig:
    deltas: tuple
    kinds: tuple
    order: object = None
    check_minimality: bool = False
    timing: bool = True
    fixpoint: bool = False


def _evaluate_one(backend, meta, index, values, cfg: EvalConfig) -> list[EvalRecord]:
    out = []
    for delta in cfg.deltas:
        for kind in cfg.kinds:
            rec = EvalRecord(index, delta, kind)
            try:
                t0 = time.perf_counter()
                found = explain(backend, values, kind, delta, cfg.order, cfg.fixpoint)
                elapsed = time.perf_counter() - t0
                rec.features = tuple(meta.names[i] for i in sorted(found))
                rec.precision = engine.precision(backend, values, found)
                rec.seconds = elapsed if cfg.timing else None
                if cfg.check_minimality and kind == "lmpaxp":
                    rec.subset_minimal = engine.is_subset_minimal(backend, values, found, delta)
            except ExplanationError as exc:
                rec.error = str(exc)
            out.append(rec)
    return out


def _worker(args):
    return _evaluate_one(*args)


def run_eval(backend, rows, cfg: EvalConfig, jobs: int = 1) -> tuple[list, list]:
    """Records in (instance, delta, kind) order, then one aggregate per (delta, kind)."""
    tasks = [(backend, backend.meta, k, row, cfg) for k, row in enumerate(rows)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_worker, tasks))
    else:
        chunks = [_worker(t) for t in tasks]
    records = [r for chunk in chunks for r in chunk]
    aggs = []
    for delta in cfg.deltas:
        for kind in cfg.kinds:
            aggs.append(EvalAggregate(delta, kind,
                                      [r for r in records if r.delta == delta and r.kind == kind]))
    return records, aggs


def format_table(aggs) -> str:
    head = ("delta", "kind", "n", "err", "len M", "len m", "len avg", "prec avg", "m⊆ %", "time avg")
    lines = ["  ".join(f"{h:>9}" for h in head)]
    for a in aggs:
        j = a.as_json()
        t = j["time_avg_s"]
        cells = (j["delta_decimal"], j["kind"], j["instances"], j["errors"], j["length_max"],
                 j["length_min"], j["length_avg"], j["precision_avg_decimal"],
                 j["subset_minimal_pct"], None if t is None else f"{t:.4f}")
        lines.append("  ".join(f"{'-' if c is None else c:>9}" for c in cells))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# commands


def _instance_values(args, backend):
    if args.instance is not None:
        return parse_point(args.instance, backend.meta)
    if args.instances is not None:
        table = load_instances(args.instances, backend.meta)
        if not 0 <= args.row < len(table):
            raise ExplanationError(f"row {args.row} out of range ({len(table)} instances)")
        return table.rows[args.row]
    raise ExplanationError("give --instance or --instances")


def cmd_explain(args) -> int:
    backend = load_model(args.model, decimals=args.decimals)
    values = _instance_values(args, backend)
    delta = engine.parse_delta(args.delta[-1] if args.delta else "1")
    found = explain(backend, values, args.kind, delta, _parse_order(args.order, backend.meta),
                    args.fixpoint)
    prec = engine.precision(backend, values, found)
    print(f"{format_features(found, backend.meta)} precision {prec} ({decimal_str(prec)})")
    return 0


def cmd_eval(args) -> int:
    backend = load_model(args.model, decimals=args.decimals)
    table = load_instances(args.instances, backend.meta)
    cfg = EvalConfig(
        deltas=tuple(engine.parse_delta(d) for d in (args.delta or ["1"])),
        kinds=tuple(args.kind or ["lmpaxp"]),
        order=_parse_order(args.order, backend.meta),
        check_minimality=args.check_minimality,
        timing=not args.no_timing,
        fixpoint=args.fixpoint,
    )
    records, aggs = run_eval(backend, table.rows, cfg, args.jobs)
    print(format_table(aggs))
    for r in records:
        if r.error:
            print(f"instance {r.instance} ({r.kind}, delta {r.delta}): {r.error}", file=sys.stderr)
    if args.report_out:
        with open(args.report_out, "w", encoding="utf-8") as fh:
            for item in [*records, *aggs]:
                fh.write(json.dumps(item.as_json(), sort_keys=True) + "\n")
    return 0


def cmd_count(args) -> int:
    backend = load_model(args.model, decimals=args.decimals)
    values = _instance_values(args, backend)
    meta = backend.meta
    fixed = parse_feature_list(args.fixed or "", meta)
    if args.target_class is None:
        c = backend.classify(values)
    else:
        by_name = {str(k): k for k in meta.classes}
        if args.target_class not in by_name:
            raise ExplanationError(f"unknown class {args.target_class!r}")
        c = by_name[args.target_class]
    cp = backend.count(values, fixed, c)
    print(cp)
    print(f"precision {cp.precision} ({decimal_str(cp.precision)})")
    return 0


def cmd_oracle_check(args) -> int:
    backend = load_model(args.model, decimals=args.decimals)
    meta = backend.meta
    space = meta.space_size()
    if space > args.budget:
        print(f"refused: feature space of {space} points exceeds the budget of {args.budget}",
              file=sys.stderr)
        return EXIT_BUDGET
    rng = random.Random(args.seed)
    bad = 0
    for q in range(args.queries):
        v = tuple(rng.choice(d) for d in meta.domains)
        fixed = frozenset(i for i in range(meta.feature_count) if rng.random() < 0.5)
        c = rng.choice(meta.classes)
        got = backend.count(v, fixed, c)
        want = oracle.brute_counts(backend, v, fixed, c, args.budget)
        if (got.target, got.total) != want:
            bad += 1
            if bad <= 5:
                print(f"mismatch on query {q}: v={v} fixed={format_features(fixed, meta)} "
                      f"class={c}: count {got} vs enumeration {want[0]} / {want[1]}",
                      file=sys.stderr)
    status = "pass" if bad == 0 else "FAIL"
    print(f"oracle-check {status}: {args.queries - bad}/{args.queries} queries agree")
    return 0 if bad == 0 else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paxp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, instance=True):
        sp.add_argument("--model", required=True, help="model file (JSON document or .nnf)")
        sp.add_argument("--decimals", type=int, default=None,
                        help="decimal places kept when quantizing naive Bayes weights")
        if instance:
            sp.add_argument("--instance", help="comma-separated feature values, e.g. 4,4,2")
            sp.add_argument("--instances", help="CSV file with a header row")
            sp.add_argument("--row", type=int, default=0, help="row of --instances (0-based)")

    sp = sub.add_parser("explain", help="compute one explanation")
    common(sp)
    sp.add_argument("--kind", choices=KINDS, default="lmpaxp")
    sp.add_argument("--delta", action="append", help="threshold as p/q or a decimal")
    sp.add_argument("--order", help="lex, precision-loss, delta, or a feature list")
    sp.add_argument("--fixpoint", action="store_true", help=FIXPOINT_HELP)
    sp.set_defaults(func=cmd_explain)

    sp = sub.add_parser("eval", help="batch evaluation over an instance table")
    common(sp, instance=False)
    sp.add_argument("--instances", required=True)
    sp.add_argument("--kind", choices=KINDS, action="append")
    sp.add_argument("--delta", action="append", help="repeatable")
    sp.add_argument("--order")
    sp.add_argument("--check-minimality", action="store_true")
    sp.add_argument("--fixpoint", action="store_true", help=FIXPOINT_HELP)
    sp.add_argument("--report-out", help="write JSON lines here")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--no-timing", action="store_true",
                    help="leave time fields empty so reports are byte-reproducible")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("count", help="print target / total for a fixed feature set")
    common(sp)
    sp.add_argument("--fixed", default="", help="features to fix, e.g. x1,x3")
    sp.add_argument("--class", dest="target_class", help="class to count (default: predicted)")
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("oracle-check", help="compare counts with brute-force enumeration")
    common(sp, instance=False)
    sp.add_argument("--queries", type=int, default=1000)
    sp.add_argument("--budget", type=int, default=oracle.DEFAULT_BUDGET)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_oracle_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except oracle.BudgetExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ExplanationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
