"""Command-line front end: ``ipcfusion <subcommand> --input patents.csv ...``.

Exit status is 0 on success, 1 on a domain error (reported on stderr as
``error: <stage>: <reason>``) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._parallel import default_threads
from .cooccur import build_cooccurrence, export_edges
from .corpus import DEFAULT_WINDOW_BOUNDARIES, WindowSpec, load_corpus_file
from .errors import IpcFusionError
from .fusion import degree_of_fusion
from .ipc import IpcLevel
from .lifecycle import fit_report, forecast, forecast_csv, maturity_phase
from .metrics import Measure, compute_measure, rank_top
from .report import StudyConfig, fit_lifecycle, load_config, run_study, window_evolution
from .svg import scurve_svg


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _level(text: str) -> IpcLevel:
    try:
        return IpcLevel.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _measure(text: str) -> Measure:
    try:
        return Measure.parse(text)
    except ValueError:
        choices = ", ".join(m.value for m in Measure)
        raise argparse.ArgumentTypeError(f"unknown measure {text!r} (choose from {choices})") from None


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _years(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated years, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="patent records (CSV or JSONL)")
    common.add_argument("--format", choices=("csv", "jsonl"), help="input format (default: from suffix)")
    common.add_argument("--level", type=_level, help="IPC level of graph nodes (default: subclass)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")
    common.add_argument("--threads", type=_positive, help="worker cap (default: $IPC_FUSION_THREADS or 1)")

    parser = _Parser(prog="ipcfusion", description="IPC co-occurrence, fusion and life-cycle analysis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("ingest", parents=[common], help="validate input and report row issues")
    sub.add_parser("graph", parents=[common], help="build the co-occurrence graph and export edges")

    p = sub.add_parser("centrality", parents=[common], help="rank nodes by a centrality measure")
    p.add_argument("--measure", type=_measure, default=Measure.DEGREE)
    p.add_argument("--top", type=_positive, default=10)
    p.add_argument("--normalized", action="store_true", help="divide degree by n-1")
    p.add_argument("--raw", action="store_true", help="unnormalized betweenness")

    p = sub.add_parser("fusion", parents=[common], help="degree of fusion per segment")
    p.add_argument("--segment-level", type=_level, default=IpcLevel.SECTION)
    p.add_argument("--counting-level", type=_level, default=IpcLevel.SUBCLASS)
    p.add_argument("--raw-totals", action="store_true", help="count repeated codes within a patent")
    p.add_argument("--include-absent", action="store_true", help="list sections absent from the corpus")

    p = sub.add_parser("tlc", parents=[common], help="fit growth curves and stage the life cycle")
    p.add_argument("--model", choices=("gompertz", "logistic", "auto"), default="auto")
    p.add_argument("--horizon", type=_positive, default=40)
    p.add_argument("--series", choices=("cumulative", "incremental"), default="cumulative")

    p = sub.add_parser("evolution", parents=[common], help="top-k nodes across time windows")
    p.add_argument("--windows", type=_years, default=DEFAULT_WINDOW_BOUNDARIES)
    p.add_argument("--top", type=_positive, default=10)
    p.add_argument("--measure", type=_measure, default=Measure.DEGREE)

    p = sub.add_parser("study", parents=[common], help="run every analysis and write the output tree")
    p.add_argument("--config", help="TOML key = value file mirroring the study options")
    p.add_argument("--windows", type=_years)
    p.add_argument("--top", type=_positive)
    p.add_argument("--model", choices=("gompertz", "logistic", "auto"))
    p.add_argument("--horizon", type=_positive)
    p.add_argument("--counting-level", type=_level)
    return parser


def _emit(text: str) -> None:
    sys.stdout.write(text)
    sys.stdout.flush()


def _load(args):
    if not args.input:
        raise IpcFusionError("--input is required", stage="ingest")
    try:
        corpus, report = load_corpus_file(args.input, args.format)
    except IpcFusionError as exc:
        exc.stage = exc.stage or "ingest"
        raise
    issues = sum(report.issues.values())
    if issues:
        detail = ", ".join(f"{k}={v}" for k, v in sorted(report.issues.items()))
        print(f"ingest: {report.records} records, {issues} issues ({detail})", file=sys.stderr)
    return corpus, report


def _write(out_dir: str, name: str, data: str | bytes) -> None:
    path = Path(out_dir) / name
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data.encode("utf-8") if isinstance(data, str) else data)
    except OSError as exc:
        raise IpcFusionError(f"cannot write {path}: {exc.strerror or exc}", stage="output") from exc


def _table(rows: list[tuple], headers: tuple[str, ...]) -> str:
    cells = [headers] + [tuple(str(c) for c in r) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    return "\n".join(lines) + "\n"


def _cmd_ingest(args) -> None:
    corpus, report = _load(args)
    doc = report.to_dict()
    span = corpus.span
    doc["span"] = list(span) if span else None
    if args.json:
        _emit(json.dumps(doc, indent=2) + "\n")
    else:
        rows = [("rows_read", report.rows_read), ("records", report.records)]
        rows += [(k, v) for k, v in sorted(report.issues.items())]
        if span:
            rows.append(("span", f"{span[0]}-{span[1]}"))
        _emit(_table(rows, ("field", "value")))


def _cmd_graph(args) -> None:
    corpus, _ = _load(args)
    graph = build_cooccurrence(corpus, args.level or IpcLevel.SUBCLASS)
    tsv = export_edges(graph)
    if args.out:
        _write(args.out, "edges.tsv", tsv)
    if args.json:
        doc = {
            "level": graph.level.slug,
            "nodes": len(graph.nodes),
            "edges": len(graph.edges),
            "patents": graph.patent_count,
            "skipped_records": graph.skipped_records,
        }
        _emit(json.dumps(doc, indent=2) + "\n")
    elif not args.out:
        _emit(tsv)


def _cmd_centrality(args) -> None:
    corpus, _ = _load(args)
    graph = build_cooccurrence(corpus, args.level or IpcLevel.SUBCLASS)
    if args.measure is Measure.DEGREE:
        normalized = args.normalized
    elif args.measure is Measure.BETWEENNESS:
        normalized = not args.raw
    else:
        normalized = None
    table = compute_measure(graph, args.measure, normalized=normalized, threads=args.threads)
    if args.out:
        _write(args.out, f"{args.measure.value}.csv", table.to_csv())
        _write(args.out, f"{args.measure.value}.json", table.to_json())
    ranked = rank_top(table, args.top)
    if args.json:
        _emit(json.dumps({"normalized": table.normalized, **ranked.to_dict()}, indent=2) + "\n")
    else:
        _emit(_table([(r, n, f"{v:.6g}") for r, n, v in ranked.rows], ("rank", "node", args.measure.value)))


def _cmd_fusion(args) -> None:
    corpus, _ = _load(args)
    table = degree_of_fusion(
        corpus,
        args.segment_level,
        args.counting_level,
        dedup=not args.raw_totals,
        include_absent=args.include_absent,
    )
    if args.out:
        _write(args.out, f"{args.segment_level.slug}.csv", table.to_csv())
        _write(args.out, f"{args.segment_level.slug}.json", table.to_json())
    if args.json:
        _emit(table.to_json())
    else:
        rows = [
            (seg, unique, f"{float(r):.4g}" if unique else "Not found")
            for seg, unique, r in table.ranked()
        ]
        _emit(_table(rows, ("segment", "unique", "degree_of_fusion")))
        print(f"total assignments: {table.total_assignments}", file=sys.stderr)


def _cmd_tlc(args) -> None:
    corpus, _ = _load(args)
    series, fit = fit_lifecycle(corpus, args.model, args.series)
    assessment = maturity_phase(fit, series.years[-1])
    doc = {"series": args.series, **fit_report(fit, assessment)}
    if args.out:
        _write(args.out, "fit.json", json.dumps(doc, indent=2) + "\n")
        _write(args.out, "forecast.csv", forecast_csv(forecast(fit, args.horizon)))
        _write(args.out, "scurve.svg", scurve_svg(series, fit))
    if args.json:
        _emit(json.dumps(doc, indent=2) + "\n")
    else:
        keys = ("model", "L", "a", "b", "t0_year", "r2", "rmse", "mape", "phase", "inflection_year", "saturation_year", "converged")
        _emit(_table([(k, doc[k]) for k in keys], ("field", "value")))


def _cmd_evolution(args) -> None:
    corpus, _ = _load(args)
    report = window_evolution(
        corpus, WindowSpec(args.windows), args.level or IpcLevel.SUBCLASS, args.top, args.measure, threads=args.threads
    )
    if args.out:
        _write(args.out, "evolution.json", report.to_json())
    if args.json:
        _emit(report.to_json())
    else:
        labels = [label for label, _ in report.windows]
        rows = [(node, *(f"{v:g}" for v in vals)) for node, vals in sorted(report.tracked.items())]
        _emit(_table(rows, ("node", *labels)))


def _cmd_study(args) -> None:
    try:
        values = load_config(args.config) if args.config else {}
    except IpcFusionError as exc:
        exc.stage = "config"
        raise
    overrides = {
        "level": args.level,
        "counting_level": args.counting_level,
        "windows": args.windows,
        "top": args.top,
        "model": args.model,
        "horizon": args.horizon,
        "out": args.out,
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    # input/format may come from the config file too
    config_input, config_format = values.pop("input", None), values.pop("format", None)
    args.input = args.input or config_input
    args.format = args.format or config_format
    try:
        config = StudyConfig.from_mapping(values)
    except IpcFusionError as exc:
        exc.stage = exc.stage or "config"
        raise
    corpus, _ = _load(args)
    bundle = run_study(corpus, config, threads=args.threads)
    if args.json:
        _emit(json.dumps(bundle.manifest, indent=2) + "\n")
    else:
        rows = [(a["name"], f["path"], f["sha256"][:16]) for a in bundle.manifest["artifacts"] for f in a["files"]]
        _emit(_table(rows, ("artifact", "file", "sha256")))


_COMMANDS = {
    "ingest": _cmd_ingest,
    "graph": _cmd_graph,
    "centrality": _cmd_centrality,
    "fusion": _cmd_fusion,
    "tlc": _cmd_tlc,
    "evolution": _cmd_evolution,
    "study": _cmd_study,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is None:
        args.threads = default_threads()
    try:
        _COMMANDS[args.command](args)
    except IpcFusionError as exc:
        stage = exc.stage or args.command
        reason = " ".join(str(exc).split()) or type(exc).__name__
        print(f"error: {stage}: {reason}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
