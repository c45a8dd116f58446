"""Windowed evolution reports and the end-to-end study driver."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ._parallel import ordered_map
from .cooccur import build_cooccurrence
from .corpus import DEFAULT_WINDOW_BOUNDARIES, PatentCorpus, WindowSpec, annual_counts, slice_windows
from .errors import ConfigError, EmptyCorpus, IpcFusionError, SinkWriteFailure
from .fusion import degree_of_fusion
from .ipc import IpcLevel
from .lifecycle import (
    Model,
    PhaseThresholds,
    fit_growth,
    fit_report,
    forecast,
    forecast_csv,
    maturity_phase,
    select_model,
)
from .metrics import TABLE_MEASURES, CentralityTable, Measure, RankedList, compute_measure, rank_top
from .svg import scurve_svg


@dataclass(frozen=True)
class EvolutionReport:
    measure: Measure
    level: IpcLevel
    windows: list[tuple[str, RankedList]]
    tracked: dict[str, list[float]]
    present: dict[str, list[bool]]
    window_sizes: list[int]
    excluded: int

    def to_dict(self) -> dict:
        return {
            "measure": self.measure.value,
            "level": self.level.slug,
            "excluded_records": self.excluded,
            "windows": [
                {"label": label, "patents": size, **ranked.to_dict()}
                for (label, ranked), size in zip(self.windows, self.window_sizes)
            ],
            "tracked": {
                node: {"values": self.tracked[node], "present": self.present[node]}
                for node in sorted(self.tracked)
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _window_table(window: PatentCorpus, level: IpcLevel, measure: Measure, normalized, threads) -> CentralityTable:
    try:
        graph = build_cooccurrence(window, level)
    except EmptyCorpus:
        return CentralityTable(measure, {}, bool(normalized))
    return compute_measure(graph, measure, normalized=normalized, threads=threads)


def window_evolution(
    corpus: PatentCorpus,
    spec: WindowSpec,
    level: IpcLevel = IpcLevel.SUBCLASS,
    k: int = 10,
    measure: Measure | str = Measure.DEGREE,
    normalized: bool | None = None,
    threads: int | None = None,
) -> EvolutionReport:
    """Top-k nodes per time window and the trajectory of every node that ever ranked.

    Empty windows give an empty ranking; a node missing from a window's
    graph scores 0 there and is flagged absent.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    measure = Measure.parse(measure)
    windows, excluded = slice_windows(corpus, spec)
    tables = ordered_map(
        lambda item: _window_table(item[1], level, measure, normalized, threads), windows, threads
    )
    ranked = [(label, rank_top(table, k)) for (label, _), table in zip(windows, tables)]
    values = [t.values for t in tables]
    tracked_nodes = sorted({node for _, rl in ranked for _, node, _ in rl.rows})
    tracked = {n: [float(v.get(n, 0.0)) for v in values] for n in tracked_nodes}
    present = {n: [n in v for v in values] for n in tracked_nodes}
    return EvolutionReport(measure, level, ranked, tracked, present, [len(w) for _, w in windows], excluded)


@dataclass(frozen=True)
class StudyConfig:
    level: IpcLevel = IpcLevel.SUBCLASS
    counting_level: IpcLevel = IpcLevel.SUBCLASS
    windows: tuple[int, ...] = DEFAULT_WINDOW_BOUNDARIES
    top: int = 10
    normalize_degree: bool = False
    normalize_betweenness: bool = True
    evolution_measure: Measure = Measure.DEGREE
    model: str = "auto"
    horizon: int = 40
    series: str = "cumulative"
    dedup_totals: bool = True
    growth_threshold: float = 0.10
    maturity_threshold: float = 0.50
    saturation_threshold: float = 0.90
    out: str = "study-out"

    def __post_init__(self):
        object.__setattr__(self, "level", IpcLevel.parse(self.level))
        object.__setattr__(self, "counting_level", IpcLevel.parse(self.counting_level))
        object.__setattr__(self, "evolution_measure", Measure.parse(self.evolution_measure))
        object.__setattr__(self, "windows", tuple(int(w) for w in self.windows))
        if self.top < 1:
            raise ConfigError("top must be >= 1")
        if self.counting_level < IpcLevel.SUBCLASS:
            raise ConfigError("counting_level must be subclass or deeper (fusion reports down to subclass)")
        if self.model not in ("auto", "gompertz", "logistic"):
            raise ConfigError(f"model must be auto, gompertz or logistic, got {self.model!r}")
        if self.series not in ("cumulative", "incremental"):
            raise ConfigError(f"series must be cumulative or incremental, got {self.series!r}")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        try:
            WindowSpec(self.windows)
            self.thresholds
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def thresholds(self) -> PhaseThresholds:
        return PhaseThresholds(self.growth_threshold, self.maturity_threshold, self.saturation_threshold)

    @classmethod
    def from_mapping(cls, values: dict) -> StudyConfig:
        known = {f for f in cls.__dataclass_fields__}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**values)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return {
            "level": self.level.slug,
            "counting_level": self.counting_level.slug,
            "windows": list(self.windows),
            "top": self.top,
            "normalize_degree": self.normalize_degree,
            "normalize_betweenness": self.normalize_betweenness,
            "evolution_measure": self.evolution_measure.value,
            "model": self.model,
            "horizon": self.horizon,
            "series": self.series,
            "dedup_totals": self.dedup_totals,
            "growth_threshold": self.growth_threshold,
            "maturity_threshold": self.maturity_threshold,
            "saturation_threshold": self.saturation_threshold,
        }


def load_config(path) -> dict:
    """Read a TOML key = value file into a plain mapping."""
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc


@dataclass
class StudyBundle:
    out_dir: Path
    files: dict[str, bytes] = field(default_factory=dict)
    artifacts: dict[str, list[str]] = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)

    def add(self, artifact: str, path: str, data: str | bytes) -> None:
        self.files[path] = data.encode("utf-8") if isinstance(data, str) else data
        self.artifacts.setdefault(artifact, []).append(path)


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except IpcFusionError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


def fit_lifecycle(corpus: PatentCorpus, model: str = "auto", series_mode: str = "cumulative"):
    """Fit the configured growth model(s) to yearly counts; returns (series, fit)."""
    series = annual_counts(corpus, series_mode)
    monotone = series_mode == "cumulative"
    if model == "auto":
        fits = [fit_growth(series, m, require_monotone=monotone) for m in Model]
        return series, select_model(fits, series)
    return series, fit_growth(series, Model(model), require_monotone=monotone)


def _lifecycle_outputs(bundle: StudyBundle, corpus: PatentCorpus, config: StudyConfig) -> None:
    try:
        series, fit = fit_lifecycle(corpus, config.model, config.series)
    except IpcFusionError as exc:
        # too few years for a curve: record why, keep the artifact set fixed
        series = annual_counts(corpus, config.series)
        doc = {"status": "failed", "error": type(exc).__name__, "reason": str(exc), "n_points": len(series)}
        bundle.add("lifecycle", "lifecycle/fit.json", json.dumps(doc, indent=2) + "\n")
        bundle.add("lifecycle", "lifecycle/forecast.csv", "year,predicted_cumulative\n")
        bundle.add("lifecycle", "lifecycle/scurve.svg", scurve_svg(series, None))
        return
    assessment = maturity_phase(fit, series.years[-1], config.thresholds)
    doc = {"status": "ok", "series": config.series, **fit_report(fit, assessment)}
    bundle.add("lifecycle", "lifecycle/fit.json", json.dumps(doc, indent=2) + "\n")
    bundle.add("lifecycle", "lifecycle/forecast.csv", forecast_csv(forecast(fit, config.horizon)))
    bundle.add("lifecycle", "lifecycle/scurve.svg", scurve_svg(series, fit))


def run_study(corpus: PatentCorpus, config: StudyConfig, threads: int | None = None, write: bool = True) -> StudyBundle:
    """Produce every report for ``corpus`` under ``config.out``.

    Nine artifacts are written (four centrality tables, three fusion
    tables, the life-cycle fit and the evolution report), plus
    ``manifest.json`` with a SHA-256 for every file. Output bytes depend
    only on the corpus and the config.
    """
    if not len(corpus):
        raise EmptyCorpus("corpus has no valid records", stage="ingest")
    bundle = StudyBundle(Path(config.out))

    graph = _stage("graph", build_cooccurrence, corpus, config.level)
    for measure in TABLE_MEASURES:
        if measure is Measure.DEGREE:
            norm = config.normalize_degree
        elif measure is Measure.BETWEENNESS:
            norm = config.normalize_betweenness
        else:
            norm = None
        table = _stage("centrality", compute_measure, graph, measure, normalized=norm, threads=threads)
        name = f"centrality/{measure.value}"
        bundle.add(name, f"{name}.csv", table.to_csv())
        bundle.add(name, f"{name}.json", table.to_json())

    for seg in (IpcLevel.SECTION, IpcLevel.CLASS, IpcLevel.SUBCLASS):
        ft = _stage(
            "fusion",
            degree_of_fusion,
            corpus,
            seg,
            config.counting_level,
            dedup=config.dedup_totals,
            include_absent=seg is IpcLevel.SECTION,
        )
        name = f"fusion/{seg.slug}"
        bundle.add(name, f"{name}.csv", ft.to_csv())
        bundle.add(name, f"{name}.json", ft.to_json())

    _stage("lifecycle", _lifecycle_outputs, bundle, corpus, config)

    evo = _stage(
        "evolution",
        window_evolution,
        corpus,
        WindowSpec(config.windows),
        config.level,
        config.top,
        config.evolution_measure,
        None,
        threads,
    )
    bundle.add("evolution", "evolution/evolution.json", evo.to_json())

    bundle.manifest = {
        "config": config.to_dict(),
        "patents": len(corpus),
        "graph": {"nodes": len(graph.nodes), "edges": len(graph.edges)},
        "artifacts": [
            {
                "name": name,
                "files": [
                    {"path": p, "sha256": hashlib.sha256(bundle.files[p]).hexdigest(), "bytes": len(bundle.files[p])}
                    for p in sorted(paths)
                ],
            }
            for name, paths in sorted(bundle.artifacts.items())
        ],
    }
    bundle.files["manifest.json"] = (json.dumps(bundle.manifest, indent=2) + "\n").encode("utf-8")
    if write:
        _stage("output", _write_tree, bundle)
    return bundle


def _write_tree(bundle: StudyBundle) -> None:
    try:
        for rel, data in sorted(bundle.files.items()):
            path = bundle.out_dir / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
    except OSError as exc:
        raise SinkWriteFailure(f"cannot write {bundle.out_dir}: {exc.strerror or exc}") from exc

