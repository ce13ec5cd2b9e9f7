"""Experiment orchestration: generate, check, render, judge, report.

A run lives entirely in its directory:

    runs/<run-id>/
      config.json
      samples/<category>/<benchmark>/<idx>/
        raw.txt      the raw model response
        code.txt     the extracted code
        patch.json   canonical (layout-free) patch, well-formed samples only
        render.wav   16-bit mono render, well-formed samples only
        meta.json    the sample record
      ratings.jsonl  append-only human ratings
      report.json / report.md / report.csv

Every per-sample failure (unparseable code, script crash, renderer
refusal) is recorded in the sample's meta and counts as not well-formed;
only configuration errors abort a run.  The report is a pure fold over
the persisted records, so recomputing it after new ratings arrive is
cheap and reproducible.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import codecs, llm, oracles, render, script, stats
from .benchmarks import BENCHMARKS, CATEGORIES
from .graph import PatchGraph, node_count, validate

DEFAULT_N = 10
DEFAULT_K = [1, 3]
ORACLE_NOTE = "specific-benchmark verdicts are oracle-judged"


class ConfigError(Exception):
    code = "config-error"


class RatingError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def stable_seed(*parts) -> int:
    """64-bit seed derived from string parts; stable across platforms."""
    payload = "\x1f".join(str(p) for p in parts)
    return int.from_bytes(hashlib.sha256(payload.encode()).digest()[:8], "big")


@dataclass(frozen=True)
class EvalCounts:
    """Per-(category x benchmark) tallies feeding pass@k."""

    n: int  # samples generated
    c: int  # samples judged correct
    w: int  # samples well-formed

    def __post_init__(self):
        if not 0 <= self.c <= self.w <= self.n:
            raise ValueError(f"need 0 <= c <= w <= n, got c={self.c} w={self.w} n={self.n}")


@dataclass
class GenerationSample:
    """One model output for one (benchmark x category x index)."""

    category_id: str
    benchmark_id: str
    index: int
    raw_response: str = ""
    extracted_code: str = ""
    provenance: str = ""
    extraction: list[str] = field(default_factory=list)
    seed: int = 0
    wellformed: str = "unchecked"  # yes | no | unchecked
    error: dict | None = None
    node_count: int | None = None
    verdict: dict | None = None

    @property
    def sample_id(self) -> str:
        return f"{self.category_id}:{self.benchmark_id}:{self.index}"

    def check_invariants(self) -> None:
        if self.node_count is not None and self.wellformed != "yes":
            raise ValueError("node_count present implies wellformed == yes")

    def to_meta(self) -> dict:
        return {
            "category": self.category_id,
            "benchmark": self.benchmark_id,
            "index": self.index,
            "provenance": self.provenance,
            "extraction": self.extraction,
            "seed": self.seed,
            "wellformed": self.wellformed,
            "error": self.error,
            "node_count": self.node_count,
            "verdict": self.verdict,
        }

    @classmethod
    def from_meta(cls, meta: dict) -> "GenerationSample":
        return cls(
            category_id=meta["category"],
            benchmark_id=meta["benchmark"],
            index=meta["index"],
            provenance=meta.get("provenance", ""),
            extraction=list(meta.get("extraction", [])),
            seed=meta.get("seed", 0),
            wellformed=meta.get("wellformed", "unchecked"),
            error=meta.get("error"),
            node_count=meta.get("node_count"),
            verdict=meta.get("verdict"),
        )


@dataclass(frozen=True)
class RatingRecord:
    sample_id: str
    rater_id: str
    judgment: str  # pass | fail | unsure
    adjudicated: str | None = None  # team judgment after discussion
    timestamp: str = ""

    def to_json(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "rater_id": self.rater_id,
            "judgment": self.judgment,
            "adjudicated": self.adjudicated,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RatingRecord":
        return cls(
            sample_id=data["sample_id"],
            rater_id=data["rater_id"],
            judgment=data["judgment"],
            adjudicated=data.get("adjudicated"),
            timestamp=data.get("timestamp", ""),
        )


@dataclass
class RunConfig:
    categories: list[str]
    benchmarks: list[str] = field(default_factory=list)  # empty selects all
    n: int = DEFAULT_N
    k: list[int] = field(default_factory=lambda: list(DEFAULT_K))
    mode: str = "replay"
    seed: int = 0
    workers: int = 4
    runner_templates: dict[str, str] = field(default_factory=dict)
    cache_dir: str = ""
    model: str = llm.DEFAULT_MODEL
    temperature: float = llm.DEFAULT_TEMPERATURE
    run_id: str = ""
    render_duration: float = render.DEFAULT_DURATION

    def __post_init__(self):
        if not self.categories:
            raise ConfigError("config lists no categories")
        for cat in self.categories:
            if cat not in CATEGORIES:
                raise ConfigError(f"unknown category {cat!r}")
        if not self.benchmarks:
            self.benchmarks = list(BENCHMARKS)
        for bench in self.benchmarks:
            if bench not in BENCHMARKS:
                raise ConfigError(f"unknown benchmark {bench!r}")
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if any(k < 1 or k > self.n for k in self.k):
            raise ConfigError(f"every k must satisfy 1 <= k <= n, got {self.k}")
        if self.mode not in ("live", "replay"):
            raise ConfigError(f"mode must be live or replay, got {self.mode!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for cat in self.categories:
            if CATEGORIES[cat].route == "external" and cat not in self.runner_templates:
                raise ConfigError(f"category {cat!r} needs a runner template")
        if not self.run_id:
            self.run_id = "run-" + hashlib.sha256(
                self.canonical_json().encode()
            ).hexdigest()[:12]

    def canonical_json(self) -> str:
        return json.dumps(
            {
                "categories": self.categories,
                "benchmarks": self.benchmarks,
                "n": self.n,
                "k": self.k,
                "mode": self.mode,
                "seed": self.seed,
                "workers": self.workers,
                "runner_templates": self.runner_templates,
                "model": self.model,
                "temperature": self.temperature,
            },
            sort_keys=True,
        )

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "categories": self.categories,
            "benchmarks": self.benchmarks,
            "n": self.n,
            "k": self.k,
            "mode": self.mode,
            "seed": self.seed,
            "workers": self.workers,
            "runner_templates": self.runner_templates,
            "cache_dir": self.cache_dir,
            "model": self.model,
            "temperature": self.temperature,
            "render_duration": self.render_duration,
        }


def load_config(data: dict | str | Path) -> RunConfig:
    """Build a RunConfig from a dict, JSON text, or a JSON file path."""
    if isinstance(data, (str, Path)):
        path = Path(data)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {
        "categories", "benchmarks", "n", "k", "mode", "seed", "workers",
        "runner_templates", "cache_dir", "model", "temperature", "run_id",
        "render_duration",
    }
    kwargs = {key: value for key, value in data.items() if key in known}
    if "model" not in kwargs and os.environ.get(llm.ENV_MODEL):
        kwargs["model"] = os.environ[llm.ENV_MODEL]
    try:
        return RunConfig(**kwargs)
    except TypeError as err:
        raise ConfigError(str(err)) from err


# ---------------------------------------------------------------------------
# run directory plumbing
# ---------------------------------------------------------------------------

def sample_dir(run_dir: Path, sample: GenerationSample) -> Path:
    return (
        Path(run_dir) / "samples" / sample.category_id / sample.benchmark_id / str(sample.index)
    )


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def save_sample(run_dir: Path, sample: GenerationSample) -> None:
    sample.check_invariants()
    directory = sample_dir(run_dir, sample)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "raw.txt").write_text(sample.raw_response, encoding="utf-8")
    (directory / "code.txt").write_text(sample.extracted_code, encoding="utf-8")
    _write_json(directory / "meta.json", sample.to_meta())


def _load_from_dir(directory: Path) -> GenerationSample:
    sample = GenerationSample.from_meta(
        json.loads((directory / "meta.json").read_text(encoding="utf-8"))
    )
    raw_path = directory / "raw.txt"
    code_path = directory / "code.txt"
    if raw_path.exists():
        sample.raw_response = raw_path.read_text(encoding="utf-8")
    if code_path.exists():
        sample.extracted_code = code_path.read_text(encoding="utf-8")
    return sample


def iter_samples(run_dir: Path, config: RunConfig):
    for category in config.categories:
        for benchmark in config.benchmarks:
            for index in range(config.n):
                directory = Path(run_dir) / "samples" / category / benchmark / str(index)
                if (directory / "meta.json").exists():
                    yield _load_from_dir(directory)


def load_sample(run_dir: Path, sample_id: str) -> GenerationSample | None:
    try:
        category, benchmark, index = sample_id.rsplit(":", 2)
    except ValueError:
        return None
    directory = Path(run_dir) / "samples" / category / benchmark / index
    if not (directory / "meta.json").exists():
        return None
    return _load_from_dir(directory)


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------

def stage_generate(config: RunConfig, run_dir: Path,
                   client: llm.LlmClient | None = None) -> list[GenerationSample]:
    """Sample every (category x benchmark x index) cell and persist raws."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    _write_json(run_dir / "config.json", config.to_json())
    cache = llm.ResponseCache(config.cache_dir) if config.cache_dir else None

    def one_cell(category_id: str, benchmark_id: str) -> list[GenerationSample]:
        category = CATEGORIES[category_id]
        assistant = llm.assistant_config_for(category, config.model, config.temperature)
        prompt = llm.build_prompt(category_id, benchmark_id)
        raws = llm.generate(
            assistant, prompt, config.n, mode=config.mode, cache=cache, client=client
        )
        cell = []
        for index, raw in enumerate(raws):
            code, steps = llm.extract_code_with_provenance(raw)
            provenance = (
                f"replay:{llm.cache_key(assistant, prompt, index)}"
                if config.mode == "replay"
                else f"live:{config.model}"
            )
            sample = GenerationSample(
                category_id=category_id,
                benchmark_id=benchmark_id,
                index=index,
                raw_response=raw,
                extracted_code=code,
                provenance=provenance,
                extraction=steps,
                seed=stable_seed(config.run_id, benchmark_id, index),
            )
            save_sample(run_dir, sample)
            cell.append(sample)
        return cell

    cells = [(c, b) for c in config.categories for b in config.benchmarks]
    samples: list[GenerationSample] = []
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        for cell in pool.map(lambda cb: one_cell(*cb), cells):
            samples.extend(cell)
    return samples


def check_sample(config: RunConfig, sample: GenerationSample) -> PatchGraph | None:
    """Route the extracted code through its category's well-formedness check.

    Returns the parsed graph when well-formed; mutates the sample record
    either way.  Never raises for code-level problems.
    """
    route = CATEGORIES[sample.category_id].route
    code = sample.extracted_code

    def failed(stage: str, code_name: str, message: str) -> None:
        sample.wellformed = "no"
        sample.error = {"stage": stage, "code": code_name, "message": message}
        sample.node_count = None

    graph: PatchGraph | None = None
    try:
        if route == "maxpat":
            graph = codecs.parse_maxpat(code.encode("utf-8"))
        elif route == "wavir":
            graph = codecs.parse_wavir(code.encode("utf-8"))
        elif route == "script":
            program = script.parse_script(code)
            graph = script.run_script(program, seed=sample.seed)
        elif route == "external":
            import tempfile

            with tempfile.TemporaryDirectory(prefix="patchbench-code-") as tmp:
                code_path = Path(tmp) / "generation.psc"
                code_path.write_text(code, encoding="utf-8")
                out_path = script.run_external(
                    config.runner_templates[sample.category_id], code_path
                )
                payload = out_path.read_bytes()
                shutil.rmtree(out_path.parent, ignore_errors=True)
            graph = codecs.parse_maxpat(payload)
        else:  # pragma: no cover - registry is closed
            raise ConfigError(f"unknown route {route!r}")
    except codecs.CodecError as err:
        failed("parse", err.code, str(err))
        return None
    except script.ScriptSyntaxError as err:
        failed("parse", err.code, str(err))
        return None
    except script.ScriptRuntimeError as err:
        failed("run", f"{err.code}:{err.reason}", str(err))
        return None
    except script.ExternalRunError as err:
        failed("run", err.code, str(err))
        return None

    report = validate(graph)
    if not report.well_formed:
        first = report.violations[0]
        failed("validate", first.code, first.message)
        return None
    sample.wellformed = "yes"
    sample.error = None
    sample.node_count = node_count(graph)
    return graph


def stage_check(config: RunConfig, run_dir: Path) -> None:
    """Well-formedness + node counts for every generated sample."""
    run_dir = Path(run_dir)

    def one(sample: GenerationSample) -> None:
        graph = check_sample(config, sample)
        if graph is not None:
            _write_json(
                sample_dir(run_dir, sample) / "patch.json",
                json.loads(codecs.emit_wavir(graph)),
            )
        save_sample(run_dir, sample)

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        list(pool.map(one, list(iter_samples(run_dir, config))))


def stage_render(config: RunConfig, run_dir: Path) -> None:
    """Render well-formed samples and judge the specific benchmarks."""
    run_dir = Path(run_dir)

    def one(sample: GenerationSample) -> None:
        if sample.wellformed != "yes":
            save_sample(run_dir, sample)
            return
        patch_path = sample_dir(run_dir, sample) / "patch.json"
        graph = codecs.parse_wavir(patch_path.read_bytes())
        buffer = render.render_graph(
            graph, duration=config.render_duration, seed=sample.seed
        )
        render.write_wav(buffer, sample_dir(run_dir, sample) / "render.wav")
        verdict = oracles.judge_specific(sample.benchmark_id, buffer, graph)
        sample.verdict = {
            "status": verdict.status,
            "evidence": [[e.check, e.measured, e.threshold] for e in verdict.evidence],
            "rater": verdict.rater,
        }
        save_sample(run_dir, sample)

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        list(pool.map(one, list(iter_samples(run_dir, config))))


# ---------------------------------------------------------------------------
# ratings
# ---------------------------------------------------------------------------

def load_ratings(run_dir: Path) -> list[RatingRecord]:
    path = Path(run_dir) / "ratings.jsonl"
    if not path.exists():
        return []
    records = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            records.append(RatingRecord.from_json(json.loads(line)))
    return records


def append_rating(run_dir: Path, record: RatingRecord) -> None:
    path = Path(run_dir) / "ratings.jsonl"
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(json.dumps(record.to_json()) + "\n")


def resolve_ratings(ratings: list[RatingRecord]) -> dict[str, str]:
    """Fold rating records into per-sample decisions.

    pass/fail requires either two agreeing judgments or an adjudicated
    team value; anything else (single rating, disagreement, unsure) stays
    ``pending`` and is excluded from c.
    """
    by_sample: dict[str, list[RatingRecord]] = {}
    for record in ratings:
        by_sample.setdefault(record.sample_id, []).append(record)
    decisions: dict[str, str] = {}
    for sample_id, records in by_sample.items():
        adjudications = [r.adjudicated for r in records if r.adjudicated]
        if adjudications:
            decisions[sample_id] = adjudications[-1]
            continue
        judgments = [r.judgment for r in records]
        if len(judgments) >= 2 and "unsure" not in judgments and len(set(judgments)) == 1:
            decisions[sample_id] = judgments[0]
        else:
            decisions[sample_id] = "pending"
    return decisions


def merge_ratings(run_dir: Path, config: RunConfig,
                  ratings: list[RatingRecord] | None = None) -> dict[str, str]:
    """Final correctness per sample: oracle for specific, humans for creative.

    Raises RatingError(unknown-sample) for ratings that reference nothing.
    Returns sample_id -> pass | fail | pending | not-well-formed.
    """
    run_dir = Path(run_dir)
    if ratings is None:
        ratings = load_ratings(run_dir)
    samples = {s.sample_id: s for s in iter_samples(run_dir, config)}
    for record in ratings:
        if record.sample_id not in samples:
            raise RatingError("unknown-sample", f"no sample {record.sample_id!r}")
        if record.judgment not in ("pass", "fail", "unsure"):
            raise RatingError("bad-judgment", f"judgment {record.judgment!r}")
    decisions = resolve_ratings(ratings)

    outcome: dict[str, str] = {}
    for sample_id, sample in samples.items():
        if sample.wellformed != "yes":
            outcome[sample_id] = "not-well-formed"
            continue
        kind = BENCHMARKS[sample.benchmark_id].kind
        if kind == "specific":
            status = (sample.verdict or {}).get("status", "fail")
            outcome[sample_id] = "pass" if status == "pass" else "fail"
        else:
            outcome[sample_id] = decisions.get(sample_id, "pending")
    return outcome


# ---------------------------------------------------------------------------
# reporting
# ---------------------------------------------------------------------------

@dataclass
class EvalReport:
    run_id: str
    note: str
    cells: list[dict]
    categories: list[dict]
    complexity_tests: list[dict]

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "note": self.note,
            "cells": self.cells,
            "categories": self.categories,
            "complexity_tests": self.complexity_tests,
        }


def _category_scores(counts: list[EvalCounts], k_values: list[int]) -> dict:
    scores: dict[str, dict] = {}
    for k in k_values:
        entry: dict[str, float | None] = {}
        for conditioned, label in ((False, "standard"), (True, "conditioned")):
            try:
                entry[label] = stats.aggregate_pass_at_k(counts, k, conditioned=conditioned)
            except (stats.StatsDomainError, stats.EmptyInputError):
                entry[label] = None
            try:
                entry[f"{label}_mean_of_benchmarks"] = stats.aggregate_pass_at_k(
                    counts, k, conditioned=conditioned, method="mean"
                )
            except (stats.StatsDomainError, stats.EmptyInputError):
                entry[f"{label}_mean_of_benchmarks"] = None
        scores[str(k)] = entry
    return scores


def build_report(run_dir: Path, config: RunConfig,
                 ratings: list[RatingRecord] | None = None) -> EvalReport:
    run_dir = Path(run_dir)
    outcome = merge_ratings(run_dir, config, ratings)
    samples = list(iter_samples(run_dir, config))
    by_cell: dict[tuple[str, str], list[GenerationSample]] = {}
    for sample in samples:
        by_cell.setdefault((sample.category_id, sample.benchmark_id), []).append(sample)

    cells = []
    cell_counts: dict[tuple[str, str], EvalCounts] = {}
    cell_mean_nodes: dict[tuple[str, str], float | None] = {}
    for category in config.categories:
        for benchmark in config.benchmarks:
            group = by_cell.get((category, benchmark), [])
            n = len(group)
            w = sum(1 for s in group if s.wellformed == "yes")
            c = sum(1 for s in group if outcome.get(s.sample_id) == "pass")
            pending = sum(1 for s in group if outcome.get(s.sample_id) == "pending")
            node_counts = [s.node_count for s in group if s.node_count is not None]
            mean_nodes = sum(node_counts) / len(node_counts) if node_counts else None
            counts = EvalCounts(n=n, c=c, w=w)
            cell_counts[(category, benchmark)] = counts
            cell_mean_nodes[(category, benchmark)] = mean_nodes
            cells.append(
                {
                    "category": category,
                    "benchmark": benchmark,
                    "n": n,
                    "w": w,
                    "c": c,
                    "pending_human": pending,
                    "mean_nodes": mean_nodes,
                }
            )

    categories = []
    for category in config.categories:
        counts = [cell_counts[(category, b)] for b in config.benchmarks]
        totals = {
            "n": sum(x.n for x in counts),
            "w": sum(x.w for x in counts),
            "c": sum(x.c for x in counts),
        }
        categories.append(
            {
                "category": category,
                "totals": totals,
                "pass_at_k": _category_scores(counts, config.k),
            }
        )

    complexity_tests = []
    for cat_a in config.categories:
        for cat_b in config.categories:
            if cat_a == cat_b:
                continue
            pairs = [
                (cell_mean_nodes[(cat_a, b)], cell_mean_nodes[(cat_b, b)])
                for b in config.benchmarks
                if cell_mean_nodes[(cat_a, b)] is not None
                and cell_mean_nodes[(cat_b, b)] is not None
            ]
            entry: dict = {"a": cat_a, "b": cat_b, "pairs": len(pairs)}
            try:
                result = stats.wilcoxon_one_sided(
                    [p[0] for p in pairs], [p[1] for p in pairs]
                )
                entry.update(
                    w_statistic=result.w_statistic,
                    p_one_sided=result.p_value,
                    exact=result.exact,
                )
            except stats.TooFewPairsError as err:
                entry.update(w_statistic=None, p_one_sided=None, error=str(err))
            complexity_tests.append(entry)

    return EvalReport(
        run_id=config.run_id,
        note=ORACLE_NOTE,
        cells=cells,
        categories=categories,
        complexity_tests=complexity_tests,
    )


def _csv_number(value: float | None) -> str:
    if value is None:
        return ""
    return f"{value:.6g}"


def report_csv(report: EvalReport, config: RunConfig) -> str:
    """The flat per-cell table, plus an ALL row per category."""
    header = "category,benchmark,n,w,c,mean_nodes,pass1_std,pass1_wf,pass3_std,pass3_wf"
    lines = [header]
    by_cat: dict[str, list[dict]] = {}
    for cell in report.cells:
        by_cat.setdefault(cell["category"], []).append(cell)

    def scores_for(counts: list[EvalCounts]) -> list[str]:
        out = []
        for k in (1, 3):
            for conditioned in (False, True):
                try:
                    out.append(_csv_number(
                        stats.aggregate_pass_at_k(counts, k, conditioned=conditioned)
                    ))
                except (stats.StatsDomainError, stats.EmptyInputError):
                    out.append("")
        return out

    for category, cat_cells in by_cat.items():
        for cell in cat_cells:
            counts = [EvalCounts(n=cell["n"], c=cell["c"], w=cell["w"])]
            lines.append(",".join([
                category,
                cell["benchmark"],
                str(cell["n"]),
                str(cell["w"]),
                str(cell["c"]),
                _csv_number(cell["mean_nodes"]),
                *scores_for(counts),
            ]))
        all_counts = [EvalCounts(n=c["n"], c=c["c"], w=c["w"]) for c in cat_cells]
        node_means = [c["mean_nodes"] for c in cat_cells if c["mean_nodes"] is not None]
        lines.append(",".join([
            category,
            "ALL",
            str(sum(c["n"] for c in cat_cells)),
            str(sum(c["w"] for c in cat_cells)),
            str(sum(c["c"] for c in cat_cells)),
            _csv_number(sum(node_means) / len(node_means) if node_means else None),
            *scores_for(all_counts),
        ]))
    return "\n".join(lines) + "\n"


def report_markdown(report: EvalReport, config: RunConfig) -> str:
    lines = [f"# Evaluation report for `{report.run_id}`", ""]
    lines.append(f"> {report.note}.")
    lines.append("")
    lines.append("## Per-category scores")
    lines.append("")
    lines.append("| category | n | w | c | pass@1 | pass@1 (well-formed) | pass@3 | pass@3 (well-formed) |")
    lines.append("|---|---|---|---|---|---|---|---|")
    for cat in report.categories:
        scores1 = cat["pass_at_k"].get("1", {})
        scores3 = cat["pass_at_k"].get("3", {})

        def fmt(entry, label):
            value = entry.get(label)
            return f"{value:.3f}" if value is not None else "-"

        totals = cat["totals"]
        lines.append(
            f"| {cat['category']} | {totals['n']} | {totals['w']} | {totals['c']} "
            f"| {fmt(scores1, 'standard')} | {fmt(scores1, 'conditioned')} "
            f"| {fmt(scores3, 'standard')} | {fmt(scores3, 'conditioned')} |"
        )
    lines.append("")
    lines.append("## Per-benchmark cells")
    lines.append("")
    lines.append("| category | benchmark | n | w | c | pending | mean nodes |")
    lines.append("|---|---|---|---|---|---|---|")
    for cell in report.cells:
        mean_nodes = f"{cell['mean_nodes']:.2f}" if cell["mean_nodes"] is not None else "-"
        lines.append(
            f"| {cell['category']} | {cell['benchmark']} | {cell['n']} | {cell['w']} "
            f"| {cell['c']} | {cell['pending_human']} | {mean_nodes} |"
        )
    lines.append("")
    lines.append("## Complexity (one-sided Wilcoxon signed-rank, A > B)")
    lines.append("")
    lines.append("| A | B | pairs | W | p |")
    lines.append("|---|---|---|---|---|")
    for test in report.complexity_tests:
        w = test.get("w_statistic")
        p = test.get("p_one_sided")
        lines.append(
            f"| {test['a']} | {test['b']} | {test['pairs']} "
            f"| {w if w is not None else '-'} "
            f"| {f'{p:.6f}' if p is not None else '-'} |"
        )
    lines.append("")
    return "\n".join(lines)


def write_report(run_dir: Path, config: RunConfig,
                 ratings: list[RatingRecord] | None = None) -> EvalReport:
    run_dir = Path(run_dir)
    report = build_report(run_dir, config, ratings)
    _write_json(run_dir / "report.json", report.to_json())
    (run_dir / "report.md").write_text(report_markdown(report, config), encoding="utf-8")
    (run_dir / "report.csv").write_text(report_csv(report, config), encoding="utf-8")
    return report


def run_experiment(config: RunConfig, runs_root: Path | str = "runs",
                   client: llm.LlmClient | None = None) -> EvalReport:
    """The whole pipeline: generate, check, render, report."""
    run_dir = Path(runs_root) / config.run_id
    stage_generate(config, run_dir, client=client)
    stage_check(config, run_dir)
    stage_render(config, run_dir)
    return write_report(run_dir, config)
