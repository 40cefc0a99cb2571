"""Run configuration and end-to-end orchestration shared by the CLI commands.

A run loads and filters the corpus, obtains a polarity model (from a saved
file or by training on a labeled file), selects aspects per discipline,
builds factor matrices, fuses them into impact scores, and correlates
scores / factors / aspects / aspect categories against citations.

Every report embeds the tool version and a hash of the resolved
configuration; all outputs are written to temp files and renamed into
place, so a failed command leaves no partial output behind.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from bookimpact import __version__
from bookimpact.aspects import (
    AspectSet,
    SentimentLexicon,
    extract_candidates,
    load_lexicon,
    top_aspects,
)
from bookimpact.correlation import (
    DEFAULT_CATEGORY_MAP,
    METHOD_PEARSON,
    METHOD_SPEARMAN,
    AspectCategoryMap,
    CorrelationResult,
    correlate,
    correlate_factors,
    correlate_scores,
    group_aspect_values,
    load_category_map,
)
from bookimpact.corpus import (
    Book,
    Corpus,
    TokenizerConfig,
    filter_books,
    load_corpus,
    load_wordlist,
)
from bookimpact.entropy import FusionResult, fuse
from bookimpact.factors import (
    LEVEL_MACRO,
    LEVEL_MACRO_MICRO,
    LEVEL_MICRO,
    CombinationSpec,
    FactorMatrix,
    book_aspect_values,
    build_factor_matrix,
)
from bookimpact.polarity import (
    Hyperparams,
    LabeledDoc,
    PolarityModel,
    accuracy,
    build_feature_space,
    load_labeled_docs,
    load_model,
    train,
)

LEVELS = (LEVEL_MACRO, LEVEL_MICRO, LEVEL_MACRO_MICRO)

PATH_FIELDS = (
    "reviews",
    "books",
    "lexicon",
    "aspects",
    "training",
    "model",
    "category_map",
    "token_dictionary",
)


class PipelineError(Exception):
    """User-facing pipeline failure (bad inputs, nothing analyzable)."""


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration of one CLI invocation (hash goes into reports)."""

    reviews: str | None = None
    books: str | None = None
    lexicon: str | None = None
    aspects: str | None = None
    training: str | None = None
    model: str | None = None
    category_map: str | None = None
    combination: str = "holder_and_evaluator:macro_micro"
    min_reviews: int = 10
    top_k: int = 2000
    top_n_aspects: int = 10
    scope: str = "review"
    smoothing: bool = False
    no_direction: bool = False
    global_aspects: bool = False
    rank_correlation: bool = False
    tokenizer: str = "whitespace"
    token_dictionary: str | None = None
    lowercase: bool = True
    epochs: int = 20
    learning_rate: float = 0.5
    regularization: float = 1e-4
    seed: int = 0
    holdout: float = 0.2
    jobs: int = 1

    def spec(self) -> CombinationSpec:
        return CombinationSpec.parse(self.combination)

    def hyperparams(self) -> Hyperparams:
        return Hyperparams(
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            regularization=self.regularization,
            seed=self.seed,
        )

    def method(self) -> str:
        return METHOD_SPEARMAN if self.rank_correlation else METHOD_PEARSON

    def config_hash(self) -> str:
        """Short digest of the configuration.

        Paths count by file name only and the worker count is ignored, so
        the same analysis in a different directory or with a different
        degree of parallelism hashes identically.
        """
        payload = asdict(self)
        del payload["jobs"]
        for key in PATH_FIELDS:
            if payload[key] is not None:
                payload[key] = Path(payload[key]).name
        canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def tokenizer_config(config: RunConfig) -> TokenizerConfig:
    dictionary: tuple[str, ...] = ()
    if config.tokenizer == "dictionary":
        if not config.token_dictionary:
            raise PipelineError("dictionary tokenizer needs --token-dictionary")
        dictionary = load_wordlist(config.token_dictionary, lowercase=config.lowercase)
    return TokenizerConfig(
        mode=config.tokenizer,
        lowercase=config.lowercase,
        dictionary=dictionary,
    )


def _require(config: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(config, n) is None]
    if missing:
        raise PipelineError(f"missing required input(s): {', '.join('--' + m.replace('_', '-') for m in missing)}")


def load_filtered_corpus(config: RunConfig) -> Corpus:
    _require(config, "reviews", "books")
    corpus = load_corpus(config.reviews, config.books, tokenizer_config(config))
    return filter_books(corpus, config.min_reviews)


def train_with_holdout(
    docs: Sequence[LabeledDoc], config: RunConfig
) -> tuple[PolarityModel, float]:
    """Train on a holdout split for the accuracy report, then on all docs.

    With holdout = 0 the accuracy reported is training accuracy.
    """
    if not docs:
        raise PipelineError("labeled training file contains no documents")
    order = np.random.default_rng(config.seed).permutation(len(docs))
    shuffled = [docs[i] for i in order]
    n_hold = int(round(len(docs) * config.holdout)) if config.holdout > 0 else 0
    n_hold = min(n_hold, len(docs) - 2)
    held, rest = shuffled[:n_hold], shuffled[n_hold:]
    hp = config.hyperparams()
    try:
        if held:
            space = build_feature_space([d.tokens for d in rest], config.top_k)
            probe = train(rest, space, hp)
            acc = accuracy(probe, held)
        space_all = build_feature_space([d.tokens for d in docs], config.top_k)
        model = train(list(docs), space_all, hp)
        if not held:
            acc = accuracy(model, docs)
    except ValueError as exc:
        raise PipelineError(str(exc)) from exc
    return model, acc


def obtain_model(config: RunConfig, tok: TokenizerConfig) -> PolarityModel:
    if config.model:
        path = Path(config.model)
        if not path.is_file():
            raise PipelineError(f"model file not found: {path}")
        return load_model(path)
    if config.training:
        path = Path(config.training)
        if not path.is_file():
            raise PipelineError(f"training file not found: {path}")
        docs = load_labeled_docs(path, tok)
        model, _ = train_with_holdout(docs, replace(config, holdout=0.0))
        return model
    raise PipelineError("macro-level factors need --model or --training")


def discipline_aspect_sets(
    corpus: Corpus, vocabulary: Sequence[str], config: RunConfig
) -> dict[str, AspectSet]:
    """Top-N aspect set per discipline (or one global set used everywhere)."""
    sets: dict[str, AspectSet] = {}
    if config.global_aspects:
        all_reviews = [r for b in corpus.books for r in b.reviews]
        if not all_reviews:
            return {}
        freqs = extract_candidates(all_reviews, vocabulary)
        if not freqs:
            return {}
        global_set = top_aspects(freqs, config.top_n_aspects, partition="all")
        return {d: global_set for d in corpus.disciplines()}
    for discipline in corpus.disciplines():
        reviews = [r for b in corpus.books_in(discipline) for r in b.reviews]
        if not reviews:
            continue
        freqs = extract_candidates(reviews, vocabulary)
        if not freqs:
            continue
        sets[discipline] = top_aspects(freqs, config.top_n_aspects, partition=discipline)
    return sets


# ---------------------------------------------------------------------------
# score command
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DisciplineScore:
    discipline: str
    matrix: FactorMatrix
    fusion: FusionResult


@dataclass(frozen=True)
class ScoreRun:
    config: RunConfig
    spec: CombinationSpec
    results: dict[str, DisciplineScore] = field(default_factory=dict)
    skipped: dict[str, str] = field(default_factory=dict)

    def report(self) -> dict:
        disciplines = {}
        for name in sorted(self.results):
            entry = self.results[name]
            fusion = entry.fusion
            disciplines[name] = {
                "n_books": len(entry.matrix.book_ids),
                "factors": list(entry.matrix.factor_names),
                "directions": list(entry.matrix.directions),
                "entropy": list(fusion.weights.entropy),
                "weights": list(fusion.weights.weight),
                "uniform_fallback": fusion.weights.uniform_fallback,
                "degenerate_factors": [
                    f
                    for f, flag in zip(entry.matrix.factor_names, fusion.normalized.degenerate)
                    if flag
                ],
                "scores": [
                    {"book_id": b, "score": s, "rank": r}
                    for b, s, r in zip(
                        fusion.scores.book_ids, fusion.scores.scores, fusion.scores.ranks
                    )
                ],
            }
        return {
            "tool": {"name": "bookimpact", "version": __version__},
            "config_hash": self.config.config_hash(),
            "combination": {"part": self.spec.part, "level": self.spec.level},
            "disciplines": disciplines,
            "skipped": dict(sorted(self.skipped.items())),
        }


def _score_one(
    books: Sequence[Book],
    spec: CombinationSpec,
    model: PolarityModel | None,
    aspect_set: AspectSet | None,
    lexicon: SentimentLexicon | None,
    config: RunConfig,
) -> DisciplineScore:
    matrix = build_factor_matrix(
        books,
        spec,
        model=model,
        aspect_set=aspect_set,
        lexicon=lexicon,
        scope=config.scope,
        smoothing=config.smoothing,
        no_direction=config.no_direction,
        jobs=config.jobs,
    )
    return DisciplineScore(
        discipline=books[0].discipline, matrix=matrix, fusion=fuse(matrix)
    )


def run_score(config: RunConfig) -> ScoreRun:
    spec = config.spec()
    corpus = load_filtered_corpus(config)
    if corpus.n_books == 0:
        raise PipelineError("no books pass the review-count filter")

    tok = corpus.tokenizer_config
    model = obtain_model(config, tok) if spec.uses_macro else None
    lexicon = None
    aspect_sets: dict[str, AspectSet] = {}
    if spec.uses_micro:
        _require(config, "lexicon", "aspects")
        lexicon = load_lexicon(config.lexicon, lowercase=config.lowercase)
        vocabulary = load_wordlist(config.aspects, lowercase=config.lowercase)
        aspect_sets = discipline_aspect_sets(corpus, vocabulary, config)

    run = ScoreRun(config=config, spec=spec)
    for discipline in corpus.disciplines():
        books = corpus.books_in(discipline)
        if len(books) < 2:
            run.skipped[discipline] = f"only {len(books)} book(s); need at least 2"
            continue
        if spec.uses_micro and discipline not in aspect_sets:
            run.skipped[discipline] = "no aspect-vocabulary noun occurs in its reviews"
            continue
        run.results[discipline] = _score_one(
            books, spec, model, aspect_sets.get(discipline), lexicon, config
        )
    if not run.results:
        reasons = "; ".join(f"{d}: {r}" for d, r in sorted(run.skipped.items()))
        raise PipelineError(f"no discipline could be scored ({reasons})")
    return run


# ---------------------------------------------------------------------------
# correlate command
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorrelateRun:
    config: RunConfig
    part: str
    method: str
    disciplines: tuple[str, ...]
    levels: dict[str, dict[str, CorrelationResult | None]]
    factors: dict[str, dict[str, CorrelationResult | None]]
    aspects: dict[str, dict[str, CorrelationResult | None]]
    categories: dict[str, dict[str, CorrelationResult | None]]
    factor_order: tuple[str, ...]
    aspect_order: tuple[str, ...]
    category_order: tuple[str, ...]
    notes: tuple[str, ...]

    def report(self) -> dict:
        def cells(table: dict[str, dict[str, CorrelationResult | None]]) -> dict:
            return {
                row: {disc: _cell(result) for disc, result in sorted(columns.items())}
                for row, columns in table.items()
            }

        return {
            "tool": {"name": "bookimpact", "version": __version__},
            "config_hash": self.config.config_hash(),
            "part": self.part,
            "method": self.method,
            "disciplines": list(self.disciplines),
            "level_order": list(LEVELS),
            "factor_order": list(self.factor_order),
            "aspect_order": list(self.aspect_order),
            "category_order": list(self.category_order),
            "levels": cells(self.levels),
            "factors": cells(self.factors),
            "aspects": cells(self.aspects),
            "categories": cells(self.categories),
            "notes": list(self.notes),
        }


def _cell(result: CorrelationResult | None) -> dict | None:
    if result is None:
        return None
    return {
        "r": result.r,
        "n": result.n,
        "t": None if math.isinf(result.t) else result.t,
        "p": result.p,
        "sig_005": result.sig_005,
        "sig_001": result.sig_001,
    }


def _try_correlate(x: Sequence[float], y: Sequence[float], method: str) -> CorrelationResult | None:
    try:
        return correlate(x, y, method)
    except ValueError:
        return None


def run_correlate(config: RunConfig) -> CorrelateRun:
    spec = config.spec()
    part = spec.part
    method = config.method()
    corpus = load_filtered_corpus(config)
    if corpus.n_books == 0:
        raise PipelineError("no books pass the review-count filter")

    _require(config, "lexicon", "aspects")
    tok = corpus.tokenizer_config
    model = obtain_model(config, tok)
    lexicon = load_lexicon(config.lexicon, lowercase=config.lowercase)
    vocabulary = load_wordlist(config.aspects, lowercase=config.lowercase)
    aspect_sets = discipline_aspect_sets(corpus, vocabulary, config)
    category_map = (
        load_category_map(config.category_map) if config.category_map else DEFAULT_CATEGORY_MAP
    )

    notes: list[str] = []
    usable: list[str] = []
    for discipline in corpus.disciplines():
        n = len(corpus.books_in(discipline))
        if n < 3:
            notes.append(f"{discipline}: skipped ({n} book(s); correlation needs at least 3)")
        elif discipline not in aspect_sets:
            notes.append(f"{discipline}: skipped (no aspect-vocabulary noun in its reviews)")
        else:
            usable.append(discipline)
    if not usable:
        raise PipelineError("no discipline has enough books for correlation analysis")

    weighted = spec.weighted
    levels: dict[str, dict[str, CorrelationResult | None]] = {lv: {} for lv in LEVELS}
    factor_table: dict[str, dict[str, CorrelationResult | None]] = {}
    aspect_table: dict[str, dict[str, CorrelationResult | None]] = {}
    category_table: dict[str, dict[str, CorrelationResult | None]] = {}
    factor_order = CombinationSpec(part=part, level=LEVEL_MACRO_MICRO).factor_names()
    aspect_rank: dict[str, int] = {}

    for discipline in usable:
        books = corpus.books_in(discipline)
        citations = {b.book_id: b.citation_count for b in books}
        aspect_set = aspect_sets[discipline]

        # score-vs-citation rows, one per combination level
        for level in LEVELS:
            level_spec = CombinationSpec(part=part, level=level)
            try:
                entry = _score_one(books, level_spec, model, aspect_set, lexicon, config)
                levels[level][discipline] = correlate_scores(
                    entry.fusion.scores, citations, method
                )
            except ValueError:
                levels[level][discipline] = None

        # single-factor rows from the part's full (macro & micro) matrix
        matrix = build_factor_matrix(
            books,
            CombinationSpec(part=part, level=LEVEL_MACRO_MICRO),
            model=model,
            aspect_set=aspect_set,
            lexicon=lexicon,
            scope=config.scope,
            smoothing=config.smoothing,
            no_direction=config.no_direction,
            jobs=config.jobs,
        )
        for name, result in correlate_factors(matrix, citations, method).items():
            factor_table.setdefault(name, {})[discipline] = result

        # per-aspect and per-category rows
        values_by_book = {
            b.book_id: book_aspect_values(
                b, aspect_set, lexicon, weighted, config.scope, config.smoothing
            )
            for b in books
        }
        ordered_books = sorted(values_by_book)
        y = [float(citations[b]) for b in ordered_books]
        for freq_rank, (word, _) in enumerate(aspect_set.aspects):
            aspect_rank[word] = min(aspect_rank.get(word, freq_rank), freq_rank)
            x = [values_by_book[b].get(word, 0.0) for b in ordered_books]
            aspect_table.setdefault(word, {})[discipline] = _try_correlate(x, y, method)
        for category, words in category_map.categories.items():
            single = AspectCategoryMap(categories={category: words})
            try:
                grouped = group_aspect_values(values_by_book, single, aspect_set.words)
            except ValueError as exc:
                notes.append(f"{discipline}: {exc}")
                result = None
            else:
                x = [grouped[category][b] for b in ordered_books]
                result = _try_correlate(x, y, method)
            category_table.setdefault(category, {})[discipline] = result

    aspect_order = tuple(sorted(aspect_table, key=lambda w: (aspect_rank[w], w)))
    return CorrelateRun(
        config=config,
        part=part,
        method=method,
        disciplines=tuple(usable),
        levels=levels,
        factors=factor_table,
        aspects=aspect_table,
        categories=category_table,
        factor_order=factor_order,
        aspect_order=aspect_order,
        category_order=tuple(category_map.categories),
        notes=tuple(notes),
    )


# ---------------------------------------------------------------------------
# rendering and output writing
# ---------------------------------------------------------------------------


def json_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n").encode(
        "utf-8"
    )


def csv_bytes(rows: Sequence[Sequence[object]]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue().encode("utf-8")


def sanitize_name(name: str) -> str:
    cleaned = re.sub(r"[^A-Za-z0-9_.-]+", "_", name)
    return cleaned or "unnamed"


def format_r_cell(cell: dict | None) -> str:
    if cell is None:
        return ""
    stars = "**" if cell["sig_001"] else "*" if cell["sig_005"] else ""
    return f"{cell['r']:.3f}{stars}"


def correlation_table_rows(report: dict, table: str) -> list[list[str]]:
    """CSV rows for one correlation table: rows x disciplines, starred cells."""
    order_key, label = {
        "levels": ("level_order", "level"),
        "factors": ("factor_order", "factor"),
        "aspects": ("aspect_order", "aspect"),
        "categories": ("category_order", "category"),
    }[table]
    disciplines = report["disciplines"]
    rows: list[list[str]] = [[label, *disciplines]]
    for name in report[order_key]:
        cells = report[table].get(name, {})
        rows.append([name, *[format_r_cell(cells.get(d)) for d in disciplines]])
    return rows


def score_csv_rows(report: dict, discipline: str) -> list[list[str]]:
    entry = report["disciplines"][discipline]
    rows: list[list[str]] = [["book_id", "score", "rank"]]
    ordered = sorted(entry["scores"], key=lambda s: (s["rank"], s["book_id"]))
    for item in ordered:
        rows.append([item["book_id"], repr(float(item["score"])), str(item["rank"])])
    return rows


def score_outputs(run: ScoreRun, out_dir: Path) -> dict[Path, bytes]:
    report = run.report()
    outputs: dict[Path, bytes] = {out_dir / "score_report.json": json_bytes(report)}
    for discipline in sorted(run.results):
        safe = sanitize_name(discipline)
        outputs[out_dir / f"scores_{safe}.csv"] = csv_bytes(
            score_csv_rows(report, discipline)
        )
        matrix = run.results[discipline].matrix
        rows: list[list[str]] = [["book_id", *matrix.factor_names]]
        for book_id, row in zip(matrix.book_ids, matrix.values):
            rows.append([book_id, *[repr(float(v)) for v in row]])
        outputs[out_dir / f"factors_{safe}.csv"] = csv_bytes(rows)
    return outputs


def correlate_outputs(run: CorrelateRun, out_dir: Path) -> dict[Path, bytes]:
    report = run.report()
    outputs = {out_dir / "correlations.json": json_bytes(report)}
    for table in ("levels", "factors", "aspects", "categories"):
        outputs[out_dir / f"correlation_{table}.csv"] = csv_bytes(
            correlation_table_rows(report, table)
        )
    return outputs


def _text_table(rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for index, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if index == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def text_report(score_report: dict | None, correlation_report: dict | None) -> str:
    """Human-readable summary of one or both report payloads."""
    sections: list[str] = []
    if score_report is not None:
        combo = score_report["combination"]
        lines = [
            "Impact scores",
            f"  combination: {combo['part']} / {combo['level']}",
            f"  config: {score_report['config_hash']}",
        ]
        for name, entry in sorted(score_report["disciplines"].items()):
            lines.append("")
            lines.append(f"{name} ({entry['n_books']} books)")
            weight_rows = [
                ["factor", "direction", "entropy", "weight"],
                *[
                    [f, d, f"{e:.4f}", f"{w:.4f}"]
                    for f, d, e, w in zip(
                        entry["factors"], entry["directions"], entry["entropy"], entry["weights"]
                    )
                ],
            ]
            lines.append(_text_table(weight_rows))
            if entry["uniform_fallback"]:
                lines.append("  note: all factors degenerate; uniform weights used")
            elif entry["degenerate_factors"]:
                lines.append(
                    "  note: constant factor(s) carry zero weight: "
                    + ", ".join(entry["degenerate_factors"])
                )
            top = sorted(entry["scores"], key=lambda s: (s["rank"], s["book_id"]))[:10]
            score_rows = [
                ["rank", "book_id", "score"],
                *[[str(s["rank"]), s["book_id"], f"{s['score']:.4f}"] for s in top],
            ]
            lines.append(_text_table(score_rows))
        if score_report["skipped"]:
            lines.append("")
            for name, reason in sorted(score_report["skipped"].items()):
                lines.append(f"skipped {name}: {reason}")
        sections.append("\n".join(lines))
    if correlation_report is not None:
        lines = [
            "Correlation with citation counts",
            f"  part: {correlation_report['part']}"
            f"   method: {correlation_report['method']}",
            f"  config: {correlation_report['config_hash']}",
        ]
        titles = {
            "levels": "fused scores by granularity",
            "factors": "single factors",
            "aspects": "aspects",
            "categories": "aspect categories",
        }
        for table, title in titles.items():
            rows = correlation_table_rows(correlation_report, table)
            if len(rows) > 1:
                lines.append("")
                lines.append(title)
                lines.append(_text_table(rows))
        lines.append("")
        lines.append("* p < 0.05   ** p < 0.01 (two-tailed)")
        for note in correlation_report["notes"]:
            lines.append(f"note: {note}")
        sections.append("\n".join(lines))
    header = f"bookimpact {__version__}"
    return "\n\n".join([header, *sections]) + "\n"


def write_outputs(outputs: Mapping[Path, bytes]) -> list[Path]:
    """Write every file via a temp sibling, then rename all into place."""
    staged: list[tuple[Path, Path]] = []
    try:
        for path, data in outputs.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
            tmp.write_bytes(data)
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            tmp.unlink(missing_ok=True)
        raise
    return [path for _, path in staged]
