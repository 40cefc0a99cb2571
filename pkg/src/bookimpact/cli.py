"""Command line entry points.

Five subcommands cover the full workflow: ``synth`` writes a reproducible
synthetic corpus, ``train`` fits and saves a review-polarity model,
``score`` fuses sentiment factors into per-book impact scores, ``correlate``
compares scores and factors against citation counts, and ``report`` turns
saved report JSON into a text summary, CSV tables, and PNG figures.

Options may also come from a TOML or JSON config file (``--config``);
explicit command-line flags win over file values.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import click

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from bookimpact import __version__
from bookimpact.corpus import CorpusError
from bookimpact.factors import CombinationSpec
from bookimpact.figures import correlation_figures, score_figures
from bookimpact.pipeline import (
    PATH_FIELDS,
    PipelineError,
    RunConfig,
    correlate_outputs,
    correlation_table_rows,
    csv_bytes,
    run_correlate,
    run_score,
    sanitize_name,
    score_csv_rows,
    score_outputs,
    text_report,
    tokenizer_config,
    train_with_holdout,
    write_outputs,
)
from bookimpact.polarity import load_labeled_docs, model_bytes
from bookimpact.synthgen import SynthSpec, generate, write_corpus_files

_COMBINATIONS = [str(c) for c in CombinationSpec.all_combinations()]
_CONFIG_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _load_config_file(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        if Path(path).suffix.lower() == ".json":
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except ValueError as exc:
        raise click.ClickException(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise click.ClickException(f"{path}: expected a table of settings")
    unknown = sorted(set(data) - _CONFIG_FIELDS)
    if unknown:
        raise click.ClickException(f"{path}: unknown setting(s): {', '.join(unknown)}")
    base = Path(path).parent
    for key in PATH_FIELDS:
        value = data.get(key)
        if value is not None and not Path(value).is_absolute():
            data[key] = str(base / value)
    return data


def _explicit(ctx: click.Context, name: str) -> bool:
    source = ctx.get_parameter_source(name)
    return source is not None and source.name in ("COMMANDLINE", "ENVIRONMENT")


def _resolve_config(
    ctx: click.Context,
    config_file: str | None,
    values: dict,
    aliases: dict[str, str] | None = None,
) -> RunConfig:
    """Merge CLI values over config-file values over dataclass defaults."""
    aliases = aliases or {}
    merged = _load_config_file(config_file) if config_file else {}
    for key, value in values.items():
        if _explicit(ctx, aliases.get(key, key)) or key not in merged:
            merged[key] = value
    try:
        return RunConfig(**merged)
    except (TypeError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc


def _check_input_paths(config: RunConfig) -> None:
    missing = [
        f"--{key.replace('_', '-')} {getattr(config, key)}"
        for key in PATH_FIELDS
        if getattr(config, key) is not None and not Path(getattr(config, key)).is_file()
    ]
    if missing:
        raise PipelineError("input file(s) not found: " + "; ".join(missing))


def _guard(action):
    """Run a pipeline action, mapping library errors to a clean CLI failure."""
    try:
        return action()
    except (PipelineError, CorpusError, ValueError, OSError) as exc:
        raise click.ClickException(str(exc)) from exc


def _echo_written(paths) -> None:
    for path in sorted(paths):
        click.echo(f"wrote {path}")


def _corpus_options(fn):
    decorators = [
        click.option("--reviews", type=click.Path(), help="Reviews JSONL file."),
        click.option("--books", type=click.Path(), help="Books CSV file."),
        click.option(
            "--min-reviews",
            type=int,
            default=10,
            show_default=True,
            help="Keep books with strictly more reviews than this.",
        ),
        click.option(
            "--tokenizer",
            type=click.Choice(["whitespace", "dictionary"]),
            default="whitespace",
            show_default=True,
        ),
        click.option(
            "--token-dictionary",
            type=click.Path(),
            help="Word list for the dictionary tokenizer.",
        ),
        click.option(
            "--lowercase/--keep-case",
            default=True,
            show_default=True,
            help="Lowercase text before tokenizing.",
        ),
    ]
    for decorator in reversed(decorators):
        fn = decorator(fn)
    return fn


def _model_options(fn):
    decorators = [
        click.option("--model", type=click.Path(), help="Saved polarity model."),
        click.option(
            "--training",
            type=click.Path(),
            help="Labeled JSONL to train a model when --model is absent.",
        ),
        click.option("--top-k", type=int, default=2000, show_default=True),
        click.option("--epochs", type=int, default=20, show_default=True),
        click.option("--learning-rate", type=float, default=0.5, show_default=True),
        click.option("--regularization", type=float, default=1e-4, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
    ]
    for decorator in reversed(decorators):
        fn = decorator(fn)
    return fn


def _analysis_options(fn):
    decorators = [
        click.option("--lexicon", type=click.Path(), help="Sentiment lexicon TSV."),
        click.option("--aspects", type=click.Path(), help="Aspect vocabulary word list."),
        click.option(
            "--combination",
            type=click.Choice(_COMBINATIONS),
            default="holder_and_evaluator:macro_micro",
            show_default=True,
            help="Factor set: review part and sentiment granularity.",
        ),
        click.option("--top-n-aspects", type=int, default=10, show_default=True),
        click.option(
            "--scope",
            type=click.Choice(["review", "sentence"]),
            default="review",
            show_default=True,
            help="Window for word-to-aspect distances.",
        ),
        click.option(
            "--smoothing",
            is_flag=True,
            help="Additive smoothing of helpfulness ratios.",
        ),
        click.option(
            "--no-direction",
            is_flag=True,
            help="Normalize every factor as a benefit indicator.",
        ),
        click.option(
            "--global-aspects",
            is_flag=True,
            help="Select one aspect set from the whole corpus instead of per discipline.",
        ),
        click.option("--jobs", type=int, default=1, show_default=True),
    ]
    for decorator in reversed(decorators):
        fn = decorator(fn)
    return fn


@click.group()
@click.version_option(__version__, prog_name="bookimpact")
def main() -> None:
    """Measure book impact from review sentiment, validated against citations."""


@main.command()
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Output directory.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--books", type=int, default=40, show_default=True)
@click.option(
    "--reviews-per-book",
    type=int,
    nargs=2,
    default=(12, 140),
    show_default=True,
    metavar="MIN MAX",
)
@click.option("--quality-correlation", type=float, default=0.9, show_default=True)
@click.option("--helpfulness-sparsity", type=float, default=0.1, show_default=True)
@click.option("--lexicon-size", type=int, default=40, show_default=True)
@click.option("--aspect-count", type=int, default=10, show_default=True)
@click.option("--training-docs", type=int, default=600, show_default=True)
@click.option(
    "--discipline",
    "disciplines",
    multiple=True,
    default=("synthetic",),
    show_default=True,
    help="Discipline label; repeat for several partitions.",
)
def synth(
    out,
    seed,
    books,
    reviews_per_book,
    quality_correlation,
    helpfulness_sparsity,
    lexicon_size,
    aspect_count,
    training_docs,
    disciplines,
):
    """Generate a seeded synthetic corpus with known quality structure."""

    def action():
        spec = SynthSpec(
            seed=seed,
            n_books=books,
            reviews_per_book=tuple(reviews_per_book),
            quality_correlation=quality_correlation,
            helpfulness_sparsity=helpfulness_sparsity,
            lexicon_size=lexicon_size,
            aspect_count=aspect_count,
            n_training_docs=training_docs,
            disciplines=tuple(disciplines),
        )
        result = generate(spec)
        paths = write_corpus_files(result, out)
        n_reviews = sum(len(b.reviews) for b in result.corpus.books)
        click.echo(f"generated {result.corpus.n_books} books, {n_reviews} reviews (seed {seed})")
        _echo_written(paths.values())

    _guard(action)


@main.command()
@click.option("--training", type=click.Path(), required=True, help="Labeled JSONL file.")
@click.option("--model-out", type=click.Path(), required=True, help="Where to save the model.")
@click.option("--top-k", type=int, default=2000, show_default=True)
@click.option("--epochs", type=int, default=20, show_default=True)
@click.option("--learning-rate", type=float, default=0.5, show_default=True)
@click.option("--regularization", type=float, default=1e-4, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--holdout",
    type=float,
    default=0.2,
    show_default=True,
    help="Fraction held out to report accuracy; the saved model uses all docs.",
)
@click.option(
    "--tokenizer",
    type=click.Choice(["whitespace", "dictionary"]),
    default="whitespace",
    show_default=True,
)
@click.option("--token-dictionary", type=click.Path())
@click.option("--lowercase/--keep-case", default=True, show_default=True)
@click.option("--config", "config_file", type=click.Path(exists=True), help="TOML or JSON settings file.")
@click.pass_context
def train(ctx, config_file, model_out, **values):
    """Train the review-polarity classifier and save it to a file."""

    def action():
        config = _resolve_config(ctx, config_file, values)
        _check_input_paths(config)
        docs = load_labeled_docs(config.training, tokenizer_config(config))
        model, acc = train_with_holdout(docs, config)
        written = write_outputs({Path(model_out): model_bytes(model)})
        kind = "held-out" if config.holdout > 0 else "training"
        click.echo(f"trained on {len(docs)} labeled docs; {kind} accuracy {acc:.3f}")
        _echo_written(written)

    _guard(action)


@main.command()
@_corpus_options
@_model_options
@_analysis_options
@click.option("--config", "config_file", type=click.Path(exists=True), help="TOML or JSON settings file.")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
@click.pass_context
def score(ctx, config_file, out, **values):
    """Fuse sentiment factors into entropy-weighted impact scores."""

    def action():
        config = _resolve_config(ctx, config_file, values)
        _check_input_paths(config)
        run = run_score(config)
        written = write_outputs(score_outputs(run, Path(out)))
        for discipline in sorted(run.results):
            entry = run.results[discipline]
            click.echo(f"{discipline}: scored {len(entry.matrix.book_ids)} books")
        for discipline, reason in sorted(run.skipped.items()):
            click.echo(f"{discipline}: skipped ({reason})")
        _echo_written(written)

    _guard(action)


@main.command()
@_corpus_options
@_model_options
@_analysis_options
@click.option("--category-map", type=click.Path(), help="Aspect category JSON file.")
@click.option(
    "--method",
    type=click.Choice(["pearson", "spearman"]),
    default="pearson",
    show_default=True,
)
@click.option("--config", "config_file", type=click.Path(exists=True), help="TOML or JSON settings file.")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
@click.pass_context
def correlate(ctx, config_file, out, method, **values):
    """Correlate scores, factors, aspects, and categories with citations."""

    def action():
        values["rank_correlation"] = method == "spearman"
        config = _resolve_config(
            ctx, config_file, values, aliases={"rank_correlation": "method"}
        )
        _check_input_paths(config)
        run = run_correlate(config)
        written = write_outputs(correlate_outputs(run, Path(out)))
        click.echo(
            f"correlated {len(run.disciplines)} discipline(s) with {run.method} method"
        )
        for note in run.notes:
            click.echo(f"note: {note}")
        _echo_written(written)

    _guard(action)


def _load_report(path: str, expected_keys: tuple[str, ...]) -> dict:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except ValueError as exc:
        raise click.ClickException(f"{path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("tool", {}).get("name") != "bookimpact":
        raise click.ClickException(f"{path}: not a bookimpact report")
    missing = [key for key in expected_keys if key not in payload]
    if missing:
        raise click.ClickException(f"{path}: missing key(s): {', '.join(missing)}")
    return payload


@main.command()
@click.option("--scores", type=click.Path(exists=True), help="score_report.json from `score`.")
@click.option(
    "--correlations", type=click.Path(exists=True), help="correlations.json from `correlate`."
)
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
def report(scores, correlations, out):
    """Render saved reports as a text summary, CSV tables, and PNG figures."""
    if not scores and not correlations:
        raise click.ClickException("provide --scores and/or --correlations")

    def action():
        out_dir = Path(out)
        score_payload = _load_report(scores, ("disciplines", "combination")) if scores else None
        corr_payload = (
            _load_report(correlations, ("disciplines", "levels")) if correlations else None
        )
        outputs: dict[Path, bytes] = {
            out_dir / "report.txt": text_report(score_payload, corr_payload).encode("utf-8")
        }
        if score_payload is not None:
            for discipline in sorted(score_payload["disciplines"]):
                safe = sanitize_name(discipline)
                outputs[out_dir / f"scores_{safe}.csv"] = csv_bytes(
                    score_csv_rows(score_payload, discipline)
                )
            outputs.update(score_figures(score_payload, out_dir))
        if corr_payload is not None:
            for table in ("levels", "factors", "aspects", "categories"):
                outputs[out_dir / f"correlation_{table}.csv"] = csv_bytes(
                    correlation_table_rows(corr_payload, table)
                )
            outputs.update(correlation_figures(corr_payload, out_dir))
        _echo_written(write_outputs(outputs))

    _guard(action)


if __name__ == "__main__":
    main()
