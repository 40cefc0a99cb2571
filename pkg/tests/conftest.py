"""Shared fixtures: a default tokenizer, review/book factories, and a
session-scoped synthetic corpus with a model trained on it (reused by the
pipeline, CLI, and acceptance tests to keep the suite fast)."""

from __future__ import annotations

import pytest

from bookimpact.corpus import Book, TokenizerConfig, review_from_text
from bookimpact.pipeline import RunConfig, tokenizer_config, train_with_holdout
from bookimpact.polarity import load_labeled_docs, save_model
from bookimpact.synthgen import SynthSpec, generate, write_corpus_files


@pytest.fixture()
def tok() -> TokenizerConfig:
    return TokenizerConfig()


@pytest.fixture()
def make_review(tok):
    def _make(review_id, text, book_id="b1", star=4, yes=0, total=0):
        return review_from_text(review_id, book_id, star, text, tok, yes, total)

    return _make


@pytest.fixture()
def make_book(make_review):
    def _make(book_id, texts, citation_count=0, discipline="d", stars=None, votes=None):
        reviews = tuple(
            make_review(
                f"{book_id}r{i:03d}",
                text,
                book_id=book_id,
                star=(stars[i] if stars else 4),
                yes=(votes[i][0] if votes else 0),
                total=(votes[i][1] if votes else 0),
            )
            for i, text in enumerate(texts)
        )
        return Book(
            book_id=book_id,
            title=book_id,
            discipline=discipline,
            citation_count=citation_count,
            reviews=reviews,
        )

    return _make


@pytest.fixture(scope="session")
def synth_corpus_dir(tmp_path_factory):
    """Corpus files for a 16-book single-discipline synthetic corpus."""
    out = tmp_path_factory.mktemp("synthcorpus")
    spec = SynthSpec(seed=11, n_books=16, reviews_per_book=(12, 26), n_training_docs=140)
    return write_corpus_files(generate(spec), out)


@pytest.fixture(scope="session")
def synth_model_path(synth_corpus_dir, tmp_path_factory):
    """A polarity model trained on the session corpus's training file."""
    config = RunConfig(training=str(synth_corpus_dir["training"]), top_k=200, epochs=8)
    docs = load_labeled_docs(synth_corpus_dir["training"], tokenizer_config(config))
    model, _ = train_with_holdout(docs, config)
    path = tmp_path_factory.mktemp("model") / "model.json"
    save_model(model, path)
    return path


@pytest.fixture()
def run_config(synth_corpus_dir, synth_model_path) -> RunConfig:
    return RunConfig(
        reviews=str(synth_corpus_dir["reviews"]),
        books=str(synth_corpus_dir["books"]),
        lexicon=str(synth_corpus_dir["lexicon"]),
        aspects=str(synth_corpus_dir["aspects"]),
        model=str(synth_model_path),
        top_k=200,
        epochs=8,
    )
