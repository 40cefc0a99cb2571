"""Acceptance suite: nine checks covering the package's core guarantees.

Each check is one test, so a ``pytest -v`` run prints one pass/fail line
per criterion; on success the test also prints a PASS line with the
measured numbers (visible with ``-s`` or ``-rA``).  Every test enforces
its own wall-clock budget.
"""

from __future__ import annotations

import hashlib
import time

import numpy as np
import pytest
from click.testing import CliRunner

from bookimpact.aspects import (
    SentimentLexicon,
    aspect_polarity,
    aspect_value,
    aspect_value_weighted,
    extract_candidates,
    top_aspects,
)
from bookimpact.cli import main as cli_main
from bookimpact.correlation import correlate_scores, pearson, significance
from bookimpact.corpus import Book, Corpus, Review, TokenizerConfig, filter_books, review_from_text
from bookimpact.entropy import fuse
from bookimpact.factors import (
    BENEFIT,
    COST,
    CombinationSpec,
    FactorMatrix,
    build_factor_matrix,
    helpfulness,
)
from bookimpact.pipeline import RunConfig, train_with_holdout
from bookimpact.polarity import Hyperparams, build_feature_space, model_bytes, train
from bookimpact.synthgen import SynthSpec, generate
from oracles import (
    aspect_value as oracle_aspect_value,
    entropy_method as oracle_entropy_method,
    pearson_raw,
)


def _passed(criterion: int, detail: str) -> None:
    print(f"PASS criterion {criterion}: {detail}")


def _review(tokens, review_id="r1", yes=0, total=0):
    return Review(
        review_id=review_id,
        book_id="b1",
        star=3,
        text=" ".join(tokens),
        tokens=tuple(tokens),
        sentence_lengths=(),
        helpful_yes=yes,
        helpful_total=total,
    )


def test_criterion_1_inverse_distance_worked_examples():
    start = time.perf_counter()
    lexicon = SentimentLexicon({"good": 1, "bad": -1})
    # +1 at distance 5 and -1 at distance 10: 1/5 - 1/10 > 0, so sp = +1
    closer_positive = ["price", "x", "x", "x", "x", "good", "x", "x", "x", "x", "bad"]
    assert aspect_polarity(_review(closer_positive), "price", lexicon).sp == 1
    # +1 at distance 3 and -1 at distance 2: 1/3 - 1/2 < 0, so sp = -1
    closer_negative = ["price", "x", "bad", "good"]
    assert aspect_polarity(_review(closer_negative), "price", lexicon).sp == -1
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"took {elapsed:.2f}s, budget 1s"
    _passed(1, "inverse-distance polarity matches both worked examples exactly")


def test_criterion_2_helpfulness_ratio_example():
    start = time.perf_counter()
    value = helpfulness(_review(["x"], yes=359, total=365))
    assert value == pytest.approx(359 / 365, abs=1e-9)
    assert round(value, 5) == 0.98356
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"took {elapsed:.2f}s, budget 1s"
    _passed(2, f"359 of 365 helpful votes gives {value:.5f}")


def test_criterion_3_weighted_aspect_value_reduction_and_oracle():
    start = time.perf_counter()
    lexicon = SentimentLexicon({"good": 1, "fine": 1, "bad": -1, "poor": -1})
    lexicon_dict = {"good": 1, "fine": 1, "bad": -1, "poor": -1}
    pool = ["content", "good", "fine", "bad", "poor", "the", "a", "x", "y", "z"]
    rng = np.random.default_rng(101)
    for book_index in range(1_000):
        token_lists = [
            [pool[k] for k in rng.integers(0, len(pool), size=rng.integers(2, 13))]
            for _ in range(rng.integers(1, 7))
        ]
        reviews = [_review(toks, review_id=f"r{i}") for i, toks in enumerate(token_lists)]
        polarities = [aspect_polarity(r, "content", lexicon) for r in reviews]
        unweighted = aspect_value(polarities)
        unit_weighted = aspect_value_weighted(polarities, [1.0] * len(polarities))
        assert unit_weighted == pytest.approx(unweighted, abs=1e-12), f"book {book_index}"
        oracle = oracle_aspect_value(token_lists, "content", lexicon_dict)
        assert unweighted == pytest.approx(oracle, abs=1e-12), f"book {book_index}"
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.2f}s, budget 10s"
    _passed(3, f"1,000 randomized books: unit-weight reduction and brute-force oracle agree ({elapsed:.1f}s)")


def test_criterion_4_entropy_weight_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(211)
    for matrix_index in range(500):
        n = int(rng.integers(3, 51))
        m = int(rng.integers(1, 6))
        values = rng.uniform(-5.0, 15.0, size=(n, m))
        for j in range(m):
            if rng.random() < 0.2:
                values[:, j] = float(rng.uniform(-5.0, 15.0))  # constant column
        directions = tuple(COST if rng.random() < 0.5 else BENEFIT for _ in range(m))
        matrix = FactorMatrix(
            book_ids=tuple(f"b{i:03d}" for i in range(n)),
            factor_names=tuple(f"f{j}" for j in range(m)),
            values=values,
            directions=directions,
        )
        fusion = fuse(matrix)
        p, e, w, s = oracle_entropy_method(values.tolist(), list(directions))
        label = f"matrix {matrix_index} ({n}x{m})"
        assert fusion.normalized.p == pytest.approx(np.array(p), rel=1e-9, abs=1e-15), label
        assert list(fusion.weights.entropy) == pytest.approx(e, rel=1e-9, abs=1e-15), label
        assert list(fusion.weights.weight) == pytest.approx(w, rel=1e-9, abs=1e-15), label
        assert list(fusion.scores.scores) == pytest.approx(s, rel=1e-9, abs=1e-15), label
        assert sum(fusion.weights.weight) == pytest.approx(1.0, abs=1e-12), label
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"took {elapsed:.2f}s, budget 30s"
    _passed(4, f"500 random matrices match the high-precision weighting oracle ({elapsed:.1f}s)")


def test_criterion_5_correlation_statistics_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(307)
    for pair_index in range(1_000):
        n = int(rng.integers(3, 50))
        x = rng.normal(0.0, 4.0, n)
        y = 0.6 * x + rng.normal(0.0, 3.0, n)
        assert pearson(x, y) == pytest.approx(
            pearson_raw(list(x), list(y)), abs=1e-12
        ), f"pair {pair_index}"
    borderline = significance(0.370, 40)
    assert 0.015 < borderline.p < 0.025
    assert borderline.sig_005 and not borderline.sig_001
    for n in (3, 10, 40, 250):
        assert significance(0.0, n).p == 1.0
    grid = [significance(r, 30).p for r in np.linspace(0.0, 0.95, 20)]
    assert all(a > b for a, b in zip(grid, grid[1:])), "p must fall as |r| grows"
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.2f}s, budget 10s"
    _passed(5, f"1,000 pairs match the raw-sum oracle; p(0.370, n=40)={borderline.p:.4f} ({elapsed:.1f}s)")


def test_criterion_6_classifier_holdout_and_determinism():
    start = time.perf_counter()
    spec = SynthSpec(seed=29, n_books=3, reviews_per_book=(0, 0), n_training_docs=600)
    docs = generate(spec).labeled_docs()
    assert len(docs) >= 500
    config = RunConfig(top_k=1000, epochs=10, holdout=0.2)
    model_a, acc = train_with_holdout(docs, config)
    assert acc >= 0.95, f"holdout accuracy {acc:.3f}"
    model_b, _ = train_with_holdout(docs, config)
    hash_a = hashlib.sha256(model_bytes(model_a)).hexdigest()
    hash_b = hashlib.sha256(model_bytes(model_b)).hexdigest()
    assert hash_a == hash_b
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"took {elapsed:.2f}s, budget 60s"
    _passed(6, f"holdout accuracy {acc:.3f} on {len(docs)} docs; retrain hash {hash_a[:12]} identical ({elapsed:.1f}s)")


def _synthetic_correlation(seed: int, quality_correlation: float):
    """Scored-corpus-vs-citations correlation for one generator seed."""
    result = generate(
        SynthSpec(
            seed=seed,
            n_books=40,
            reviews_per_book=(12, 30),
            quality_correlation=quality_correlation,
            n_training_docs=200,
        )
    )
    docs = result.labeled_docs()
    space = build_feature_space([d.tokens for d in docs], top_k=400)
    model = train(docs, space, Hyperparams(epochs=6))
    books = result.corpus.books
    reviews = [r for b in books for r in b.reviews]
    aspect_set = top_aspects(
        extract_candidates(reviews, result.aspect_vocabulary), 10, partition="all"
    )
    matrix = build_factor_matrix(
        books,
        CombinationSpec.parse("holder_and_evaluator:macro_micro"),
        model=model,
        aspect_set=aspect_set,
        lexicon=result.lexicon,
    )
    citations = {b.book_id: b.citation_count for b in books}
    return correlate_scores(fuse(matrix).scores, citations)


def test_criterion_7_synthetic_end_to_end_signal_recovery():
    start = time.perf_counter()
    hits = 0
    for seed in range(100):
        result = _synthetic_correlation(seed, quality_correlation=0.9)
        if result.r > 0.4 and result.p < 0.05:
            hits += 1
    assert hits >= 80, f"only {hits}/100 seeds recovered the planted signal"
    null_hits = 0
    for seed in range(100):
        if _synthetic_correlation(seed, quality_correlation=0.0).p < 0.05:
            null_hits += 1
    assert null_hits <= 10, f"{null_hits}/100 seeds significant with no planted signal"
    elapsed = time.perf_counter() - start
    assert elapsed < 300.0, f"took {elapsed:.2f}s, budget 300s"
    _passed(7, f"signal recovered in {hits}/100 seeds; {null_hits}/100 false positives ({elapsed:.1f}s)")


def test_criterion_8_factor_columns_and_review_filter():
    start = time.perf_counter()
    expected = {
        ("review_holder", "macro"): ("n_positive", "n_negative", "star_value"),
        ("review_holder", "micro"): ("aspect_value", "star_value"),
        ("review_holder", "macro_micro"): (
            "n_positive",
            "n_negative",
            "aspect_value",
            "star_value",
        ),
        ("holder_and_evaluator", "macro"): (
            "n_positive",
            "n_negative",
            "star_value_weighted",
            "helpfulness",
        ),
        ("holder_and_evaluator", "micro"): (
            "aspect_value_weighted",
            "star_value_weighted",
            "helpfulness",
        ),
        ("holder_and_evaluator", "macro_micro"): (
            "n_positive",
            "n_negative",
            "aspect_value_weighted",
            "star_value_weighted",
            "helpfulness",
        ),
    }
    combinations = CombinationSpec.all_combinations()
    assert len(combinations) == 6
    for spec in combinations:
        assert spec.factor_names() == expected[(spec.part, spec.level)], str(spec)

    tok = TokenizerConfig()
    def make_book(book_id: str, n_reviews: int) -> Book:
        reviews = tuple(
            review_from_text(f"{book_id}r{i:02d}", book_id, 3, "plain words here", tok)
            for i in range(n_reviews)
        )
        return Book(book_id=book_id, title=book_id, discipline="d",
                    citation_count=0, reviews=reviews)

    corpus = Corpus(books=(make_book("ten", 10), make_book("eleven", 11)),
                    tokenizer_config=tok)
    kept = filter_books(corpus, 10)
    assert [b.book_id for b in kept.books] == ["eleven"]
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"took {elapsed:.2f}s, budget 1s"
    _passed(8, "all six factor combinations exact; filter keeps strictly more than 10 reviews")


def test_criterion_9_byte_identical_reruns(synth_corpus_dir, synth_model_path, tmp_path):
    start = time.perf_counter()
    runner = CliRunner()
    score_names = ("score_report.json", "scores_synthetic.csv", "factors_synthetic.csv")
    correlate_names = (
        "correlations.json",
        "correlation_levels.csv",
        "correlation_factors.csv",
        "correlation_aspects.csv",
        "correlation_categories.csv",
    )
    common = [
        "--reviews", str(synth_corpus_dir["reviews"]),
        "--books", str(synth_corpus_dir["books"]),
        "--lexicon", str(synth_corpus_dir["lexicon"]),
        "--aspects", str(synth_corpus_dir["aspects"]),
        "--model", str(synth_model_path),
    ]
    for run, jobs in (("one", "1"), ("two", "3")):
        for command in ("score", "correlate"):
            out = tmp_path / run / command
            result = runner.invoke(
                cli_main, [command, *common, "--jobs", jobs, "--out", str(out)]
            )
            assert result.exit_code == 0, result.output
    compared = 0
    for command, names in (("score", score_names), ("correlate", correlate_names)):
        for name in names:
            first = (tmp_path / "one" / command / name).read_bytes()
            second = (tmp_path / "two" / command / name).read_bytes()
            assert first == second, f"{command}/{name} differs between reruns"
            compared += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"took {elapsed:.2f}s, budget 60s"
    _passed(9, f"{compared} output files byte-identical across reruns and worker counts ({elapsed:.1f}s)")
