"""Inverse-distance aspect polarity, aspect sets, per-book aspect values."""

from __future__ import annotations

import numpy as np
import pytest

from bookimpact.aspects import (
    AspectSet,
    SentimentLexicon,
    aspect_polarity,
    aspect_value,
    aspect_value_weighted,
    extract_candidates,
    load_lexicon,
    save_lexicon,
    top_aspects,
)
from bookimpact.corpus import Review
from oracles import aspect_sign, aspect_value as oracle_aspect_value

LEX = SentimentLexicon({"good": 1, "fine": 1, "bad": -1, "poor": -1})


def _review(tokens, review_id="r1", sentence_lengths=()):
    return Review(
        review_id=review_id,
        book_id="b1",
        star=3,
        text=" ".join(tokens),
        tokens=tuple(tokens),
        sentence_lengths=tuple(sentence_lengths),
    )


class TestAspectPolarity:
    def test_closer_positive_word_wins(self):
        # +1 at distance 5 and -1 at distance 10: 1/5 - 1/10 = 1/10 > 0
        tokens = ["price", "x", "x", "x", "x", "good", "x", "x", "x", "x", "bad"]
        result = aspect_polarity(_review(tokens), "price", LEX)
        assert result.sp == 1
        assert {(c.word, c.value, c.distance) for c in result.contributions} == {
            ("good", 1, 5),
            ("bad", -1, 10),
        }

    def test_closer_negative_word_wins(self):
        # -1 at distance 2 and +1 at distance 3: 1/3 - 1/2 = -1/6 < 0
        tokens = ["price", "x", "bad", "good"]
        assert aspect_polarity(_review(tokens), "price", LEX).sp == -1

    def test_exactly_balanced_contributions_are_neutral(self):
        tokens = ["good", "x", "price", "x", "bad"]
        assert aspect_polarity(_review(tokens), "price", LEX).sp == 0

    def test_absent_aspect_is_neutral(self):
        result = aspect_polarity(_review(["good", "bad"]), "price", LEX)
        assert result.sp == 0
        assert result.contributions == ()

    def test_sentiment_word_at_aspect_position_is_skipped(self):
        # "good" is both the aspect and a lexicon word; distance 0 is no evidence
        lex = SentimentLexicon({"good": 1, "bad": -1})
        assert aspect_polarity(_review(["good"]), "good", lex).sp == 0
        assert aspect_polarity(_review(["good", "bad"]), "good", lex).sp == -1

    def test_distance_to_nearest_occurrence(self):
        tokens = ["price", "x", "x", "x", "good", "x", "price"]
        result = aspect_polarity(_review(tokens), "price", LEX)
        assert result.sp == 1
        assert [(c.word, c.distance) for c in result.contributions] == [("good", 2)]

    def test_sentence_scope_ignores_other_sentences(self):
        # review-wide the three "good" mentions outweigh "bad"; within the
        # aspect's own sentence only "bad" remains
        tokens = ["price", "bad", "good", "good", "good"]
        review = _review(tokens, sentence_lengths=(2, 3))
        assert aspect_polarity(review, "price", LEX, scope="review").sp == 1
        assert aspect_polarity(review, "price", LEX, scope="sentence").sp == -1

    def test_unknown_scope_rejected(self):
        with pytest.raises(ValueError, match="unknown scope"):
            aspect_polarity(_review(["price"]), "price", LEX, scope="paragraph")

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(7)
        pool = ["price", "good", "bad", "fine", "poor", "x", "y", "z"]
        for _ in range(300):
            tokens = [pool[i] for i in rng.integers(0, len(pool), rng.integers(1, 20))]
            got = aspect_polarity(_review(tokens), "price", LEX).sp
            assert got == aspect_sign(tokens, "price", LEX.entries)


class TestAspectValues:
    def test_signed_share_of_non_neutral_mentions(self):
        reviews = [
            _review(["price", "good"], review_id="r1"),
            _review(["price", "bad"], review_id="r2"),
            _review(["price", "good"], review_id="r3"),
            _review(["nothing", "here"], review_id="r4"),  # neutral, not counted
        ]
        polarities = [aspect_polarity(r, "price", LEX) for r in reviews]
        assert aspect_value(polarities) == pytest.approx(1 / 3)

    def test_no_mentions_gives_zero(self):
        polarities = [aspect_polarity(_review(["x"]), "price", LEX)]
        assert aspect_value(polarities) == 0.0

    def test_weighted_variant(self):
        reviews = [
            _review(["price", "good"], review_id="r1"),
            _review(["price", "bad"], review_id="r2"),
        ]
        polarities = [aspect_polarity(r, "price", LEX) for r in reviews]
        assert aspect_value_weighted(polarities, [0.5, 1.0]) == pytest.approx(-0.25)

    def test_weighted_with_unit_weights_reduces_to_unweighted(self):
        rng = np.random.default_rng(11)
        pool = ["price", "good", "bad", "x"]
        for _ in range(100):
            reviews = [
                _review(
                    [pool[i] for i in rng.integers(0, len(pool), rng.integers(1, 10))],
                    review_id=f"r{k}",
                )
                for k in range(rng.integers(1, 6))
            ]
            polarities = [aspect_polarity(r, "price", LEX) for r in reviews]
            plain = aspect_value(polarities)
            unit = aspect_value_weighted(polarities, [1.0] * len(polarities))
            assert unit == pytest.approx(plain, abs=1e-12)
            tokens = [list(r.tokens) for r in reviews]
            assert plain == pytest.approx(
                oracle_aspect_value(tokens, "price", LEX.entries), abs=1e-12
            )

    def test_weighted_input_validation(self):
        polarities = [aspect_polarity(_review(["price", "good"]), "price", LEX)]
        with pytest.raises(ValueError, match="equal length"):
            aspect_value_weighted(polarities, [0.5, 0.5])
        with pytest.raises(ValueError, match="outside"):
            aspect_value_weighted(polarities, [1.5])


class TestAspectSelection:
    def test_counts_vocabulary_tokens(self):
        reviews = [
            _review(["price", "price", "content"], review_id="r1"),
            _review(["content", "noise"], review_id="r2"),
        ]
        freqs = extract_candidates(reviews, ["price", "content", "paper"])
        assert freqs == {"price": 2, "content": 2}

    def test_empty_inputs_rejected(self):
        with pytest.raises(ValueError, match="vocabulary"):
            extract_candidates([_review(["x"])], [])
        with pytest.raises(ValueError, match="review partition"):
            extract_candidates([], ["price"])

    def test_top_n_with_lexicographic_ties(self):
        aspect_set = top_aspects({"b": 3, "a": 3, "c": 9, "d": 1}, n=3)
        assert aspect_set.aspects == (("c", 9), ("a", 3), ("b", 3))
        assert aspect_set.words == ("c", "a", "b")

    def test_fewer_candidates_than_n(self):
        assert len(top_aspects({"a": 1}, n=10)) == 1

    def test_bad_arguments(self):
        with pytest.raises(ValueError, match="empty frequency map"):
            top_aspects({}, n=3)
        with pytest.raises(ValueError, match="n must be"):
            top_aspects({"a": 1}, n=0)

    def test_aspect_set_must_be_ranked(self):
        with pytest.raises(ValueError, match="sorted"):
            AspectSet(partition="p", aspects=(("a", 1), ("b", 5)))


class TestLexicon:
    def test_values_and_negation(self):
        assert LEX.value("good") == 1
        assert LEX.value("missing") is None
        negated = LEX.negated()
        assert negated.value("good") == -1
        assert negated.value("bad") == 1

    def test_rejects_non_unit_values(self):
        with pytest.raises(ValueError, match="values must be"):
            SentimentLexicon({"meh": 0})
        with pytest.raises(ValueError, match="empty"):
            SentimentLexicon({})

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "lex.tsv"
        save_lexicon(LEX, path)
        assert load_lexicon(path).entries == LEX.entries

    def test_conflicting_entries_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("good\t+1\ngood\t-1\n", encoding="utf-8")
        with pytest.raises(ValueError, match="both polarities"):
            load_lexicon(path)

    def test_bad_value_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("good\t2\n", encoding="utf-8")
        with pytest.raises(ValueError, match="value must be"):
            load_lexicon(path)

    def test_bad_shape_rejected(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("good +1\n", encoding="utf-8")
        with pytest.raises(ValueError, match="word<TAB>value"):
            load_lexicon(path)
