"""Factor values, the six part/level combinations, factor-matrix assembly."""

from __future__ import annotations

import numpy as np
import pytest

from bookimpact.aspects import AspectSet, SentimentLexicon
from bookimpact.factors import (
    BENEFIT,
    COST,
    CombinationSpec,
    FactorMatrix,
    aspect_factor,
    book_aspect_values,
    build_factor_matrix,
    helpfulness,
    helpfulness_factor,
    load_factor_matrix,
    save_factor_matrix,
    star_value,
    star_value_weighted,
)
from bookimpact.polarity import Hyperparams, LabeledDoc, build_feature_space, train

LEX = SentimentLexicon({"good": 1, "bad": -1})
ASPECTS = AspectSet(partition="d", aspects=(("price", 5), ("content", 3)))


def _model():
    docs = []
    for i in range(10):
        docs.append(LabeledDoc(tokens=("good", "solid", f"n{i}"), label=1))
        docs.append(LabeledDoc(tokens=("bad", "awful", f"n{i}"), label=-1))
    space = build_feature_space([d.tokens for d in docs], top_k=50)
    return train(docs, space, Hyperparams(epochs=10))


class TestReviewFactors:
    def test_helpfulness_ratio(self, make_review):
        review = make_review("r1", "x", yes=359, total=365)
        assert helpfulness(review) == pytest.approx(359 / 365, abs=1e-12)

    def test_unvoted_review_is_zero(self, make_review):
        assert helpfulness(make_review("r1", "x")) == 0.0

    def test_smoothing(self, make_review):
        assert helpfulness(make_review("r1", "x"), smoothing=True) == 0.5
        voted = make_review("r2", "x", yes=3, total=4)
        assert helpfulness(voted, smoothing=True) == pytest.approx(4 / 6)

    def test_star_values(self, make_book):
        book = make_book("b1", ["a", "b", "c"], stars=[5, 1, 3])
        assert star_value(book) == 3.0

    def test_star_value_weighted(self, make_book):
        book = make_book("b1", ["a", "b"], stars=[4, 2], votes=[(4, 4), (1, 2)])
        assert star_value_weighted(book) == pytest.approx((4 * 1.0 + 2 * 0.5) / 2)

    def test_helpfulness_factor_mean(self, make_book):
        book = make_book("b1", ["a", "b"], votes=[(3, 4), (0, 0)])
        assert helpfulness_factor(book) == pytest.approx((0.75 + 0.0) / 2)

    def test_empty_book_rejected(self, make_book):
        empty = make_book("b1", [])
        for fn in (star_value, star_value_weighted, helpfulness_factor):
            with pytest.raises(ValueError, match="no reviews"):
                fn(empty)


class TestBookAspectValues:
    def test_per_aspect_values(self, make_book):
        book = make_book("b1", ["price good", "price bad", "price good", "plain"])
        values = book_aspect_values(book, ASPECTS, LEX)
        assert values["price"] == pytest.approx(1 / 3)
        assert values["content"] == 0.0

    def test_mean_over_aspect_set(self, make_book):
        book = make_book("b1", ["price good", "content good", "content bad plain"])
        # price: 1/1, content: (1 - 1)/2 = 0 -> mean (1 + 0)/2
        assert aspect_factor(book, ASPECTS, LEX) == pytest.approx(0.5)

    def test_weighted_uses_review_helpfulness(self, make_book):
        book = make_book("b1", ["price good", "price bad"], votes=[(3, 4), (1, 1)])
        values = book_aspect_values(book, ASPECTS, LEX, weighted=True)
        assert values["price"] == pytest.approx((0.75 - 1.0) / 2)

    def test_empty_aspect_set_rejected(self, make_book):
        book = make_book("b1", ["x"])
        empty = AspectSet(partition="d", aspects=())
        with pytest.raises(ValueError, match="empty aspect set"):
            book_aspect_values(book, empty, LEX)


class TestCombinationSpec:
    EXPECTED = {
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

    def test_exactly_six_combinations(self):
        combos = CombinationSpec.all_combinations()
        assert len(combos) == 6
        assert {(c.part, c.level) for c in combos} == set(self.EXPECTED)

    def test_factor_columns_per_combination(self):
        for (part, level), names in self.EXPECTED.items():
            assert CombinationSpec(part=part, level=level).factor_names() == names

    def test_negative_count_is_the_only_cost_factor(self):
        for part, level in self.EXPECTED:
            spec = CombinationSpec(part=part, level=level)
            directions = spec.factor_directions()
            for name, direction in zip(spec.factor_names(), directions):
                assert direction == (COST if name == "n_negative" else BENEFIT)
            assert set(spec.factor_directions(no_direction=True)) == {BENEFIT}

    def test_parse_and_str_round_trip(self):
        spec = CombinationSpec.parse("review_holder:micro")
        assert (spec.part, spec.level) == ("review_holder", "micro")
        assert str(spec) == "review_holder:micro"

    def test_parse_rejects_bad_text(self):
        with pytest.raises(ValueError, match="part:level"):
            CombinationSpec.parse("macro")
        with pytest.raises(ValueError, match="unknown combination"):
            CombinationSpec.parse("review_holder:mega")

    def test_level_flags(self):
        assert CombinationSpec.parse("review_holder:macro").uses_macro
        assert not CombinationSpec.parse("review_holder:macro").uses_micro
        both = CombinationSpec.parse("holder_and_evaluator:macro_micro")
        assert both.uses_macro and both.uses_micro and both.weighted
        assert not CombinationSpec.parse("review_holder:micro").weighted


class TestBuildFactorMatrix:
    @pytest.fixture()
    def books(self, make_book):
        book_a = make_book(
            "a1",
            ["price good", "content bad"],
            stars=[5, 2],
            votes=[(3, 4), (0, 0)],
            citation_count=9,
        )
        book_b = make_book(
            "b1", ["price bad"], stars=[1], votes=[(1, 1)], citation_count=2
        )
        return [book_a, book_b]

    def test_values_match_hand_computation(self, books):
        spec = CombinationSpec.parse("holder_and_evaluator:macro_micro")
        matrix = build_factor_matrix(
            books, spec, model=_model(), aspect_set=ASPECTS, lexicon=LEX
        )
        assert matrix.book_ids == ("a1", "b1")
        expected = np.array(
            [
                [1.0, 1.0, (0.75 + 0.0) / 2, (5 * 0.75 + 2 * 0.0) / 2, 0.375],
                [0.0, 1.0, (-1.0 + 0.0) / 2, 1.0, 1.0],
            ]
        )
        assert matrix.values == pytest.approx(expected, abs=1e-12)
        assert matrix.directions == tuple(
            COST if n == "n_negative" else BENEFIT for n in matrix.factor_names
        )

    def test_rows_sorted_regardless_of_input_order(self, books):
        spec = CombinationSpec.parse("review_holder:macro")
        model = _model()
        forward = build_factor_matrix(books, spec, model=model)
        backward = build_factor_matrix(list(reversed(books)), spec, model=model)
        assert forward == backward

    def test_jobs_do_not_change_values(self, books):
        spec = CombinationSpec.parse("holder_and_evaluator:macro_micro")
        model = _model()
        serial = build_factor_matrix(
            books, spec, model=model, aspect_set=ASPECTS, lexicon=LEX, jobs=1
        )
        threaded = build_factor_matrix(
            books, spec, model=model, aspect_set=ASPECTS, lexicon=LEX, jobs=4
        )
        assert serial == threaded

    def test_missing_inputs_rejected(self, books):
        with pytest.raises(ValueError, match="polarity model"):
            build_factor_matrix(books, CombinationSpec.parse("review_holder:macro"))
        with pytest.raises(ValueError, match="aspect set and a lexicon"):
            build_factor_matrix(books, CombinationSpec.parse("review_holder:micro"))
        with pytest.raises(ValueError, match="empty partition"):
            build_factor_matrix([], CombinationSpec.parse("review_holder:macro"), model=_model())

    def test_micro_needs_no_model(self, books):
        matrix = build_factor_matrix(
            books,
            CombinationSpec.parse("review_holder:micro"),
            aspect_set=ASPECTS,
            lexicon=LEX,
        )
        assert matrix.factor_names == ("aspect_value", "star_value")

    def test_file_round_trip(self, books, tmp_path):
        spec = CombinationSpec.parse("holder_and_evaluator:macro_micro")
        matrix = build_factor_matrix(
            books, spec, model=_model(), aspect_set=ASPECTS, lexicon=LEX
        )
        path = tmp_path / "factors.csv"
        save_factor_matrix(matrix, path)
        assert load_factor_matrix(path) == matrix

    def test_load_rejects_bad_header(self, tmp_path):
        path = tmp_path / "factors.csv"
        path.write_text("id,a\nb1,0.5\n", encoding="utf-8")
        with pytest.raises(ValueError, match="expected header"):
            load_factor_matrix(path)


class TestFactorMatrixValidation:
    def test_shape_and_order_checks(self):
        values = np.zeros((2, 1))
        with pytest.raises(ValueError, match="ascending"):
            FactorMatrix(("b", "a"), ("f",), values, (BENEFIT,))
        with pytest.raises(ValueError, match="shape"):
            FactorMatrix(("a", "b"), ("f", "g"), values, (BENEFIT, BENEFIT))
        with pytest.raises(ValueError, match="direction"):
            FactorMatrix(("a", "b"), ("f",), values, ("up",))

    def test_column_access(self):
        matrix = FactorMatrix(
            ("a", "b"), ("f", "g"), np.array([[1.0, 2.0], [3.0, 4.0]]), (BENEFIT, COST)
        )
        assert matrix.column("g").tolist() == [2.0, 4.0]
