"""Book-level factor values and the books x factors matrix.

The six factor combinations pair a part (whose information enters: the
review holder alone, or holder plus the helpfulness-voting evaluators)
with a level (macro polarity counts, micro aspect sentiment, or both).
Evaluator combinations use helpfulness-weighted star and aspect values
and add the mean-helpfulness factor.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from bookimpact.aspects import (
    AspectSet,
    SentimentLexicon,
    aspect_polarity,
    aspect_value,
    aspect_value_weighted,
)
from bookimpact.corpus import Book, Review
from bookimpact.polarity import PolarityModel, count_polarities

PART_HOLDER = "review_holder"
PART_EVALUATOR = "holder_and_evaluator"
LEVEL_MACRO = "macro"
LEVEL_MICRO = "micro"
LEVEL_MACRO_MICRO = "macro_micro"

BENEFIT = "benefit"
COST = "cost"

# Factor columns per (part, level); order is the column order of the matrix.
_COLUMNS = {
    (PART_HOLDER, LEVEL_MACRO): ("n_positive", "n_negative", "star_value"),
    (PART_HOLDER, LEVEL_MICRO): ("aspect_value", "star_value"),
    (PART_HOLDER, LEVEL_MACRO_MICRO): (
        "n_positive",
        "n_negative",
        "aspect_value",
        "star_value",
    ),
    (PART_EVALUATOR, LEVEL_MACRO): (
        "n_positive",
        "n_negative",
        "star_value_weighted",
        "helpfulness",
    ),
    (PART_EVALUATOR, LEVEL_MICRO): (
        "aspect_value_weighted",
        "star_value_weighted",
        "helpfulness",
    ),
    (PART_EVALUATOR, LEVEL_MACRO_MICRO): (
        "n_positive",
        "n_negative",
        "aspect_value_weighted",
        "star_value_weighted",
        "helpfulness",
    ),
}


@dataclass(frozen=True)
class CombinationSpec:
    """One of the six part/level factor combinations."""

    part: str
    level: str

    def __post_init__(self) -> None:
        if (self.part, self.level) not in _COLUMNS:
            raise ValueError(f"unknown combination: {self.part}:{self.level}")

    @classmethod
    def parse(cls, text: str) -> "CombinationSpec":
        part, sep, level = text.partition(":")
        if not sep:
            raise ValueError(f"combination must look like part:level, got {text!r}")
        return cls(part=part, level=level)

    @classmethod
    def all_combinations(cls) -> tuple["CombinationSpec", ...]:
        return tuple(cls(part=p, level=l) for p, l in _COLUMNS)

    def __str__(self) -> str:
        return f"{self.part}:{self.level}"

    @property
    def weighted(self) -> bool:
        return self.part == PART_EVALUATOR

    @property
    def uses_macro(self) -> bool:
        return self.level in (LEVEL_MACRO, LEVEL_MACRO_MICRO)

    @property
    def uses_micro(self) -> bool:
        return self.level in (LEVEL_MICRO, LEVEL_MACRO_MICRO)

    def factor_names(self) -> tuple[str, ...]:
        return _COLUMNS[(self.part, self.level)]

    def factor_directions(self, no_direction: bool = False) -> tuple[str, ...]:
        if no_direction:
            return tuple(BENEFIT for _ in self.factor_names())
        return tuple(
            COST if name == "n_negative" else BENEFIT for name in self.factor_names()
        )


def helpfulness(review: Review, smoothing: bool = False) -> float:
    """Fraction of helpful votes; 0 when unvoted, or (yes+1)/(total+2) with smoothing."""
    if smoothing:
        return (review.helpful_yes + 1) / (review.helpful_total + 2)
    if review.helpful_total == 0:
        return 0.0
    return review.helpful_yes / review.helpful_total


def star_value(book: Book) -> float:
    """Mean star rating over the book's reviews."""
    if not book.reviews:
        raise ValueError(f"book {book.book_id} has no reviews")
    return sum(r.star for r in book.reviews) / len(book.reviews)


def star_value_weighted(book: Book, smoothing: bool = False) -> float:
    """Mean of star * helpfulness over the book's reviews."""
    if not book.reviews:
        raise ValueError(f"book {book.book_id} has no reviews")
    total = sum(r.star * helpfulness(r, smoothing) for r in book.reviews)
    return total / len(book.reviews)


def helpfulness_factor(book: Book, smoothing: bool = False) -> float:
    """Book-level helpfulness: arithmetic mean of per-review helpfulness."""
    if not book.reviews:
        raise ValueError(f"book {book.book_id} has no reviews")
    return sum(helpfulness(r, smoothing) for r in book.reviews) / len(book.reviews)


def book_aspect_values(
    book: Book,
    aspect_set: AspectSet,
    lexicon: SentimentLexicon,
    weighted: bool = False,
    scope: str = "review",
    smoothing: bool = False,
) -> dict[str, float]:
    """Per-aspect sentiment value of the book, over every aspect in the set.

    Aspects the book never mentions get 0 (no non-neutral mention).
    """
    if not len(aspect_set):
        raise ValueError("empty aspect set")
    values: dict[str, float] = {}
    h = [helpfulness(r, smoothing) for r in book.reviews] if weighted else None
    for aspect in aspect_set.words:
        polarities = [aspect_polarity(r, aspect, lexicon, scope) for r in book.reviews]
        if weighted:
            values[aspect] = aspect_value_weighted(polarities, h)
        else:
            values[aspect] = aspect_value(polarities)
    return values


def aspect_factor(
    book: Book,
    aspect_set: AspectSet,
    lexicon: SentimentLexicon,
    weighted: bool = False,
    scope: str = "review",
    smoothing: bool = False,
) -> float:
    """Mean aspect sentiment value over the aspect set (absent aspects count 0)."""
    values = book_aspect_values(book, aspect_set, lexicon, weighted, scope, smoothing)
    return sum(values.values()) / len(values)


@dataclass(frozen=True, eq=False)
class FactorMatrix:
    """books x factors value grid with per-factor direction flags."""

    book_ids: tuple[str, ...]
    factor_names: tuple[str, ...]
    values: np.ndarray
    directions: tuple[str, ...]

    def __post_init__(self) -> None:
        n, m = len(self.book_ids), len(self.factor_names)
        if self.values.shape != (n, m):
            raise ValueError(f"values shape {self.values.shape} != ({n}, {m})")
        if len(self.directions) != m:
            raise ValueError("one direction flag per factor required")
        if any(d not in (BENEFIT, COST) for d in self.directions):
            raise ValueError(f"directions must be benefit/cost, got {self.directions}")
        if list(self.book_ids) != sorted(self.book_ids):
            raise ValueError("book_ids must be ascending")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FactorMatrix):
            return NotImplemented
        return (
            self.book_ids == other.book_ids
            and self.factor_names == other.factor_names
            and self.directions == other.directions
            and np.array_equal(self.values, other.values)
        )

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.factor_names.index(name)]


def _factor_row(
    book: Book,
    names: Sequence[str],
    model: PolarityModel | None,
    aspect_set: AspectSet | None,
    lexicon: SentimentLexicon | None,
    scope: str,
    smoothing: bool,
) -> list[float]:
    counts = None
    row = []
    for name in names:
        if name in ("n_positive", "n_negative"):
            if counts is None:
                counts = count_polarities(book, model)
            row.append(float(counts[0] if name == "n_positive" else counts[1]))
        elif name == "star_value":
            row.append(star_value(book))
        elif name == "star_value_weighted":
            row.append(star_value_weighted(book, smoothing))
        elif name == "helpfulness":
            row.append(helpfulness_factor(book, smoothing))
        elif name == "aspect_value":
            row.append(aspect_factor(book, aspect_set, lexicon, False, scope, smoothing))
        elif name == "aspect_value_weighted":
            row.append(aspect_factor(book, aspect_set, lexicon, True, scope, smoothing))
        else:
            raise ValueError(f"unknown factor: {name}")
    return row


def build_factor_matrix(
    books: Sequence[Book],
    spec: CombinationSpec,
    model: PolarityModel | None = None,
    aspect_set: AspectSet | None = None,
    lexicon: SentimentLexicon | None = None,
    scope: str = "review",
    smoothing: bool = False,
    no_direction: bool = False,
    jobs: int = 1,
) -> FactorMatrix:
    """Assemble the factor matrix for one corpus partition.

    Rows are books in ascending book_id order regardless of input order or
    ``jobs``; per-book rows are independent, so a thread pool only changes
    wall time, never values.
    """
    if not books:
        raise ValueError("empty partition")
    if spec.uses_macro and model is None:
        raise ValueError(f"combination {spec} needs a polarity model")
    if spec.uses_micro and (aspect_set is None or lexicon is None):
        raise ValueError(f"combination {spec} needs an aspect set and a lexicon")

    ordered = sorted(books, key=lambda b: b.book_id)
    names = spec.factor_names()

    def row_for(book: Book) -> list[float]:
        return _factor_row(book, names, model, aspect_set, lexicon, scope, smoothing)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(row_for, ordered))
    else:
        rows = [row_for(book) for book in ordered]

    return FactorMatrix(
        book_ids=tuple(b.book_id for b in ordered),
        factor_names=names,
        values=np.array(rows, dtype=np.float64),
        directions=spec.factor_directions(no_direction),
    )


def save_factor_matrix(matrix: FactorMatrix, path: str | Path) -> None:
    """CSV with book_id row labels and factor-name headers; full float precision."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["book_id", *matrix.factor_names])
        for book_id, row in zip(matrix.book_ids, matrix.values):
            writer.writerow([book_id, *(repr(float(v)) for v in row)])


def load_factor_matrix(path: str | Path, no_direction: bool = False) -> FactorMatrix:
    """Read the CSV export back; directions are re-derived from factor names."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "book_id" or len(header) < 2:
            raise ValueError(f"{Path(path).name}: expected header book_id,<factors>")
        names = tuple(header[1:])
        book_ids = []
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{Path(path).name}: ragged row {row!r}")
            book_ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
    if no_direction:
        directions = tuple(BENEFIT for _ in names)
    else:
        directions = tuple(COST if n == "n_negative" else BENEFIT for n in names)
    return FactorMatrix(
        book_ids=tuple(book_ids),
        factor_names=names,
        values=np.array(rows, dtype=np.float64),
        directions=directions,
    )
