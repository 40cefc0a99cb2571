"""Micro-level aspect sentiment: candidate extraction, top-N selection,
per-review aspect polarity and per-book aspect sentiment values.

The polarity of an aspect in a review is the sign of
sum_k V(w_k) / dis(w_k, aspect), where w_k runs over the in-scope sentiment
words, V is +1/-1 from the lexicon, and dis is the absolute token-index
distance to the nearest occurrence of the aspect.  The sum is evaluated in
exact rational arithmetic so that an exact zero is decided reliably.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from bookimpact.corpus import Review

SCOPE_REVIEW = "review"
SCOPE_SENTENCE = "sentence"


@dataclass(frozen=True)
class SentimentLexicon:
    """word -> +1 (positive) or -1 (negative); no word carries both."""

    entries: Mapping[str, int]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("empty sentiment lexicon")
        bad = {w: v for w, v in self.entries.items() if v not in (1, -1)}
        if bad:
            raise ValueError(f"lexicon values must be +1 or -1: {bad}")
        object.__setattr__(self, "entries", dict(self.entries))

    def value(self, word: str) -> int | None:
        return self.entries.get(word)

    def negated(self) -> "SentimentLexicon":
        return SentimentLexicon({w: -v for w, v in self.entries.items()})

    def __len__(self) -> int:
        return len(self.entries)


def load_lexicon(path: str | Path, lowercase: bool = True) -> SentimentLexicon:
    """TSV, one ``word<TAB>+1|-1`` entry per line."""
    entries: dict[str, int] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{Path(path).name} line {lineno}: expected word<TAB>value")
            word, raw = parts
            if lowercase:
                word = word.lower()
            if raw not in ("+1", "1", "-1"):
                raise ValueError(f"{Path(path).name} line {lineno}: value must be +1 or -1")
            value = 1 if raw in ("+1", "1") else -1
            if entries.get(word, value) != value:
                raise ValueError(
                    f"{Path(path).name} line {lineno}: {word!r} mapped to both polarities"
                )
            entries[word] = value
    return SentimentLexicon(entries)


def save_lexicon(lexicon: SentimentLexicon, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for word in sorted(lexicon.entries):
            fh.write(f"{word}\t{'+1' if lexicon.entries[word] > 0 else '-1'}\n")


@dataclass(frozen=True)
class AspectSet:
    """The top aspects of one corpus partition, frequency-descending."""

    partition: str
    aspects: tuple[tuple[str, int], ...]  # (word, raw frequency)

    def __post_init__(self) -> None:
        ranked = sorted(self.aspects, key=lambda wf: (-wf[1], wf[0]))
        if list(ranked) != list(self.aspects):
            raise ValueError("aspects must be sorted by frequency desc, word asc")

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(w for w, _ in self.aspects)

    def __len__(self) -> int:
        return len(self.aspects)


@dataclass(frozen=True)
class Contribution:
    word: str
    value: int
    distance: int


@dataclass(frozen=True)
class AspectPolarity:
    """Signed polarity of one aspect in one review, with its evidence."""

    review_id: str
    aspect: str
    sp: int
    contributions: tuple[Contribution, ...] = ()


def extract_candidates(
    reviews: Sequence[Review], vocabulary: Iterable[str]
) -> dict[str, int]:
    """Total token occurrences of each candidate-aspect noun across the reviews."""
    vocab = set(vocabulary)
    if not vocab:
        raise ValueError("empty aspect vocabulary")
    if not reviews:
        raise ValueError("empty review partition")
    freqs: dict[str, int] = {}
    for review in reviews:
        for token in review.tokens:
            if token in vocab:
                freqs[token] = freqs.get(token, 0) + 1
    return freqs


def top_aspects(freqs: Mapping[str, int], n: int = 10, partition: str = "") -> AspectSet:
    """The n most frequent aspects; ties broken lexicographically."""
    if not freqs:
        raise ValueError("no aspect candidates (empty frequency map)")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    ranked = sorted(freqs.items(), key=lambda wf: (-wf[1], wf[0]))[:n]
    return AspectSet(partition=partition, aspects=tuple(ranked))


def _contributions_in_span(
    tokens: Sequence[str],
    span: tuple[int, int],
    positions: Sequence[int],
    lexicon: SentimentLexicon,
) -> list[Contribution]:
    start, end = span
    local = [p for p in positions if start <= p < end]
    if not local:
        return []
    found = []
    for i in range(start, end):
        value = lexicon.value(tokens[i])
        if value is None:
            continue
        distance = min(abs(i - p) for p in local)
        if distance == 0:
            continue  # the aspect token itself cannot evaluate the aspect
        found.append(Contribution(word=tokens[i], value=value, distance=distance))
    return found


def aspect_polarity(
    review: Review,
    aspect: str,
    lexicon: SentimentLexicon,
    scope: str = SCOPE_REVIEW,
) -> AspectPolarity:
    """Polarity of ``aspect`` in ``review``: +1, -1, or 0 (neutral).

    Neutral means the aspect does not occur, no sentiment word is in scope,
    or the contribution sum is exactly zero.  Scope "sentence" restricts
    contributions to sentences containing the aspect.
    """
    if scope not in (SCOPE_REVIEW, SCOPE_SENTENCE):
        raise ValueError(f"unknown scope: {scope!r}")
    tokens = review.tokens
    positions = [i for i, tok in enumerate(tokens) if tok == aspect]
    if not positions:
        return AspectPolarity(review_id=review.review_id, aspect=aspect, sp=0)

    if scope == SCOPE_REVIEW:
        spans = [(0, len(tokens))]
    else:
        spans = review.sentences()
    contributions: list[Contribution] = []
    for span in spans:
        contributions.extend(_contributions_in_span(tokens, span, positions, lexicon))

    total = sum((Fraction(c.value, c.distance) for c in contributions), Fraction(0))
    sp = 1 if total > 0 else -1 if total < 0 else 0
    return AspectPolarity(
        review_id=review.review_id,
        aspect=aspect,
        sp=sp,
        contributions=tuple(contributions),
    )


def aspect_value(polarities: Iterable[AspectPolarity]) -> float:
    """Sum of sp over sum of |sp|; 0.0 when there is no non-neutral mention."""
    num = 0
    den = 0
    for p in polarities:
        num += p.sp
        den += abs(p.sp)
    return num / den if den else 0.0


def aspect_value_weighted(
    polarities: Sequence[AspectPolarity], helpfulness: Sequence[float]
) -> float:
    """Helpfulness-weighted variant: sum(sp_j * h_j) / sum(|sp_j|)."""
    if len(polarities) != len(helpfulness):
        raise ValueError("polarities and helpfulness must have equal length")
    num = 0.0
    den = 0
    for p, h in zip(polarities, helpfulness):
        if not 0.0 <= h <= 1.0:
            raise ValueError(f"helpfulness {h} outside [0,1]")
        num += p.sp * h
        den += abs(p.sp)
    return num / den if den else 0.0
