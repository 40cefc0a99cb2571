"""Review corpus: data model, tokenization, file ingestion, review-count filter.

File formats
------------
reviews  UTF-8 JSON Lines, one object per line with keys
         review_id, book_id, star, text, helpful_yes, helpful_total
books    UTF-8 CSV with header  book_id,title,discipline,citation_count
word lists (tokenizer dictionary, aspect vocabulary)
         UTF-8 plain text, one word per line
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

# Characters that end a sentence when they appear in the configured
# punctuation set (covers both Latin and CJK scripts).
SENTENCE_BOUNDARIES = frozenset(".!?;。！？；")

DEFAULT_PUNCTUATION = (
    ".,!?;:'\"()[]{}<>`~"
    "。！？；，、：（）《》“”‘’…"
)

BOOKS_HEADER = ["book_id", "title", "discipline", "citation_count"]
REVIEW_KEYS = ("review_id", "book_id", "star", "text", "helpful_yes", "helpful_total")


class CorpusError(ValueError):
    """Raised for malformed corpus files; the message carries row-level diagnostics."""


@dataclass(frozen=True)
class TokenizerConfig:
    """Tokenizer behaviour shared by every text consumer in the pipeline.

    mode "whitespace" splits on whitespace and deletes punctuation characters;
    mode "dictionary" runs a greedy longest-match against ``dictionary``,
    emitting unmatched single characters as singleton tokens (stand-in for
    segmented-script support).  Tokenization of identical text under an
    identical config is identical, by construction.
    """

    mode: str = "whitespace"
    lowercase: bool = True
    punctuation_set: frozenset[str] = frozenset(DEFAULT_PUNCTUATION)
    dictionary: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.mode not in ("whitespace", "dictionary"):
            raise ValueError(f"unknown tokenizer mode: {self.mode!r}")
        object.__setattr__(self, "punctuation_set", frozenset(self.punctuation_set))
        words = tuple(w.lower() if self.lowercase else w for w in self.dictionary)
        object.__setattr__(self, "dictionary", words)
        if self.mode == "dictionary" and not words:
            raise ValueError("dictionary mode requires a non-empty dictionary")

    @property
    def sentence_boundaries(self) -> frozenset[str]:
        return self.punctuation_set & SENTENCE_BOUNDARIES


def _split_sentences(text: str, boundaries: frozenset[str]) -> list[str]:
    if not boundaries:
        return [text]
    chunks: list[str] = []
    current: list[str] = []
    for ch in text:
        if ch in boundaries:
            chunks.append("".join(current))
            current = []
        else:
            current.append(ch)
    chunks.append("".join(current))
    return chunks


def _tokenize_chunk(chunk: str, config: TokenizerConfig) -> list[str]:
    if config.lowercase:
        chunk = chunk.lower()
    if config.mode == "whitespace":
        punct = config.punctuation_set
        tokens = []
        for piece in chunk.split():
            word = "".join(c for c in piece if c not in punct)
            if word:
                tokens.append(word)
        return tokens
    # Greedy longest-match; whitespace and punctuation act as hard breaks.
    words = set(config.dictionary)
    max_len = max(len(w) for w in words)
    punct = config.punctuation_set
    tokens = []
    i = 0
    n = len(chunk)
    while i < n:
        ch = chunk[i]
        if ch.isspace() or ch in punct:
            i += 1
            continue
        match = None
        for length in range(min(max_len, n - i), 0, -1):
            candidate = chunk[i : i + length]
            if candidate in words:
                match = candidate
                break
        if match is None:
            tokens.append(ch)
            i += 1
        else:
            tokens.append(match)
            i += len(match)
    return tokens


def tokenize_sentences(text: str, config: TokenizerConfig) -> list[list[str]]:
    """Tokenize ``text`` grouped by sentence; empty sentences are dropped."""
    groups = []
    for chunk in _split_sentences(text, config.sentence_boundaries):
        tokens = _tokenize_chunk(chunk, config)
        if tokens:
            groups.append(tokens)
    return groups


def tokenize(text: str, config: TokenizerConfig) -> list[str]:
    """Flat token sequence for ``text``; deterministic given (text, config)."""
    flat: list[str] = []
    for group in tokenize_sentences(text, config):
        flat.extend(group)
    return flat


@dataclass(frozen=True)
class Review:
    """One online review: star rating, tokenized content, helpfulness votes."""

    review_id: str
    book_id: str
    star: int
    text: str
    tokens: tuple[str, ...]
    helpful_yes: int = 0
    helpful_total: int = 0
    # Token count per sentence; sums to len(tokens).  Empty means "one sentence".
    sentence_lengths: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not 1 <= self.star <= 5:
            raise ValueError(f"star {self.star} outside [1,5]")
        if self.helpful_yes < 0 or self.helpful_total < 0:
            raise ValueError("helpfulness votes must be non-negative")
        if self.helpful_yes > self.helpful_total:
            raise ValueError(
                f"helpful_yes {self.helpful_yes} > helpful_total {self.helpful_total}"
            )
        if self.sentence_lengths and sum(self.sentence_lengths) != len(self.tokens):
            raise ValueError("sentence_lengths do not sum to token count")

    def sentences(self) -> list[tuple[int, int]]:
        """Half-open (start, end) token spans of each sentence."""
        if not self.sentence_lengths:
            return [(0, len(self.tokens))] if self.tokens else []
        spans = []
        start = 0
        for length in self.sentence_lengths:
            spans.append((start, start + length))
            start += length
        return spans


def review_from_text(
    review_id: str,
    book_id: str,
    star: int,
    text: str,
    config: TokenizerConfig,
    helpful_yes: int = 0,
    helpful_total: int = 0,
) -> Review:
    groups = tokenize_sentences(text, config)
    tokens = tuple(t for g in groups for t in g)
    return Review(
        review_id=review_id,
        book_id=book_id,
        star=star,
        text=text,
        tokens=tokens,
        helpful_yes=helpful_yes,
        helpful_total=helpful_total,
        sentence_lengths=tuple(len(g) for g in groups),
    )


@dataclass(frozen=True)
class Book:
    book_id: str
    title: str
    discipline: str
    citation_count: int
    reviews: tuple[Review, ...] = ()

    def __post_init__(self) -> None:
        if self.citation_count < 0:
            raise ValueError(f"citation_count {self.citation_count} < 0")


@dataclass(frozen=True)
class Corpus:
    """Immutable review corpus; books sorted by book_id, reviews by review_id."""

    books: tuple[Book, ...]
    tokenizer_config: TokenizerConfig = field(default_factory=TokenizerConfig)

    def __post_init__(self) -> None:
        ids = [b.book_id for b in self.books]
        if len(ids) != len(set(ids)):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate book_id(s): {', '.join(dup)}")

    def __iter__(self) -> Iterator[Book]:
        return iter(self.books)

    @property
    def n_books(self) -> int:
        return len(self.books)

    @property
    def n_reviews(self) -> int:
        return sum(len(b.reviews) for b in self.books)

    def discipline_index(self) -> dict[str, tuple[str, ...]]:
        index: dict[str, list[str]] = {}
        for book in self.books:
            index.setdefault(book.discipline, []).append(book.book_id)
        return {d: tuple(ids) for d, ids in sorted(index.items())}

    def disciplines(self) -> tuple[str, ...]:
        return tuple(sorted({b.discipline for b in self.books}))

    def books_in(self, discipline: str) -> tuple[Book, ...]:
        return tuple(b for b in self.books if b.discipline == discipline)

    def citations(self) -> dict[str, int]:
        return {b.book_id: b.citation_count for b in self.books}

    def all_review_tokens(self) -> list[tuple[str, ...]]:
        return [r.tokens for b in self.books for r in b.reviews]


def _load_books_file(path: Path, errors: list[str]) -> dict[str, dict]:
    books: dict[str, dict] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            errors.append(f"{path.name}: empty file")
            return books
        if header != BOOKS_HEADER:
            errors.append(
                f"{path.name}: bad header {header!r}, expected {BOOKS_HEADER!r}"
            )
            return books
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                errors.append(f"{path.name} line {lineno}: expected 4 fields, got {len(row)}")
                continue
            book_id, title, discipline, raw_count = row
            try:
                citation_count = int(raw_count)
            except ValueError:
                errors.append(
                    f"{path.name} line {lineno}: citation_count {raw_count!r} is not an integer"
                )
                continue
            if citation_count < 0:
                errors.append(f"{path.name} line {lineno}: citation_count {citation_count} < 0")
                continue
            if book_id in books:
                errors.append(f"{path.name} line {lineno}: duplicate book_id {book_id!r}")
                continue
            books[book_id] = {
                "title": title,
                "discipline": discipline,
                "citation_count": citation_count,
            }
    return books


def _load_review_rows(path: Path, known_books: set[str], errors: list[str]) -> list[dict]:
    rows: list[dict] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path.name} line {lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(f"{where}: invalid JSON ({exc.msg})")
                continue
            if not isinstance(obj, dict):
                errors.append(f"{where}: expected a JSON object")
                continue
            missing = [k for k in REVIEW_KEYS if k not in obj]
            if missing:
                errors.append(f"{where}: missing key(s) {', '.join(missing)}")
                continue
            star, yes, total = obj["star"], obj["helpful_yes"], obj["helpful_total"]
            bad = False
            if not isinstance(star, int) or not 1 <= star <= 5:
                errors.append(f"{where}: star={star!r} outside [1,5]")
                bad = True
            for key, value in (("helpful_yes", yes), ("helpful_total", total)):
                if not isinstance(value, int) or value < 0:
                    errors.append(f"{where}: {key}={value!r} is not a non-negative integer")
                    bad = True
            if not bad and yes > total:
                errors.append(f"{where}: helpful_yes={yes} > helpful_total={total}")
                bad = True
            if obj["book_id"] not in known_books:
                errors.append(f"{where}: unknown book_id {obj['book_id']!r}")
                bad = True
            if not bad:
                rows.append(obj)
    return rows


def load_corpus(
    reviews_path: str | Path,
    books_path: str | Path,
    config: TokenizerConfig | None = None,
) -> Corpus:
    """Load, validate and tokenize a corpus from its two files.

    Malformed rows are rejected; all row-level diagnostics are collected and
    raised together as one CorpusError.
    """
    config = config or TokenizerConfig()
    reviews_path, books_path = Path(reviews_path), Path(books_path)
    for path in (reviews_path, books_path):
        if not path.is_file():
            raise CorpusError(f"missing file: {path}")

    errors: list[str] = []
    book_meta = _load_books_file(books_path, errors)
    review_rows = _load_review_rows(reviews_path, set(book_meta), errors)
    if errors:
        shown = errors[:20]
        if len(errors) > len(shown):
            shown.append(f"... and {len(errors) - len(shown)} more")
        raise CorpusError("corpus load failed:\n  " + "\n  ".join(shown))

    by_book: dict[str, list[Review]] = {book_id: [] for book_id in book_meta}
    for obj in review_rows:
        by_book[obj["book_id"]].append(
            review_from_text(
                review_id=str(obj["review_id"]),
                book_id=obj["book_id"],
                star=obj["star"],
                text=obj["text"],
                config=config,
                helpful_yes=obj["helpful_yes"],
                helpful_total=obj["helpful_total"],
            )
        )
    books = tuple(
        Book(
            book_id=book_id,
            title=meta["title"],
            discipline=meta["discipline"],
            citation_count=meta["citation_count"],
            reviews=tuple(sorted(by_book[book_id], key=lambda r: r.review_id)),
        )
        for book_id, meta in sorted(book_meta.items())
    )
    return Corpus(books=books, tokenizer_config=config)


def save_corpus(corpus: Corpus, reviews_path: str | Path, books_path: str | Path) -> None:
    """Serialize a corpus back to the two declared file formats."""
    with Path(books_path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BOOKS_HEADER)
        for book in corpus.books:
            writer.writerow([book.book_id, book.title, book.discipline, book.citation_count])
    with Path(reviews_path).open("w", encoding="utf-8", newline="") as fh:
        for book in corpus.books:
            for r in book.reviews:
                fh.write(
                    json.dumps(
                        {
                            "review_id": r.review_id,
                            "book_id": r.book_id,
                            "star": r.star,
                            "text": r.text,
                            "helpful_yes": r.helpful_yes,
                            "helpful_total": r.helpful_total,
                        },
                        ensure_ascii=False,
                        sort_keys=True,
                    )
                    + "\n"
                )


def filter_books(corpus: Corpus, min_reviews: int = 10) -> Corpus:
    """Keep books with strictly more than ``min_reviews`` reviews.

    An empty result is valid; downstream operations reject it themselves.
    """
    if min_reviews < 0:
        raise ValueError(f"min_reviews must be >= 0, got {min_reviews}")
    kept = tuple(b for b in corpus.books if len(b.reviews) > min_reviews)
    return Corpus(books=kept, tokenizer_config=corpus.tokenizer_config)


def load_wordlist(path: str | Path, lowercase: bool = True) -> tuple[str, ...]:
    """One word per line; blank lines skipped; order preserved, duplicates dropped."""
    seen: dict[str, None] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if not word:
                continue
            if lowercase:
                word = word.lower()
            seen.setdefault(word, None)
    return tuple(seen)


def save_wordlist(words: Iterable[str], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for word in words:
            fh.write(word + "\n")
