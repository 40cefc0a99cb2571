"""Seeded synthetic review corpus with a planted latent-quality signal.

Each book draws a latent quality q in [0,1].  Review stars, the share of
positive sentiment words near aspect nouns, and helpfulness-vote agreement
all rise with q; citation counts follow an exponential function of the rank
of a quality proxy correlated with q at a configurable strength.  The
labeled training set uses disjoint positive/negative vocabularies and is
therefore linearly separable by construction.

Everything is drawn from a single seeded generator in a fixed order, so a
given spec always produces byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from bookimpact.aspects import SentimentLexicon, save_lexicon
from bookimpact.correlation import DEFAULT_CATEGORY_MAP, AspectCategoryMap, save_category_map
from bookimpact.corpus import (
    Book,
    Corpus,
    TokenizerConfig,
    review_from_text,
    save_corpus,
    save_wordlist,
)
from bookimpact.polarity import LabeledDoc, save_labeled_docs

# Aspect nouns used by the generator, most common book-review attributes first.
CANONICAL_ASPECTS = (
    "quality",
    "content",
    "version",
    "printing",
    "translation",
    "paper",
    "packaging",
    "logistics",
    "price",
    "appearance",
)

_FILLER = tuple(f"filler{i:02d}" for i in range(20)) + (
    "the",
    "this",
    "book",
    "a",
    "is",
    "of",
    "it",
    "very",
)


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    n_books: int = 40
    reviews_per_book: tuple[int, int] = (12, 140)
    quality_correlation: float = 0.9
    lexicon_size: int = 40
    aspect_count: int = 10
    helpfulness_sparsity: float = 0.1
    n_training_docs: int = 600
    disciplines: tuple[str, ...] = ("synthetic",)

    def __post_init__(self) -> None:
        if self.n_books < 3:
            raise ValueError(f"n_books must be >= 3, got {self.n_books}")
        lo, hi = self.reviews_per_book
        if not 0 <= lo <= hi:
            raise ValueError(f"reviews_per_book must satisfy 0 <= min <= max, got {lo, hi}")
        for name in ("quality_correlation", "helpfulness_sparsity"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0,1], got {value}")
        if self.lexicon_size < 2:
            raise ValueError(f"lexicon_size must be >= 2, got {self.lexicon_size}")
        if self.aspect_count < 1:
            raise ValueError(f"aspect_count must be >= 1, got {self.aspect_count}")
        if self.n_training_docs < 2:
            raise ValueError(f"n_training_docs must be >= 2, got {self.n_training_docs}")
        if not self.disciplines:
            raise ValueError("need at least one discipline label")


@dataclass(frozen=True)
class SynthResult:
    corpus: Corpus
    lexicon: SentimentLexicon
    aspect_vocabulary: tuple[str, ...]
    training: tuple[tuple[str, int], ...]  # (text, label)
    qualities: dict[str, float] = field(default_factory=dict)

    def labeled_docs(self) -> list[LabeledDoc]:
        from bookimpact.corpus import tokenize

        config = self.corpus.tokenizer_config
        return [
            LabeledDoc(tokens=tuple(tokenize(text, config)), label=label)
            for text, label in self.training
        ]


def _aspect_nouns(count: int) -> tuple[str, ...]:
    nouns = list(CANONICAL_ASPECTS[:count])
    for i in range(len(nouns), count):
        nouns.append(f"feature{i:02d}")
    return tuple(nouns)


def _sentence(
    rng: np.random.Generator,
    p_positive: float,
    aspects: tuple[str, ...],
    pos_words: tuple[str, ...],
    neg_words: tuple[str, ...],
) -> str:
    words = list(rng.choice(_FILLER, size=int(rng.integers(0, 3))))
    words.append(str(rng.choice(aspects)))
    words.extend(rng.choice(_FILLER, size=int(rng.integers(1, 4))))
    pool = pos_words if rng.random() < p_positive else neg_words
    words.append(str(rng.choice(pool)))
    if rng.random() < 0.3:
        words.extend(rng.choice(_FILLER, size=int(rng.integers(0, 2))))
        pool = pos_words if rng.random() < p_positive else neg_words
        words.append(str(rng.choice(pool)))
    return " ".join(words) + "."


def _review_text(
    rng: np.random.Generator,
    p_positive: float,
    aspects: tuple[str, ...],
    pos_words: tuple[str, ...],
    neg_words: tuple[str, ...],
) -> str:
    n_sentences = int(rng.integers(1, 4))
    return " ".join(
        _sentence(rng, p_positive, aspects, pos_words, neg_words)
        for _ in range(n_sentences)
    )


def _citations(rng: np.random.Generator, qualities: np.ndarray, rho: float) -> np.ndarray:
    """Exponential function of the rank of a quality proxy correlated at rho."""
    n = qualities.size
    noise = rng.random(n)
    proxy = 0.5 + rho * (qualities - 0.5) + math.sqrt(1.0 - rho * rho) * (noise - 0.5)
    ranks = np.empty(n, dtype=np.float64)
    ranks[np.argsort(proxy, kind="stable")] = np.arange(n)
    frac = ranks / (n - 1)
    return np.rint(8.0 * np.power(40.0, frac)).astype(np.int64)


def generate(spec: SynthSpec) -> SynthResult:
    """Build corpus, lexicon, aspect vocabulary and labeled training texts."""
    rng = np.random.default_rng(spec.seed)
    aspects = _aspect_nouns(spec.aspect_count)
    n_pos = (spec.lexicon_size + 1) // 2
    pos_words = tuple(f"good{i:02d}" for i in range(n_pos))
    neg_words = tuple(f"bad{i:02d}" for i in range(spec.lexicon_size - n_pos))
    lexicon = SentimentLexicon(
        {**{w: 1 for w in pos_words}, **{w: -1 for w in neg_words}}
    )
    config = TokenizerConfig()

    qualities = rng.random(spec.n_books)
    citations = _citations(rng, qualities, spec.quality_correlation)

    lo, hi = spec.reviews_per_book
    books = []
    quality_by_book: dict[str, float] = {}
    for t in range(spec.n_books):
        book_id = f"b{t:04d}"
        q = float(qualities[t])
        quality_by_book[book_id] = q
        p_positive = min(max(0.1 + 0.8 * q, 0.02), 0.98)
        n_reviews = int(rng.integers(lo, hi + 1))
        reviews = []
        for k in range(n_reviews):
            text = _review_text(rng, p_positive, aspects, pos_words, neg_words)
            star = int(np.clip(round(1.0 + 4.0 * q + rng.normal(0.0, 0.7)), 1, 5))
            if rng.random() < 1.0 - spec.helpfulness_sparsity:
                total = int(rng.integers(1, 61))
                p_agree = min(max(0.25 + 0.6 * q + rng.normal(0.0, 0.08), 0.02), 0.98)
                yes = int(rng.binomial(total, p_agree))
            else:
                yes = total = 0
            reviews.append(
                review_from_text(
                    review_id=f"{book_id}r{k:04d}",
                    book_id=book_id,
                    star=star,
                    text=text,
                    config=config,
                    helpful_yes=yes,
                    helpful_total=total,
                )
            )
        books.append(
            Book(
                book_id=book_id,
                title=f"Synthetic Volume {t}",
                discipline=spec.disciplines[t % len(spec.disciplines)],
                citation_count=int(citations[t]),
                reviews=tuple(reviews),
            )
        )

    training = []
    for k in range(spec.n_training_docs):
        label = 1 if k % 2 == 0 else -1
        text = _review_text(rng, 1.0 if label > 0 else 0.0, aspects, pos_words, neg_words)
        training.append((text, label))

    return SynthResult(
        corpus=Corpus(books=tuple(books), tokenizer_config=config),
        lexicon=lexicon,
        aspect_vocabulary=aspects,
        training=tuple(training),
        qualities=quality_by_book,
    )


def _restricted_category_map(aspects: tuple[str, ...]) -> AspectCategoryMap | None:
    available = set(aspects)
    categories = {
        name: words & available
        for name, words in DEFAULT_CATEGORY_MAP.categories.items()
        if words & available
    }
    if not categories:
        return None
    return AspectCategoryMap(
        categories=categories, excluded=DEFAULT_CATEGORY_MAP.excluded & available
    )


def write_corpus_files(result: SynthResult, out_dir: str | Path) -> dict[str, Path]:
    """Write every pipeline input file format; returns name -> path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "reviews": out / "reviews.jsonl",
        "books": out / "books.csv",
        "lexicon": out / "lexicon.tsv",
        "aspects": out / "aspects.txt",
        "training": out / "training.jsonl",
    }
    save_corpus(result.corpus, paths["reviews"], paths["books"])
    save_lexicon(result.lexicon, paths["lexicon"])
    save_wordlist(result.aspect_vocabulary, paths["aspects"])
    save_labeled_docs(result.training, paths["training"])
    category_map = _restricted_category_map(result.aspect_vocabulary)
    if category_map is not None:
        paths["category_map"] = out / "category_map.json"
        save_category_map(category_map, paths["category_map"])
    return paths
