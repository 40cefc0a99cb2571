"""Book impact measurement from online review corpora.

The pipeline ingests reviews and book metadata, mines review sentiment at
two granularities (whole-review polarity and per-aspect lexicon sentiment),
derives per-book factor values (polarity counts, star values, helpfulness,
aspect sentiment), fuses them into impact scores with the entropy-weight
method, and validates the scores by correlating them against citation
counts per discipline.
"""

__version__ = "0.1.0"

from bookimpact.corpus import (
    Book,
    Corpus,
    CorpusError,
    Review,
    TokenizerConfig,
    filter_books,
    load_corpus,
    tokenize,
)
from bookimpact.factors import CombinationSpec, FactorMatrix, build_factor_matrix
from bookimpact.entropy import fuse

__all__ = [
    "Book",
    "CombinationSpec",
    "Corpus",
    "CorpusError",
    "FactorMatrix",
    "Review",
    "TokenizerConfig",
    "__version__",
    "build_factor_matrix",
    "filter_books",
    "fuse",
    "load_corpus",
    "tokenize",
]
