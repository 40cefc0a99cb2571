"""Macro-level review polarity: TF-IDF features and a linear max-margin classifier.

The TF-IDF weight of word w in document d is (count(w,d) / len(d)) * ln(n_docs / df(w)),
with natural log.  The classifier is a linear model trained by seeded stochastic
subgradient descent on L2-regularized hinge loss; training is single-threaded and
fully deterministic given the seed.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from bookimpact.corpus import Book, TokenizerConfig, tokenize

MODEL_FORMAT = "bookimpact-polarity-model/1"

FeatureVector = dict[int, float]

POSITIVE = 1
NEGATIVE = -1


@dataclass(frozen=True)
class FeatureSpace:
    """Vocabulary plus the document frequencies needed for TF-IDF weighting."""

    vocabulary: tuple[str, ...]
    doc_frequency: tuple[int, ...]
    n_docs: int

    def __post_init__(self) -> None:
        if len(self.vocabulary) != len(set(self.vocabulary)):
            raise ValueError("vocabulary entries must be unique")
        if len(self.doc_frequency) != len(self.vocabulary):
            raise ValueError("doc_frequency length must match vocabulary length")
        for word, df in zip(self.vocabulary, self.doc_frequency):
            if not 1 <= df <= self.n_docs:
                raise ValueError(f"doc_frequency[{word!r}]={df} outside [1, {self.n_docs}]")
        object.__setattr__(self, "_index", {w: i for i, w in enumerate(self.vocabulary)})

    @property
    def index(self) -> dict[str, int]:
        return self._index  # type: ignore[attr-defined]

    def __len__(self) -> int:
        return len(self.vocabulary)


@dataclass(frozen=True)
class LabeledDoc:
    tokens: tuple[str, ...]
    label: int

    def __post_init__(self) -> None:
        if self.label not in (POSITIVE, NEGATIVE):
            raise ValueError(f"label must be +1 or -1, got {self.label}")


@dataclass(frozen=True)
class Hyperparams:
    epochs: int = 20
    learning_rate: float = 0.5
    regularization: float = 1e-4
    seed: int = 0


@dataclass(frozen=True, eq=False)
class PolarityModel:
    feature_space: FeatureSpace
    weights: np.ndarray
    bias: float
    hyperparams: Hyperparams

    def __post_init__(self) -> None:
        if self.weights.shape != (len(self.feature_space),):
            raise ValueError("weights length must equal vocabulary length")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolarityModel):
            return NotImplemented
        return (
            self.feature_space == other.feature_space
            and np.array_equal(self.weights, other.weights)
            and self.bias == other.bias
            and self.hyperparams == other.hyperparams
        )


def build_feature_space(docs: Sequence[Sequence[str]], top_k: int = 2000) -> FeatureSpace:
    """Select the top_k words by maximum TF-IDF over all docs (ties lexicographic)."""
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    if not docs:
        raise ValueError("no documents")
    if all(len(d) == 0 for d in docs):
        raise ValueError("all documents are empty")

    n_docs = len(docs)
    df: Counter[str] = Counter()
    for doc in docs:
        df.update(set(doc))

    best: dict[str, float] = {}
    for doc in docs:
        if not doc:
            continue
        length = len(doc)
        for word, count in Counter(doc).items():
            score = (count / length) * math.log(n_docs / df[word])
            if score > best.get(word, -1.0):
                best[word] = score
    ranked = sorted(best, key=lambda w: (-best[w], w))[:top_k]
    return FeatureSpace(
        vocabulary=tuple(ranked),
        doc_frequency=tuple(df[w] for w in ranked),
        n_docs=n_docs,
    )


def vectorize(doc: Sequence[str], space: FeatureSpace) -> FeatureVector:
    """Sparse TF-IDF vector of ``doc`` over the feature space; empty doc -> {}."""
    if not doc:
        return {}
    length = len(doc)
    index = space.index
    vector: FeatureVector = {}
    for word, count in Counter(doc).items():
        i = index.get(word)
        if i is None:
            continue
        vector[i] = (count / length) * math.log(space.n_docs / space.doc_frequency[i])
    return vector


def train(
    labeled: Sequence[LabeledDoc],
    space: FeatureSpace,
    hyperparams: Hyperparams = Hyperparams(),
) -> PolarityModel:
    """Seeded SGD on hinge loss with L2 regularization (lazy weight scaling)."""
    if not labeled:
        raise ValueError("empty training set")
    labels = {doc.label for doc in labeled}
    if len(labels) < 2:
        raise ValueError("training set contains a single class")

    vectors = []
    for doc in labeled:
        vec = vectorize(doc.tokens, space)
        idx = np.fromiter(vec.keys(), dtype=np.intp, count=len(vec))
        val = np.fromiter(vec.values(), dtype=np.float64, count=len(vec))
        vectors.append((idx, val, float(doc.label)))

    dim = len(space)
    v = np.zeros(dim)
    scale = 1.0
    bias = 0.0
    eta0 = hyperparams.learning_rate
    lam = hyperparams.regularization
    rng = np.random.default_rng(hyperparams.seed)
    t = 0
    for _ in range(hyperparams.epochs):
        for i in rng.permutation(len(vectors)):
            idx, val, y = vectors[i]
            eta = eta0 / (1.0 + eta0 * lam * t)
            t += 1
            margin = y * (scale * float(v[idx] @ val) + bias)
            scale *= 1.0 - eta * lam
            if scale < 1e-9:
                v *= scale
                scale = 1.0
            if margin < 1.0:
                v[idx] += (eta * y / scale) * val
                bias += eta * y
    return PolarityModel(
        feature_space=space,
        weights=v * scale,
        bias=bias,
        hyperparams=hyperparams,
    )


def decision_score(model: PolarityModel, doc: Sequence[str]) -> float:
    vec = vectorize(doc, model.feature_space)
    score = model.bias
    for i, weight in vec.items():
        score += model.weights[i] * weight
    return float(score)


def classify(model: PolarityModel, doc: Sequence[str]) -> int:
    """Sign of the decision score; an exact zero classifies as positive."""
    return POSITIVE if decision_score(model, doc) >= 0.0 else NEGATIVE


def count_polarities(book: Book, model: PolarityModel) -> tuple[int, int]:
    """(n_positive, n_negative) over the book's reviews."""
    if not book.reviews:
        raise ValueError(f"book {book.book_id} has no reviews")
    n_positive = sum(1 for r in book.reviews if classify(model, r.tokens) == POSITIVE)
    return n_positive, len(book.reviews) - n_positive


def accuracy(model: PolarityModel, labeled: Iterable[LabeledDoc]) -> float:
    docs = list(labeled)
    if not docs:
        raise ValueError("no documents to evaluate")
    hits = sum(1 for d in docs if classify(model, d.tokens) == d.label)
    return hits / len(docs)


def load_labeled_docs(path: str | Path, config: TokenizerConfig) -> list[LabeledDoc]:
    """JSON Lines with keys text, label (+1/-1); text tokenized per config."""
    docs = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{Path(path).name} line {lineno}: invalid JSON ({exc.msg})")
            if not isinstance(obj, dict) or "text" not in obj or "label" not in obj:
                raise ValueError(f"{Path(path).name} line {lineno}: expected keys text, label")
            if obj["label"] not in (POSITIVE, NEGATIVE):
                raise ValueError(
                    f"{Path(path).name} line {lineno}: label must be +1 or -1, got {obj['label']!r}"
                )
            docs.append(LabeledDoc(tokens=tuple(tokenize(obj["text"], config)), label=obj["label"]))
    return docs


def save_labeled_docs(docs: Iterable[tuple[str, int]], path: str | Path) -> None:
    """Write (text, label) pairs as the labeled-training JSONL format."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for text, label in docs:
            fh.write(json.dumps({"text": text, "label": label}, ensure_ascii=False) + "\n")


def model_payload(model: PolarityModel) -> dict:
    """JSON-ready form of a model; floats keep full repr precision."""
    return {
        "format": MODEL_FORMAT,
        "vocabulary": list(model.feature_space.vocabulary),
        "doc_frequency": list(model.feature_space.doc_frequency),
        "n_docs": model.feature_space.n_docs,
        "weights": [float(w) for w in model.weights],
        "bias": model.bias,
        "hyperparams": {
            "epochs": model.hyperparams.epochs,
            "learning_rate": model.hyperparams.learning_rate,
            "regularization": model.hyperparams.regularization,
            "seed": model.hyperparams.seed,
        },
    }


def model_bytes(model: PolarityModel) -> bytes:
    return (
        json.dumps(model_payload(model), ensure_ascii=False, sort_keys=True, indent=1) + "\n"
    ).encode("utf-8")


def save_model(model: PolarityModel, path: str | Path) -> None:
    Path(path).write_bytes(model_bytes(model))


def load_model(path: str | Path) -> PolarityModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"unsupported model format: {payload.get('format')!r}")
    space = FeatureSpace(
        vocabulary=tuple(payload["vocabulary"]),
        doc_frequency=tuple(payload["doc_frequency"]),
        n_docs=payload["n_docs"],
    )
    hp = payload["hyperparams"]
    return PolarityModel(
        feature_space=space,
        weights=np.asarray(payload["weights"], dtype=np.float64),
        bias=float(payload["bias"]),
        hyperparams=Hyperparams(
            epochs=hp["epochs"],
            learning_rate=hp["learning_rate"],
            regularization=hp["regularization"],
            seed=hp["seed"],
        ),
    )
