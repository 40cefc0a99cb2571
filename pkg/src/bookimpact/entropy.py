"""Entropy-weight fusion of the factor matrix into book impact scores.

Steps: (1) direction-aware min-max rescale, then column-sum normalization so
each column is a distribution over books; (2) per-factor Shannon entropy
e = -(1/ln n) * sum p ln p; (3) weights w_j = (1 - e_j) / (m - sum e); (4)
scores SB_i = sum_j p_ij w_j with dense descending ranks.

A constant column cannot be min-max rescaled; it becomes the uniform
distribution and is flagged degenerate, which pins its entropy to exactly 1
and therefore its weight to exactly 0 (unless every column is degenerate,
in which case weights fall back to uniform).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from bookimpact.factors import BENEFIT, COST, FactorMatrix

# Below this residual of m - sum(e) the weight formula is numerically
# meaningless; fall back to uniform weights.
_DEGENERATE_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class NormalizedMatrix:
    """Per-column distributions over books (columns sum to 1)."""

    book_ids: tuple[str, ...]
    factor_names: tuple[str, ...]
    p: np.ndarray
    degenerate: tuple[bool, ...]

    def __post_init__(self) -> None:
        n, m = len(self.book_ids), len(self.factor_names)
        if self.p.shape != (n, m):
            raise ValueError(f"p shape {self.p.shape} != ({n}, {m})")
        if len(self.degenerate) != m:
            raise ValueError("one degenerate flag per factor required")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NormalizedMatrix):
            return NotImplemented
        return (
            self.book_ids == other.book_ids
            and self.factor_names == other.factor_names
            and self.degenerate == other.degenerate
            and np.array_equal(self.p, other.p)
        )


@dataclass(frozen=True)
class EntropyWeights:
    entropy: tuple[float, ...]
    weight: tuple[float, ...]
    uniform_fallback: bool = False


@dataclass(frozen=True, eq=False)
class ImpactScores:
    book_ids: tuple[str, ...]
    scores: tuple[float, ...]
    ranks: tuple[int, ...]  # dense, 1 = best, ties share a rank

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.book_ids, self.scores))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImpactScores):
            return NotImplemented
        return (
            self.book_ids == other.book_ids
            and self.scores == other.scores
            and self.ranks == other.ranks
        )


def normalize(matrix: FactorMatrix) -> NormalizedMatrix:
    """Step 1: per-column direction-aware min-max, then divide by the column sum."""
    n, m = matrix.values.shape
    if n < 2:
        raise ValueError(f"need at least 2 books to normalize, got {n}")
    if m < 1:
        raise ValueError("need at least 1 factor")
    p = np.empty((n, m), dtype=np.float64)
    degenerate = []
    for j in range(m):
        col = matrix.values[:, j]
        lo, hi = col.min(), col.max()
        if hi == lo:
            p[:, j] = 1.0 / n
            degenerate.append(True)
            continue
        if matrix.directions[j] == BENEFIT:
            scaled = (col - lo) / (hi - lo)
        elif matrix.directions[j] == COST:
            scaled = (hi - col) / (hi - lo)
        else:
            raise ValueError(f"unknown direction {matrix.directions[j]!r}")
        p[:, j] = scaled / scaled.sum()
        degenerate.append(False)
    return NormalizedMatrix(
        book_ids=matrix.book_ids,
        factor_names=matrix.factor_names,
        p=p,
        degenerate=tuple(degenerate),
    )


def column_entropy(p_column: Sequence[float] | np.ndarray, n_books: int) -> float:
    """Step 2: e = -(1/ln n) * sum p ln p, with 0*ln 0 = 0; clamped into [0,1]."""
    if n_books < 2:
        raise ValueError(f"need at least 2 books, got {n_books}")
    col = np.asarray(p_column, dtype=np.float64)
    positive = col[col > 0.0]
    e = -float(np.sum(positive * np.log(positive))) / np.log(n_books)
    return min(max(e, 0.0), 1.0)


def matrix_entropies(norm: NormalizedMatrix) -> tuple[float, ...]:
    """Per-factor entropy; degenerate (uniform) columns are exactly 1."""
    n = len(norm.book_ids)
    return tuple(
        1.0 if flagged else column_entropy(norm.p[:, j], n)
        for j, flagged in enumerate(norm.degenerate)
    )


def entropy_weights(entropies: Sequence[float]) -> EntropyWeights:
    """Step 3: w_j = (1 - e_j) / (m - sum e); uniform fallback when all e = 1."""
    m = len(entropies)
    if m < 1:
        raise ValueError("need at least one entropy")
    e = np.asarray(entropies, dtype=np.float64)
    if np.any((e < 0.0) | (e > 1.0)):
        raise ValueError(f"entropies must lie in [0,1], got {list(entropies)}")
    denom = m - float(e.sum())
    if denom <= _DEGENERATE_EPS:
        return EntropyWeights(
            entropy=tuple(float(x) for x in e),
            weight=tuple(1.0 / m for _ in range(m)),
            uniform_fallback=True,
        )
    w = (1.0 - e) / denom
    return EntropyWeights(
        entropy=tuple(float(x) for x in e),
        weight=tuple(float(x) for x in w),
        uniform_fallback=False,
    )


def impact_scores(norm: NormalizedMatrix, weights: EntropyWeights) -> ImpactScores:
    """Step 4: SB_i = sum_j p_ij * w_j, plus dense descending ranks."""
    if len(weights.weight) != len(norm.factor_names):
        raise ValueError(
            f"{len(weights.weight)} weights for {len(norm.factor_names)} factors"
        )
    scores = norm.p @ np.asarray(weights.weight, dtype=np.float64)
    score_list = [float(s) for s in scores]
    rank_of = {s: i + 1 for i, s in enumerate(sorted(set(score_list), reverse=True))}
    return ImpactScores(
        book_ids=norm.book_ids,
        scores=tuple(score_list),
        ranks=tuple(rank_of[s] for s in score_list),
    )


@dataclass(frozen=True, eq=False)
class FusionResult:
    normalized: NormalizedMatrix
    weights: EntropyWeights
    scores: ImpactScores


def fuse(matrix: FactorMatrix) -> FusionResult:
    """Run steps 1-4 on a factor matrix."""
    norm = normalize(matrix)
    weights = entropy_weights(matrix_entropies(norm))
    return FusionResult(
        normalized=norm,
        weights=weights,
        scores=impact_scores(norm, weights),
    )
