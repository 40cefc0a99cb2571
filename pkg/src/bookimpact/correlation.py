"""Correlation of impact scores and factor values against citation counts.

Pearson r with exact two-tailed Student-t significance.  The p-value is
evaluated through the regularized incomplete beta function (continued
fraction, Lentz's method) rather than a normal approximation, because
discipline sample sizes can be as small as a few dozen books.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Collection, Mapping, Sequence

import numpy as np

from bookimpact.entropy import ImpactScores
from bookimpact.factors import FactorMatrix

METHOD_PEARSON = "pearson"
METHOD_SPEARMAN = "spearman"


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    t: float
    p: float  # two-tailed
    sig_005: bool
    sig_001: bool

    def stars(self) -> str:
        return "**" if self.sig_001 else "*" if self.sig_005 else ""


def pearson(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Sample Pearson correlation coefficient of two equal-length vectors."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError(f"length mismatch: {xa.shape} vs {ya.shape}")
    n = xa.size
    if n < 3:
        raise ValueError(f"need at least 3 samples, got {n}")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("correlation undefined for a constant vector")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(max(r, -1.0), 1.0)


def fractional_ranks(x: Sequence[float] | np.ndarray) -> np.ndarray:
    """1-based ranks with ties given the average of their positions."""
    xa = np.asarray(x, dtype=np.float64)
    order = np.argsort(xa, kind="stable")
    ranks = np.empty(xa.size, dtype=np.float64)
    i = 0
    while i < xa.size:
        j = i
        while j + 1 < xa.size and xa[order[j + 1]] == xa[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float] | np.ndarray, y: Sequence[float] | np.ndarray) -> float:
    """Pearson correlation of the fractional ranks."""
    return pearson(fractional_ranks(x), fractional_ranks(y))


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-14:
            return h
    raise ArithmeticError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("a and b must be positive")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0,1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def student_t_two_tailed(t: float, df: int) -> float:
    """P(|T| >= t) for T ~ Student-t with df degrees of freedom."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(df / 2.0, 0.5, df / (df + t * t))


def significance(r: float, n: int) -> CorrelationResult:
    """t statistic and two-tailed p for a Pearson r on n samples."""
    if n < 3:
        raise ValueError(f"need at least 3 samples, got {n}")
    if abs(r) > 1.0:
        raise ValueError(f"|r| must be <= 1, got {r}")
    if abs(r) == 1.0:
        t = math.copysign(math.inf, r)
        p = 0.0
    else:
        t = r * math.sqrt(n - 2) / math.sqrt(1.0 - r * r)
        p = student_t_two_tailed(t, n - 2)
    p = min(max(p, 0.0), 1.0)
    return CorrelationResult(r=r, n=n, t=t, p=p, sig_005=p < 0.05, sig_001=p < 0.01)


def correlate(
    x: Sequence[float] | np.ndarray,
    y: Sequence[float] | np.ndarray,
    method: str = METHOD_PEARSON,
) -> CorrelationResult:
    if method == METHOD_PEARSON:
        r = pearson(x, y)
    elif method == METHOD_SPEARMAN:
        r = spearman(x, y)
    else:
        raise ValueError(f"unknown correlation method: {method!r}")
    return significance(r, len(np.asarray(x)))


def correlate_scores(
    scores: ImpactScores,
    citations: Mapping[str, int],
    method: str = METHOD_PEARSON,
) -> CorrelationResult:
    """Correlate impact scores with citation counts, aligned by book_id."""
    if set(scores.book_ids) != set(citations):
        missing = set(scores.book_ids) ^ set(citations)
        raise ValueError(f"book sets differ (symmetric difference: {sorted(missing)[:5]})")
    ordered = sorted(scores.book_ids)
    by_id = scores.as_dict()
    x = [by_id[b] for b in ordered]
    y = [float(citations[b]) for b in ordered]
    return correlate(x, y, method)


def correlate_factors(
    matrix: FactorMatrix,
    citations: Mapping[str, int],
    method: str = METHOD_PEARSON,
) -> dict[str, CorrelationResult | None]:
    """Column-wise correlation against citations; undefined columns map to None."""
    if set(matrix.book_ids) != set(citations):
        missing = set(matrix.book_ids) ^ set(citations)
        raise ValueError(f"book sets differ (symmetric difference: {sorted(missing)[:5]})")
    y = [float(citations[b]) for b in matrix.book_ids]
    results: dict[str, CorrelationResult | None] = {}
    for name in matrix.factor_names:
        try:
            results[name] = correlate(matrix.column(name), y, method)
        except ValueError:
            results[name] = None
    return results


CATEGORY_CONTENT = "content_related"
CATEGORY_PUBLISHER = "publisher_related"
CATEGORY_OPERATOR = "operator_related"


@dataclass(frozen=True)
class AspectCategoryMap:
    """Disjoint aspect categories plus an excluded set (ignored in grouping)."""

    categories: Mapping[str, frozenset[str]]
    excluded: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "categories", {k: frozenset(v) for k, v in self.categories.items()}
        )
        object.__setattr__(self, "excluded", frozenset(self.excluded))
        seen: set[str] = set()
        for name, words in self.categories.items():
            overlap = seen & words
            if overlap:
                raise ValueError(f"category {name!r} overlaps another: {sorted(overlap)}")
            seen |= words
        overlap = seen & self.excluded
        if overlap:
            raise ValueError(f"excluded words also categorized: {sorted(overlap)}")


DEFAULT_CATEGORY_MAP = AspectCategoryMap(
    categories={
        CATEGORY_CONTENT: frozenset({"content", "translation"}),
        CATEGORY_PUBLISHER: frozenset({"version", "price", "paper", "printing", "appearance"}),
        CATEGORY_OPERATOR: frozenset({"packaging", "logistics"}),
    },
    excluded=frozenset({"quality"}),
)


def load_category_map(path: str | Path) -> AspectCategoryMap:
    """JSON object {category: [aspects], ..., "excluded": [aspects]}."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(payload, dict):
        raise ValueError(f"{Path(path).name}: expected a JSON object")
    excluded = frozenset(payload.get("excluded", []))
    categories = {
        name: frozenset(words)
        for name, words in payload.items()
        if name != "excluded"
    }
    if not categories:
        raise ValueError(f"{Path(path).name}: no categories defined")
    return AspectCategoryMap(categories=categories, excluded=excluded)


def save_category_map(category_map: AspectCategoryMap, path: str | Path) -> None:
    payload: dict[str, list[str]] = {
        name: sorted(words) for name, words in category_map.categories.items()
    }
    payload["excluded"] = sorted(category_map.excluded)
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def group_aspect_values(
    values_by_book: Mapping[str, Mapping[str, float]],
    category_map: AspectCategoryMap,
    aspect_words: Collection[str],
) -> dict[str, dict[str, float]]:
    """Mean member-aspect value per category and book.

    A category's members are its words intersected with ``aspect_words``;
    a category that resolves to nothing is an error.  Aspects a book lacks
    contribute 0 to the mean.
    """
    grouped: dict[str, dict[str, float]] = {}
    for name, words in category_map.categories.items():
        members = sorted(words & set(aspect_words))
        if not members:
            raise ValueError(f"category {name!r} resolves to no aspect in the aspect set")
        grouped[name] = {
            book_id: sum(values.get(a, 0.0) for a in members) / len(members)
            for book_id, values in values_by_book.items()
        }
    return grouped
