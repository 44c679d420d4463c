"""Retrieval quality measures: NDCG@k, Precision@k, Recall@k.

Graded relevance uses exponential gains (2**grade - 1), which reduces
to linear gain for binary judgments. Precision keeps k in the
denominator even when fewer results were returned.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import EmptyInput, EmptyJudgment, InvalidValue, ParseError


@dataclass(frozen=True)
class Judgment:
    """Relevance ground truth for one query: item id -> grade (int >= 0)."""

    query_id: str
    relevant: dict[str, int] = field(default_factory=dict)

    def positives(self) -> set[str]:
        return {item_id for item_id, grade in self.relevant.items() if grade > 0}


def _require_positive(judgment: Judgment) -> None:
    if not judgment.positives():
        raise EmptyJudgment(
            f"judgment for query {judgment.query_id!r} has no positive grades"
        )


def _check_ranking(ranked_ids, k: int) -> list[str]:
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise InvalidValue(f"k must be a positive integer, got {k!r}")
    ids = list(ranked_ids)
    if len(set(ids)) != len(ids):
        raise InvalidValue("ranked ids must be distinct")
    return ids


def ndcg_at_k(ranked_ids, judgment: Judgment, k: int) -> float:
    """Normalized discounted cumulative gain at cutoff k, in [0, 1]."""
    ids = _check_ranking(ranked_ids, k)
    _require_positive(judgment)
    dcg = 0.0
    for rank, item_id in enumerate(ids[:k], start=1):
        grade = judgment.relevant.get(item_id, 0)
        dcg += (2.0**grade - 1.0) / math.log2(rank + 1)
    ideal = sorted(judgment.relevant.values(), reverse=True)
    idcg = 0.0
    for rank, grade in enumerate(ideal[:k], start=1):
        idcg += (2.0**grade - 1.0) / math.log2(rank + 1)
    return dcg / idcg


def precision_at_k(ranked_ids, judgment: Judgment, k: int) -> float:
    """Fraction of the top k that are relevant; denominator is always k."""
    ids = _check_ranking(ranked_ids, k)
    _require_positive(judgment)
    positives = judgment.positives()
    hits = sum(1 for item_id in ids[:k] if item_id in positives)
    return hits / k


def recall_at_k(ranked_ids, judgment: Judgment, k: int) -> float:
    """Fraction of the relevant items that appear in the top k."""
    ids = _check_ranking(ranked_ids, k)
    _require_positive(judgment)
    positives = judgment.positives()
    hits = sum(1 for item_id in ids[:k] if item_id in positives)
    return hits / len(positives)


def aggregate(per_query_values) -> float:
    """Arithmetic mean over a non-empty list of per-query values."""
    values = list(per_query_values)
    if not values:
        raise EmptyInput("cannot aggregate an empty list of metric values")
    return sum(values) / len(values)


def load_judgments(path) -> dict[str, Judgment]:
    """Read qrels as JSON Lines: {"query_id": str, "relevant": {id: grade}}."""
    judgments: dict[str, Judgment] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                query_id = raw["query_id"]
                relevant = {str(item): int(grade) for item, grade in raw["relevant"].items()}
            except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError) as exc:
                raise ParseError(f"{path}:{lineno}: bad judgment record: {exc}") from exc
            if any(grade < 0 for grade in relevant.values()):
                raise ParseError(f"{path}:{lineno}: grades must be non-negative")
            judgment = Judgment(query_id=str(query_id), relevant=relevant)
            if not judgment.positives():
                raise EmptyJudgment(
                    f"{path}:{lineno}: judgment for query {query_id!r} has no positive grades"
                )
            judgments[judgment.query_id] = judgment
    return judgments
