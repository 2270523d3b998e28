"""Ranking and classification metrics (internal; re-exported by evaluation)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyInputError, SingleClassInputError


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=float)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Area under the ROC curve, Mann-Whitney form with tie averaging."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels must align")
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClassInputError("roc_auc needs both classes")
    ranks = _average_ranks(scores)
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def mrr(ranks_of_true: Sequence[int]) -> float:
    """Mean reciprocal rank over 1-based true-item ranks."""
    if not len(ranks_of_true):
        raise EmptyInputError("mrr needs at least one ranking")
    return sum(1.0 / r for r in ranks_of_true) / len(ranks_of_true)


def recall_at_k(ranks_of_true: Sequence[int], k: int) -> float:
    """Fraction of rankings whose true item sits within the top k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not len(ranks_of_true):
        raise EmptyInputError("recall_at_k needs at least one ranking")
    return sum(1 for r in ranks_of_true if r <= k) / len(ranks_of_true)


@dataclass(frozen=True)
class FragmentedAuc:
    """AUC split by positive-sample success flag; None with the reason when
    a fragment has no members."""

    successful: float | None
    unsuccessful: float | None
    errors: dict[str, str]


def fragmented_auc(
    scores: Sequence[float],
    labels: Sequence[int],
    success_flags: Sequence[bool],
) -> FragmentedAuc:
    """AUC of successful positives vs. all negatives, and likewise for
    unsuccessful positives. ``success_flags`` aligns with the positives in
    label order."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    flags = list(success_flags)
    n_pos = int((labels == 1).sum())
    if len(flags) != n_pos:
        raise ValueError(f"expected {n_pos} success flags, got {len(flags)}")

    neg_scores = scores[labels == 0]
    pos_scores = scores[labels == 1]
    results: dict[str, float | None] = {}
    errors: dict[str, str] = {}
    for name, keep in (("successful", True), ("unsuccessful", False)):
        fragment = [s for s, f in zip(pos_scores, flags) if f == keep]
        if not fragment or neg_scores.size == 0:
            results[name] = None
            errors[name] = "fragment has a single class"
            continue
        frag_scores = np.concatenate([fragment, neg_scores])
        frag_labels = np.concatenate(
            [np.ones(len(fragment), dtype=int), np.zeros(neg_scores.size, dtype=int)]
        )
        results[name] = roc_auc(frag_scores, frag_labels)
    return FragmentedAuc(results["successful"], results["unsuccessful"], errors)
