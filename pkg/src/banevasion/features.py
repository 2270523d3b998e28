"""Feature engineering for account-level and pairwise classification.

Account vectors (fixed name order):
  created_dow, created_month, created_day,
  banned_dow, banned_month, banned_day, is_banned, duration_seconds,
  unique_pages, total_contributions, mean_gap_seconds, mean_contribution_size,
  liwc_<category>... (lexicon order), sentiment_mean

Pair vectors (fixed name order):
  parent_created_{dow,month,day}, parent_banned_{dow,month,day},
  parent_duration_seconds,
  child_created_{dow,month,day},
  [child_banned_{dow,month,day}, child_is_banned, child_duration_seconds]
  inter_account_seconds,
  page_jaccard, comment_unigram_jaccard, added_unigram_jaccard,
  embedding_cosine, profile_abs_diff, sentiment_abs_diff

The bracketed child-ban block is emitted only when
``include_child_ban_features`` is set: at early-detection time the other
account's ban does not exist yet. Calendar fields use -1 as the sentinel
for absent bans, paired with the is_banned indicator. When ``k_limit`` is
set, only the other account's first k revisions contribute to the pair
vector; the parent side is never truncated.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from .corpus import Account, Revision
from .errors import MissingParentBanError, UnsortedRevisionsError
from .textstats import (
    EmbeddingProvider,
    HashedTrigramProvider,
    Lexicon,
    SentimentLexicon,
    builtin_lexicon,
    builtin_sentiment_lexicon,
    cosine,
    embed,
    jaccard,
    liwc_profile,
    profile_abs_diff,
    sentiment,
    tokenize,
)


@dataclass(frozen=True)
class FeatureVector:
    names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise ValueError("names and values must align")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names must be unique")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


@dataclass(frozen=True)
class FeatureConfig:
    k_limit: int | None = None
    include_child_ban_features: bool = True
    lexicon: Lexicon = dataclass_field(default_factory=builtin_lexicon)
    sentiment_lexicon: SentimentLexicon = dataclass_field(
        default_factory=builtin_sentiment_lexicon
    )
    provider: EmbeddingProvider = dataclass_field(default_factory=HashedTrigramProvider)

    def __post_init__(self):
        if self.k_limit is not None and self.k_limit < 1:
            raise ValueError("k_limit must be >= 1 when present")


def _calendar(ts: int) -> tuple[int, int, int]:
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    return dt.weekday(), dt.month, dt.day


def _check_sorted(revisions: Sequence[Revision]) -> None:
    for earlier, later in zip(revisions, revisions[1:]):
        if later.timestamp < earlier.timestamp:
            raise UnsortedRevisionsError("revisions must be time-sorted")


def _pooled_tokens(revisions: Sequence[Revision]) -> list[str]:
    tokens: list[str] = []
    for rev in revisions:
        tokens.extend(tokenize(rev.added_text))
    return tokens


def _embedding(revisions: Sequence[Revision], provider: EmbeddingProvider):
    texts = [r.added_text for r in revisions if r.added_text]
    if not texts:
        return np.zeros(provider.dimension)
    return embed(texts, provider).values


def account_features(
    account: Account, revisions: Sequence[Revision], config: FeatureConfig
) -> FeatureVector:
    """Behavioral vector for one account from its own metadata and edits."""
    _check_sorted(revisions)
    created = _calendar(account.creation_time)
    if account.ban_time is not None:
        banned = _calendar(account.ban_time)
        is_banned = 1.0
        duration = float(account.ban_time - account.creation_time)
    else:
        banned = (-1, -1, -1)
        is_banned = 0.0
        duration = -1.0

    pages = {r.page_id for r in revisions}
    n = len(revisions)
    if n >= 2:
        gaps = [b.timestamp - a.timestamp for a, b in zip(revisions, revisions[1:])]
        mean_gap = sum(gaps) / len(gaps)
    else:
        mean_gap = 0.0
    if n:
        mean_size = sum(len(r.added_text) + len(r.deleted_text) for r in revisions) / n
    else:
        mean_size = 0.0

    tokens = _pooled_tokens(revisions)
    profile = liwc_profile(tokens, config.lexicon)
    names = [
        "created_dow", "created_month", "created_day",
        "banned_dow", "banned_month", "banned_day", "is_banned",
        "duration_seconds",
        "unique_pages", "total_contributions", "mean_gap_seconds",
        "mean_contribution_size",
    ]
    values = [
        *created, *banned, is_banned, duration,
        float(len(pages)), float(n), mean_gap, mean_size,
    ]
    for category in config.lexicon.categories:
        names.append(f"liwc_{category}")
        values.append(profile[category])
    names.append("sentiment_mean")
    values.append(sentiment(tokens, config.sentiment_lexicon))
    return FeatureVector(tuple(names), np.array(values, dtype=float))


def pair_features(
    parent: Account,
    parent_revisions: Sequence[Revision],
    other: Account,
    other_revisions: Sequence[Revision],
    config: FeatureConfig,
) -> FeatureVector:
    """Similarity vector for a (banned parent, candidate successor) pair."""
    if parent.ban_time is None:
        raise MissingParentBanError(parent.account_id)
    _check_sorted(parent_revisions)
    _check_sorted(other_revisions)
    if config.k_limit is not None:
        other_revisions = other_revisions[: config.k_limit]

    names: list[str] = []
    values: list[float] = []

    p_created = _calendar(parent.creation_time)
    p_banned = _calendar(parent.ban_time)
    names += [
        "parent_created_dow", "parent_created_month", "parent_created_day",
        "parent_banned_dow", "parent_banned_month", "parent_banned_day",
        "parent_duration_seconds",
    ]
    values += [*p_created, *p_banned, float(parent.ban_time - parent.creation_time)]

    names += ["child_created_dow", "child_created_month", "child_created_day"]
    values += [*_calendar(other.creation_time)]

    if config.include_child_ban_features:
        if other.ban_time is not None:
            names += ["child_banned_dow", "child_banned_month", "child_banned_day"]
            values += [*_calendar(other.ban_time)]
            names += ["child_is_banned", "child_duration_seconds"]
            values += [1.0, float(other.ban_time - other.creation_time)]
        else:
            names += ["child_banned_dow", "child_banned_month", "child_banned_day"]
            values += [-1.0, -1.0, -1.0]
            names += ["child_is_banned", "child_duration_seconds"]
            values += [0.0, -1.0]

    names.append("inter_account_seconds")
    values.append(float(other.creation_time - parent.ban_time))

    p_pages = {r.page_id for r in parent_revisions}
    o_pages = {r.page_id for r in other_revisions}
    names.append("page_jaccard")
    values.append(jaccard(p_pages, o_pages))

    p_comment = set(t for r in parent_revisions for t in tokenize(r.comment))
    o_comment = set(t for r in other_revisions for t in tokenize(r.comment))
    names.append("comment_unigram_jaccard")
    values.append(jaccard(p_comment, o_comment))

    p_tokens = _pooled_tokens(parent_revisions)
    o_tokens = _pooled_tokens(other_revisions)
    names.append("added_unigram_jaccard")
    values.append(jaccard(set(p_tokens), set(o_tokens)))

    names.append("embedding_cosine")
    values.append(
        cosine(
            _embedding(parent_revisions, config.provider),
            _embedding(other_revisions, config.provider),
        )
    )

    names.append("profile_abs_diff")
    values.append(
        profile_abs_diff(
            liwc_profile(p_tokens, config.lexicon),
            liwc_profile(o_tokens, config.lexicon),
        )
    )

    names.append("sentiment_abs_diff")
    values.append(
        abs(
            sentiment(p_tokens, config.sentiment_lexicon)
            - sentiment(o_tokens, config.sentiment_lexicon)
        )
    )
    return FeatureVector(tuple(names), np.array(values, dtype=float))


# ---------------------------------------------------------------------------
# feature matrix serialization: sample_id<TAB>label<TAB>feature columns


def write_feature_matrix(
    path,
    sample_ids: Sequence[str],
    labels: Sequence[int],
    vectors: Sequence[FeatureVector],
) -> None:
    if not (len(sample_ids) == len(labels) == len(vectors)):
        raise ValueError("sample_ids, labels, and vectors must align")
    with open(path, "w", encoding="utf-8") as fh:
        if vectors:
            names = vectors[0].names
            fh.write("sample_id\tlabel\t" + "\t".join(names) + "\n")
            for sid, label, vec in zip(sample_ids, labels, vectors):
                if vec.names != names:
                    raise ValueError("inconsistent feature names in matrix")
                row = "\t".join(repr(float(v)) for v in vec.values)
                fh.write(f"{sid}\t{label}\t{row}\n")
        else:
            fh.write("sample_id\tlabel\n")


def read_feature_matrix(path):
    """Returns (sample_ids, labels array, names, value matrix)."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        names = tuple(header[2:])
        sample_ids: list[str] = []
        labels: list[int] = []
        rows: list[list[float]] = []
        for line in fh:
            parts = line.rstrip("\n").split("\t")
            sample_ids.append(parts[0])
            labels.append(int(parts[1]))
            rows.append([float(x) for x in parts[2:]])
    matrix = np.array(rows, dtype=float) if rows else np.zeros((0, len(names)))
    return sample_ids, np.array(labels, dtype=int), names, matrix
