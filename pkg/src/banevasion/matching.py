"""Matched negative-sample construction for the three lifecycle tasks.

Temporal windows are inclusive at both ends. The only strict inequality is
the task-2 requirement that a matched benign account is created strictly
after the parent's ban. Samples serialize one per line as
``task<TAB>parent_id<TAB>other_id<TAB>label``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Account, Corpus, DAY_SECONDS, WEEK_SECONDS
from .errors import InvalidCapError, MissingBanTimeError, TrueParentMissingError
from .pairing import EvasionPair, SockpuppetGroup

POSITIVE = 1
NEGATIVE = 0

TASK1 = "prediction"
TASK2 = "early_detection"
TASK3 = "bantime_detection"

DEFAULT_TASK2_CAP = 100
DEFAULT_MAX_CANDIDATES = 50


@dataclass(frozen=True)
class LabeledAccountSample:
    account_id: str
    label: int
    anchor_parent_id: str


@dataclass(frozen=True)
class LabeledPairSample:
    parent_id: str
    other_id: str
    label: int
    task: str


@dataclass(frozen=True)
class CandidateSet:
    child_id: str
    candidate_parent_ids: tuple[str, ...]
    true_parent_id: str


def prepare_malicious_pool(corpus: Corpus, groups: Iterable[SockpuppetGroup]) -> list[Account]:
    """Banned accounts outside every sockpuppet group, sorted by id.

    This is the documented pool-preparation contract for the prediction
    task: accounts flagged as puppets (or otherwise excluded upstream)
    must not enter the non-evading pool.
    """
    grouped: set[str] = set()
    for group in groups:
        grouped.update(group.member_ids)
    return [
        a for a in corpus.accounts if a.ban_time is not None and a.account_id not in grouped
    ]


def prepare_benign_pool(corpus: Corpus) -> list[Account]:
    """Never-banned accounts with at least one revision, sorted by id."""
    return [
        a
        for a in corpus.accounts
        if a.ban_time is None and corpus.revisions_of(a.account_id)
    ]


def match_task1(
    parents: Sequence[Account],
    malicious_pool: Sequence[Account],
    window_seconds: int = WEEK_SECONDS,
) -> list[LabeledAccountSample]:
    """One positive per parent plus pool accounts banned within the window."""
    malicious_pool = sorted(malicious_pool, key=lambda a: a.account_id)
    for account in malicious_pool:
        if account.ban_time is None:
            raise MissingBanTimeError(account.account_id)
    samples = []
    for parent in sorted(parents, key=lambda a: a.account_id):
        if parent.ban_time is None:
            raise MissingBanTimeError(parent.account_id)
        samples.append(LabeledAccountSample(parent.account_id, POSITIVE, parent.account_id))
        for account in malicious_pool:
            if account.account_id == parent.account_id:
                continue
            if abs(account.ban_time - parent.ban_time) <= window_seconds:
                samples.append(
                    LabeledAccountSample(account.account_id, NEGATIVE, parent.account_id)
                )
    return samples


def match_task2(
    pairs: Sequence[EvasionPair],
    benign_pool: Sequence[Account],
    corpus: Corpus,
    window_seconds: int = DAY_SECONDS,
    cap: int = DEFAULT_TASK2_CAP,
    seed: int = 0,
) -> list[LabeledPairSample]:
    """True pairs vs. (parent, matched benign) pairs for early detection."""
    if cap < 1:
        raise InvalidCapError(f"cap must be >= 1, got {cap}")
    benign_pool = sorted(benign_pool, key=lambda a: a.account_id)
    for account in benign_pool:
        if account.ban_time is not None:
            raise ValueError(f"benign pool contains banned account {account.account_id!r}")
        if not corpus.revisions_of(account.account_id):
            raise ValueError(f"benign pool account {account.account_id!r} has no revisions")

    samples = []
    for pair in sorted(pairs, key=lambda p: (p.parent_id, p.child_id)):
        parent = corpus.account(pair.parent_id)
        child = corpus.account(pair.child_id)
        if parent.ban_time is None:
            raise MissingBanTimeError(parent.account_id)
        samples.append(LabeledPairSample(pair.parent_id, pair.child_id, POSITIVE, TASK2))
        matched = [
            b
            for b in benign_pool
            if abs(b.creation_time - child.creation_time) <= window_seconds
            and b.creation_time > parent.ban_time
        ]
        if len(matched) > cap:
            rng = random.Random(f"task2:{seed}:{pair.child_id}")
            matched = rng.sample(matched, cap)
            matched.sort(key=lambda a: a.account_id)
        for account in matched:
            samples.append(
                LabeledPairSample(pair.parent_id, account.account_id, NEGATIVE, TASK2)
            )
    return samples


def match_task3(
    pairs: Sequence[EvasionPair],
    malicious_pool: Sequence[Account],
    corpus: Corpus,
    window_seconds: int = WEEK_SECONDS,
) -> list[LabeledPairSample]:
    """True pairs vs. (parent, matched non-evading malicious) pairs."""
    malicious_pool = sorted(malicious_pool, key=lambda a: a.account_id)
    for account in malicious_pool:
        if account.ban_time is None:
            raise MissingBanTimeError(account.account_id)
    samples = []
    for pair in sorted(pairs, key=lambda p: (p.parent_id, p.child_id)):
        parent = corpus.account(pair.parent_id)
        child = corpus.account(pair.child_id)
        if parent.ban_time is None:
            raise MissingBanTimeError(parent.account_id)
        samples.append(LabeledPairSample(pair.parent_id, pair.child_id, POSITIVE, TASK3))
        for account in malicious_pool:
            if account.account_id == pair.child_id:
                continue
            if (
                account.creation_time > parent.ban_time
                and abs(account.creation_time - child.creation_time) <= window_seconds
            ):
                samples.append(
                    LabeledPairSample(pair.parent_id, account.account_id, NEGATIVE, TASK3)
                )
    return samples


def build_candidate_sets(
    children: Sequence[Account],
    banned_parents: Sequence[Account],
    truth: Sequence[EvasionPair],
    max_candidates: int = DEFAULT_MAX_CANDIDATES,
) -> list[CandidateSet]:
    """True parent plus up to ``max_candidates`` most-recently-banned others.

    Candidates are restricted to parents banned strictly before the child's
    creation and ordered by (ban recency, id) for determinism.
    """
    true_parent_of = {p.child_id: p.parent_id for p in truth}
    by_id = {a.account_id: a for a in banned_parents}
    sets = []
    for child in sorted(children, key=lambda a: a.account_id):
        true_parent_id = true_parent_of.get(child.account_id)
        if true_parent_id is None or true_parent_id not in by_id:
            raise TrueParentMissingError(child.account_id)
        true_parent = by_id[true_parent_id]
        if true_parent.ban_time is None or true_parent.ban_time >= child.creation_time:
            raise TrueParentMissingError(child.account_id)
        distractors = [
            a
            for a in banned_parents
            if a.account_id != true_parent_id
            and a.ban_time is not None
            and a.ban_time < child.creation_time
        ]
        distractors.sort(key=lambda a: (-a.ban_time, a.account_id))
        chosen = distractors[:max_candidates]
        candidates = sorted(
            chosen + [true_parent], key=lambda a: (-a.ban_time, a.account_id)
        )
        sets.append(
            CandidateSet(
                child.account_id,
                tuple(a.account_id for a in candidates),
                true_parent_id,
            )
        )
    return sets


# ---------------------------------------------------------------------------
# label file serialization


def write_account_samples(samples: Sequence[LabeledAccountSample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            label = "positive" if s.label == POSITIVE else "negative"
            fh.write(f"{TASK1}\t{s.anchor_parent_id}\t{s.account_id}\t{label}\n")


def read_account_samples(path: str | Path) -> list[LabeledAccountSample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            task, anchor, account_id, label = line.split("\t")
            samples.append(
                LabeledAccountSample(
                    account_id, POSITIVE if label == "positive" else NEGATIVE, anchor
                )
            )
    return samples


def write_pair_samples(samples: Sequence[LabeledPairSample], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in samples:
            label = "positive" if s.label == POSITIVE else "negative"
            fh.write(f"{s.task}\t{s.parent_id}\t{s.other_id}\t{label}\n")


def read_pair_samples(path: str | Path) -> list[LabeledPairSample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            task, parent_id, other_id, label = line.split("\t")
            samples.append(
                LabeledPairSample(
                    parent_id, other_id, POSITIVE if label == "positive" else NEGATIVE, task
                )
            )
    return samples
