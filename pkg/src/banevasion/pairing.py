"""Merge sockpuppet records into disjoint groups and extract evasion pairs.

An account's *temporal predecessor* within its group is the member whose
ban most closely precedes the account's creation; its *temporal successor*
is the member created earliest after the account's ban. A (parent, child)
pair is emitted only when both directions agree, which makes the mapping
one-to-one. Timestamp ties break toward the lexicographically smaller
account id so results are independent of input order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .corpus import Account, Corpus, SockpuppetRecord
from .errors import AccountNeverBannedError, AccountNotInGroupError


class UnionFind:
    """Disjoint sets over hashable items, path compression + union by size."""

    def __init__(self, items: Iterable[str] = ()):
        self._parent: dict[str, str] = {}
        self._size: dict[str, int] = {}
        for item in items:
            self.add(item)

    def add(self, item: str) -> None:
        if item not in self._parent:
            self._parent[item] = item
            self._size[item] = 1

    def find(self, item: str) -> str:
        root = item
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[item] != root:
            self._parent[item], item = root, self._parent[item]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]

    def components(self) -> list[frozenset[str]]:
        groups: dict[str, set[str]] = {}
        for item in self._parent:
            groups.setdefault(self.find(item), set()).add(item)
        return [frozenset(members) for members in groups.values()]


@dataclass(frozen=True)
class SockpuppetGroup:
    group_id: int
    member_ids: frozenset[str]
    master_id: str


@dataclass(frozen=True)
class EvasionPair:
    parent_id: str
    child_id: str
    group_id: int


def merge_groups(
    records: Iterable[SockpuppetRecord], corpus: Corpus
) -> list[SockpuppetGroup]:
    """Connected components of the co-membership graph, one group each.

    Group ids are assigned in order of each component's minimum member id;
    the master is the earliest-created member (id tie-break).
    """
    uf = UnionFind()
    for record in records:
        members = sorted(record.member_ids)
        for member in members:
            uf.add(member)
        first = members[0]
        for other in members[1:]:
            uf.union(first, other)

    components = sorted(uf.components(), key=lambda c: min(c))
    groups = []
    for group_id, members in enumerate(components):
        master = min(
            members, key=lambda m: (corpus.account(m).creation_time, m)
        )
        groups.append(SockpuppetGroup(group_id, members, master))
    return groups


def _members(group: SockpuppetGroup, corpus: Corpus) -> list[Account]:
    return [corpus.account(m) for m in sorted(group.member_ids)]


def temporal_predecessor(
    account: Account, group: SockpuppetGroup, corpus: Corpus
) -> str | None:
    """Group member whose ban most closely precedes the account's creation."""
    if account.account_id not in group.member_ids:
        raise AccountNotInGroupError(
            f"{account.account_id!r} not in group {group.group_id}"
        )
    candidates = [
        m
        for m in _members(group, corpus)
        if m.ban_time is not None and m.ban_time < account.creation_time
    ]
    if not candidates:
        return None
    latest_ban = max(m.ban_time for m in candidates)
    return min(m.account_id for m in candidates if m.ban_time == latest_ban)


def temporal_successor(
    account: Account, group: SockpuppetGroup, corpus: Corpus
) -> str | None:
    """Group member created earliest after the account's ban."""
    if account.account_id not in group.member_ids:
        raise AccountNotInGroupError(
            f"{account.account_id!r} not in group {group.group_id}"
        )
    if account.ban_time is None:
        raise AccountNeverBannedError(account.account_id)
    candidates = [
        m for m in _members(group, corpus) if m.creation_time > account.ban_time
    ]
    if not candidates:
        return None
    best = min(candidates, key=lambda m: (m.creation_time, m.account_id))
    return best.account_id


def extract_evasion_pairs(
    groups: Iterable[SockpuppetGroup], corpus: Corpus
) -> list[EvasionPair]:
    """All (u, v) with u = predecessor(v) and v = successor(u), per group."""
    pairs = []
    for group in groups:
        for member in _members(group, corpus):
            if member.ban_time is None:
                continue
            successor_id = temporal_successor(member, group, corpus)
            if successor_id is None:
                continue
            successor = corpus.account(successor_id)
            if temporal_predecessor(successor, group, corpus) == member.account_id:
                pairs.append(
                    EvasionPair(member.account_id, successor_id, group.group_id)
                )
    pairs.sort(
        key=lambda p: (
            p.group_id,
            corpus.account(p.parent_id).creation_time,
            p.parent_id,
        )
    )
    return pairs


def first_pair_per_group(
    pairs: Iterable[EvasionPair], corpus: Corpus
) -> list[EvasionPair]:
    """Keep only the pair with the earliest-created parent in each group."""
    best: dict[int, EvasionPair] = {}
    for pair in pairs:
        key = (corpus.account(pair.parent_id).creation_time, pair.parent_id)
        current = best.get(pair.group_id)
        if current is None:
            best[pair.group_id] = pair
            continue
        current_key = (corpus.account(current.parent_id).creation_time, current.parent_id)
        if key < current_key:
            best[pair.group_id] = pair
    return [best[g] for g in sorted(best)]
