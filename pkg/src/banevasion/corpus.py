"""Data model, file ingestion, and seeded synthetic-corpus generation.

File formats (UTF-8, one JSON object per line):

* accounts file:  {"account_id", "username", "creation_time", "ban_time"}
  with ``ban_time`` null for accounts that were never banned
* revisions file: {"account_id", "page_id", "timestamp", "added_text",
  "deleted_text", "comment"}
* records file:   {"member_ids": [...]}  (undisclosed multi-account records)
* pairs file:     {"parent_id", "child_id", "group_id"?}

Timestamps are integer epoch seconds UTC throughout. Loaded corpora are
immutable and iterate in a canonical order (accounts by id, revisions by
(account_id, timestamp, page_id), records by sorted member tuple), so a
save/load round trip is byte identical.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import (
    DuplicateIdError,
    InvalidConfigError,
    RecordParseError,
    ReferentialIntegrityError,
)

DAY_SECONDS = 86_400
WEEK_SECONDS = 604_800

# Simulation epoch for synthetic corpora: 2020-09-13T12:26:40Z.
_SYNTH_BASE_TIME = 1_600_000_000
_SYNTH_HORIZON_DAYS = 365


@dataclass(frozen=True)
class Account:
    account_id: str
    username: str
    creation_time: int
    ban_time: int | None = None

    @property
    def is_banned(self) -> bool:
        return self.ban_time is not None

    @property
    def duration_seconds(self) -> int | None:
        """Lifetime from creation to ban; None while unbanned."""
        if self.ban_time is None:
            return None
        return self.ban_time - self.creation_time


@dataclass(frozen=True)
class Revision:
    account_id: str
    page_id: str
    timestamp: int
    added_text: str = ""
    deleted_text: str = ""
    comment: str = ""


@dataclass(frozen=True)
class SockpuppetRecord:
    member_ids: frozenset[str]


@dataclass(frozen=True)
class Corpus:
    """Immutable, validated collection of accounts, revisions, and records."""

    accounts: tuple[Account, ...]
    revisions: tuple[Revision, ...]
    sockpuppet_records: tuple[SockpuppetRecord, ...]
    accounts_by_id: dict[str, Account] = field(init=False, repr=False, compare=False)
    revisions_by_account: dict[str, tuple[Revision, ...]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        accounts = tuple(sorted(self.accounts, key=lambda a: a.account_id))
        revisions = tuple(
            sorted(self.revisions, key=lambda r: (r.account_id, r.timestamp, r.page_id))
        )
        records = tuple(
            sorted(self.sockpuppet_records, key=lambda r: tuple(sorted(r.member_ids)))
        )
        object.__setattr__(self, "accounts", accounts)
        object.__setattr__(self, "revisions", revisions)
        object.__setattr__(self, "sockpuppet_records", records)

        by_id: dict[str, Account] = {}
        for acct in accounts:
            if acct.account_id in by_id:
                raise DuplicateIdError(acct.account_id)
            if acct.ban_time is not None and acct.ban_time <= acct.creation_time:
                raise RecordParseError(
                    "<corpus>", 0,
                    f"account {acct.account_id!r}: ban_time must be after creation_time",
                )
            by_id[acct.account_id] = acct

        revs_by_acct: dict[str, list[Revision]] = {}
        for rev in revisions:
            owner = by_id.get(rev.account_id)
            if owner is None:
                raise ReferentialIntegrityError(rev.account_id, "revision owner")
            if rev.timestamp < owner.creation_time:
                raise RecordParseError(
                    "<corpus>", 0,
                    f"revision on {rev.page_id!r} predates creation of {rev.account_id!r}",
                )
            revs_by_acct.setdefault(rev.account_id, []).append(rev)

        for rec in records:
            if len(rec.member_ids) < 2:
                raise RecordParseError(
                    "<corpus>", 0, "sockpuppet record needs at least 2 members"
                )
            for member in rec.member_ids:
                if member not in by_id:
                    raise ReferentialIntegrityError(member, "record member")

        object.__setattr__(self, "accounts_by_id", by_id)
        object.__setattr__(
            self,
            "revisions_by_account",
            {k: tuple(v) for k, v in revs_by_acct.items()},
        )

    def account(self, account_id: str) -> Account:
        try:
            return self.accounts_by_id[account_id]
        except KeyError:
            raise ReferentialIntegrityError(account_id) from None

    def revisions_of(self, account_id: str) -> tuple[Revision, ...]:
        return self.revisions_by_account.get(account_id, ())


# ---------------------------------------------------------------------------
# ingestion / serialization


def _read_jsonl(path: str | Path) -> list[tuple[int, dict]]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordParseError(str(path), lineno, f"bad JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise RecordParseError(str(path), lineno, "expected a JSON object")
            rows.append((lineno, obj))
    return rows


def _require(obj: dict, key: str, path: str, lineno: int):
    if key not in obj:
        raise RecordParseError(path, lineno, f"missing field {key!r}")
    return obj[key]


def _as_int(value, key: str, path: str, lineno: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise RecordParseError(path, lineno, f"field {key!r} must be an integer")
    return value


def load_corpus(
    accounts_path: str | Path,
    revisions_path: str | Path,
    records_path: str | Path,
) -> Corpus:
    """Load and validate a corpus from the three line-delimited files."""
    accounts = []
    seen: set[str] = set()
    for lineno, obj in _read_jsonl(accounts_path):
        p = str(accounts_path)
        account_id = str(_require(obj, "account_id", p, lineno))
        if account_id in seen:
            raise DuplicateIdError(account_id)
        seen.add(account_id)
        username = str(_require(obj, "username", p, lineno))
        creation = _as_int(_require(obj, "creation_time", p, lineno), "creation_time", p, lineno)
        ban = obj.get("ban_time")
        if ban is not None:
            ban = _as_int(ban, "ban_time", p, lineno)
            if ban <= creation:
                raise RecordParseError(p, lineno, "ban_time must be after creation_time")
        accounts.append(Account(account_id, username, creation, ban))

    revisions = []
    for lineno, obj in _read_jsonl(revisions_path):
        p = str(revisions_path)
        revisions.append(
            Revision(
                account_id=str(_require(obj, "account_id", p, lineno)),
                page_id=str(_require(obj, "page_id", p, lineno)),
                timestamp=_as_int(_require(obj, "timestamp", p, lineno), "timestamp", p, lineno),
                added_text=str(obj.get("added_text", "")),
                deleted_text=str(obj.get("deleted_text", "")),
                comment=str(obj.get("comment", "")),
            )
        )

    records = []
    for lineno, obj in _read_jsonl(records_path):
        p = str(records_path)
        member_ids = _require(obj, "member_ids", p, lineno)
        if not isinstance(member_ids, list):
            raise RecordParseError(p, lineno, "member_ids must be an array")
        members = frozenset(str(m) for m in member_ids)
        if len(members) < 2:
            raise RecordParseError(p, lineno, "sockpuppet record needs at least 2 members")
        records.append(SockpuppetRecord(members))

    return Corpus(tuple(accounts), tuple(revisions), tuple(records))


def _dump(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def save_corpus(
    corpus: Corpus,
    accounts_path: str | Path,
    revisions_path: str | Path,
    records_path: str | Path,
) -> None:
    """Write a corpus back out in canonical order (round-trip stable)."""
    with open(accounts_path, "w", encoding="utf-8") as fh:
        for a in corpus.accounts:
            fh.write(_dump({
                "account_id": a.account_id,
                "username": a.username,
                "creation_time": a.creation_time,
                "ban_time": a.ban_time,
            }) + "\n")
    with open(revisions_path, "w", encoding="utf-8") as fh:
        for r in corpus.revisions:
            fh.write(_dump({
                "account_id": r.account_id,
                "page_id": r.page_id,
                "timestamp": r.timestamp,
                "added_text": r.added_text,
                "deleted_text": r.deleted_text,
                "comment": r.comment,
            }) + "\n")
    with open(records_path, "w", encoding="utf-8") as fh:
        for rec in corpus.sockpuppet_records:
            fh.write(_dump({"member_ids": sorted(rec.member_ids)}) + "\n")


def save_pairs(pairs, path: str | Path) -> None:
    """Write (parent_id, child_id[, group_id]) pairs, one object per line.

    Accepts any iterable of objects with ``parent_id``/``child_id`` and an
    optional ``group_id`` attribute, or plain (parent_id, child_id) tuples.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            if isinstance(pair, tuple):
                obj = {"parent_id": pair[0], "child_id": pair[1]}
                if len(pair) > 2:
                    obj["group_id"] = pair[2]
            else:
                obj = {"parent_id": pair.parent_id, "child_id": pair.child_id}
                group_id = getattr(pair, "group_id", None)
                if group_id is not None:
                    obj["group_id"] = group_id
            fh.write(_dump(obj) + "\n")


def load_pairs(path: str | Path) -> list[tuple[str, str, int | None]]:
    """Read a pairs file into (parent_id, child_id, group_id|None) tuples."""
    out = []
    for lineno, obj in _read_jsonl(path):
        p = str(path)
        parent = str(_require(obj, "parent_id", p, lineno))
        child = str(_require(obj, "child_id", p, lineno))
        group = obj.get("group_id")
        if group is not None:
            group = _as_int(group, "group_id", p, lineno)
        out.append((parent, child, group))
    return out


# ---------------------------------------------------------------------------
# synthetic corpus generation


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for the seeded synthetic corpus.

    Rates live in [0, 1]. ``evasion_rate`` is the share of sockpuppet groups
    whose second account is created after the first one's ban (the rest run
    both accounts concurrently). ``page_overlap`` / ``vocab_reuse`` /
    ``username_mutation_rate`` control how strongly a successor account
    imitates its banned predecessor. ``activity_contrast`` blends evader
    activity profiles from the common malicious baseline (0) to a distinct
    long-lived, many-page profile (1); ``malicious_text_rate`` mixes
    flagged vocabulary into the text of malicious accounts. Setting every
    behavioral knob to 0 makes positives statistically indistinguishable
    from their matched controls.
    """

    n_groups: int = 50
    n_benign: int = 500
    n_nonevading_malicious: int = 250
    evasion_rate: float = 1.0
    username_mutation_rate: float = 0.3
    page_overlap: float = 0.5
    vocab_reuse: float = 0.5
    idle_gap_days: float = 10.0
    activity_contrast: float = 1.0
    malicious_text_rate: float = 0.25
    seed: int = 0

    def validate(self) -> None:
        for name in ("n_groups", "n_benign", "n_nonevading_malicious"):
            if getattr(self, name) < 0:
                raise InvalidConfigError(name, "must be >= 0")
        for name in (
            "evasion_rate",
            "username_mutation_rate",
            "page_overlap",
            "vocab_reuse",
            "activity_contrast",
            "malicious_text_rate",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidConfigError(name, "must be in [0, 1]")
        if not self.idle_gap_days > 0:
            raise InvalidConfigError("idle_gap_days", "must be positive")


@dataclass(frozen=True)
class SyntheticCorpus:
    """A generated corpus plus its ground-truth evasion pairs."""

    corpus: Corpus
    true_pairs: tuple[tuple[str, str], ...]


_FUNCTION_WORDS = (
    "the a an and or but if of to in on at with from by it that this is was".split()
)
_MALICIOUS_WORDS = (
    "damn crap hell dang stupid lol omg yeah gonna wanna hate angry awful "
    "nude naked junk trash".split()
)
_SYLLABLES = [c + v for c in "bdfgklmnprstvz" for v in "aeiou"]


def _make_words(rng: random.Random, count: int, lo: int = 2, hi: int = 4) -> list[str]:
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < count:
        w = "".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(lo, hi)))
        if w not in seen:
            seen.add(w)
            words.append(w)
    return words


def _lerp(a: float, b: float, t: float) -> float:
    return a + (b - a) * t


@dataclass
class _ActivityProfile:
    duration_days_lo: float
    duration_days_hi: float
    revisions_lo: int
    revisions_hi: int
    pages_lo: int
    pages_hi: int


# Common short-lived malicious baseline vs. the distinct profiles evaders
# show (long-lived many-page parents, medium-lived children).
_BASELINE = _ActivityProfile(0.04, 4.0, 1, 8, 1, 4)
_PARENT_DISTINCT = _ActivityProfile(12.0, 36.0, 8, 25, 4, 10)
_CHILD_DISTINCT = _ActivityProfile(1.5, 30.0, 4, 12, 2, 6)


def _blend(base: _ActivityProfile, target: _ActivityProfile, c: float) -> _ActivityProfile:
    return _ActivityProfile(
        _lerp(base.duration_days_lo, target.duration_days_lo, c),
        _lerp(base.duration_days_hi, target.duration_days_hi, c),
        round(_lerp(base.revisions_lo, target.revisions_lo, c)),
        round(_lerp(base.revisions_hi, target.revisions_hi, c)),
        round(_lerp(base.pages_lo, target.pages_lo, c)),
        round(_lerp(base.pages_hi, target.pages_hi, c)),
    )


class _Generator:
    def __init__(self, config: SynthConfig):
        config.validate()
        self.config = config
        # str seeds hash via SHA-512, stable across processes and platforms
        self.rng = random.Random(f"banevasion-synth:{config.seed}")
        n_accounts_estimate = (
            3 * config.n_groups + config.n_benign + config.n_nonevading_malicious
        )
        self.page_universe = [
            f"page-{i:05d}" for i in range(max(100, 2 * n_accounts_estimate))
        ]
        self.topical_vocab = _make_words(self.rng, 600)
        self.comment_vocab = _make_words(self.rng, 80, lo=1, hi=3)
        self.next_id = 0
        self.accounts: list[Account] = []
        self.revisions: list[Revision] = []
        self.records: list[SockpuppetRecord] = []
        self.true_pairs: list[tuple[str, str]] = []

    def _new_id(self) -> str:
        self.next_id += 1
        return f"a{self.next_id:06d}"

    def _username(self) -> str:
        return _make_words(self.rng, 1)[0] + f"{self.rng.randint(0, 99):02d}"

    def _mutate_username(self, base: str) -> str:
        rate = self.config.username_mutation_rate
        alphabet = "abcdefghijklmnopqrstuvwxyz0123456789"
        return "".join(
            self.rng.choice(alphabet) if self.rng.random() < rate else ch for ch in base
        )

    def _persona(self, profile: _ActivityProfile) -> dict:
        """Sample one account's behavioral parameters."""
        n_pages = self.rng.randint(profile.pages_lo, profile.pages_hi)
        return {
            "duration": max(
                3600,
                int(
                    self.rng.uniform(profile.duration_days_lo, profile.duration_days_hi)
                    * DAY_SECONDS
                ),
            ),
            "n_revisions": self.rng.randint(profile.revisions_lo, profile.revisions_hi),
            "home_pages": self.rng.sample(self.page_universe, n_pages),
            "vocab": self.rng.sample(self.topical_vocab, 25),
            "comment_words": self.rng.sample(self.comment_vocab, 6),
        }

    def _inherit(self, parent_persona: dict, child_persona: dict) -> None:
        """Rewrite child pages/vocab to overlap the parent at the knob rates."""
        cfg = self.config
        pages = child_persona["home_pages"]
        n_shared = round(len(pages) * cfg.page_overlap)
        shared = [
            parent_persona["home_pages"][i % len(parent_persona["home_pages"])]
            for i in range(n_shared)
        ]
        child_persona["home_pages"] = shared + pages[n_shared:]

        n_vocab = round(len(child_persona["vocab"]) * cfg.vocab_reuse)
        reused = self.rng.sample(
            parent_persona["vocab"], min(n_vocab, len(parent_persona["vocab"]))
        )
        child_persona["vocab"] = reused + child_persona["vocab"][len(reused):]

        n_comment = round(len(child_persona["comment_words"]) * cfg.vocab_reuse)
        reused_c = self.rng.sample(
            parent_persona["comment_words"],
            min(n_comment, len(parent_persona["comment_words"])),
        )
        child_persona["comment_words"] = (
            reused_c + child_persona["comment_words"][len(reused_c):]
        )

    def _text(self, persona: dict, malicious: bool, lo: int = 6, hi: int = 14) -> str:
        tokens = []
        for _ in range(self.rng.randint(lo, hi)):
            roll = self.rng.random()
            if roll < 0.4:
                tokens.append(self.rng.choice(_FUNCTION_WORDS))
            elif malicious and self.rng.random() < self.config.malicious_text_rate:
                tokens.append(self.rng.choice(_MALICIOUS_WORDS))
            else:
                tokens.append(self.rng.choice(persona["vocab"]))
        return " ".join(tokens)

    def _emit_revisions(
        self, account: Account, persona: dict, malicious: bool, active_until: int
    ) -> None:
        start = account.creation_time
        span = max(1, active_until - start)
        times = sorted(self.rng.randrange(span) for _ in range(persona["n_revisions"]))
        for t in times:
            deleted = ""
            if self.rng.random() < 0.3:
                deleted = self._text(persona, malicious, lo=2, hi=5)
            self.revisions.append(
                Revision(
                    account_id=account.account_id,
                    page_id=self.rng.choice(persona["home_pages"]),
                    timestamp=start + t,
                    added_text=self._text(persona, malicious),
                    deleted_text=deleted,
                    comment=" ".join(
                        self.rng.choice(persona["comment_words"])
                        for _ in range(self.rng.randint(2, 4))
                    ),
                )
            )

    def _banned_account(
        self, username: str, creation: int, persona: dict, malicious: bool = True
    ) -> Account:
        acct = Account(self._new_id(), username, creation, creation + persona["duration"])
        self.accounts.append(acct)
        self._emit_revisions(acct, persona, malicious, acct.ban_time)
        return acct

    def build(self) -> SyntheticCorpus:
        cfg = self.config
        rng = self.rng
        c = cfg.activity_contrast
        parent_profile = _blend(_BASELINE, _PARENT_DISTINCT, c)
        child_profile = _blend(_BASELINE, _CHILD_DISTINCT, c)
        horizon = _SYNTH_HORIZON_DAYS * DAY_SECONDS
        max_child_creation = _SYNTH_BASE_TIME + horizon

        for _ in range(cfg.n_groups):
            creation = _SYNTH_BASE_TIME + rng.randrange(horizon)
            parent_persona = self._persona(parent_profile)
            parent = self._banned_account(self._username(), creation, parent_persona)

            if rng.random() < cfg.evasion_rate:
                gap = int(rng.uniform(0.5, 1.5) * cfg.idle_gap_days * DAY_SECONDS)
                child_persona = self._persona(child_profile)
                self._inherit(parent_persona, child_persona)
                child = self._banned_account(
                    self._mutate_username(parent.username),
                    parent.ban_time + gap,
                    child_persona,
                )
                max_child_creation = max(max_child_creation, child.creation_time)
                self.true_pairs.append((parent.account_id, child.account_id))

                if rng.random() < 0.3:
                    # Extra concurrent puppet inside the parent's lifetime;
                    # split into two overlapping records to exercise merging.
                    lifespan = parent.ban_time - parent.creation_time
                    sock_creation = parent.creation_time + int(
                        rng.uniform(0.05, 0.45) * lifespan
                    )
                    sock_ban = parent.creation_time + int(rng.uniform(0.55, 0.95) * lifespan)
                    sock = Account(
                        self._new_id(), self._username(), sock_creation, max(sock_ban, sock_creation + 1)
                    )
                    self.accounts.append(sock)
                    sock_persona = self._persona(_BASELINE)
                    self._emit_revisions(sock, sock_persona, True, sock.ban_time)
                    self.records.append(
                        SockpuppetRecord(frozenset({parent.account_id, sock.account_id}))
                    )
                    self.records.append(
                        SockpuppetRecord(frozenset({sock.account_id, child.account_id}))
                    )
                else:
                    self.records.append(
                        SockpuppetRecord(frozenset({parent.account_id, child.account_id}))
                    )
            else:
                # Concurrent operation: the second account is created before
                # the first ban and both overlap, so no evasion pair exists.
                lifespan = parent.ban_time - parent.creation_time
                second_creation = parent.creation_time + int(rng.uniform(0.1, 0.9) * lifespan)
                second_persona = self._persona(_BASELINE)
                second = self._banned_account(
                    self._username(), second_creation, second_persona
                )
                self.records.append(
                    SockpuppetRecord(frozenset({parent.account_id, second.account_id}))
                )

        pool_span_lo = _SYNTH_BASE_TIME - WEEK_SECONDS
        pool_span_hi = max_child_creation + WEEK_SECONDS
        for _ in range(cfg.n_nonevading_malicious):
            creation = rng.randrange(pool_span_lo, pool_span_hi)
            self._banned_account(self._username(), creation, self._persona(_BASELINE))

        for _ in range(cfg.n_benign):
            creation = rng.randrange(pool_span_lo, pool_span_hi)
            persona = self._persona(_BASELINE)
            acct = Account(self._new_id(), self._username(), creation, None)
            self.accounts.append(acct)
            self._emit_revisions(acct, persona, False, creation + persona["duration"])

        corpus = Corpus(tuple(self.accounts), tuple(self.revisions), tuple(self.records))
        return SyntheticCorpus(corpus, tuple(self.true_pairs))


def generate_synthetic(config: SynthConfig) -> SyntheticCorpus:
    """Generate a deterministic synthetic corpus with ground-truth pairs."""
    return _Generator(config).build()


def config_from_mapping(mapping: dict) -> SynthConfig:
    """Build a SynthConfig from a string-keyed mapping, validating names."""
    known = {f.name for f in fields(SynthConfig)}
    unknown = set(mapping) - known
    if unknown:
        raise InvalidConfigError(sorted(unknown)[0], "unknown field")
    cfg = SynthConfig(**mapping)
    cfg.validate()
    return cfg
