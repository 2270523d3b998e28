"""Text primitives: tokenization, string distance, set overlap, lexicon
profiling, embeddings, and sentiment.

Lexicon file format: a header block delimited by two ``%`` lines mapping
numeric category ids to names (``id<TAB>name``), followed by entry lines
``token<TAB>id [id ...]``. A trailing ``*`` on a token matches any token
with that prefix. Sentiment lexicon files are ``token<TAB>valence`` lines
with valences in [-1, 1]. External embedding files are
``sha256(text)<TAB>comma-separated floats`` lines.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import (
    CategoryMismatchError,
    DimensionMismatchError,
    EmptyInputError,
    LexiconParseError,
)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercased maximal alphanumeric runs, in order of appearance."""
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text)]


def normalized_levenshtein(a: str, b: str) -> float:
    """Unit-cost edit distance divided by the longer length; 0 when both empty."""
    if not a and not b:
        return 0.0
    if not a or not b:
        return 1.0
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
            )
        previous = current
    return previous[-1] / len(a)


def jaccard(a: set, b: set) -> float:
    """Intersection over union; 0 when both sets are empty."""
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


@dataclass(frozen=True)
class Lexicon:
    """Psycholinguistic category lexicon with optional prefix wildcards."""

    categories: dict[str, tuple[str, ...]]
    _literals: dict[str, tuple[str, ...]] = field(
        init=False, repr=False, compare=False
    )
    _prefixes: tuple[tuple[str, str], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        literals: dict[str, list[str]] = {}
        prefixes: list[tuple[str, str]] = []
        for category, entries in self.categories.items():
            for entry in entries:
                if entry != entry.lower():
                    raise LexiconParseError(
                        "<lexicon>", 0, f"entry {entry!r} must be lowercase"
                    )
                if "*" in entry[:-1] or entry == "*":
                    raise LexiconParseError(
                        "<lexicon>", 0, f"wildcard only allowed in final position: {entry!r}"
                    )
                if entry.endswith("*"):
                    prefixes.append((entry[:-1], category))
                else:
                    literals.setdefault(entry, []).append(category)
        object.__setattr__(
            self, "_literals", {k: tuple(v) for k, v in literals.items()}
        )
        object.__setattr__(self, "_prefixes", tuple(prefixes))

    def categories_of(self, token: str) -> set[str]:
        cats = set(self._literals.get(token, ()))
        for prefix, category in self._prefixes:
            if token.startswith(prefix):
                cats.add(category)
        return cats


def liwc_profile(tokens: Sequence[str], lexicon: Lexicon) -> dict[str, float]:
    """Per-category share of tokens matching any entry; all zero when empty."""
    counts = dict.fromkeys(lexicon.categories, 0)
    for token in tokens:
        for category in lexicon.categories_of(token):
            counts[category] += 1
    total = len(tokens)
    if total == 0:
        return dict.fromkeys(lexicon.categories, 0.0)
    return {category: count / total for category, count in counts.items()}


def profile_abs_diff(p: dict[str, float], q: dict[str, float]) -> float:
    """Mean absolute per-category difference between two profiles."""
    if set(p) != set(q):
        raise CategoryMismatchError("profiles cover different categories")
    if not p:
        return 0.0
    return sum(abs(p[c] - q[c]) for c in p) / len(p)


# ---------------------------------------------------------------------------
# embeddings


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    provider_id: str


class EmbeddingProvider(Protocol):
    provider_id: str
    dimension: int

    def embed_text(self, text: str) -> np.ndarray: ...


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


class HashedTrigramProvider:
    """Deterministic bag of hashed character trigrams, fixed dimension."""

    def __init__(self, dimension: int = 256):
        self.provider_id = f"hashed-trigram-{dimension}"
        self.dimension = dimension

    def embed_text(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension)
        lowered = text.lower()
        for i in range(len(lowered) - 2):
            bucket = _fnv1a64(lowered[i : i + 3].encode("utf-8")) % self.dimension
            vec[bucket] += 1.0
        return vec


def text_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ExternalVectorProvider:
    """Looks up precomputed vectors by text hash from a tab-separated file."""

    def __init__(self, path: str | Path):
        self.provider_id = f"external:{Path(path).name}"
        self._vectors: dict[str, np.ndarray] = {}
        dimension = None
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise LexiconParseError(str(path), lineno, "expected hash<TAB>floats")
                try:
                    vec = np.array([float(x) for x in parts[1].split(",")])
                except ValueError:
                    raise LexiconParseError(str(path), lineno, "bad float") from None
                if dimension is None:
                    dimension = vec.size
                elif vec.size != dimension:
                    raise LexiconParseError(
                        str(path), lineno, f"dimension {vec.size} != {dimension}"
                    )
                self._vectors[parts[0]] = vec
        if dimension is None:
            raise EmptyInputError("external embedding file is empty")
        self.dimension = dimension

    def embed_text(self, text: str) -> np.ndarray:
        key = text_hash(text)
        if key not in self._vectors:
            raise KeyError(f"no precomputed vector for text hash {key}")
        return self._vectors[key]


def embed(texts: Sequence[str], provider: EmbeddingProvider) -> EmbeddingVector:
    """Mean of per-text vectors from the provider."""
    if not texts:
        raise EmptyInputError("embed() needs at least one text")
    total = np.zeros(provider.dimension)
    for text in texts:
        total += provider.embed_text(text)
    return EmbeddingVector(total / len(texts), provider.provider_id)


def cosine(u, v) -> float:
    """Cosine similarity; 0 when either vector has zero norm."""
    u = np.asarray(u.values if isinstance(u, EmbeddingVector) else u, dtype=float)
    v = np.asarray(v.values if isinstance(v, EmbeddingVector) else v, dtype=float)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"{u.shape} vs {v.shape}")
    nu = math.sqrt(float(u @ u))
    nv = math.sqrt(float(v @ v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v) / (nu * nv)


# ---------------------------------------------------------------------------
# sentiment


@dataclass(frozen=True)
class SentimentLexicon:
    valences: dict[str, float]

    def __post_init__(self):
        for token, valence in self.valences.items():
            if not math.isfinite(valence) or not -1.0 <= valence <= 1.0:
                raise LexiconParseError(
                    "<sentiment>", 0, f"valence for {token!r} outside [-1, 1]"
                )


def sentiment(tokens: Sequence[str], lex: SentimentLexicon) -> float:
    """Mean valence of tokens found in the lexicon; 0 when none match."""
    hits = [lex.valences[t] for t in tokens if t in lex.valences]
    if not hits:
        return 0.0
    return sum(hits) / len(hits)


# ---------------------------------------------------------------------------
# file formats


def load_lexicon(path: str | Path) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    return _parse_lexicon(lines, str(path))


def _parse_lexicon(lines: list[str], path: str) -> Lexicon:
    id_to_name: dict[str, str] = {}
    entries: dict[str, list[str]] = {}
    in_header = False
    header_done = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "%":
            if header_done:
                raise LexiconParseError(path, lineno, "unexpected % after header")
            if in_header:
                in_header = False
                header_done = True
            else:
                in_header = True
            continue
        if in_header:
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconParseError(path, lineno, "header line must be id<TAB>name")
            cat_id, name = parts
            if name in entries:
                raise LexiconParseError(path, lineno, f"duplicate category {name!r}")
            id_to_name[cat_id] = name
            entries[name] = []
        else:
            if not header_done:
                raise LexiconParseError(path, lineno, "entries before header block")
            parts = line.split("\t")
            if len(parts) < 2:
                raise LexiconParseError(path, lineno, "entry line must be token<TAB>ids")
            token = parts[0]
            for cat_id in " ".join(parts[1:]).split():
                if cat_id not in id_to_name:
                    raise LexiconParseError(path, lineno, f"unknown category id {cat_id!r}")
                entries[id_to_name[cat_id]].append(token)
    if in_header:
        raise LexiconParseError(path, len(lines), "unterminated header block")
    return Lexicon({k: tuple(v) for k, v in entries.items()})


def save_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    names = list(lexicon.categories)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%\n")
        for i, name in enumerate(names, start=1):
            fh.write(f"{i}\t{name}\n")
        fh.write("%\n")
        by_token: dict[str, list[int]] = {}
        for i, name in enumerate(names, start=1):
            for entry in lexicon.categories[name]:
                by_token.setdefault(entry, []).append(i)
        for token in sorted(by_token):
            ids = " ".join(str(i) for i in by_token[token])
            fh.write(f"{token}\t{ids}\n")


def load_sentiment_lexicon(path: str | Path) -> SentimentLexicon:
    valences: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconParseError(str(path), lineno, "expected token<TAB>valence")
            try:
                valences[parts[0]] = float(parts[1])
            except ValueError:
                raise LexiconParseError(str(path), lineno, "bad valence") from None
    return SentimentLexicon(valences)


def builtin_lexicon() -> Lexicon:
    """The demonstration category lexicon shipped with the package."""
    text = resources.files("banevasion.data").joinpath("demo_lexicon.txt").read_text("utf-8")
    return _parse_lexicon(text.splitlines(), "<builtin demo_lexicon.txt>")


def builtin_sentiment_lexicon() -> SentimentLexicon:
    valences: dict[str, float] = {}
    text = resources.files("banevasion.data").joinpath("demo_sentiment.txt").read_text("utf-8")
    for line in text.splitlines():
        line = line.strip()
        if line:
            token, valence = line.split("\t")
            valences[token] = float(valence)
    return SentimentLexicon(valences)


def get_provider(spec: str) -> EmbeddingProvider:
    """Resolve a provider spec: ``trigram`` or ``file:/path/to/vectors``."""
    if spec == "trigram":
        return HashedTrigramProvider()
    if spec.startswith("file:"):
        return ExternalVectorProvider(spec[len("file:"):])
    raise ValueError(f"unknown embedding provider {spec!r}")
