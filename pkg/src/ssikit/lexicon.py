"""Lexicon storage and embedding-based lexicon expansion.

Inclusion phrases are kept per fine-grained category; exclusion phrases are
a single global list (an exclusion hit suppresses any inclusion hit inside
it, regardless of category).

Expansion works by averaging the word vectors of a phrase into one vector
(out-of-vocabulary tokens are skipped and reported, and the divisor counts
only covered tokens), then ranking the vocabulary by cosine similarity
against that vector.  The top candidates per phrase are pooled into a review
sheet; nothing is added to the lexicon without a human decision.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .categories import FineCategory, MAIN_CATEGORIES, parse_fine_category
from .errors import LexiconError, NoEmbeddingCoverageError

log = logging.getLogger(__name__)


def normalize_phrase(phrase: str) -> str:
    """Lowercase and collapse internal whitespace."""
    return " ".join(phrase.lower().split())


@dataclass(frozen=True)
class Lexicon:
    """Per-category inclusion phrases plus the global exclusion list."""

    inclusion: Mapping[FineCategory, tuple[str, ...]]
    exclusion: tuple[str, ...] = ()
    version: str = "0"

    def __post_init__(self):
        for category, phrases in self.inclusion.items():
            if category not in MAIN_CATEGORIES:
                raise LexiconError(f"{category.value!r} cannot carry lexicon phrases")
            seen = set()
            for phrase in phrases:
                if not phrase:
                    raise LexiconError(f"empty phrase under {category.value!r}")
                if phrase in seen:
                    raise LexiconError(f"duplicate phrase {phrase!r} under {category.value!r}")
                seen.add(phrase)
        for phrase in self.exclusion:
            if not phrase:
                raise LexiconError("empty exclusion phrase")

    def phrases(self, category: FineCategory) -> tuple[str, ...]:
        return tuple(self.inclusion.get(category, ()))

    def categories(self) -> list[FineCategory]:
        return [c for c in MAIN_CATEGORIES if self.inclusion.get(c)]


def load_lexicon(
    inclusion_file: str | Path, exclusion_file: Optional[str | Path] = None
) -> Lexicon:
    """Load inclusion TSV (``category<TAB>phrase``) and exclusion list files.

    ``#`` starts a comment in both files; a ``# version: <v>`` comment in the
    inclusion file sets the lexicon version.  Normalized duplicates within a
    category are dropped with a warning; an unknown category or an empty
    phrase is an error.
    """
    inclusion: dict[FineCategory, list[str]] = {}
    version = "0"
    for lineno, line in enumerate(
        Path(inclusion_file).read_text(encoding="utf-8").splitlines(), 1
    ):
        stripped = line.strip()
        if stripped.lower().startswith("# version:"):
            version = stripped.split(":", 1)[1].strip()
            continue
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2:
            raise LexiconError(f"{inclusion_file}:{lineno}: expected 'category<TAB>phrase'")
        try:
            category = parse_fine_category(parts[0].strip())
        except ValueError as exc:
            raise LexiconError(f"{inclusion_file}:{lineno}: {exc}") from None
        if category not in MAIN_CATEGORIES:
            raise LexiconError(
                f"{inclusion_file}:{lineno}: {category.value!r} cannot carry lexicon phrases"
            )
        phrase = normalize_phrase(parts[1])
        if not phrase:
            raise LexiconError(f"{inclusion_file}:{lineno}: empty phrase")
        bucket = inclusion.setdefault(category, [])
        if phrase in bucket:
            log.warning("%s:%d: duplicate phrase %r dropped", inclusion_file, lineno, phrase)
            continue
        bucket.append(phrase)

    exclusion: list[str] = []
    if exclusion_file is not None:
        for lineno, line in enumerate(
            Path(exclusion_file).read_text(encoding="utf-8").splitlines(), 1
        ):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            phrase = normalize_phrase(stripped)
            if phrase in exclusion:
                log.warning("%s:%d: duplicate exclusion %r dropped", exclusion_file, lineno, phrase)
                continue
            exclusion.append(phrase)

    return Lexicon(
        inclusion={c: tuple(ps) for c, ps in inclusion.items()},
        exclusion=tuple(exclusion),
        version=version,
    )


def write_inclusion_tsv(lexicon: Lexicon, path: str | Path) -> None:
    """Write the inclusion lexicon back out in its load format."""
    lines = [f"# version: {lexicon.version}"]
    for category in lexicon.categories():
        for phrase in lexicon.phrases(category):
            lines.append(f"{category.value}\t{phrase}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class EmbeddingTable:
    """Token vectors of one shared dimension, loaded from word-vector text.

    The text format is the common interchange one: a ``count dim`` header
    line, then one ``token v1 ... vdim`` line per token.
    """

    def __init__(self, tokens: Sequence[str], matrix: np.ndarray):
        if matrix.ndim != 2 or matrix.shape[0] != len(tokens):
            raise LexiconError("embedding matrix shape does not match token count")
        if matrix.shape[1] < 1:
            raise LexiconError("embedding dimension must be positive")
        if len(set(tokens)) != len(tokens):
            raise LexiconError("duplicate token in embedding table")
        if any(not t for t in tokens):
            raise LexiconError("empty token in embedding table")
        self.tokens = list(tokens)
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.index = {t: i for i, t in enumerate(self.tokens)}
        norms = np.linalg.norm(self.matrix, axis=1)
        safe = np.where(norms == 0.0, 1.0, norms)
        self._unit = self.matrix / safe[:, None]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def vector(self, token: str) -> np.ndarray:
        return self.matrix[self.index[token]]

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingTable":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines:
            raise LexiconError(f"{path}: empty embedding file")
        header = lines[0].split()
        if len(header) != 2:
            raise LexiconError(f"{path}: expected 'count dim' header")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError:
            raise LexiconError(f"{path}: expected 'count dim' header") from None
        tokens = []
        rows = []
        for lineno, line in enumerate(lines[1:], 2):
            if not line.strip():
                continue
            parts = line.rstrip().split(" ")
            if len(parts) != dim + 1:
                raise LexiconError(f"{path}:{lineno}: expected token plus {dim} values")
            tokens.append(parts[0])
            try:
                rows.append([float(v) for v in parts[1:]])
            except ValueError:
                raise LexiconError(f"{path}:{lineno}: non-numeric vector value") from None
        if len(tokens) != count:
            raise LexiconError(f"{path}: header says {count} tokens, found {len(tokens)}")
        return cls(tokens, np.array(rows, dtype=np.float64))

    def save(self, path: str | Path) -> None:
        lines = [f"{len(self.tokens)} {self.dim}"]
        for token, row in zip(self.tokens, self.matrix):
            lines.append(token + " " + " ".join(repr(float(v)) for v in row))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class LexiconVector:
    """Mean vector of a phrase's covered tokens."""

    vector: np.ndarray
    covered_tokens: int
    missing_tokens: tuple[str, ...] = field(default_factory=tuple)


def lexicon_vector(phrase_tokens: Sequence[str], emb: EmbeddingTable) -> LexiconVector:
    """Average the vectors of the phrase tokens found in the table.

    The mean divides by the number of covered tokens; tokens without a
    vector are reported, not fatal, unless nothing is covered at all.
    """
    covered = [t for t in phrase_tokens if t in emb]
    missing = tuple(t for t in phrase_tokens if t not in emb)
    if not covered:
        raise NoEmbeddingCoverageError(
            f"no embedding coverage for tokens {list(phrase_tokens)!r}"
        )
    vectors = np.stack([emb.vector(t) for t in covered])
    return LexiconVector(
        vector=vectors.sum(axis=0) / len(covered),
        covered_tokens=len(covered),
        missing_tokens=missing,
    )


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    return v if norm == 0.0 else v / norm


def most_similar(
    query: LexiconVector,
    emb: EmbeddingTable,
    k: int,
    exclude: Iterable[str] = (),
) -> list[tuple[str, float]]:
    """Rank the vocabulary by cosine similarity to the query vector.

    Both sides are L2-normalized.  Returns the top ``k`` eligible tokens in
    descending cosine order, ties broken lexicographically; fewer than ``k``
    eligible tokens yields a shorter list.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    excluded = set(exclude)
    cosines = emb._unit @ _unit(np.asarray(query.vector, dtype=np.float64))
    ranked = sorted(
        (
            (token, float(cosines[i]))
            for i, token in enumerate(emb.tokens)
            if token not in excluded
        ),
        key=lambda tc: (-tc[1], tc[0]),
    )
    return ranked[:k]


def expansion_round(
    lex: Lexicon, category: FineCategory, emb: EmbeddingTable, k: int = 10
) -> list[tuple[str, float]]:
    """Propose expansion candidates for one category.

    Builds one vector per phrase, takes each phrase's top-``k`` neighbors,
    pools them, and drops tokens already used by the category's phrases.
    Candidates come back sorted by their best cosine; they are review input,
    never auto-added.
    """
    phrases = lex.phrases(category)
    if not phrases:
        raise LexiconError(f"category {category.value!r} has no inclusion phrases")
    existing = {token for phrase in phrases for token in phrase.split()}
    best: dict[str, float] = {}
    covered_any = False
    for phrase in phrases:
        try:
            vec = lexicon_vector(phrase.split(), emb)
        except NoEmbeddingCoverageError:
            log.warning("phrase %r has no embedding coverage; skipped", phrase)
            continue
        covered_any = True
        for token, cosine in most_similar(vec, emb, k, exclude=existing):
            if token not in best or cosine > best[token]:
                best[token] = cosine
    if not covered_any:
        raise NoEmbeddingCoverageError(
            f"no phrase of {category.value!r} has embedding coverage"
        )
    return sorted(best.items(), key=lambda tc: (-tc[1], tc[0]))


def write_candidates_tsv(
    candidates: Mapping[FineCategory, Sequence[tuple[str, float]]], path: str | Path
) -> None:
    """Write an expansion review sheet: category, candidate, cosine, blank decision."""
    lines = ["# category\tcandidate\tcosine\tdecision"]
    for category in MAIN_CATEGORIES:
        for token, cosine in candidates.get(category, ()):
            lines.append(f"{category.value}\t{token}\t{cosine:.6f}\t")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def merge_approved_candidates(lex: Lexicon, reviewed_file: str | Path) -> Lexicon:
    """Fold approved review rows back into the lexicon.

    A row counts as approved when its decision column starts with ``y`` or
    ``a`` (yes/accept), case-insensitive.  Approved tokens become new
    single-token phrases of their category.
    """
    additions: dict[FineCategory, list[str]] = {}
    for lineno, line in enumerate(
        Path(reviewed_file).read_text(encoding="utf-8").splitlines(), 1
    ):
        stripped = line.rstrip("\n")
        if not stripped.strip() or stripped.lstrip().startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) < 4:
            raise LexiconError(f"{reviewed_file}:{lineno}: expected 4 tab-separated columns")
        decision = parts[3].strip().lower()
        if not decision or decision[0] not in ("y", "a"):
            continue
        try:
            category = parse_fine_category(parts[0].strip())
        except ValueError as exc:
            raise LexiconError(f"{reviewed_file}:{lineno}: {exc}") from None
        phrase = normalize_phrase(parts[1])
        if not phrase:
            raise LexiconError(f"{reviewed_file}:{lineno}: empty candidate")
        additions.setdefault(category, []).append(phrase)

    inclusion = {c: list(ps) for c, ps in lex.inclusion.items()}
    for category, phrases in additions.items():
        bucket = inclusion.setdefault(category, [])
        for phrase in phrases:
            if phrase not in bucket:
                bucket.append(phrase)
    return Lexicon(
        inclusion={c: tuple(ps) for c, ps in inclusion.items()},
        exclusion=lex.exclusion,
        version=lex.version,
    )
