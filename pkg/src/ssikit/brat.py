"""Standoff annotation parsing, writing, and gold label derivation.

The annotation tool stores entities as ``T`` lines
(``T1<TAB>tag start end<TAB>surface``) and attributes as ``A`` lines
(``A1<TAB>Name T1[ value]``).  Offsets are character offsets into the paired
``.txt`` file.  Only entities and attributes are supported; the annotation
schema uses no relations or events.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .categories import (
    CoarseCategory,
    DocumentLabels,
    FineCategory,
    derive_document_labels,
    parse_fine_category,
)
from .errors import ConfigError, StandoffError
from .notes import Note


class Temporality(str, Enum):
    PRESENT = "present"
    PAST = "past"
    UNSPECIFIED = "unspecified"


class Source(str, Enum):
    GOLD = "gold"
    RBS = "rbs"
    LLM = "llm"


#: Default mapping from annotation-tool tag names to internal categories.
#: ``probable`` tags carry the coarse side they were annotated under.
DEFAULT_TAG_MAP: dict[str, tuple[FineCategory, Optional[CoarseCategory]]] = {
    "social_support_social_network": (FineCategory.SOCIAL_NETWORK, None),
    "social_support_emotional_support": (FineCategory.EMOTIONAL_SUPPORT, None),
    "social_support_instrumental_support": (FineCategory.INSTRUMENTAL_SUPPORT, None),
    "social_support_general": (FineCategory.SS_GENERAL, None),
    "social_support_probable": (FineCategory.PROBABLE, CoarseCategory.SS),
    "social_isolation_loneliness": (FineCategory.LONELINESS, None),
    "social_isolation_no_social_network": (FineCategory.NO_SOCIAL_NETWORK, None),
    "social_isolation_no_emotional_support": (FineCategory.NO_EMOTIONAL_SUPPORT, None),
    "social_isolation_no_instrumental_support": (FineCategory.NO_INSTRUMENTAL_SUPPORT, None),
    "social_isolation_general": (FineCategory.SI_GENERAL, None),
    "social_isolation_probable": (FineCategory.PROBABLE, CoarseCategory.SI),
}


def load_tag_map(path: str | Path) -> dict[str, tuple[FineCategory, Optional[CoarseCategory]]]:
    """Read a tag-name map: TSV ``brat_tag<TAB>category``, ``#`` comments.

    The category column takes the internal fine-category names plus
    ``ss_probable`` / ``si_probable`` for side-qualified probable tags.
    """
    mapping: dict[str, tuple[FineCategory, Optional[CoarseCategory]]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2:
            raise ConfigError(f"{path}:{lineno}: expected 'tag<TAB>category'")
        tag, name = parts[0].strip(), parts[1].strip()
        if name == "ss_probable":
            mapping[tag] = (FineCategory.PROBABLE, CoarseCategory.SS)
        elif name == "si_probable":
            mapping[tag] = (FineCategory.PROBABLE, CoarseCategory.SI)
        else:
            try:
                mapping[tag] = (parse_fine_category(name), None)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from None
    return mapping


@dataclass(frozen=True)
class EntityMention:
    """One span-level mention of a fine-grained category."""

    id: str
    category: FineCategory
    start: int
    end: int
    surface: str
    temporality: Temporality = Temporality.UNSPECIFIED
    negated: bool = False
    no_context: bool = False
    source: Source = Source.GOLD
    discontinuous: bool = False
    probable_side: Optional[CoarseCategory] = None

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"bad span ({self.start}, {self.end})")
        if self.negated and self.category is not FineCategory.LONELINESS:
            raise ValueError(
                f"negation is only defined for loneliness, not {self.category.value!r}"
            )
        if (self.category is FineCategory.PROBABLE) != (self.probable_side is not None):
            raise ValueError("probable_side must be set exactly for 'probable' mentions")

    def key(self) -> tuple:
        """Identity modulo the assigned id (used for round-trip comparison)."""
        return (
            self.category,
            self.start,
            self.end,
            self.surface,
            self.temporality,
            self.negated,
            self.no_context,
            self.discontinuous,
            self.probable_side,
        )


_ENTITY_LINE = re.compile(r"^(T\S+)\t(\S+) (\d+ \d+(?:;\d+ \d+)*)\t(.*)$")
_ATTR_LINE = re.compile(r"^(A\S+)\t(\S+) (T\S+)(?: (\S+))?$")

_ATTRIBUTE_NAMES = {"temporality", "negation", "nocontext", "no_context"}


def parse_standoff(
    ann_text: str,
    note: Note,
    tag_map: Mapping[str, tuple[FineCategory, Optional[CoarseCategory]]] = DEFAULT_TAG_MAP,
) -> tuple[list[EntityMention], list[str]]:
    """Parse standoff annotation text against its note.

    Returns the mentions plus a list of warnings (unknown tags, unsupported
    line types).  Raises :class:`StandoffError` for structural problems:
    out-of-bounds offsets, surface/text mismatch, or attributes referencing
    a missing entity.
    """
    warnings: list[str] = []
    raw: dict[str, dict] = {}
    order: list[str] = []
    attrs: list[tuple[str, str, str, Optional[str]]] = []

    for lineno, line in enumerate(ann_text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        if line.startswith("T"):
            m = _ENTITY_LINE.match(line)
            if not m:
                raise StandoffError(f"line {lineno}: malformed entity line: {line!r}")
            tid, tag, span_field, surface = m.groups()
            if tag not in tag_map:
                warnings.append(f"line {lineno}: unknown tag {tag!r} skipped")
                continue
            fragments = []
            for frag in span_field.split(";"):
                start_s, end_s = frag.split(" ")
                fragments.append((int(start_s), int(end_s)))
            raw[tid] = {
                "tag": tag,
                "fragments": fragments,
                "surface": surface,
                "temporality": Temporality.UNSPECIFIED,
                "negated": False,
                "no_context": False,
            }
            order.append(tid)
        elif line.startswith("A"):
            m = _ATTR_LINE.match(line)
            if not m:
                raise StandoffError(f"line {lineno}: malformed attribute line: {line!r}")
            aid, name, ref, value = m.groups()
            attrs.append((aid, name, ref, value))
        elif line[0] in "REN":
            warnings.append(f"line {lineno}: unsupported line type {line[0]!r} skipped")
        else:
            warnings.append(f"line {lineno}: unrecognized line skipped: {line!r}")

    for aid, name, ref, value in attrs:
        if ref not in raw:
            raise StandoffError(f"attribute {aid} references missing entity {ref}")
        lname = name.lower()
        if lname == "temporality":
            if value is None or value.lower() not in ("present", "past"):
                raise StandoffError(f"attribute {aid}: bad Temporality value {value!r}")
            raw[ref]["temporality"] = Temporality(value.lower())
        elif lname == "negation":
            raw[ref]["negated"] = True
        elif lname in ("nocontext", "no_context"):
            raw[ref]["no_context"] = True
        else:
            warnings.append(f"attribute {aid}: unknown attribute {name!r} skipped")

    mentions = []
    for tid in order:
        entry = raw[tid]
        fragments = entry["fragments"]
        start = min(s for s, _ in fragments)
        end = max(e for _, e in fragments)
        discontinuous = len(fragments) > 1
        if not (0 <= start < end <= len(note.clean_text)):
            raise StandoffError(f"entity {tid}: span ({start}, {end}) out of bounds")
        if not discontinuous:
            slice_ = note.clean_text[start:end]
            if slice_ != entry["surface"]:
                raise StandoffError(
                    f"entity {tid}: surface {entry['surface']!r} does not match "
                    f"note text {slice_!r} at ({start}, {end})"
                )
        category, probable_side = tag_map[entry["tag"]]
        try:
            mentions.append(
                EntityMention(
                    id=tid,
                    category=category,
                    start=start,
                    end=end,
                    surface=entry["surface"],
                    temporality=entry["temporality"],
                    negated=entry["negated"],
                    no_context=entry["no_context"],
                    source=Source.GOLD,
                    discontinuous=discontinuous,
                    probable_side=probable_side,
                )
            )
        except ValueError as exc:
            raise StandoffError(f"entity {tid}: {exc}") from None
    return mentions, warnings


def _reverse_tag_map(tag_map) -> dict[tuple[FineCategory, Optional[CoarseCategory]], str]:
    reverse = {}
    for tag, key in tag_map.items():
        reverse.setdefault(key, tag)
    return reverse


def write_standoff(
    mentions: Sequence[EntityMention],
    tag_map: Mapping[str, tuple[FineCategory, Optional[CoarseCategory]]] = DEFAULT_TAG_MAP,
) -> str:
    """Serialize mentions back to standoff text, renumbering ids.

    ``parse_standoff(write_standoff(ms), note)`` reproduces ``ms`` up to id
    assignment.
    """
    reverse = _reverse_tag_map(tag_map)
    lines = []
    attr_n = 0
    for n, mention in enumerate(mentions, 1):
        key = (mention.category, mention.probable_side)
        if key not in reverse:
            raise StandoffError(f"no tag name for category {mention.category.value!r}")
        lines.append(
            f"T{n}\t{reverse[key]} {mention.start} {mention.end}\t{mention.surface}"
        )
        if mention.temporality is not Temporality.UNSPECIFIED:
            attr_n += 1
            lines.append(f"A{attr_n}\tTemporality T{n} {mention.temporality.value.capitalize()}")
        if mention.negated:
            attr_n += 1
            lines.append(f"A{attr_n}\tNegation T{n}")
        if mention.no_context:
            attr_n += 1
            lines.append(f"A{attr_n}\tNoContext T{n}")
    return "\n".join(lines) + ("\n" if lines else "")


def effective_mentions(mentions: Iterable[EntityMention]) -> list[EntityMention]:
    """Mentions that count toward document labels.

    Drops ``no_context`` mentions, ``probable`` mentions, and negated
    loneliness mentions (a denied feeling is not a mention of the feeling).
    """
    return [
        m
        for m in mentions
        if not m.no_context and m.category is not FineCategory.PROBABLE and not m.negated
    ]


def gold_document_labels(mentions: Iterable[EntityMention]) -> DocumentLabels:
    """Aggregate entity mentions into note-level labels."""
    return derive_document_labels(m.category for m in effective_mentions(mentions))


@dataclass(frozen=True)
class GoldDocument:
    """A note paired with its gold mentions and derived document labels."""

    note: Note
    mentions: tuple[EntityMention, ...]
    doc_labels: DocumentLabels

    @classmethod
    def from_parts(cls, note: Note, mentions: Sequence[EntityMention]) -> "GoldDocument":
        return cls(
            note=note,
            mentions=tuple(mentions),
            doc_labels=gold_document_labels(mentions),
        )
