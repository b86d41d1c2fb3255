"""Category taxonomy and document-level label derivation.

Two coarse-grained categories (social support, social isolation) break down
into nine fine-grained categories: four on the support side, five on the
isolation side.  A tenth annotation-only category, ``probable``, exists in
gold annotations (qualified with a side flag) but is never produced by an
extraction engine and never contributes to document labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable


class CoarseCategory(str, Enum):
    SS = "SS"
    SI = "SI"


class FineCategory(str, Enum):
    # social support side
    SOCIAL_NETWORK = "social_network"
    EMOTIONAL_SUPPORT = "emotional_support"
    INSTRUMENTAL_SUPPORT = "instrumental_support"
    SS_GENERAL = "ss_general"
    # social isolation side
    LONELINESS = "loneliness"
    NO_SOCIAL_NETWORK = "no_social_network"
    NO_EMOTIONAL_SUPPORT = "no_emotional_support"
    NO_INSTRUMENTAL_SUPPORT = "no_instrumental_support"
    SI_GENERAL = "si_general"
    # annotation-only; side is carried separately (see EntityMention.probable_side)
    PROBABLE = "probable"


SS_CATEGORIES: FrozenSet[FineCategory] = frozenset(
    {
        FineCategory.SOCIAL_NETWORK,
        FineCategory.EMOTIONAL_SUPPORT,
        FineCategory.INSTRUMENTAL_SUPPORT,
        FineCategory.SS_GENERAL,
    }
)

SI_CATEGORIES: FrozenSet[FineCategory] = frozenset(
    {
        FineCategory.LONELINESS,
        FineCategory.NO_SOCIAL_NETWORK,
        FineCategory.NO_EMOTIONAL_SUPPORT,
        FineCategory.NO_INSTRUMENTAL_SUPPORT,
        FineCategory.SI_GENERAL,
    }
)

#: The nine categories that engines emit and evaluation scores, in a fixed
#: reporting order (support side first, then isolation side).
MAIN_CATEGORIES: tuple[FineCategory, ...] = (
    FineCategory.SOCIAL_NETWORK,
    FineCategory.EMOTIONAL_SUPPORT,
    FineCategory.INSTRUMENTAL_SUPPORT,
    FineCategory.SS_GENERAL,
    FineCategory.LONELINESS,
    FineCategory.NO_SOCIAL_NETWORK,
    FineCategory.NO_EMOTIONAL_SUPPORT,
    FineCategory.NO_INSTRUMENTAL_SUPPORT,
    FineCategory.SI_GENERAL,
)


def side_of(category: FineCategory) -> CoarseCategory:
    """Map a fine category to its coarse side.

    ``probable`` has no fixed side (gold files qualify it per mention), so
    asking for its side is an error.
    """
    if category in SS_CATEGORIES:
        return CoarseCategory.SS
    if category in SI_CATEGORIES:
        return CoarseCategory.SI
    raise ValueError(f"{category.value!r} has no fixed coarse side")


def parse_fine_category(name: str) -> FineCategory:
    """Resolve a fine-category name as used in lexicon and label files."""
    try:
        return FineCategory(name)
    except ValueError:
        raise ValueError(f"unknown category name {name!r}") from None


@dataclass(frozen=True)
class DocumentLabels:
    """Note-level label set: distinct fine categories plus derived coarse ones.

    ``coarse`` contains a side exactly when ``fine`` contains at least one
    category of that side; ``none`` is true exactly when ``fine`` is empty.
    """

    fine: FrozenSet[FineCategory] = field(default_factory=frozenset)
    coarse: FrozenSet[CoarseCategory] = field(default_factory=frozenset)
    none: bool = True

    def __post_init__(self):
        expected_coarse = set()
        if self.fine & SS_CATEGORIES:
            expected_coarse.add(CoarseCategory.SS)
        if self.fine & SI_CATEGORIES:
            expected_coarse.add(CoarseCategory.SI)
        if FineCategory.PROBABLE in self.fine:
            raise ValueError("document labels must not contain 'probable'")
        if set(self.coarse) != expected_coarse:
            raise ValueError(
                f"coarse labels {sorted(c.value for c in self.coarse)} do not "
                f"match fine labels {sorted(c.value for c in self.fine)}"
            )
        if self.none != (not self.fine):
            raise ValueError("'none' must hold exactly when no fine label is present")

    def to_record(self) -> dict:
        return {
            "fine": sorted(c.value for c in self.fine),
            "coarse": sorted(c.value for c in self.coarse),
            "none": self.none,
        }

    @classmethod
    def from_record(cls, record: dict) -> "DocumentLabels":
        return derive_document_labels(
            parse_fine_category(name) for name in record.get("fine", [])
        )


def derive_document_labels(fine_mentions: Iterable[FineCategory]) -> DocumentLabels:
    """Aggregate fine-category mentions into note-level labels.

    Multiplicity is discarded: one mention of a category labels the note the
    same as ten.  ``probable`` mentions are ignored.  A coarse side is set
    when any of its fine categories is present.
    """
    fine = frozenset(c for c in fine_mentions if c is not FineCategory.PROBABLE)
    coarse = set()
    if fine & SS_CATEGORIES:
        coarse.add(CoarseCategory.SS)
    if fine & SI_CATEGORIES:
        coarse.add(CoarseCategory.SI)
    return DocumentLabels(fine=fine, coarse=frozenset(coarse), none=not fine)
