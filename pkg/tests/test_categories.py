"""Taxonomy and document-label aggregation."""

from itertools import combinations

import pytest

from ssikit import (
    CoarseCategory,
    DocumentLabels,
    FineCategory,
    MAIN_CATEGORIES,
    SI_CATEGORIES,
    SS_CATEGORIES,
    derive_document_labels,
    side_of,
)


def test_taxonomy_shape():
    assert len(MAIN_CATEGORIES) == 9
    assert set(MAIN_CATEGORIES) == (SS_CATEGORIES | SI_CATEGORIES)
    assert not SS_CATEGORIES & SI_CATEGORIES
    assert FineCategory.PROBABLE not in MAIN_CATEGORIES


def test_side_of():
    assert side_of(FineCategory.SOCIAL_NETWORK) is CoarseCategory.SS
    assert side_of(FineCategory.LONELINESS) is CoarseCategory.SI
    with pytest.raises(ValueError):
        side_of(FineCategory.PROBABLE)


def test_single_si_mention():
    labels = derive_document_labels([FineCategory.LONELINESS])
    assert labels.fine == {FineCategory.LONELINESS}
    assert labels.coarse == {CoarseCategory.SI}
    assert not labels.none


def test_multiplicity_discarded():
    once = derive_document_labels([FineCategory.LONELINESS])
    thrice = derive_document_labels([FineCategory.LONELINESS] * 3)
    assert once == thrice


def test_mixed_sides():
    labels = derive_document_labels(
        [
            FineCategory.LONELINESS,
            FineCategory.INSTRUMENTAL_SUPPORT,
            FineCategory.INSTRUMENTAL_SUPPORT,
        ]
    )
    assert labels.fine == {FineCategory.LONELINESS, FineCategory.INSTRUMENTAL_SUPPORT}
    assert labels.coarse == {CoarseCategory.SI, CoarseCategory.SS}


def test_empty_is_none():
    labels = derive_document_labels([])
    assert labels.none
    assert labels.fine == frozenset()
    assert labels.coarse == frozenset()


def test_probable_ignored():
    labels = derive_document_labels([FineCategory.PROBABLE])
    assert labels.none
    labels = derive_document_labels([FineCategory.PROBABLE, FineCategory.SS_GENERAL])
    assert labels.fine == {FineCategory.SS_GENERAL}
    assert labels.coarse == {CoarseCategory.SS}


def test_all_subsets_consistent():
    # brute force over every fine subset: coarse side iff any member of side
    for size in range(len(MAIN_CATEGORIES) + 1):
        for subset in combinations(MAIN_CATEGORIES, size):
            labels = derive_document_labels(subset)
            expected = set()
            if set(subset) & SS_CATEGORIES:
                expected.add(CoarseCategory.SS)
            if set(subset) & SI_CATEGORIES:
                expected.add(CoarseCategory.SI)
            assert labels.coarse == expected
            assert labels.none == (not subset)


def test_labels_validation():
    with pytest.raises(ValueError):
        DocumentLabels(
            fine=frozenset({FineCategory.LONELINESS}), coarse=frozenset(), none=False
        )
    with pytest.raises(ValueError):
        DocumentLabels(fine=frozenset(), coarse=frozenset(), none=False)
    with pytest.raises(ValueError):
        DocumentLabels(
            fine=frozenset({FineCategory.PROBABLE}),
            coarse=frozenset(),
            none=False,
        )


def test_record_round_trip():
    labels = derive_document_labels([FineCategory.LONELINESS, FineCategory.SS_GENERAL])
    assert DocumentLabels.from_record(labels.to_record()) == labels
    record = labels.to_record()
    assert record["fine"] == sorted(record["fine"])
