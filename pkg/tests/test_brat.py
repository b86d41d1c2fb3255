"""Standoff annotation parsing, writing, and gold label derivation."""

import datetime as dt

import pytest

from ssikit import (
    CoarseCategory,
    EntityMention,
    FineCategory,
    Note,
    StandoffError,
    Temporality,
    gold_document_labels,
    parse_standoff,
    write_standoff,
)
from ssikit.brat import DEFAULT_TAG_MAP, effective_mentions


def make_note(text: str) -> Note:
    return Note.build("p1", "n1", dt.date(2020, 1, 1), text)


TEXT = "Pt reports loneliness. Her sister visits daily and she goes to church."


def test_parse_entity_and_attributes():
    ann = (
        "T1\tsocial_isolation_loneliness 11 21\tloneliness\n"
        "A1\tTemporality T1 Present\n"
        "T2\tsocial_support_social_network 55 69\tgoes to church\n"
        "A2\tNegation T1\n"
    )
    # Negation on loneliness is legal; on other categories it is rejected.
    mentions, warnings = parse_standoff(ann, make_note(TEXT))
    assert not warnings
    assert len(mentions) == 2
    first, second = mentions
    assert first.category is FineCategory.LONELINESS
    assert first.temporality is Temporality.PRESENT
    assert first.negated
    assert (first.start, first.end) == (11, 21)
    assert second.category is FineCategory.SOCIAL_NETWORK
    assert not second.negated


def test_surface_mismatch_rejected():
    ann = "T1\tsocial_isolation_loneliness 11 21\tlonelyness\n"
    with pytest.raises(StandoffError):
        parse_standoff(ann, make_note(TEXT))


def test_out_of_bounds_rejected():
    ann = "T1\tsocial_isolation_loneliness 11 999\tloneliness\n"
    with pytest.raises(StandoffError):
        parse_standoff(ann, make_note(TEXT))


def test_attribute_missing_ref_rejected():
    ann = "A1\tNegation T9\n"
    with pytest.raises(StandoffError):
        parse_standoff(ann, make_note(TEXT))


def test_negation_on_non_loneliness_rejected():
    ann = (
        "T1\tsocial_support_social_network 55 69\tgoes to church\n"
        "A1\tNegation T1\n"
    )
    with pytest.raises(StandoffError):
        parse_standoff(ann, make_note(TEXT))


def test_unknown_tag_warns_and_skips():
    ann = "T1\tMadeUpTag 0 2\tPt\n"
    mentions, warnings = parse_standoff(ann, make_note(TEXT))
    assert mentions == []
    assert len(warnings) == 1


def test_relation_lines_warn():
    ann = (
        "T1\tsocial_isolation_loneliness 11 21\tloneliness\n"
        "R1\tRel Arg1:T1 Arg2:T1\n"
    )
    mentions, warnings = parse_standoff(ann, make_note(TEXT))
    assert len(mentions) == 1
    assert any("unsupported" in w for w in warnings)


def test_discontinuous_span_covering():
    # two fragments -> covering span, surface check skipped
    ann = "T1\tsocial_isolation_loneliness 11 21;23 26\tloneliness Her\n"
    mentions, _ = parse_standoff(ann, make_note(TEXT))
    assert mentions[0].discontinuous
    assert (mentions[0].start, mentions[0].end) == (11, 26)


def test_probable_side_carried():
    ann = "T1\tsocial_support_probable 11 21\tloneliness\n"
    mentions, _ = parse_standoff(ann, make_note(TEXT))
    assert mentions[0].category is FineCategory.PROBABLE
    assert mentions[0].probable_side is CoarseCategory.SS


def test_round_trip():
    ann = (
        "T1\tsocial_isolation_loneliness 11 21\tloneliness\n"
        "A1\tTemporality T1 Past\n"
        "T2\tsocial_support_social_network 55 69\tgoes to church\n"
        "A2\tNoContext T2\n"
    )
    note = make_note(TEXT)
    mentions, _ = parse_standoff(ann, note)
    rewritten = write_standoff(mentions)
    reparsed, warnings = parse_standoff(rewritten, note)
    assert not warnings
    assert [m.key() for m in reparsed] == [m.key() for m in mentions]


def test_effective_mentions_filtering():
    note = make_note(TEXT)
    ann = (
        "T1\tsocial_isolation_loneliness 11 21\tloneliness\n"
        "A1\tNegation T1\n"
        "T2\tsocial_support_social_network 55 69\tgoes to church\n"
        "A2\tNoContext T2\n"
        "T3\tsocial_support_probable 23 33\tHer sister\n"
    )
    mentions, _ = parse_standoff(ann, note)
    assert effective_mentions(mentions) == []
    labels = gold_document_labels(mentions)
    assert labels.none


def test_gold_document_labels():
    ann = (
        "T1\tsocial_isolation_loneliness 11 21\tloneliness\n"
        "T2\tsocial_support_social_network 55 69\tgoes to church\n"
    )
    mentions, _ = parse_standoff(ann, make_note(TEXT))
    labels = gold_document_labels(mentions)
    assert labels.fine == {FineCategory.LONELINESS, FineCategory.SOCIAL_NETWORK}
    assert labels.coarse == {CoarseCategory.SI, CoarseCategory.SS}


def test_mention_validation():
    with pytest.raises(ValueError):
        EntityMention(id="T1", category=FineCategory.LONELINESS, start=5, end=5, surface="")
    with pytest.raises(ValueError):
        EntityMention(
            id="T1",
            category=FineCategory.SS_GENERAL,
            start=0,
            end=2,
            surface="ab",
            negated=True,
        )
    with pytest.raises(ValueError):
        EntityMention(
            id="T1", category=FineCategory.PROBABLE, start=0, end=2, surface="ab"
        )


def test_default_tag_map_covers_schema():
    categories = {v[0] for v in DEFAULT_TAG_MAP.values()}
    assert categories == set(FineCategory)
