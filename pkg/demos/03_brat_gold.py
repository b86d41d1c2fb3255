"""Parse standoff annotations, derive gold labels, and round-trip them."""

import datetime as dt

from ssikit import (
    Note,
    gold_document_labels,
    parse_standoff,
    write_standoff,
)
from ssikit.brat import effective_mentions

text = "Pt reports loneliness. Her sister visits daily and she goes to church."
note = Note.build("p1", "n1", dt.date(2020, 1, 1), text)

# A small annotation file as an annotation tool would save it: entity lines
# (tag, offsets, surface copy) plus attribute lines that point back at them.
ann = (
    "T1\tsocial_isolation_loneliness 11 21\tloneliness\n"
    "A1\tTemporality T1 Present\n"
    "A2\tNegation T1\n"
    "T2\tsocial_support_social_network 55 69\tgoes to church\n"
    "T3\tsocial_support_social_network 23 33\tHer sister\n"
    "A3\tNoContext T3\n"
)

mentions, warnings = parse_standoff(ann, note)
assert not warnings
for m in mentions:
    print(
        f"{m.id}  {m.category.value:<20} [{m.start}:{m.end}] {m.surface!r}"
        f"  negated={m.negated} no_context={m.no_context}"
    )

# The negated loneliness and the no-context sister mention are excluded, so
# the note is labeled from "goes to church" alone.
kept = effective_mentions(mentions)
print("\neffective:", [m.surface for m in kept])

labels = gold_document_labels(mentions)
print("fine:  ", sorted(c.value for c in labels.fine))
print("coarse:", sorted(c.value for c in labels.coarse))
assert sorted(c.value for c in labels.coarse) == ["SS"]

# Writing mentions back out renumbers ids but preserves everything else.
round_trip = write_standoff(mentions)
print("\nround trip:")
print(round_trip, end="")
reparsed, _ = parse_standoff(round_trip, note)
assert [(m.category, m.start, m.end, m.negated) for m in reparsed] == [
    (m.category, m.start, m.end, m.negated) for m in mentions
]
