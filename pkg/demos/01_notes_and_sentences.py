"""Turn raw note text into a Note: template blanking plus sentence spans."""

import datetime as dt
import re

from ssikit import Note

raw = (
    "Seen for follow up. lacks social support: yes/no/unknown. "
    "Pt lives with spouse and reports feeling well. Plan: continue meds."
)

# the embedded form-template line would look like a finding to the matcher,
# so it is blanked in place; offsets into the text stay valid
template = re.compile(r"lacks social support:\s*yes/no/unknown\.?", re.IGNORECASE)

note = Note.build(
    person_id="p42",
    note_id="n1001",
    note_date=dt.date(2021, 3, 9),
    raw_text=raw,
    template_patterns=[template],
)

print("raw:  ", note.raw_text)
print("clean:", note.clean_text)
assert len(note.clean_text) == len(note.raw_text)

print("\nsentences:")
for start, end in note.sentences:
    print(f"  [{start:3d}:{end:3d}] {note.clean_text[start:end]!r}")

# abbreviation-aware splitting: "Dr." does not end a sentence
note2 = Note.build(
    person_id="p42",
    note_id="n1002",
    note_date=dt.date(2021, 3, 9),
    raw_text="Saw Dr. Alvarez today. Wound healing well.",
    abbreviations=frozenset({"dr."}),
)
print("\nwith abbreviation list:")
for text in note2.sentence_texts():
    print(" ", repr(text))
