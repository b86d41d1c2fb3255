"""Run the rule-based matcher over a note: hits, negation, and exclusions."""

import datetime as dt

from ssikit import FineCategory, Note, match_note, rbs_document_labels
from ssikit.defaults import default_lexicon

lexicon = default_lexicon()

note = Note.build(
    person_id="p7",
    note_id="n1",
    note_date=dt.date(2020, 6, 2),
    raw_text=(
        "Pt endorses feelings of loneliness since the move. "
        "Denies suffering from loneliness per daughter, however. "
        "She needs home health aide at discharge. "
        "A home health aide visits twice weekly."
    ),
)

mentions = match_note(note, lexicon)
for m in mentions:
    flag = " [negated]" if m.negated else ""
    print(f"{m.id}  {m.category.value:<35} [{m.start}:{m.end}] {m.surface!r}{flag}")

# At offset 12 the longest phrase wins, so "feelings of loneliness" beats the
# bare "loneliness"; the inner hit starting at 24 is a separate start and kept.
# The "denies ..." hit is negated by the cue earlier in the same sentence.
# "needs home health aide" is on the exclusion list, so the aide mention in
# sentence three is suppressed and only the genuine one in sentence four stays.
texts = [m.surface.lower() for m in mentions]
assert "feelings of loneliness" in texts
assert texts.count("home health aide") == 1

# negated loneliness mentions are kept for audit but dropped from note labels
labels = rbs_document_labels(note, lexicon)
print("\nfine:  ", sorted(c.value for c in labels.fine))
print("coarse:", sorted(c.value for c in labels.coarse))
assert FineCategory.LONELINESS in labels.fine
assert FineCategory.INSTRUMENTAL_SUPPORT in labels.fine
