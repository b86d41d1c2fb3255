"""Score predictions against gold: per-category metrics, agreement, ICD."""

from ssikit import (
    DocumentLabels,
    FineCategory,
    align_labels,
    cohens_kappa,
    derive_document_labels,
    iaa_report,
    icd_comparison,
    macro_report,
    score_binary,
)

LON = FineCategory.LONELINESS
NET = FineCategory.SOCIAL_NETWORK


def labels(*fine: FineCategory) -> DocumentLabels:
    return derive_document_labels(fine)


# Binary metrics come with fixed zero conventions: any 0/0 ratio is 0, never
# NaN, so a category the system never predicts scores 0 precision, not a crash.
p, r, f = score_binary([True, True, False, False], [True, False, True, False])
print(f"precision={p} recall={r} f={f:.4f}")

# Gold and predictions live in keyed maps; align_labels joins them on note id
# and refuses to silently drop notes present on only one side.
gold = {
    "n1": labels(LON),
    "n2": labels(NET),
    "n3": labels(),
    "n4": labels(LON, NET),
}
pred = {
    "n1": labels(LON),
    "n2": labels(),
    "n3": labels(),
    "n4": labels(LON),
}
ids, gold_docs, pred_docs = align_labels(gold, pred)

# The macro average only covers categories with at least one gold positive;
# the rest are reported but skipped, so unused categories cannot inflate it.
report = macro_report(gold_docs, pred_docs, level="fine")
print()
print(report.to_text())

report_c = macro_report(gold_docs, pred_docs, level="coarse")
print()
print(report_c.to_text())

# Agreement between two annotators, pooled the same way: a label enters the
# headline mean when either rater used it at least once.
kappa = cohens_kappa([True, True, False, False, True], [True, False, False, False, True])
print(f"\npairwise kappa: {kappa:.4f}")

rater_b = dict(pred)
rater_b["n2"] = labels(NET)
iaa = iaa_report(gold, rater_b)
print()
print(iaa.to_text())

# Structured visit codes rarely overlap the note-level gold; the comparison
# counts how many gold SI notes the default isolation code set would flag.
visits = {
    "n1": ["I10", "Z60.2"],
    "n2": ["E11.9"],
    "n3": [],
    "n4": ["z60.4"],
}
icd = icd_comparison(visits, gold)
print("\nicd:", icd.to_record())
assert icd.overlap == 2  # n1 and n4 are gold SI and carry an isolation code
