"""Grow a lexicon with word-vector neighbors, then merge reviewed picks."""

import tempfile
from pathlib import Path

import numpy as np

from ssikit import (
    EmbeddingTable,
    FineCategory,
    Lexicon,
    expansion_round,
    lexicon_vector,
    most_similar,
)
from ssikit.lexicon import merge_approved_candidates, write_candidates_tsv

# A toy embedding table. Real use loads pretrained clinical word vectors with
# EmbeddingTable.load(path); the text format is the usual "count dim" header
# followed by one token-plus-numbers line per row.
rng = np.random.default_rng(7)
tokens = ["lonely", "lonesome", "isolated", "alone", "friendless",
          "church", "temple", "mosque", "clinic", "spouse"]
matrix = rng.normal(size=(len(tokens), 8))
# plant near-duplicates so the neighborhoods are predictable
matrix[1] = matrix[0] + 0.01 * rng.normal(size=8)   # lonesome ~ lonely
matrix[6] = matrix[5] + 0.01 * rng.normal(size=8)   # temple ~ church
emb = EmbeddingTable(tokens, matrix)

# Phrase vectors average the covered tokens; "feel" has no vector here and is
# reported as missing rather than failing the whole phrase.
vec = lexicon_vector(["feel", "lonely"], emb)
print("covered:", vec.covered_tokens, "missing:", vec.missing_tokens)

for token, cosine in most_similar(vec, emb, k=3, exclude=["lonely"]):
    print(f"  {token:<12} {cosine:+.4f}")

lex = Lexicon(
    inclusion={
        FineCategory.LONELINESS: ("lonely", "feel lonely"),
        FineCategory.SOCIAL_NETWORK: ("goes to church",),
    },
    version="demo",
)

# One expansion round per category: neighbors of every phrase, pooled, minus
# tokens the category already uses. Candidates are review input, never
# auto-added to the lexicon.
candidates = {
    category: expansion_round(lex, category, emb, k=3)
    for category in lex.categories()
}
for category, rows in candidates.items():
    print(f"\n{category.value}:")
    for token, cosine in rows:
        print(f"  {token:<12} {cosine:+.4f}")

assert any(t == "lonesome" for t, _ in candidates[FineCategory.LONELINESS])
assert any(t == "temple" for t, _ in candidates[FineCategory.SOCIAL_NETWORK])

# The review sheet is a TSV with an empty decision column; a human marks rows
# with y/yes to approve. Approved tokens come back as single-token phrases.
with tempfile.TemporaryDirectory() as tmp:
    sheet = Path(tmp) / "candidates.tsv"
    write_candidates_tsv(candidates, sheet)
    reviewed = []
    for line in sheet.read_text().splitlines():
        if line.endswith("\t") and "lonesome" in line:
            line += "y"
        reviewed.append(line)
    sheet.write_text("\n".join(reviewed) + "\n")

    merged = merge_approved_candidates(lex, sheet)

print("\nmerged loneliness phrases:", merged.phrases(FineCategory.LONELINESS))
assert "lonesome" in merged.phrases(FineCategory.LONELINESS)
