"""Draw a reproducible annotation sample from a note index."""

from ssikit import IndexRow, stratified_sample

# One row per candidate note: who it belongs to and which screens it hit.
# In practice this index comes from running the rule matcher and the template
# patterns over the whole corpus once.
index = []
for i in range(30):
    index.append(
        IndexRow(
            note_id=f"n{i:03d}",
            person_id=f"p{i % 12:02d}",  # several notes per patient
            ss_hit=i % 3 == 0,
            si_hit=i % 5 == 0,
            has_template=i % 7 == 0,
        )
    )

# Strata fill in a fixed priority order (si, ss, template, random) and a
# patient contributes at most one note overall, so high-value strata are
# never starved by the random remainder.
quotas = {"si": 4, "ss": 4, "template": 2, "random": 5}
result = stratified_sample(index, quotas, seed=20210601)

for stratum in ("si", "ss", "template", "random"):
    print(f"{stratum:<9}", list(result.per_stratum[stratum]))
print("total selected:", len(result.selected))
print("shortfalls:", result.shortfalls)

# Same seed, same sample, byte for byte; a different seed is a fresh draw.
again = stratified_sample(index, quotas, seed=20210601)
assert again.selected == result.selected
other = stratified_sample(index, quotas, seed=7)
print("seed 7 differs:", other.selected != result.selected)

# The one-note-per-patient rule holds across strata, not just within one.
persons = [row.person_id for row in index if row.note_id in result.selected]
assert len(persons) == len(set(persons))

# Unfillable quotas are reported, never silently backfilled from elsewhere.
greedy = stratified_sample(index, {"si": 10, "random": 3}, seed=1)
print("si shortfall with quota 10:", greedy.shortfalls)
