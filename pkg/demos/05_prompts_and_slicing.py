"""Build prompts, slice a long note into chunks, and classify over HTTP."""

import datetime as dt
import json

import httpx

from ssikit import (
    FineCategory,
    InferenceEndpoint,
    MAIN_CATEGORIES,
    Note,
    build_prompt,
    classify_note,
    serialize_prompt,
    slice_note,
)
from ssikit.llm import request_payload, scaffold_token_count

# One prompt per (category, chunk). The serialized form is exactly what a
# fine-tuned model sees; every byte matters, so the pieces are pinned.
prompt = build_prompt(FineCategory.LONELINESS, "Pt reports feeling lonely.")
print(serialize_prompt(prompt))
print()

# Slicing packs whole sentences greedily under a token budget that covers the
# full prompt, so the scaffold's own tokens are reserved off the top.
print("scaffold tokens:", scaffold_token_count())

long_note = Note.build(
    person_id="p9",
    note_id="n5",
    note_date=dt.date(2021, 1, 5),
    raw_text=" ".join(f"Sentence number {i} with several filler words." for i in range(40)),
)
chunks = slice_note(long_note, token_budget=120)
print(f"chunks at budget 120: {len(chunks)}")
for i, chunk in enumerate(chunks[:2]):
    print(f"  [{i}] {len(chunk.split())} tokens: {chunk[:60]}...")

# A scripted answer service, in process via httpx's mock transport: answers
# yes to the loneliness question when the chunk mentions it, otherwise not
# relevant. A real deployment answers the same wire format over the network.
def respond(request: httpx.Request) -> httpx.Response:
    body = json.loads(request.content)
    if "feelings of loneliness" in body["question"] and "lonely" in body["context"]:
        return httpx.Response(200, json={"answer": "yes"})
    return httpx.Response(200, json={"answer": "not relevant"})

endpoint = InferenceEndpoint(base_url="http://answers.local", max_concurrency=4)
note = Note.build(
    person_id="p9",
    note_id="n6",
    note_date=dt.date(2021, 1, 5),
    raw_text="Pt has been feeling lonely since her husband died. Vitals stable.",
)
result = classify_note(
    note,
    MAIN_CATEGORIES,
    endpoint,
    transport=httpx.MockTransport(respond),
)

print("\nanswers:")
for a in result.answers:
    print(f"  {a.category.value:<25} chunk {a.chunk_index}: {a.answer.value}")
print("fine:  ", sorted(c.value for c in result.labels.fine))
print("coarse:", sorted(c.value for c in result.labels.coarse))
print("incomplete:", result.incomplete)
assert result.labels.fine == frozenset({FineCategory.LONELINESS})

# The wire payload for one prompt, as POSTed to /v1/answer:
print("\npayload:", json.dumps(request_payload(prompt), indent=2)[:200], "...")
