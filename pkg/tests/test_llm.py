"""Prompt assembly, slicing, answer handling, and the batch client."""

import datetime as dt
import itertools
import json
import random
import threading
from pathlib import Path

import httpx
import pytest

from ssikit import (
    Answer,
    AnswerError,
    ChoiceAnswer,
    FineCategory,
    InferenceEndpoint,
    MAIN_CATEGORIES,
    Note,
    PromptInstance,
    build_prompt,
    classify_note,
    normalize_answer,
    serialize_prompt,
    slice_note,
)
from ssikit.errors import ConfigError
from ssikit.llm import (
    CHOICES,
    INSTRUCTION,
    QUESTIONS,
    EndpointClient,
    aggregate_answers,
    emit_finetune_dataset,
    request_payload,
    scaffold_token_count,
    wrap_context,
)

GOLDEN = Path(__file__).parent / "golden"


def make_note(text: str) -> Note:
    return Note.build("p1", "n1", dt.date(2020, 1, 1), text)


def scripted_transport(script: dict, log: list = None) -> httpx.MockTransport:
    """A transport that answers like the scripted stub server."""

    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content.decode("utf-8"))
        if log is not None:
            log.append(body)
        for rule in script["rules"]:
            if (
                rule["question_contains"] in body["question"]
                and rule["context_contains"] in body["context"]
            ):
                return httpx.Response(200, json={"answer": rule["answer"]})
        return httpx.Response(200, json={"answer": script.get("default", "not relevant")})

    return httpx.MockTransport(handler)


def load_stub_script() -> dict:
    return json.loads((GOLDEN / "stub_script.json").read_text(encoding="utf-8"))


def test_prompt_questions_cover_main_categories():
    assert set(QUESTIONS) == set(MAIN_CATEGORIES)


def test_build_prompt_loneliness():
    prompt = build_prompt(FineCategory.LONELINESS, "Pt is well.")
    assert prompt.instruction == INSTRUCTION
    assert prompt.context == 'The Clinician wrote: "Pt is well."'
    assert prompt.question.endswith("experience feelings of loneliness?")
    assert prompt.choices == ("yes", "no", "not relevant")


def test_build_prompt_rejects_probable():
    with pytest.raises(ValueError):
        build_prompt(FineCategory.PROBABLE, "x")


def test_prompt_instance_invariants():
    with pytest.raises(ValueError):
        PromptInstance(
            category=FineCategory.LONELINESS,
            instruction="Answer the question.",
            context=wrap_context("x"),
            question=QUESTIONS[FineCategory.LONELINESS],
            choices=CHOICES,
        )
    with pytest.raises(ValueError):
        PromptInstance(
            category=FineCategory.LONELINESS,
            instruction=INSTRUCTION,
            context=wrap_context("x"),
            question=QUESTIONS[FineCategory.SS_GENERAL],
            choices=CHOICES,
        )
    with pytest.raises(ValueError):
        PromptInstance(
            category=FineCategory.LONELINESS,
            instruction=INSTRUCTION,
            context=wrap_context("x"),
            question=QUESTIONS[FineCategory.LONELINESS],
            choices=("yes", "no", "maybe"),
        )


def test_serialization_layout():
    text = serialize_prompt(build_prompt(FineCategory.SS_GENERAL, "Chunk here."))
    lines = text.split("\n")
    assert lines[0] == INSTRUCTION
    assert lines[1] == 'Context: The Clinician wrote: "Chunk here."'
    assert lines[2].startswith("Question: ")
    assert lines[3] == "Choices: yes; no; not relevant"


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("yes", Answer.YES),
        ("Yes", Answer.YES),
        (" no ", Answer.NO),
        ("no.", Answer.NO),
        ("No.", Answer.NO),
        ("not relevant", Answer.NOT_RELEVANT),
        ("Not Relevant.", Answer.NOT_RELEVANT),
    ],
)
def test_normalize_answer(raw, expected):
    assert normalize_answer(raw) is expected


@pytest.mark.parametrize("raw", ["maybe", "", "yes and no", "relevant", "n o"])
def test_normalize_answer_rejects(raw):
    with pytest.raises(AnswerError):
        normalize_answer(raw)


def test_choice_answer_validation():
    with pytest.raises(ValueError):
        ChoiceAnswer(FineCategory.LONELINESS, 0, Answer.YES, "yes", error="boom")
    with pytest.raises(ValueError):
        ChoiceAnswer(FineCategory.LONELINESS, 0, None, "zzz")


def test_slice_everything_fits():
    note = make_note("One two. Three four. Five six.")
    assert slice_note(note, 400) == ["One two. Three four. Five six."]


def test_slice_one_sentence_per_chunk():
    note = make_note("One two three. Four five six. Seven eight nine.")
    chunks = slice_note(note, scaffold_token_count() + 3)
    assert chunks == ["One two three.", "Four five six.", "Seven eight nine."]


def test_slice_oversize_sentence_hard_split():
    words = " ".join(f"w{i}" for i in range(25))
    note = make_note(words + ".")
    chunks = slice_note(note, scaffold_token_count() + 10)
    assert all(len(c.split()) <= 10 for c in chunks)
    assert " ".join(chunks).split() == (words + ".").split()


def test_slice_budget_too_small():
    with pytest.raises(ConfigError):
        slice_note(make_note("hello there."), scaffold_token_count())


def test_slice_cover_and_order_property():
    rng = random.Random(5)
    for _ in range(50):
        sentences = [
            " ".join(rng.choice("abcdefgh") for _ in range(rng.randint(1, 30))) + "."
            for _ in range(rng.randint(1, 8))
        ]
        note = make_note(" ".join(sentences))
        budget = scaffold_token_count() + rng.randint(1, 40)
        chunks = slice_note(note, budget)
        assert " ".join(chunks).split() == " ".join(note.sentence_texts()).split()
        for chunk in chunks:
            assert scaffold_token_count() + len(chunk.split()) <= budget


def answer(category, chunk_index, value):
    return ChoiceAnswer(category, chunk_index, Answer(value), value)


def test_aggregate_any_yes_brute_force():
    values = [a.value for a in Answer]
    for first, second in itertools.product(values, repeat=2):
        answers = [
            answer(FineCategory.SOCIAL_NETWORK, 0, first),
            answer(FineCategory.SOCIAL_NETWORK, 1, second),
        ]
        labels = aggregate_answers(answers)
        expected = "yes" in (first, second)
        assert (FineCategory.SOCIAL_NETWORK in labels.fine) == expected


def test_aggregate_yes_monotonicity():
    rng = random.Random(9)
    values = [a.value for a in Answer]
    for _ in range(50):
        answers = [
            answer(rng.choice(MAIN_CATEGORIES), i, rng.choice(values)) for i in range(6)
        ]
        before = aggregate_answers(answers).fine
        category = rng.choice(MAIN_CATEGORIES)
        extended = answers + [answer(category, 99, "yes")]
        after = aggregate_answers(extended).fine
        assert before | {category} == after


def test_aggregate_ignores_errors():
    answers = [
        ChoiceAnswer(FineCategory.LONELINESS, 0, None, "garbled", error="unmappable"),
        answer(FineCategory.SS_GENERAL, 0, "no"),
    ]
    assert aggregate_answers(answers).none


def test_classify_note_scripted():
    note = make_note(
        "Pt continues to express feelings of loneliness. She goes to church weekly."
    )
    endpoint = InferenceEndpoint(base_url="http://stub", backoff_base=0.0)
    log = []
    result = classify_note(
        note,
        MAIN_CATEGORIES,
        endpoint,
        token_budget=400,
        transport=scripted_transport(load_stub_script(), log),
    )
    assert not result.incomplete
    assert FineCategory.LONELINESS in result.labels.fine
    assert FineCategory.SOCIAL_NETWORK in result.labels.fine
    assert len(result.labels.fine) == 2
    # one chunk, nine categories
    assert len(log) == 9
    assert len(result.answers) == 9


def test_classify_request_count_and_order():
    long_text = " ".join(f"w{i}" for i in range(80)) + ". Second sentence here."
    note = make_note(long_text)
    budget = scaffold_token_count() + 40
    chunks = slice_note(note, budget)
    assert len(chunks) > 1
    categories = [FineCategory.LONELINESS, FineCategory.SS_GENERAL]
    log = []
    endpoint = InferenceEndpoint(base_url="http://stub", max_concurrency=3)
    result = classify_note(
        note,
        categories,
        endpoint,
        token_budget=budget,
        transport=scripted_transport(load_stub_script(), log),
    )
    assert len(log) == len(categories) * len(chunks)
    expected_order = [
        (c, i) for c in [FineCategory.SS_GENERAL, FineCategory.LONELINESS] for i in range(len(chunks))
    ]
    # reporting order puts ss_general (a support category) first
    assert [(a.category, a.chunk_index) for a in result.answers] == expected_order


def test_classify_category_url_templating():
    seen_urls = []

    def handler(request: httpx.Request) -> httpx.Response:
        seen_urls.append(str(request.url))
        return httpx.Response(200, json={"answer": "not relevant"})

    note = make_note("Short note.")
    endpoint = InferenceEndpoint(base_url="http://stub/{category}")
    classify_note(
        note,
        [FineCategory.LONELINESS],
        endpoint,
        transport=httpx.MockTransport(handler),
    )
    assert seen_urls == ["http://stub/loneliness/v1/answer"]


def test_client_retries_5xx_then_succeeds():
    attempts = []

    def handler(request: httpx.Request) -> httpx.Response:
        attempts.append(1)
        if len(attempts) < 3:
            return httpx.Response(503, text="busy")
        return httpx.Response(200, json={"answer": "yes"})

    endpoint = InferenceEndpoint(base_url="http://stub", max_retries=3, backoff_base=0.0)
    sleeps = []
    client = EndpointClient(
        endpoint, transport=httpx.MockTransport(handler), sleep=sleeps.append
    )
    prompt = build_prompt(FineCategory.LONELINESS, "x")
    assert client.raw_answer(prompt) == "yes"
    assert len(attempts) == 3
    assert len(sleeps) == 2


def test_client_backoff_is_exponential():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(500, text="boom")

    endpoint = InferenceEndpoint(base_url="http://stub", max_retries=3, backoff_base=0.5)
    sleeps = []
    client = EndpointClient(
        endpoint, transport=httpx.MockTransport(handler), sleep=sleeps.append
    )
    with pytest.raises(AnswerError):
        client.raw_answer(build_prompt(FineCategory.LONELINESS, "x"))
    assert sleeps == [0.5, 1.0, 2.0]


def test_client_4xx_is_permanent():
    attempts = []

    def handler(request: httpx.Request) -> httpx.Response:
        attempts.append(1)
        return httpx.Response(422, text="unscripted")

    endpoint = InferenceEndpoint(base_url="http://stub", max_retries=5, backoff_base=0.0)
    client = EndpointClient(endpoint, transport=httpx.MockTransport(handler))
    with pytest.raises(AnswerError):
        client.raw_answer(build_prompt(FineCategory.LONELINESS, "x"))
    assert len(attempts) == 1


def test_client_timeout_retries_then_fails():
    attempts = []

    def handler(request: httpx.Request) -> httpx.Response:
        attempts.append(1)
        raise httpx.ReadTimeout("slow")

    endpoint = InferenceEndpoint(base_url="http://stub", max_retries=2, backoff_base=0.0)
    client = EndpointClient(endpoint, transport=httpx.MockTransport(handler))
    with pytest.raises(AnswerError):
        client.raw_answer(build_prompt(FineCategory.LONELINESS, "x"))
    assert len(attempts) == 3


def test_classify_records_failures_partial_labels():
    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content.decode("utf-8"))
        if "experience feelings of loneliness" in body["question"]:
            return httpx.Response(404, text="gone")
        if "have a social network" in body["question"]:
            return httpx.Response(200, json={"answer": "yes"})
        return httpx.Response(200, json={"answer": "not relevant"})

    note = make_note("Sees friends often.")
    endpoint = InferenceEndpoint(base_url="http://stub", backoff_base=0.0)
    result = classify_note(
        note, MAIN_CATEGORIES, endpoint, transport=httpx.MockTransport(handler)
    )
    assert result.incomplete
    assert result.failures == ((FineCategory.LONELINESS, 0),)
    assert FineCategory.SOCIAL_NETWORK in result.labels.fine


def test_unmappable_answer_recorded_not_coerced():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(200, json={"answer": "definitely"})

    note = make_note("Some text.")
    endpoint = InferenceEndpoint(base_url="http://stub")
    result = classify_note(
        note, [FineCategory.LONELINESS], endpoint, transport=httpx.MockTransport(handler)
    )
    assert result.incomplete
    assert result.answers[0].raw == "definitely"
    assert result.answers[0].answer is None
    assert result.labels.none


def test_classify_concurrency_bound():
    active = 0
    peak = 0
    lock = threading.Lock()

    def handler(request: httpx.Request) -> httpx.Response:
        nonlocal active, peak
        with lock:
            active += 1
            peak = max(peak, active)
        # let other workers pile up if the bound is broken
        import time

        time.sleep(0.005)
        with lock:
            active -= 1
        return httpx.Response(200, json={"answer": "not relevant"})

    note = make_note("A sentence.")
    endpoint = InferenceEndpoint(base_url="http://stub", max_concurrency=2)
    classify_note(note, MAIN_CATEGORIES, endpoint, transport=httpx.MockTransport(handler))
    assert peak <= 2


def test_wire_payload_shape():
    prompt = build_prompt(FineCategory.LONELINESS, "Pt is well.", note_id="n1")
    payload = request_payload(prompt)
    assert set(payload) == {"instruction", "context", "question", "choices"}
    assert payload["choices"] == ["yes", "no", "not relevant"]


def test_emit_finetune_dataset(tmp_path):
    examples = tmp_path / "ex.jsonl"
    rows = [
        {"category": "loneliness", "context": "He denies suffering from loneliness.", "answer": "no."},
        {"category": "loneliness", "context": "Pt is currently homeless.", "answer": "not relevant"},
        {"category": "loneliness", "context": "Expresses feelings of loneliness.", "answer": "yes"},
    ]
    examples.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    records, counts, warnings = emit_finetune_dataset(examples)
    assert len(records) == 3
    assert records[0]["target"] == "no."  # verbatim, period kept
    assert records[1]["target"] == "not relevant"
    assert records[0]["category"] == "loneliness"
    assert records[0]["input"].startswith(INSTRUCTION)
    assert 'Context: The Clinician wrote: "He denies suffering from loneliness."' in records[0]["input"]
    assert counts["loneliness"] == {"yes": 1, "no": 1, "not relevant": 1}
    # loneliness is complete; the other eight categories warn three times each
    assert len(warnings) == 8 * 3


def test_emit_finetune_empty_file(tmp_path):
    examples = tmp_path / "ex.jsonl"
    examples.write_text("", encoding="utf-8")
    records, counts, warnings = emit_finetune_dataset(examples)
    assert records == []
    assert len(warnings) == 9 * 3


def test_emit_finetune_rejects_bad_answer(tmp_path):
    examples = tmp_path / "ex.jsonl"
    examples.write_text(
        json.dumps({"category": "loneliness", "context": "x", "answer": "dunno"}) + "\n",
        encoding="utf-8",
    )
    with pytest.raises(AnswerError):
        emit_finetune_dataset(examples)


def test_emit_finetune_rejects_probable(tmp_path):
    examples = tmp_path / "ex.jsonl"
    examples.write_text(
        json.dumps({"category": "probable", "context": "x", "answer": "yes"}) + "\n",
        encoding="utf-8",
    )
    with pytest.raises(ConfigError):
        emit_finetune_dataset(examples)


def test_golden_wire_pairs_replay():
    # the recorded request/response pairs replay exactly through the script
    pairs = json.loads((GOLDEN / "wire_contract.json").read_text(encoding="utf-8"))
    transport = scripted_transport(load_stub_script())
    with httpx.Client(transport=transport, base_url="http://stub") as client:
        for pair in pairs:
            response = client.post("/v1/answer", json=pair["request"])
            assert response.status_code == 200
            assert response.json() == pair["response"]
