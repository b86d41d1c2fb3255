"""Prompt construction and the batch client for the choice-answer endpoint.

Each fine-grained category has one fixed question; a note is sliced into
chunks under a token budget, every (category, chunk) pair becomes one
prompt, and a category labels the note when any of its chunks is answered
"yes".  The wire contract is a single JSON POST per prompt; see
:data:`ANSWER_PATH`.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

import httpx

from .categories import (
    DocumentLabels,
    FineCategory,
    MAIN_CATEGORIES,
    derive_document_labels,
)
from .errors import AnswerError, ConfigError
from .notes import Note

log = logging.getLogger(__name__)

ANSWER_PATH = "/v1/answer"

INSTRUCTION = (
    "Read what the Clinician wrote about the patient in the Context and "
    "answer the Question by choosing from the provided Choices."
)

CHOICES: tuple[str, str, str] = ("yes", "no", "not relevant")

#: The fixed question per category.  These strings are part of the wire
#: contract with fine-tuned models; do not edit casually.
QUESTIONS: dict[FineCategory, str] = {
    FineCategory.SOCIAL_NETWORK: (
        "In the clinician's opinion, does or did the patient have a social network?"
    ),
    FineCategory.EMOTIONAL_SUPPORT: (
        "In the clinician's opinion, does or did the patient have adequate "
        "emotional support?"
    ),
    FineCategory.INSTRUMENTAL_SUPPORT: (
        "In the clinician's opinion, does or did the patient have access to "
        "instrumental support?"
    ),
    FineCategory.SS_GENERAL: (
        "In the clinician's opinion, does or did the patient have social support; "
        "however, there is not enough information to classify the type of social "
        "support as specifically instrumental support, emotional support, or "
        "social network?"
    ),
    FineCategory.LONELINESS: (
        "In the clinician's opinion, does or did the patient experience feelings "
        "of loneliness?"
    ),
    FineCategory.NO_SOCIAL_NETWORK: (
        "In the clinician's opinion, does or did the patient lack a social network?"
    ),
    FineCategory.NO_EMOTIONAL_SUPPORT: (
        "In the clinician's opinion, does or did the patient lack emotional support?"
    ),
    FineCategory.NO_INSTRUMENTAL_SUPPORT: (
        "In the clinician's opinion, does or did the patient lack access to "
        "instrumental support?"
    ),
    FineCategory.SI_GENERAL: (
        "In the clinician's opinion, does or did the patient have social isolation; "
        "however, there is not enough information to classify the type of social "
        "isolation as specifically lack of instrumental support, lack of emotional "
        "support, lack of social network, or loneliness?"
    ),
}


class Answer(str, Enum):
    YES = "yes"
    NO = "no"
    NOT_RELEVANT = "not relevant"


def wrap_context(chunk: str) -> str:
    return f'The Clinician wrote: "{chunk}"'


@dataclass(frozen=True)
class PromptInstance:
    """One fully assembled prompt for one (category, chunk) pair."""

    category: FineCategory
    instruction: str
    context: str
    question: str
    choices: tuple[str, str, str]
    note_id: str = ""
    chunk_index: int = 0

    def __post_init__(self):
        if self.instruction != INSTRUCTION:
            raise ValueError("instruction deviates from the canonical instruction")
        if self.question != QUESTIONS.get(self.category):
            raise ValueError(f"question deviates from the {self.category.value} question")
        if tuple(self.choices) != CHOICES:
            raise ValueError("choices must be exactly ('yes', 'no', 'not relevant')")


@dataclass(frozen=True)
class ChoiceAnswer:
    """One endpoint answer for one (category, chunk) pair.

    ``answer`` is None exactly when the raw answer was unmappable or the
    request failed; ``error`` then says why.
    """

    category: FineCategory
    chunk_index: int
    answer: Optional[Answer]
    raw: str
    error: Optional[str] = None

    def __post_init__(self):
        if (self.answer is None) == (self.error is None):
            raise ValueError("exactly one of answer and error must be set")


@dataclass(frozen=True)
class InferenceEndpoint:
    """Where and how to reach the answer service.

    ``base_url`` may contain ``{category}`` for per-category endpoints;
    retries apply to 5xx and timeouts only, with exponential backoff.
    """

    base_url: str
    timeout: float = 30.0
    max_retries: int = 3
    max_concurrency: int = 4
    backoff_base: float = 0.25

    def __post_init__(self):
        if self.max_retries < 0 or self.max_concurrency < 1:
            raise ConfigError("max_retries must be >= 0 and max_concurrency >= 1")
        if self.timeout <= 0 or self.backoff_base < 0:
            raise ConfigError("timeout must be positive and backoff_base non-negative")

    def url_for(self, category: FineCategory) -> str:
        base = self.base_url.replace("{category}", category.value).rstrip("/")
        return base + ANSWER_PATH


def normalize_answer(raw: str) -> Answer:
    """Map a raw answer string onto the closed choice set.

    Accepts case variants and trailing periods ("No." → no); anything else
    raises, never coerces.
    """
    cleaned = raw.strip().lower().rstrip(".").strip()
    for choice in Answer:
        if cleaned == choice.value:
            return choice
    raise AnswerError(f"answer {raw!r} is not one of {[c.value for c in Answer]}")


def build_prompt(
    category: FineCategory, chunk: str, note_id: str = "", chunk_index: int = 0
) -> PromptInstance:
    """Assemble the canonical prompt for one category over one chunk."""
    if category not in QUESTIONS:
        raise ValueError(f"unsupported category {category.value!r}")
    return PromptInstance(
        category=category,
        instruction=INSTRUCTION,
        context=wrap_context(chunk),
        question=QUESTIONS[category],
        choices=CHOICES,
        note_id=note_id,
        chunk_index=chunk_index,
    )


def serialize_prompt(p: PromptInstance) -> str:
    """Canonical single-string form, also used as model input server-side."""
    return (
        f"{p.instruction}\n"
        f"Context: {p.context}\n"
        f"Question: {p.question}\n"
        f"Choices: {'; '.join(p.choices)}"
    )


def request_payload(p: PromptInstance) -> dict:
    return {
        "instruction": p.instruction,
        "context": p.context,
        "question": p.question,
        "choices": list(p.choices),
    }


def scaffold_token_count() -> int:
    """Whitespace tokens a prompt spends before any chunk text.

    Measured on an empty chunk with the longest question, so every category
    fits under the same budget.
    """
    return max(
        len(serialize_prompt(build_prompt(c, "")).split()) for c in QUESTIONS
    )


def slice_note(note: Note, token_budget: int = 400) -> list[str]:
    """Pack sentences greedily into chunks under the token budget.

    The budget covers the whole prompt; the scaffold's token count is
    reserved first.  A single sentence longer than the remaining budget is
    hard-split on whitespace.  Chunk tokens concatenate back to the note's
    sentence tokens, in order.
    """
    chunk_budget = token_budget - scaffold_token_count()
    if chunk_budget < 1:
        raise ConfigError(
            f"token budget {token_budget} leaves no room after the "
            f"{scaffold_token_count()}-token prompt scaffold"
        )
    chunks: list[str] = []
    current: list[str] = []
    current_tokens = 0

    def flush():
        nonlocal current, current_tokens
        if current:
            chunks.append(" ".join(current))
            current, current_tokens = [], 0

    for sentence in note.sentence_texts():
        words = sentence.split()
        if not words:
            continue
        if len(words) > chunk_budget:
            flush()
            for i in range(0, len(words), chunk_budget):
                piece = words[i : i + chunk_budget]
                if len(piece) == chunk_budget:
                    chunks.append(" ".join(piece))
                else:
                    current, current_tokens = [" ".join(piece)], len(piece)
            continue
        if current_tokens + len(words) > chunk_budget:
            flush()
        current.append(" ".join(words))
        current_tokens += len(words)
    flush()
    return chunks


def aggregate_answers(answers: Iterable[ChoiceAnswer]) -> DocumentLabels:
    """Any-chunk-yes: a category labels the note iff some chunk said yes."""
    fine = {a.category for a in answers if a.answer is Answer.YES}
    return derive_document_labels(fine)


@dataclass(frozen=True)
class NoteClassification:
    """Outcome of classifying one note through the endpoint."""

    labels: DocumentLabels
    answers: tuple[ChoiceAnswer, ...]
    failures: tuple[tuple[FineCategory, int], ...] = ()

    @property
    def incomplete(self) -> bool:
        return bool(self.failures)


class EndpointClient:
    """httpx-backed client with retry/backoff; a transport can be injected
    so tests run without sockets."""

    def __init__(
        self,
        endpoint: InferenceEndpoint,
        transport: Optional[httpx.BaseTransport] = None,
        sleep=time.sleep,
    ):
        self.endpoint = endpoint
        self._sleep = sleep
        self._client = httpx.Client(timeout=endpoint.timeout, transport=transport)

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def raw_answer(self, prompt: PromptInstance) -> str:
        """POST one prompt; return the raw answer string.

        4xx responses are permanent; 5xx and transport timeouts are retried
        ``max_retries`` times with exponential backoff.
        """
        url = self.endpoint.url_for(prompt.category)
        payload = request_payload(prompt)
        last_error = "unknown error"
        for attempt in range(self.endpoint.max_retries + 1):
            if attempt:
                self._sleep(self.endpoint.backoff_base * (2 ** (attempt - 1)))
            try:
                response = self._client.post(url, json=payload)
            except httpx.TimeoutException as exc:
                last_error = f"timeout: {exc}"
                continue
            except httpx.HTTPError as exc:
                raise AnswerError(f"transport failure for {url}: {exc}") from exc
            if response.status_code == 200:
                try:
                    body = response.json()
                except json.JSONDecodeError as exc:
                    raise AnswerError(f"non-JSON response from {url}: {exc}") from None
                if not isinstance(body, dict) or not isinstance(body.get("answer"), str):
                    raise AnswerError(f"response from {url} lacks a string 'answer'")
                return body["answer"]
            if 400 <= response.status_code < 500:
                raise AnswerError(
                    f"permanent HTTP {response.status_code} from {url}: "
                    f"{response.text[:200]}"
                )
            last_error = f"HTTP {response.status_code}"
        raise AnswerError(f"retries exhausted for {url}: {last_error}")

    def answer(self, prompt: PromptInstance) -> ChoiceAnswer:
        """Fetch and normalize one answer; failures become error records."""
        try:
            raw = self.raw_answer(prompt)
        except AnswerError as exc:
            return ChoiceAnswer(
                category=prompt.category,
                chunk_index=prompt.chunk_index,
                answer=None,
                raw="",
                error=str(exc),
            )
        try:
            answer = normalize_answer(raw)
        except AnswerError as exc:
            return ChoiceAnswer(
                category=prompt.category,
                chunk_index=prompt.chunk_index,
                answer=None,
                raw=raw,
                error=str(exc),
            )
        return ChoiceAnswer(
            category=prompt.category, chunk_index=prompt.chunk_index, answer=answer, raw=raw
        )


def classify_note(
    note: Note,
    categories: Iterable[FineCategory],
    endpoint: InferenceEndpoint,
    token_budget: int = 400,
    transport: Optional[httpx.BaseTransport] = None,
    client: Optional[EndpointClient] = None,
) -> NoteClassification:
    """Ask every category question about every chunk and aggregate.

    Requests run concurrently up to the endpoint's bound; the answer list is
    reassembled in (category, chunk) order, so scheduling never changes the
    output.  Failed pairs are reported, and partial labels are still
    returned.
    """
    wanted = [c for c in MAIN_CATEGORIES if c in set(categories)]
    chunks = slice_note(note, token_budget)
    prompts = [
        build_prompt(category, chunk, note_id=note.note_id, chunk_index=i)
        for category in wanted
        for i, chunk in enumerate(chunks)
    ]

    own_client = client is None
    if own_client:
        client = EndpointClient(endpoint, transport=transport)
    try:
        if prompts:
            with ThreadPoolExecutor(max_workers=endpoint.max_concurrency) as pool:
                answers = list(pool.map(client.answer, prompts))
        else:
            answers = []
    finally:
        if own_client:
            client.close()

    order = {c: k for k, c in enumerate(MAIN_CATEGORIES)}
    answers.sort(key=lambda a: (order[a.category], a.chunk_index))
    failures = tuple((a.category, a.chunk_index) for a in answers if a.error is not None)
    return NoteClassification(
        labels=aggregate_answers(answers), answers=tuple(answers), failures=failures
    )


def load_finetune_examples(examples_file: str | Path) -> list[dict]:
    """Read curated examples: JSONL with category, context, answer fields."""
    examples = []
    for lineno, line in enumerate(
        Path(examples_file).read_text(encoding="utf-8").splitlines(), 1
    ):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{examples_file}:{lineno}: bad JSON: {exc}") from None
        missing = {"category", "context", "answer"} - set(record)
        if missing:
            raise ConfigError(f"{examples_file}:{lineno}: missing fields {sorted(missing)}")
        examples.append(record)
    return examples


def emit_finetune_dataset(
    examples_file: str | Path,
) -> tuple[list[dict], dict[str, dict[str, int]], list[str]]:
    """Turn curated (category, context, answer) examples into training rows.

    Each row carries the full serialized prompt as ``input`` and the curated
    answer string verbatim as ``target`` (a "no." keeps its period).  Counts
    per category and answer class are returned, with a warning for every
    missing (category, class) pair.
    """
    records = []
    counts: dict[str, dict[str, int]] = {
        c.value: {a.value: 0 for a in Answer} for c in MAIN_CATEGORIES
    }
    for example in load_finetune_examples(examples_file):
        try:
            category = FineCategory(example["category"])
            if category not in QUESTIONS:
                raise ValueError(f"unsupported category {category.value!r}")
        except ValueError as exc:
            raise ConfigError(f"{examples_file}: {exc}") from None
        target = example["answer"]
        answer = normalize_answer(target)
        prompt = build_prompt(category, example["context"])
        records.append(
            {
                "input": serialize_prompt(prompt),
                "target": target,
                "category": category.value,
            }
        )
        counts[category.value][answer.value] += 1

    warnings = []
    for category in MAIN_CATEGORIES:
        for answer in Answer:
            if counts[category.value][answer.value] == 0:
                warnings.append(
                    f"category {category.value!r} has no {answer.value!r} example"
                )
    return records, counts, warnings
