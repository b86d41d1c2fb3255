"""Answer backends: a deterministic scripted stub and a local seq2seq model."""

import json
import threading
from pathlib import Path


class UnscriptedError(Exception):
    """Raised in strict stub mode when no rule matches the request."""


def load_script(path: str | Path) -> dict:
    """Load and validate a stub script.

    Shape: {"rules": [{"question_contains", "context_contains", "answer"}...],
    "default": str}.  Rules are applied in order; the first whose substrings
    both appear wins.
    """
    try:
        script = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(script, dict) or not isinstance(script.get("rules"), list):
        raise ValueError(f"{path}: expected an object with a 'rules' list")
    for i, rule in enumerate(script["rules"]):
        for key in ("question_contains", "context_contains", "answer"):
            if not isinstance(rule.get(key), str):
                raise ValueError(f"{path}: rule {i} is missing string field {key!r}")
    default = script.get("default", "not relevant")
    if not isinstance(default, str):
        raise ValueError(f"{path}: 'default' must be a string")
    script["default"] = default
    return script


class ScriptedBackend:
    """First-match-wins contains-rules; optionally strict about coverage."""

    def __init__(self, script: dict, strict: bool = False):
        self.script = script
        self.strict = strict

    def answer(self, instruction: str, context: str, question: str, choices) -> str:
        for rule in self.script["rules"]:
            if (
                rule["question_contains"] in question
                and rule["context_contains"] in context
            ):
                return rule["answer"]
        if self.strict:
            raise UnscriptedError(
                "no scripted rule matches this question/context pair"
            )
        return self.script["default"]


class Seq2SeqBackend:
    """Scores each choice string under a local checkpoint; best one wins.

    The model input is the canonical four-line prompt serialization carried
    by the request fields.  Decoding is constrained by construction: the
    response is always one of the submitted choice strings, verbatim.
    Inference is serialized behind a lock; correctness does not depend on it.
    """

    def __init__(self, checkpoint: str):
        import torch
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(checkpoint)
        self.model = AutoModelForSeq2SeqLM.from_pretrained(checkpoint)
        self.model.eval()
        self._lock = threading.Lock()

    @staticmethod
    def serialize(instruction: str, context: str, question: str, choices) -> str:
        return (
            f"{instruction}\n"
            f"Context: {context}\n"
            f"Question: {question}\n"
            f"Choices: {'; '.join(choices)}"
        )

    def _sequence_score(self, input_ids, choice: str) -> float:
        torch = self._torch
        labels = self.tokenizer(choice, return_tensors="pt").input_ids
        with torch.no_grad():
            logits = self.model(input_ids=input_ids, labels=labels).logits
        log_probs = torch.log_softmax(logits, dim=-1)
        picked = log_probs[0, range(labels.shape[1]), labels[0]]
        return float(picked.sum())

    def answer(self, instruction: str, context: str, question: str, choices) -> str:
        text = self.serialize(instruction, context, question, choices)
        with self._lock:
            input_ids = self.tokenizer(text, return_tensors="pt").input_ids
            scores = [self._sequence_score(input_ids, c) for c in choices]
        best = max(range(len(choices)), key=lambda i: scores[i])
        return choices[best]
