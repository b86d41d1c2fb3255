"""JSONL record conversion for notes, mentions, and document labels.

Every artifact the pipeline writes is JSON Lines with sorted keys and no
timestamps, so reruns over identical inputs are byte-identical.
"""

from __future__ import annotations

import datetime as dt
import json
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .brat import EntityMention
from .categories import DocumentLabels
from .notes import Note


def dumps_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    text = "".join(dumps_record(r) + "\n" for r in records)
    Path(path).write_text(text, encoding="utf-8")


def read_jsonl(path: str | Path) -> list[dict]:
    records = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}:{lineno}: bad JSON: {exc}") from None
    return records


def note_to_record(note: Note) -> dict:
    return {
        "person_id": note.person_id,
        "note_id": note.note_id,
        "note_date": note.note_date.isoformat(),
        "raw_text": note.raw_text,
        "clean_text": note.clean_text,
        "sentences": [list(span) for span in note.sentences],
    }


def note_from_record(record: dict) -> Note:
    return Note(
        person_id=record["person_id"],
        note_id=record["note_id"],
        note_date=dt.date.fromisoformat(record["note_date"]),
        raw_text=record["raw_text"],
        clean_text=record["clean_text"],
        sentences=tuple((int(s), int(e)) for s, e in record["sentences"]),
    )


def mention_to_record(mention: EntityMention) -> dict:
    return {
        "category": mention.category.value,
        "start": mention.start,
        "end": mention.end,
        "surface": mention.surface,
        "negated": mention.negated,
    }


def labels_record(
    note_id: str,
    labels: DocumentLabels,
    person_id: Optional[str] = None,
    mentions: Sequence[EntityMention] = (),
) -> dict:
    record = labels.to_record()
    record["note_id"] = note_id
    if person_id is not None:
        record["person_id"] = person_id
    record["mentions"] = [mention_to_record(m) for m in mentions]
    return record
