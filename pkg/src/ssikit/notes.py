"""Clinical note ingestion: filename parsing, template blanking, segmentation.

Notes arrive as UTF-8 ``.txt`` files named
``<index>_<person_id>_<note_id...>_<date>.txt``.  Sites embed boilerplate
template prompts in note text; those are blanked (overwritten with spaces,
never deleted) so that character offsets into the text stay valid for
standoff annotations.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, FilenameParseError

Span = tuple[int, int]

#: Abbreviations that may end in a period without ending the sentence.
DEFAULT_ABBREVIATIONS: tuple[str, ...] = (
    "pt.",
    "pts.",
    "hx.",
    "dx.",
    "tx.",
    "rx.",
    "dr.",
    "mr.",
    "mrs.",
    "ms.",
    "vs.",
    "e.g.",
    "i.e.",
    "appt.",
    "dept.",
    "y/o",
)


@dataclass(frozen=True)
class Note:
    """One clinical document.

    ``clean_text`` is ``raw_text`` with template spans blanked and is always
    the same length, so offsets are interchangeable between the two.
    ``sentences`` are (start, end) character spans into ``clean_text``.
    """

    person_id: str
    note_id: str
    note_date: dt.date
    raw_text: str
    clean_text: str
    sentences: tuple[Span, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.person_id or not self.note_id:
            raise ValueError("person_id and note_id must be non-empty")
        if len(self.clean_text) != len(self.raw_text):
            raise ValueError(
                f"clean_text length {len(self.clean_text)} != raw_text length "
                f"{len(self.raw_text)}"
            )
        last = 0
        for start, end in self.sentences:
            if not (last <= start < end <= len(self.clean_text)):
                raise ValueError(f"bad sentence span ({start}, {end})")
            last = end

    @classmethod
    def build(
        cls,
        person_id: str,
        note_id: str,
        note_date: dt.date,
        raw_text: str,
        template_patterns: Sequence[re.Pattern] = (),
        abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS,
    ) -> "Note":
        """Construct a note from raw text: blank templates, then segment."""
        clean_text, _ = remove_templates(raw_text, template_patterns)
        sentences = segment_sentences(clean_text, abbreviations=abbreviations)
        return cls(
            person_id=person_id,
            note_id=note_id,
            note_date=note_date,
            raw_text=raw_text,
            clean_text=clean_text,
            sentences=tuple(sentences),
        )

    def sentence_texts(self) -> list[str]:
        return [self.clean_text[s:e] for s, e in self.sentences]


def parse_note_filename(filename: str) -> tuple[int, str, str, dt.date]:
    """Split a note filename into (index, person_id, note_id, note_date).

    Underscore-delimited: the first field is a running index, the last is an
    ISO date.  Any middle fields beyond the first belong to the note id and
    are rejoined with underscores.
    """
    name = Path(filename).name
    if not name.endswith(".txt"):
        raise FilenameParseError(name, name, "expected a .txt filename")
    fields = name[: -len(".txt")].split("_")
    if len(fields) < 4:
        raise FilenameParseError(
            name, name, f"expected at least 4 underscore-delimited fields, got {len(fields)}"
        )
    index_s, person_id = fields[0], fields[1]
    note_id = "_".join(fields[2:-1])
    date_s = fields[-1]
    try:
        index = int(index_s)
    except ValueError:
        raise FilenameParseError(name, index_s, "index is not an integer") from None
    if not person_id:
        raise FilenameParseError(name, person_id, "empty person_id")
    if not note_id:
        raise FilenameParseError(name, note_id, "empty note_id")
    try:
        note_date = dt.date.fromisoformat(date_s)
    except ValueError:
        raise FilenameParseError(name, date_s, "date is not ISO-8601") from None
    return index, person_id, note_id, note_date


def load_template_patterns(path: str | Path) -> list[re.Pattern]:
    """Read template patterns, one regex per line; ``#`` starts a comment.

    Patterns are compiled here so a bad pattern fails at configuration time,
    not in the middle of a batch run.
    """
    patterns = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            patterns.append(re.compile(stripped, re.IGNORECASE))
        except re.error as exc:
            raise ConfigError(f"{path}:{lineno}: bad template pattern: {exc}") from None
    return patterns


def load_abbreviations(path: str | Path) -> tuple[str, ...]:
    """Read a sentence-abbreviation list, one entry per line, ``#`` comments."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        stripped = line.strip().lower()
        if stripped and not stripped.startswith("#"):
            out.append(stripped)
    return tuple(out)


def remove_templates(
    raw_text: str, template_patterns: Sequence[re.Pattern]
) -> tuple[str, list[Span]]:
    """Blank every template match with spaces, preserving text length.

    Overlapping matches are merged; the returned spans are the blanked
    regions in offset order.
    """
    hits: list[Span] = []
    for pattern in template_patterns:
        for m in pattern.finditer(raw_text):
            if m.end() > m.start():
                hits.append((m.start(), m.end()))
    if not hits:
        return raw_text, []
    hits.sort()
    merged: list[list[int]] = [list(hits[0])]
    for start, end in hits[1:]:
        if start <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    chars = list(raw_text)
    for start, end in merged:
        chars[start:end] = " " * (end - start)
    return "".join(chars), [(s, e) for s, e in merged]


_SENTENCE_BREAK = re.compile(r"[.!?]+(?=\s)")


def _is_abbreviation(text: str, punct_start: int, punct_end: int, abbreviations) -> bool:
    # Only single periods can belong to an abbreviation ("pt."); "!?" runs split.
    if text[punct_start:punct_end] != ".":
        return False
    ws_start = punct_start
    while ws_start > 0 and not text[ws_start - 1].isspace():
        ws_start -= 1
    candidate = text[ws_start:punct_end].lower()
    # Strip leading punctuation such as an opening parenthesis: "(pt." -> "pt."
    candidate = candidate.lstrip("\"'([{<")
    return candidate in abbreviations


def segment_sentences(
    clean_text: str, abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS
) -> list[Span]:
    """Split text into sentence spans by rule.

    Boundaries: sentence-final punctuation (``.``, ``!``, ``?``) followed by
    whitespace, and newlines.  Abbreviations from the configurable list do
    not split.  Spans are trimmed of surrounding whitespace and together
    cover all non-whitespace text.
    """
    abbrev = {a.lower() for a in abbreviations}
    spans: list[Span] = []
    line_start = 0
    for line in clean_text.splitlines(keepends=True):
        content_len = len(line.rstrip("\r\n"))
        seg_start = line_start
        line_end = line_start + content_len
        for m in _SENTENCE_BREAK.finditer(clean_text, line_start, line_end):
            if _is_abbreviation(clean_text, m.start(), m.end(), abbrev):
                continue
            _append_trimmed(spans, clean_text, seg_start, m.end())
            seg_start = m.end()
        _append_trimmed(spans, clean_text, seg_start, line_end)
        line_start += len(line)
    return spans


def _append_trimmed(spans: list[Span], text: str, start: int, end: int) -> None:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if start < end:
        spans.append((start, end))
