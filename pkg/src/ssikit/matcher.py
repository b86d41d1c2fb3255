"""Rule-based extraction: lexicon phrase matching over clean note text.

Matching is token-sequence based: the note and every phrase are tokenized
the same way (word runs and single punctuation marks), compared case-folded.
At each start position the longest matching phrase of a category wins.  An
inclusion hit contained inside an exclusion-phrase hit is dropped; a
loneliness hit preceded by a negation cue (same sentence, within a token
window) is kept but flagged negated, and negated mentions do not reach the
document labels.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .brat import EntityMention, Source
from .categories import DocumentLabels, FineCategory, derive_document_labels
from .errors import ConfigError
from .lexicon import Lexicon
from .notes import Note

_TOKEN = re.compile(r"\w+|[^\w\s]")

#: Cues that negate a following loneliness mention.
DEFAULT_NEGATION_CUES: tuple[str, ...] = (
    "no",
    "not",
    "never",
    "denies",
    "denied",
    "without",
)


class Token(NamedTuple):
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class MatchConfig:
    """Negation handling knobs for the rule-based matcher."""

    negation_cues: tuple[str, ...] = DEFAULT_NEGATION_CUES
    negation_window: int = 5
    case_fold: bool = True

    def __post_init__(self):
        if self.negation_window < 1:
            raise ConfigError("negation_window must be >= 1")


def tokenize_with_offsets(text: str) -> list[Token]:
    """Split into word runs and single punctuation marks, keeping offsets."""
    return [Token(m.group(), m.start(), m.end()) for m in _TOKEN.finditer(text)]


def phrase_tokens(phrase: str) -> tuple[str, ...]:
    return tuple(m.group() for m in _TOKEN.finditer(phrase))


def _fold(tokens: Sequence[str], case_fold: bool) -> list[str]:
    return [t.lower() for t in tokens] if case_fold else list(tokens)


def _occurrences(folded: list[str], needle: tuple[str, ...]) -> list[tuple[int, int]]:
    """All (start, end) token-index windows where ``needle`` occurs."""
    n = len(needle)
    if n == 0:
        return []
    return [
        (i, i + n)
        for i in range(len(folded) - n + 1)
        if folded[i] == needle[0] and tuple(folded[i : i + n]) == needle
    ]


def match_note(note: Note, lex: Lexicon, cfg: MatchConfig = MatchConfig()) -> list[EntityMention]:
    """Find all lexicon mentions in the note's clean text.

    A span matching phrases of several categories yields one mention per
    category.  Output is sorted by start offset, then category name, with
    sequential ids, so identical inputs always serialize identically.
    """
    if lex.phrases(FineCategory.LONELINESS) and not cfg.negation_cues:
        raise ConfigError("negation cues required when the loneliness lexicon is non-empty")

    tokens = tokenize_with_offsets(note.clean_text)
    if not tokens:
        return []
    folded = _fold([t.text for t in tokens], cfg.case_fold)

    # Exclusion spans (character offsets); any occurrence suppresses.
    exclusion_spans = []
    for phrase in lex.exclusion:
        needle = phrase_tokens(phrase if not cfg.case_fold else phrase.lower())
        for i, j in _occurrences(folded, needle):
            exclusion_spans.append((tokens[i].start, tokens[j - 1].end))

    # Negation cue end positions (index of the cue's last token).
    cue_last_indices = []
    if lex.phrases(FineCategory.LONELINESS):
        for cue in cfg.negation_cues:
            needle = phrase_tokens(cue if not cfg.case_fold else cue.lower())
            for i, j in _occurrences(folded, needle):
                cue_last_indices.append((i, j - 1))

    sentence_of = _sentence_index(tokens, note.sentences)

    hits: list[tuple[int, str, EntityMention]] = []
    for category in lex.categories():
        needles = sorted(
            {
                phrase_tokens(p.lower() if cfg.case_fold else p)
                for p in lex.phrases(category)
            },
            key=len,
            reverse=True,
        )
        taken_starts: set[int] = set()
        for needle in needles:
            for i, j in _occurrences(folded, needle):
                if i in taken_starts:
                    continue  # a longer phrase of this category already matched here
                taken_starts.add(i)
                start, end = tokens[i].start, tokens[j - 1].end
                if any(xs <= start and end <= xe for xs, xe in exclusion_spans):
                    continue
                negated = False
                if category is FineCategory.LONELINESS:
                    negated = any(
                        c_last < i
                        and i - c_last <= cfg.negation_window
                        and sentence_of[c_start] == sentence_of[i]
                        and sentence_of[c_last] == sentence_of[i]
                        for c_start, c_last in cue_last_indices
                    )
                mention = EntityMention(
                    id="pending",
                    category=category,
                    start=start,
                    end=end,
                    surface=note.clean_text[start:end],
                    negated=negated,
                    source=Source.RBS,
                )
                hits.append((start, category.value, mention))

    hits.sort(key=lambda h: (h[0], h[1]))
    return [
        EntityMention(
            id=f"T{n}",
            category=m.category,
            start=m.start,
            end=m.end,
            surface=m.surface,
            negated=m.negated,
            source=Source.RBS,
        )
        for n, (_, _, m) in enumerate(hits, 1)
    ]


def _sentence_index(tokens: list[Token], sentences: Sequence[tuple[int, int]]) -> list[int]:
    """Sentence number per token; -1 for a token outside every sentence."""
    starts = [s for s, _ in sentences]
    out = []
    for tok in tokens:
        k = bisect_right(starts, tok.start) - 1
        if k >= 0 and tok.start < sentences[k][1]:
            out.append(k)
        else:
            out.append(-1)
    return out


def rbs_document_labels(
    note: Note, lex: Lexicon, cfg: MatchConfig = MatchConfig()
) -> DocumentLabels:
    """Match, drop negated loneliness mentions, aggregate to note level."""
    mentions = match_note(note, lex, cfg)
    return derive_document_labels(m.category for m in mentions if not m.negated)
