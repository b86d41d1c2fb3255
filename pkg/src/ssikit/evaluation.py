"""Scoring: precision/recall/F per category, macro averages, agreement, ICD.

All scoring is at the note level: a category's gold/predicted value for a
note is a boolean (present in the note's label set or not).  Categories
without a single gold-positive note cannot be scored meaningfully; they are
excluded from macro averages and listed as skipped.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .categories import (
    CoarseCategory,
    DocumentLabels,
    FineCategory,
    MAIN_CATEGORIES,
)
from .errors import AlignmentError

#: Structured codes indicating social isolation; the last two are listed in
#: some code sets but not used by default.
DEFAULT_ICD_CODES: tuple[str, ...] = ("Z60.2", "Z60.4", "Z60.9", "V60.3", "V62.4")
EXTENDED_ICD_CODES: tuple[str, ...] = DEFAULT_ICD_CODES + ("Z63.2", "Z63.3")


def confusion(gold: Sequence[bool], pred: Sequence[bool]) -> tuple[int, int, int, int]:
    """(tp, fp, fn, tn) over aligned boolean vectors."""
    if len(gold) != len(pred):
        raise AlignmentError(f"length mismatch: gold {len(gold)} vs pred {len(pred)}")
    tp = fp = fn = tn = 0
    for g, p in zip(gold, pred):
        if g and p:
            tp += 1
        elif not g and p:
            fp += 1
        elif g and not p:
            fn += 1
        else:
            tn += 1
    return tp, fp, fn, tn


def score_binary(gold: Sequence[bool], pred: Sequence[bool]) -> tuple[float, float, float]:
    """Precision, recall, F; every 0/0 is defined as 0."""
    tp, fp, fn, _ = confusion(gold, pred)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f_score = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f_score


def cohens_kappa(labels_a: Sequence[bool], labels_b: Sequence[bool]) -> float:
    """Chance-corrected agreement between two boolean ratings.

    With both marginals degenerate (chance agreement 1), kappa is defined
    as 1 for perfect agreement and 0 otherwise.
    """
    if len(labels_a) != len(labels_b):
        raise AlignmentError(f"length mismatch: {len(labels_a)} vs {len(labels_b)}")
    if not labels_a:
        raise AlignmentError("kappa needs at least one rated item")
    n = len(labels_a)
    p_o = sum(a == b for a, b in zip(labels_a, labels_b)) / n
    p_a = sum(labels_a) / n
    p_b = sum(labels_b) / n
    p_e = p_a * p_b + (1 - p_a) * (1 - p_b)
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1 - p_e)


@dataclass(frozen=True)
class CategoryRow:
    """Scores for one category over the corpus."""

    category: str
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f_score: float
    gold_positives: int
    skipped: bool

    def to_record(self) -> dict:
        return {
            "category": self.category,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "precision": self.precision,
            "recall": self.recall,
            "f_score": self.f_score,
            "gold_positives": self.gold_positives,
            "skipped": self.skipped,
        }


@dataclass(frozen=True)
class EvalReport:
    """Per-category rows plus their unweighted macro average."""

    level: str
    document_count: int
    rows: tuple[CategoryRow, ...]
    macro_precision: float
    macro_recall: float
    macro_f: float
    skipped: tuple[str, ...]

    def to_record(self) -> dict:
        return {
            "level": self.level,
            "document_count": self.document_count,
            "rows": [r.to_record() for r in self.rows],
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f_score": self.macro_f,
            },
            "skipped": list(self.skipped),
        }

    def to_text(self) -> str:
        width = max([len("category")] + [len(r.category) for r in self.rows])
        lines = [
            f"level: {self.level}  documents: {self.document_count}",
            f"{'category'.ljust(width)}      P      R      F   gold",
        ]
        for row in self.rows:
            mark = "  (skipped)" if row.skipped else ""
            lines.append(
                f"{row.category.ljust(width)}  {row.precision:5.3f}  {row.recall:5.3f}"
                f"  {row.f_score:5.3f}  {row.gold_positives:5d}{mark}"
            )
        lines.append(
            f"{'macro'.ljust(width)}  {self.macro_precision:5.3f}"
            f"  {self.macro_recall:5.3f}  {self.macro_f:5.3f}"
        )
        if self.skipped:
            lines.append(f"skipped from macro (no gold positives): {', '.join(self.skipped)}")
        return "\n".join(lines)


def _category_vectors(
    docs: Sequence[DocumentLabels], level: str
) -> list[tuple[str, list[bool]]]:
    if level == "fine":
        return [
            (c.value, [c in d.fine for d in docs]) for c in MAIN_CATEGORIES
        ]
    if level == "coarse":
        return [
            (c.value, [c in d.coarse for d in docs])
            for c in (CoarseCategory.SS, CoarseCategory.SI)
        ]
    raise ValueError(f"unknown level {level!r}")


def macro_report(
    gold_docs: Sequence[DocumentLabels],
    pred_docs: Sequence[DocumentLabels],
    level: str = "fine",
) -> EvalReport:
    """Score aligned gold/predicted label lists at one level.

    The lists must already be joined (same note, same index); use
    :func:`align_labels` to get there from keyed label maps.
    """
    if len(gold_docs) != len(pred_docs):
        raise AlignmentError(
            f"gold has {len(gold_docs)} documents, predictions have {len(pred_docs)}"
        )
    gold_vectors = _category_vectors(gold_docs, level)
    pred_vectors = dict(_category_vectors(pred_docs, level))
    rows = []
    for name, gold_vec in gold_vectors:
        pred_vec = pred_vectors[name]
        tp, fp, fn, tn = confusion(gold_vec, pred_vec)
        precision, recall, f_score = score_binary(gold_vec, pred_vec)
        gold_positives = sum(gold_vec)
        rows.append(
            CategoryRow(
                category=name,
                tp=tp,
                fp=fp,
                fn=fn,
                tn=tn,
                precision=precision,
                recall=recall,
                f_score=f_score,
                gold_positives=gold_positives,
                skipped=gold_positives == 0,
            )
        )
    included = [r for r in rows if not r.skipped]
    count = len(included)
    return EvalReport(
        level=level,
        document_count=len(gold_docs),
        rows=tuple(rows),
        macro_precision=sum(r.precision for r in included) / count if count else 0.0,
        macro_recall=sum(r.recall for r in included) / count if count else 0.0,
        macro_f=sum(r.f_score for r in included) / count if count else 0.0,
        skipped=tuple(r.category for r in rows if r.skipped),
    )


def align_labels(
    gold: Mapping[str, DocumentLabels], pred: Mapping[str, DocumentLabels]
) -> tuple[list[str], list[DocumentLabels], list[DocumentLabels]]:
    """Join two keyed label maps on note_id, in sorted id order.

    Ids present on only one side are an error; evaluation over silently
    dropped notes would not be comparable across runs.
    """
    missing_pred = sorted(set(gold) - set(pred))
    missing_gold = sorted(set(pred) - set(gold))
    if missing_pred or missing_gold:
        parts = []
        if missing_pred:
            parts.append(f"ids missing from predictions: {missing_pred[:10]}")
        if missing_gold:
            parts.append(f"ids missing from gold: {missing_gold[:10]}")
        raise AlignmentError("; ".join(parts))
    ids = sorted(gold)
    return ids, [gold[i] for i in ids], [pred[i] for i in ids]


@dataclass(frozen=True)
class KappaRow:
    label: str
    kappa: float
    positives_a: int
    positives_b: int
    skipped: bool


@dataclass(frozen=True)
class IaaReport:
    """Per-label agreement plus mean-over-labels headline values.

    The headline is the unweighted mean over labels that either rater used
    at least once; how to pool per-label kappas into one number is a
    reporting choice, so the per-label rows are always kept alongside.
    """

    document_count: int
    fine_rows: tuple[KappaRow, ...]
    coarse_rows: tuple[KappaRow, ...]
    fine_kappa: float
    coarse_kappa: float

    def to_record(self) -> dict:
        def rows(rs):
            return [
                {
                    "label": r.label,
                    "kappa": r.kappa,
                    "positives_a": r.positives_a,
                    "positives_b": r.positives_b,
                    "skipped": r.skipped,
                }
                for r in rs
            ]

        return {
            "document_count": self.document_count,
            "fine": rows(self.fine_rows),
            "coarse": rows(self.coarse_rows),
            "fine_kappa": self.fine_kappa,
            "coarse_kappa": self.coarse_kappa,
            "pooling": "mean over labels with >=1 positive from either rater",
        }

    def to_text(self) -> str:
        lines = [f"documents: {self.document_count}"]
        for title, rows in (("fine", self.fine_rows), ("coarse", self.coarse_rows)):
            for row in rows:
                mark = "  (skipped)" if row.skipped else ""
                lines.append(f"{title:7s} {row.label:28s} kappa={row.kappa:7.4f}{mark}")
        lines.append(f"kappa (fine):   {self.fine_kappa:.4f}")
        lines.append(f"kappa (coarse): {self.coarse_kappa:.4f}")
        lines.append("pooling: mean over labels used by either rater")
        return "\n".join(lines)


def _kappa_rows(
    docs_a: Sequence[DocumentLabels], docs_b: Sequence[DocumentLabels], level: str
) -> tuple[list[KappaRow], float]:
    vectors_a = _category_vectors(docs_a, level)
    vectors_b = dict(_category_vectors(docs_b, level))
    rows = []
    for label, vec_a in vectors_a:
        vec_b = vectors_b[label]
        pos_a, pos_b = sum(vec_a), sum(vec_b)
        rows.append(
            KappaRow(
                label=label,
                kappa=cohens_kappa(vec_a, vec_b),
                positives_a=pos_a,
                positives_b=pos_b,
                skipped=pos_a + pos_b == 0,
            )
        )
    used = [r.kappa for r in rows if not r.skipped]
    headline = sum(used) / len(used) if used else 0.0
    return rows, headline


def iaa_report(
    labels_a: Mapping[str, DocumentLabels], labels_b: Mapping[str, DocumentLabels]
) -> IaaReport:
    """Inter-rater agreement over two keyed label maps."""
    ids, docs_a, docs_b = align_labels(labels_a, labels_b)
    fine_rows, fine_kappa = _kappa_rows(docs_a, docs_b, "fine")
    coarse_rows, coarse_kappa = _kappa_rows(docs_a, docs_b, "coarse")
    return IaaReport(
        document_count=len(ids),
        fine_rows=tuple(fine_rows),
        coarse_rows=tuple(coarse_rows),
        fine_kappa=fine_kappa,
        coarse_kappa=coarse_kappa,
    )


@dataclass(frozen=True)
class IcdCodeSet:
    """The structured codes treated as indicating social isolation."""

    codes: frozenset[str] = frozenset(DEFAULT_ICD_CODES)

    def __post_init__(self):
        object.__setattr__(
            self, "codes", frozenset(c.strip().upper() for c in self.codes)
        )

    def matches(self, code: str) -> bool:
        return code.strip().upper() in self.codes


@dataclass(frozen=True)
class IcdComparison:
    coded_count: int
    gold_si_count: int
    overlap: int

    def to_record(self) -> dict:
        return {
            "coded_visits": self.coded_count,
            "gold_si_documents": self.gold_si_count,
            "overlap": self.overlap,
        }


def icd_comparison(
    visits: Iterable[tuple[str, Sequence[str]]] | Mapping[str, Sequence[str]],
    gold_docs: Mapping[str, DocumentLabels],
    codes: IcdCodeSet = IcdCodeSet(),
) -> IcdComparison:
    """Compare structured-code SI flags with gold SI labels, note by note."""
    if isinstance(visits, Mapping):
        visits = visits.items()
    coded: set[str] = set()
    seen: set[str] = set()
    for note_id, visit_codes in visits:
        seen.add(note_id)
        if any(codes.matches(c) for c in visit_codes):
            coded.add(note_id)
    missing = sorted(set(gold_docs) - seen)
    if missing:
        raise AlignmentError(f"note ids missing from visit codes: {missing[:10]}")
    gold_si = {
        note_id
        for note_id, labels in gold_docs.items()
        if CoarseCategory.SI in labels.coarse
    }
    return IcdComparison(
        coded_count=len(coded),
        gold_si_count=len(gold_si),
        overlap=len(coded & gold_si),
    )


def read_visit_codes(path: str | Path) -> list[tuple[str, list[str]]]:
    """Read a visit-code CSV (``note_id,code``; empty code = no codes).

    Rows for the same note id accumulate into one code list.
    """
    by_note: dict[str, list[str]] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["note_id", "code"]:
            raise AlignmentError(f"{path}: expected 'note_id,code' header")
        for row in reader:
            if not row:
                continue
            note_id = row[0].strip()
            codes = by_note.setdefault(note_id, [])
            if len(row) > 1 and row[1].strip():
                codes.append(row[1].strip())
    return sorted(by_note.items())


def read_labels_jsonl(path: str | Path) -> dict[str, DocumentLabels]:
    """Load a labels JSONL file into a note_id-keyed map."""
    out: dict[str, DocumentLabels] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise AlignmentError(f"{path}:{lineno}: bad JSON: {exc}") from None
        note_id = record.get("note_id")
        if not note_id:
            raise AlignmentError(f"{path}:{lineno}: record lacks a note_id")
        if note_id in out:
            raise AlignmentError(f"{path}:{lineno}: duplicate note_id {note_id!r}")
        out[note_id] = DocumentLabels.from_record(record)
    return out
