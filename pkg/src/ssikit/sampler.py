"""Stratified note selection for building an annotation corpus.

Strata are filled in a fixed priority order (SI hits first, then SS hits,
then template-bearing notes, then a random remainder), taking at most one
note per patient overall.  A stratum that cannot fill its quota reports the
shortfall; it is never topped up from another stratum, so the published
corpus composition stays interpretable.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import SamplingError

#: Stratum names in fill-priority order.
STRATA: tuple[str, ...] = ("si", "ss", "template", "random")


@dataclass(frozen=True)
class IndexRow:
    """One candidate note in the sampling index."""

    note_id: str
    person_id: str
    ss_hit: bool
    si_hit: bool
    has_template: bool


@dataclass(frozen=True)
class SampleResult:
    """Selected note ids per stratum plus unfilled quota counts."""

    selected: tuple[str, ...]
    per_stratum: dict[str, tuple[str, ...]]
    shortfalls: dict[str, int]

    def to_record(self) -> dict:
        return {
            "selected": list(self.selected),
            "per_stratum": {k: list(v) for k, v in self.per_stratum.items()},
            "shortfalls": dict(self.shortfalls),
        }


def _qualifies(row: IndexRow, stratum: str) -> bool:
    if stratum == "si":
        return row.si_hit
    if stratum == "ss":
        return row.ss_hit
    if stratum == "template":
        return row.has_template
    return True  # random remainder


def stratified_sample(
    index: Sequence[IndexRow], quotas: Mapping[str, int], seed: int
) -> SampleResult:
    """Draw a one-note-per-patient sample per stratum quota.

    Selection within a stratum is a seeded random permutation walk over the
    still-eligible candidates, so a fixed seed reproduces the sample
    exactly.
    """
    seen_ids = set()
    for row in index:
        if row.note_id in seen_ids:
            raise SamplingError(f"duplicate note_id {row.note_id!r} in index")
        seen_ids.add(row.note_id)
    for stratum, quota in quotas.items():
        if stratum not in STRATA:
            raise SamplingError(f"unknown stratum {stratum!r}; expected one of {STRATA}")
        if quota < 0:
            raise SamplingError(f"negative quota for stratum {stratum!r}")

    rng = random.Random(seed)
    used_notes: set[str] = set()
    used_persons: set[str] = set()
    per_stratum: dict[str, tuple[str, ...]] = {}
    shortfalls: dict[str, int] = {}
    selected: list[str] = []

    for stratum in STRATA:
        quota = quotas.get(stratum, 0)
        if quota == 0:
            per_stratum[stratum] = ()
            continue
        candidates = sorted(
            (
                row
                for row in index
                if row.note_id not in used_notes
                and row.person_id not in used_persons
                and _qualifies(row, stratum)
            ),
            key=lambda r: r.note_id,
        )
        rng.shuffle(candidates)
        picked: list[str] = []
        for row in candidates:
            if len(picked) == quota:
                break
            if row.person_id in used_persons:
                continue  # an earlier pick in this stratum used this patient
            picked.append(row.note_id)
            used_notes.add(row.note_id)
            used_persons.add(row.person_id)
        per_stratum[stratum] = tuple(picked)
        selected.extend(picked)
        if len(picked) < quota:
            shortfalls[stratum] = quota - len(picked)

    return SampleResult(
        selected=tuple(selected), per_stratum=per_stratum, shortfalls=shortfalls
    )


def _parse_bool(value: str, where: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes"):
        return True
    if v in ("0", "false", "no"):
        return False
    raise SamplingError(f"{where}: bad boolean {value!r}")


def read_index_csv(path: str | Path) -> list[IndexRow]:
    """Read the sampling index: note_id,person_id,ss_hit,si_hit,has_template."""
    expected = ["note_id", "person_id", "ss_hit", "si_hit", "has_template"]
    rows = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header] != expected:
            raise SamplingError(f"{path}: expected header {','.join(expected)}")
        for n, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != 5:
                raise SamplingError(f"{path}:{n}: expected 5 columns, got {len(row)}")
            rows.append(
                IndexRow(
                    note_id=row[0].strip(),
                    person_id=row[1].strip(),
                    ss_hit=_parse_bool(row[2], f"{path}:{n}"),
                    si_hit=_parse_bool(row[3], f"{path}:{n}"),
                    has_template=_parse_bool(row[4], f"{path}:{n}"),
                )
            )
    return rows
