"""Command-line interface: every pipeline stage as one subcommand.

Option resolution order is flags, then ``SDOH_*`` environment variables,
then a JSON config file (``--config``), then built-in defaults.  All
outputs are plain files written deterministically (sorted keys, no
timestamps), so identical inputs give byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Mapping, Optional

from . import __version__
from .brat import gold_document_labels, load_tag_map, parse_standoff, write_standoff
from .categories import FineCategory, MAIN_CATEGORIES, parse_fine_category
from .defaults import (
    data_path,
    default_abbreviations,
    default_tag_map,
    default_template_patterns,
)
from .errors import ConfigError, ToolkitError
from .evaluation import (
    DEFAULT_ICD_CODES,
    EXTENDED_ICD_CODES,
    IcdCodeSet,
    iaa_report,
    icd_comparison,
    align_labels,
    macro_report,
    read_labels_jsonl,
    read_visit_codes,
)
from .lexicon import (
    EmbeddingTable,
    Lexicon,
    expansion_round,
    load_lexicon,
    merge_approved_candidates,
    write_candidates_tsv,
    write_inclusion_tsv,
)
from .llm import InferenceEndpoint, classify_note, emit_finetune_dataset
from .matcher import MatchConfig, match_note, rbs_document_labels
from .notes import (
    Note,
    load_abbreviations,
    load_template_patterns,
    parse_note_filename,
)
from .records import (
    labels_record,
    note_from_record,
    note_to_record,
    read_jsonl,
    write_jsonl,
)
from .sampler import read_index_csv, stratified_sample


class Settings:
    """Layered option lookup: flag value, environment, config file, default."""

    def __init__(self, config_file: Optional[str], environ: Mapping[str, str]):
        self._environ = environ
        self._config: dict = {}
        if config_file:
            try:
                self._config = json.loads(Path(config_file).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config file {config_file}: {exc}") from None
            if not isinstance(self._config, dict):
                raise ConfigError(f"config file {config_file} must hold a JSON object")

    def get(self, key: str, flag_value=None, default=None, cast=str):
        if flag_value is not None:
            return flag_value
        env_value = self._environ.get("SDOH_" + key.upper())
        if env_value is not None:
            return _cast(key, env_value, cast)
        if key in self._config:
            return _cast(key, self._config[key], cast)
        return default


def _cast(key, value, cast):
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for option {key!r}: {value!r}") from None


def _resolve_lexicon(args, settings: Settings) -> Lexicon:
    inclusion = settings.get(
        "lexicon", getattr(args, "lexicon", None), default=str(data_path("starter_lexicon.tsv"))
    )
    exclusion = settings.get(
        "exclusion",
        getattr(args, "exclusion", None),
        default=str(data_path("exclusion_terms.txt")),
    )
    return load_lexicon(inclusion, exclusion)


def _resolve_match_config(settings: Settings) -> MatchConfig:
    window = settings.get("negation_window", None, default=None, cast=int)
    cues = settings.get("negation_cues", None, default=None)
    kwargs = {}
    if window is not None:
        kwargs["negation_window"] = window
    if cues is not None:
        if isinstance(cues, str):
            cues = [c.strip() for c in cues.split(",") if c.strip()]
        kwargs["negation_cues"] = tuple(cues)
    return MatchConfig(**kwargs)


def _resolve_note_build(args, settings: Settings):
    templates_file = settings.get(
        "templates", getattr(args, "templates", None), default=None
    )
    if templates_file:
        patterns = load_template_patterns(templates_file)
    else:
        patterns = default_template_patterns()
    abbrev_file = settings.get(
        "abbreviations", getattr(args, "abbreviations", None), default=None
    )
    if abbrev_file:
        abbreviations = load_abbreviations(abbrev_file)
    else:
        abbreviations = default_abbreviations()
    return patterns, abbreviations


def _load_corpus(path: str) -> list[Note]:
    return [note_from_record(r) for r in read_jsonl(path)]


def _parse_categories(value: Optional[str]) -> list[FineCategory]:
    if not value:
        return list(MAIN_CATEGORIES)
    out = []
    for name in value.split(","):
        name = name.strip()
        if not name:
            continue
        try:
            category = parse_fine_category(name)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if category not in MAIN_CATEGORIES:
            raise ConfigError(f"category {name!r} cannot be requested from an engine")
        out.append(category)
    if not out:
        raise ConfigError("empty category list")
    return out


def cmd_ingest(args, settings: Settings) -> int:
    patterns, abbreviations = _resolve_note_build(args, settings)
    notes_dir = Path(args.notes_dir)
    files = sorted(notes_dir.glob("*.txt"))
    if not files:
        raise ConfigError(f"no .txt notes under {notes_dir}")
    parsed = []
    for path in files:
        index, person_id, note_id, note_date = parse_note_filename(path.name)
        note = Note.build(
            person_id=person_id,
            note_id=note_id,
            note_date=note_date,
            raw_text=path.read_text(encoding="utf-8"),
            template_patterns=patterns,
            abbreviations=abbreviations,
        )
        parsed.append((index, path.name, note))
    parsed.sort(key=lambda t: (t[0], t[1]))
    write_jsonl(args.output, (note_to_record(n) for _, _, n in parsed))
    print(f"ingested {len(parsed)} notes -> {args.output}")
    return 0


def _gold_labels_for_dir(
    notes_dir: Path, ann_dir: Path, patterns, abbreviations, tag_map
) -> tuple[dict, list]:
    """note_id -> (note, mentions, labels) for every .txt with a paired .ann."""
    out = {}
    warnings = []
    for txt in sorted(notes_dir.glob("*.txt")):
        ann = ann_dir / (txt.stem + ".ann")
        if not ann.exists():
            warnings.append(f"{txt.name}: no paired .ann file, skipped")
            continue
        _, person_id, note_id, note_date = parse_note_filename(txt.name)
        note = Note.build(
            person_id=person_id,
            note_id=note_id,
            note_date=note_date,
            raw_text=txt.read_text(encoding="utf-8"),
            template_patterns=patterns,
            abbreviations=abbreviations,
        )
        mentions, parse_warnings = parse_standoff(
            ann.read_text(encoding="utf-8"), note, tag_map
        )
        warnings.extend(f"{ann.name}: {w}" for w in parse_warnings)
        out[note_id] = (note, mentions, gold_document_labels(mentions))
    return out, warnings


def cmd_gold(args, settings: Settings) -> int:
    patterns, abbreviations = _resolve_note_build(args, settings)
    tag_map_file = settings.get("tag_map", args.tag_map, default=None)
    tag_map = default_tag_map() if tag_map_file is None else load_tag_map(tag_map_file)
    notes_dir = Path(args.notes_dir)

    if args.iaa:
        dir_a, dir_b = (Path(d) for d in args.iaa)
        gold_a, warn_a = _gold_labels_for_dir(notes_dir, dir_a, patterns, abbreviations, tag_map)
        gold_b, warn_b = _gold_labels_for_dir(notes_dir, dir_b, patterns, abbreviations, tag_map)
        for warning in warn_a + warn_b:
            print(f"warning: {warning}", file=sys.stderr)
        report = iaa_report(
            {nid: labels for nid, (_, _, labels) in gold_a.items()},
            {nid: labels for nid, (_, _, labels) in gold_b.items()},
        )
        print(report.to_text())
        if args.json:
            Path(args.json).write_text(
                json.dumps(report.to_record(), sort_keys=True, indent=2) + "\n",
                encoding="utf-8",
            )
        return 0

    if not args.output:
        raise ConfigError("gold requires -o/--output (or --iaa)")
    ann_dir = Path(args.ann_dir) if args.ann_dir else notes_dir
    gold, warnings = _gold_labels_for_dir(notes_dir, ann_dir, patterns, abbreviations, tag_map)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    records = [
        labels_record(note_id, labels, person_id=note.person_id, mentions=mentions)
        for note_id, (note, mentions, labels) in sorted(gold.items())
    ]
    write_jsonl(args.output, records)
    print(f"gold labels for {len(records)} notes -> {args.output}")
    return 0


def cmd_extract(args, settings: Settings) -> int:
    notes = _load_corpus(args.notes)
    jobs = settings.get("jobs", args.jobs, default=4, cast=int)
    if jobs < 1:
        raise ConfigError("--jobs must be >= 1")

    if args.engine == "rbs":
        lexicon = _resolve_lexicon(args, settings)
        match_config = _resolve_match_config(settings)

        def process(note: Note):
            mentions = match_note(note, lexicon, match_config)
            labels = rbs_document_labels(note, lexicon, match_config)
            return note, mentions, labels

        if jobs == 1:
            results = [process(n) for n in notes]
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(process, notes))
        records = [
            labels_record(note.note_id, labels, person_id=note.person_id, mentions=mentions)
            for note, mentions, labels in results
        ]
        if args.ann_dir:
            ann_dir = Path(args.ann_dir)
            ann_dir.mkdir(parents=True, exist_ok=True)
            for note, mentions, _ in results:
                (ann_dir / f"{note.note_id}.ann").write_text(
                    write_standoff(mentions), encoding="utf-8"
                )
    else:  # llm
        endpoint_url = settings.get("endpoint", args.endpoint, default=None)
        if not endpoint_url:
            raise ConfigError("llm engine requires --endpoint (or SDOH_ENDPOINT)")
        budget = settings.get("budget", args.budget, default=400, cast=int)
        categories = _parse_categories(
            settings.get("categories", args.categories, default=None)
        )
        endpoint = InferenceEndpoint(base_url=endpoint_url, max_concurrency=jobs)
        records = []
        incomplete_notes = 0
        for note in notes:
            result = classify_note(note, categories, endpoint, token_budget=budget)
            record = labels_record(note.note_id, result.labels, person_id=note.person_id)
            record["incomplete"] = result.incomplete
            if result.incomplete:
                incomplete_notes += 1
                record["failures"] = [
                    {"category": c.value, "chunk_index": i} for c, i in result.failures
                ]
            records.append(record)
        if incomplete_notes:
            print(
                f"warning: {incomplete_notes} notes had failed requests", file=sys.stderr
            )

    write_jsonl(args.output, records)
    print(f"extracted labels ({args.engine}) for {len(records)} notes -> {args.output}")
    return 0


def cmd_expand_lexicon(args, settings: Settings) -> int:
    lexicon = _resolve_lexicon(args, settings)
    embeddings = EmbeddingTable.load(args.embeddings)
    if args.category:
        categories = [parse_fine_category(args.category)]
    else:
        categories = lexicon.categories()
    candidates = {}
    for category in categories:
        try:
            candidates[category] = expansion_round(lexicon, category, embeddings, k=args.k)
        except ToolkitError as exc:
            print(f"warning: {category.value}: {exc}", file=sys.stderr)
    write_candidates_tsv(candidates, args.output)
    total = sum(len(v) for v in candidates.values())
    print(f"{total} candidates across {len(candidates)} categories -> {args.output}")
    return 0


def cmd_merge_lexicon(args, settings: Settings) -> int:
    lexicon = _resolve_lexicon(args, settings)
    merged = merge_approved_candidates(lexicon, args.reviewed)
    write_inclusion_tsv(merged, args.output)
    before = sum(len(lexicon.phrases(c)) for c in lexicon.categories())
    after = sum(len(merged.phrases(c)) for c in merged.categories())
    print(f"merged {after - before} approved phrases -> {args.output}")
    return 0


def cmd_evaluate(args, settings: Settings) -> int:
    gold = read_labels_jsonl(args.gold)
    pred = read_labels_jsonl(args.pred)
    _, gold_docs, pred_docs = align_labels(gold, pred)

    levels = ["fine", "coarse"] if args.level == "both" else [args.level]
    reports = {level: macro_report(gold_docs, pred_docs, level) for level in levels}
    output: dict = {}
    for level in levels:
        print(reports[level].to_text())
        print()
        output[level] = reports[level].to_record()

    if args.icd:
        if args.icd_codes:
            codes = IcdCodeSet(frozenset(c.strip() for c in args.icd_codes.split(",")))
        elif args.icd_extended:
            codes = IcdCodeSet(frozenset(EXTENDED_ICD_CODES))
        else:
            codes = IcdCodeSet(frozenset(DEFAULT_ICD_CODES))
        comparison = icd_comparison(read_visit_codes(args.icd), gold, codes)
        print(
            f"icd: coded_visits={comparison.coded_count} "
            f"gold_si_documents={comparison.gold_si_count} overlap={comparison.overlap}"
        )
        output["icd"] = comparison.to_record()

    if args.json:
        Path(args.json).write_text(
            json.dumps(output, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )

    if args.min_f is not None:
        failing = [
            f"{report.level}/{row.category}"
            for report in reports.values()
            for row in report.rows
            if not row.skipped and row.f_score < args.min_f
        ]
        if failing:
            print(f"below --min-f {args.min_f}: {', '.join(failing)}", file=sys.stderr)
            return 1
    return 0


def cmd_sample(args, settings: Settings) -> int:
    index = read_index_csv(args.index)
    quotas = {}
    for spec_item in args.quota or []:
        if "=" not in spec_item:
            raise ConfigError(f"bad --quota {spec_item!r}; expected name=count")
        name, _, count = spec_item.partition("=")
        quotas[name.strip()] = _cast("quota " + name, count.strip(), int)
    seed = settings.get("seed", args.seed, default=0, cast=int)
    result = stratified_sample(index, quotas, seed)
    Path(args.output).write_text(
        "".join(note_id + "\n" for note_id in result.selected), encoding="utf-8"
    )
    if args.report:
        Path(args.report).write_text(
            json.dumps(result.to_record(), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
    for stratum, missing in sorted(result.shortfalls.items()):
        print(f"warning: stratum {stratum!r} short by {missing}", file=sys.stderr)
    print(f"sampled {len(result.selected)} notes -> {args.output}")
    return 0


def cmd_emit_finetune(args, settings: Settings) -> int:
    records, counts, warnings = emit_finetune_dataset(args.examples)
    write_jsonl(args.output, records)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    for category, by_answer in counts.items():
        total = sum(by_answer.values())
        if total:
            parts = ", ".join(f"{k}={v}" for k, v in by_answer.items())
            print(f"{category}: {total} examples ({parts})")
    print(f"{len(records)} training rows -> {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssikit",
        description="Extract and evaluate social-support / social-isolation labels "
        "from clinical notes.",
    )
    parser.add_argument("--config", help="JSON config file (lowest-priority options)")
    parser.add_argument(
        "--json-errors", action="store_true", help="emit errors as JSON on stderr"
    )
    parser.add_argument(
        "--version", action="store_true", help="print toolkit and lexicon versions"
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("ingest", help="load .txt notes into a corpus JSONL")
    p.add_argument("notes_dir")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--templates", help="template pattern file (regex per line)")
    p.add_argument("--abbreviations", help="sentence-abbreviation list file")

    p = sub.add_parser("gold", help="parse BRAT gold annotations into labels JSONL")
    p.add_argument("notes_dir")
    p.add_argument("-o", "--output")
    p.add_argument("--ann-dir", help="directory of .ann files (default: notes dir)")
    p.add_argument(
        "--iaa",
        nargs=2,
        metavar=("ANN_A_DIR", "ANN_B_DIR"),
        help="compute inter-annotator agreement between two annotation dirs",
    )
    p.add_argument("--json", help="write the agreement report as JSON here")
    p.add_argument("--tag-map", help="tag-name map TSV")
    p.add_argument("--templates")
    p.add_argument("--abbreviations")

    p = sub.add_parser("extract", help="run an engine over a corpus JSONL")
    p.add_argument("--engine", choices=("rbs", "llm"), required=True)
    p.add_argument("--notes", required=True, help="corpus JSONL from ingest")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--lexicon", help="inclusion lexicon TSV")
    p.add_argument("--exclusion", help="exclusion phrase list")
    p.add_argument("--ann-dir", help="write .ann audit files here (rbs only)")
    p.add_argument("--endpoint", help="answer service base URL (llm only)")
    p.add_argument("--budget", type=int, help="prompt token budget (llm only)")
    p.add_argument("--categories", help="comma-separated category subset (llm only)")
    p.add_argument("--jobs", type=int, help="parallelism bound")

    p = sub.add_parser("expand-lexicon", help="propose lexicon candidates by similarity")
    p.add_argument("--embeddings", required=True, help="word-vector text file")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--lexicon", help="inclusion lexicon TSV")
    p.add_argument("--exclusion", help="exclusion phrase list")
    p.add_argument("--category", help="expand one category only")
    p.add_argument("-k", type=int, default=10, help="neighbors per phrase")

    p = sub.add_parser("merge-lexicon", help="fold approved candidates into the lexicon")
    p.add_argument("--reviewed", required=True, help="reviewed candidates TSV")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--lexicon", help="inclusion lexicon TSV")
    p.add_argument("--exclusion", help="exclusion phrase list")

    p = sub.add_parser("evaluate", help="score predicted labels against gold labels")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--level", choices=("fine", "coarse", "both"), default="both")
    p.add_argument("--icd", help="visit-code CSV (note_id,code)")
    p.add_argument("--icd-codes", help="comma-separated SI code list override")
    p.add_argument(
        "--icd-extended",
        action="store_true",
        help="include the extended family-circumstance codes",
    )
    p.add_argument("--json", help="write the report as JSON here")
    p.add_argument("--min-f", type=float, help="exit nonzero if any category F is below")

    p = sub.add_parser("sample", help="stratified annotation-corpus sampling")
    p.add_argument("--index", required=True, help="index CSV")
    p.add_argument(
        "--quota", action="append", metavar="STRATUM=N", help="per-stratum quota"
    )
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", help="write the shortfall report JSON here")

    p = sub.add_parser("emit-finetune", help="curated examples to training JSONL")
    p.add_argument("--examples", required=True, help="curated examples JSONL")
    p.add_argument("-o", "--output", required=True)

    return parser


_COMMANDS = {
    "ingest": cmd_ingest,
    "gold": cmd_gold,
    "extract": cmd_extract,
    "expand-lexicon": cmd_expand_lexicon,
    "merge-lexicon": cmd_merge_lexicon,
    "evaluate": cmd_evaluate,
    "sample": cmd_sample,
    "emit-finetune": cmd_emit_finetune,
}


def _print_version(args, settings: Settings) -> int:
    print(f"ssikit {__version__}")
    inclusion = settings.get("lexicon", None, default=str(data_path("starter_lexicon.tsv")))
    try:
        lexicon = load_lexicon(inclusion)
        print(f"lexicon {lexicon.version} ({inclusion})")
    except (OSError, ToolkitError) as exc:
        print(f"lexicon unavailable: {exc}", file=sys.stderr)
    return 0


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings(args.config, os.environ)
        if args.version:
            return _print_version(args, settings)
        if not args.command:
            parser.print_usage(sys.stderr)
            return 2
        return _COMMANDS[args.command](args, settings)
    except (ToolkitError, OSError) as exc:
        if args.json_errors:
            print(
                json.dumps(
                    {"error": type(exc).__name__, "message": str(exc)}, sort_keys=True
                ),
                file=sys.stderr,
            )
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(run())
