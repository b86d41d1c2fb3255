"""Drive the whole pipeline through the command line: notes in, report out."""

import subprocess
import sys
import tempfile
from pathlib import Path

NOTES = {
    # filename layout: rowid_person_noteid_date.txt
    "1_p01_n01_2020-01-10.txt": (
        "Pt reports feelings of loneliness since her husband passed.\n"
    ),
    "2_p02_n02_2020-02-03.txt": (
        "She goes to church weekly and can talk to family about her worries.\n"
    ),
    "3_p03_n03_2020-03-15.txt": "Routine visit. Vitals stable. No acute issues.\n",
    "4_p04_n04_2020-04-20.txt": (
        "Denies suffering from loneliness. A home health aide assists daily.\n"
    ),
}

# Gold standoff annotations for the same notes; n03 stays empty on purpose.
ANNS = {
    "1_p01_n01_2020-01-10.ann": "T1\tsocial_isolation_loneliness 11 33\tfeelings of loneliness\n",
    "2_p02_n02_2020-02-03.ann": (
        "T1\tsocial_support_social_network 4 18\tgoes to church\n"
        "T2\tsocial_support_emotional_support 30 48\tcan talk to family\n"
    ),
    "3_p03_n03_2020-03-15.ann": "",
    "4_p04_n04_2020-04-20.ann": (
        "T1\tsocial_isolation_loneliness 22 32\tloneliness\n"
        "A1\tNegation T1\n"
        "T2\tsocial_support_instrumental_support 36 52\thome health aide\n"
    ),
}


def run(*args: str) -> str:
    proc = subprocess.run(
        ["ssikit", *args], capture_output=True, text=True, check=False
    )
    if proc.returncode != 0:
        sys.exit(f"command failed: ssikit {' '.join(args)}\n{proc.stderr}")
    return proc.stdout


with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)
    notes_dir = root / "notes"
    notes_dir.mkdir()
    for name, text in {**NOTES, **ANNS}.items():
        (notes_dir / name).write_text(text)

    # 1. ingest: raw .txt files to a corpus JSONL (templates blanked,
    #    sentences segmented, ids parsed out of the filenames)
    corpus = root / "corpus.jsonl"
    print(run("ingest", str(notes_dir), "-o", str(corpus)), end="")

    # 2. gold: standoff .ann files to note-level gold labels
    gold = root / "gold.jsonl"
    print(run("gold", str(notes_dir), "-o", str(gold)), end="")

    # 3. extract: the rule-based engine over the corpus, with .ann audit
    #    files so every decision can be inspected in an annotation tool
    pred = root / "pred.jsonl"
    audit = root / "audit"
    print(
        run(
            "extract", "--engine", "rbs", "--notes", str(corpus),
            "-o", str(pred), "--ann-dir", str(audit),
        ),
        end="",
    )
    print("audit files:", sorted(p.name for p in audit.iterdir()))

    # 4. evaluate: predictions against gold at both levels
    print()
    print(run("evaluate", "--gold", str(gold), "--pred", str(pred), "--level", "both"))
