"""Scoring math against brute-force oracles plus alignment and ICD checks."""

import json
import random

import pytest

from ssikit import (
    AlignmentError,
    CoarseCategory,
    DocumentLabels,
    FineCategory,
    IcdCodeSet,
    align_labels,
    cohens_kappa,
    iaa_report,
    icd_comparison,
    macro_report,
    score_binary,
)
from ssikit.evaluation import (
    DEFAULT_ICD_CODES,
    EXTENDED_ICD_CODES,
    read_labels_jsonl,
    read_visit_codes,
)

from oracles import brute_kappa, brute_prf


def labels(*fine: FineCategory) -> DocumentLabels:
    from ssikit.categories import derive_document_labels

    return derive_document_labels(set(fine))


def test_score_binary_worked_example():
    gold = [True, True, False, False]
    pred = [True, False, False, False]
    p, r, f = score_binary(gold, pred)
    assert p == 1.0
    assert r == 0.5
    assert abs(f - 2 / 3) < 1e-12


def test_score_binary_zero_conventions():
    assert score_binary([False, False], [False, False]) == (0.0, 0.0, 0.0)
    assert score_binary([True], [False]) == (0.0, 0.0, 0.0)
    assert score_binary([False], [True]) == (0.0, 0.0, 0.0)


def test_score_binary_matches_oracle():
    rng = random.Random(11)
    for _ in range(300):
        n = rng.randint(1, 40)
        gold = [rng.random() < 0.4 for _ in range(n)]
        pred = [rng.random() < 0.4 for _ in range(n)]
        assert score_binary(gold, pred) == pytest.approx(brute_prf(gold, pred), abs=1e-12)


def test_f_is_bounded_by_precision_recall():
    rng = random.Random(12)
    for _ in range(300):
        n = rng.randint(1, 40)
        gold = [rng.random() < 0.5 for _ in range(n)]
        pred = [rng.random() < 0.5 for _ in range(n)]
        p, r, f = score_binary(gold, pred)
        assert f <= (p + r) / 2 + 1e-12
        if p > 0 and r > 0:
            assert f >= min(p, r) - 1e-12


def test_kappa_perfect_agreement():
    assert cohens_kappa([True, False, True], [True, False, True]) == 1.0
    # all-positive raters agree but p_e is 1; perfect observed agreement wins
    assert cohens_kappa([True, True], [True, True]) == 1.0


def test_kappa_degenerate_disagreement():
    # p_e == 1 with imperfect agreement pins kappa at 0
    assert cohens_kappa([True, True, True], [True, True, False]) != 1.0


def test_kappa_known_contingency():
    # 4 both-yes, 1 a-only, 1 b-only, 4 both-no; p_o=0.8, p_e=0.5
    a = [True] * 4 + [True] + [False] + [False] * 4
    b = [True] * 4 + [False] + [True] + [False] * 4
    assert cohens_kappa(a, b) == pytest.approx(0.6, abs=1e-12)


def test_kappa_matches_oracle_and_range():
    rng = random.Random(13)
    for _ in range(300):
        n = rng.randint(2, 50)
        a = [rng.random() < 0.5 for _ in range(n)]
        b = [rng.random() < 0.5 for _ in range(n)]
        k = cohens_kappa(a, b)
        assert k == pytest.approx(brute_kappa(a, b), abs=1e-12)
        assert -1.0 - 1e-12 <= k <= 1.0 + 1e-12


def test_kappa_near_zero_for_independent_raters():
    rng = random.Random(14)
    n = 20000
    a = [rng.random() < 0.5 for _ in range(n)]
    b = [rng.random() < 0.5 for _ in range(n)]
    assert abs(cohens_kappa(a, b)) < 0.05


def test_macro_report_skips_gold_empty_categories():
    gold = [labels(FineCategory.LONELINESS), labels()]
    pred = [labels(FineCategory.LONELINESS), labels(FineCategory.SS_GENERAL)]
    report = macro_report(gold, pred, level="fine")
    assert list(report.skipped) == [
        c.value for c in FineCategory
        if c not in (FineCategory.LONELINESS, FineCategory.PROBABLE)
    ]
    included = [row for row in report.rows if row.category == "loneliness"]
    assert included[0].f_score == 1.0
    assert report.macro_f == 1.0


def test_macro_report_is_mean_of_included_rows():
    rng = random.Random(15)
    cats = [c for c in FineCategory if c is not FineCategory.PROBABLE]
    gold = []
    pred = []
    for _ in range(60):
        gold.append(labels(*[c for c in cats if rng.random() < 0.3]))
        pred.append(labels(*[c for c in cats if rng.random() < 0.3]))
    report = macro_report(gold, pred, level="fine")
    included = [row for row in report.rows if not row.skipped]
    assert report.macro_f == pytest.approx(
        sum(row.f_score for row in included) / len(included), abs=1e-12
    )


def test_macro_report_permutation_invariant():
    rng = random.Random(16)
    cats = [c for c in FineCategory if c is not FineCategory.PROBABLE]
    pairs = []
    for _ in range(30):
        pairs.append(
            (
                labels(*[c for c in cats if rng.random() < 0.3]),
                labels(*[c for c in cats if rng.random() < 0.3]),
            )
        )
    base = macro_report([g for g, _ in pairs], [p for _, p in pairs], level="fine")
    rng.shuffle(pairs)
    shuffled = macro_report([g for g, _ in pairs], [p for _, p in pairs], level="fine")
    assert base.to_record() == shuffled.to_record()


def test_macro_report_coarse_level():
    gold = [labels(FineCategory.LONELINESS), labels(FineCategory.SS_GENERAL)]
    pred = [labels(FineCategory.SI_GENERAL), labels(FineCategory.SOCIAL_NETWORK)]
    report = macro_report(gold, pred, level="coarse")
    assert [row.category for row in report.rows] == ["SS", "SI"]
    # different fine categories, same sides: coarse is perfect
    assert report.macro_f == 1.0


def test_macro_report_length_mismatch():
    with pytest.raises(AlignmentError):
        macro_report([labels()], [], level="fine")


def test_align_labels():
    gold = {"n2": labels(), "n1": labels(FineCategory.LONELINESS)}
    pred = {"n1": labels(FineCategory.LONELINESS), "n2": labels()}
    ids, gold_seq, pred_seq = align_labels(gold, pred)
    assert ids == ["n1", "n2"]
    assert gold_seq[0].fine == {FineCategory.LONELINESS}
    with pytest.raises(AlignmentError) as err:
        align_labels(gold, {"n1": labels()})
    assert "n2" in str(err.value)


def test_iaa_report_pools_only_observed_labels():
    # raters agree on 4 docs, each marks 1 extra of 10: kappa 0.6 per label
    a = {}
    b = {}
    for i in range(1, 11):
        note_id = f"n{i}"
        a[note_id] = labels(FineCategory.LONELINESS) if i <= 5 else labels()
        b[note_id] = labels(FineCategory.LONELINESS) if i <= 4 or i == 6 else labels()
    report = iaa_report(a, b)
    assert report.fine_kappa == pytest.approx(0.6, abs=1e-12)
    assert report.coarse_kappa == pytest.approx(0.6, abs=1e-12)
    text = report.to_text()
    assert "kappa (fine):   0.6000" in text
    assert "kappa (coarse): 0.6000" in text


def test_icd_code_set_defaults():
    assert "Z60.2" in DEFAULT_ICD_CODES
    assert "V62.4" in DEFAULT_ICD_CODES
    assert set(DEFAULT_ICD_CODES) < set(EXTENDED_ICD_CODES)
    codes = IcdCodeSet(DEFAULT_ICD_CODES)
    assert codes.matches("z60.2")  # case folded
    assert not codes.matches("Z99.9")


def test_icd_comparison_counts():
    gold = {
        "n1": labels(FineCategory.LONELINESS),
        "n2": labels(FineCategory.SI_GENERAL),
        "n3": labels(FineCategory.SS_GENERAL),
        "n4": labels(),
    }
    visit_codes = {"n1": ["Z60.2"], "n2": [], "n3": ["I10"], "n4": ["z60.4"]}
    result = icd_comparison(visit_codes, gold, IcdCodeSet(DEFAULT_ICD_CODES))
    assert result.gold_si_count == 2
    assert result.coded_count == 2  # n1 and n4
    assert result.overlap == 1  # only n1 is both


def test_icd_comparison_zero_overlap_structure():
    gold = {"n1": labels(FineCategory.LONELINESS)}
    visit_codes = {"n1": ["I10", "E11.9"]}
    result = icd_comparison(visit_codes, gold, IcdCodeSet(DEFAULT_ICD_CODES))
    assert result.coded_count == 0
    assert result.gold_si_count == 1
    assert result.overlap == 0


def test_icd_comparison_missing_note():
    with pytest.raises(AlignmentError):
        icd_comparison(
            {"n1": []},
            {"n1": labels(), "n2": labels()},
            IcdCodeSet(DEFAULT_ICD_CODES),
        )


def test_read_visit_codes(tmp_path):
    path = tmp_path / "codes.csv"
    path.write_text(
        "note_id,code\nn1,Z60.2\nn1,I10\nn2,V62.4\n", encoding="utf-8"
    )
    codes = read_visit_codes(path)
    assert codes == [("n1", ["Z60.2", "I10"]), ("n2", ["V62.4"])]
    bad = tmp_path / "bad.csv"
    bad.write_text("id,code\nn1,Z60.2\n", encoding="utf-8")
    with pytest.raises(AlignmentError):
        read_visit_codes(bad)


def test_read_labels_jsonl(tmp_path):
    path = tmp_path / "labels.jsonl"
    rows = [
        {"note_id": "n1", "fine": ["loneliness"], "coarse": ["social_isolation"], "none": False},
        {"note_id": "n2", "fine": [], "coarse": [], "none": True},
    ]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    loaded = read_labels_jsonl(path)
    assert set(loaded) == {"n1", "n2"}
    assert loaded["n1"].fine == {FineCategory.LONELINESS}
    assert loaded["n2"].none
    dup = tmp_path / "dup.jsonl"
    dup.write_text(
        json.dumps(rows[0]) + "\n" + json.dumps(rows[0]) + "\n", encoding="utf-8"
    )
    with pytest.raises(AlignmentError):
        read_labels_jsonl(dup)


def test_report_text_has_macro_row():
    gold = [labels(FineCategory.LONELINESS)]
    pred = [labels(FineCategory.LONELINESS)]
    report = macro_report(gold, pred, level="fine")
    text = report.to_text()
    assert "macro" in text
    assert "loneliness" in text
