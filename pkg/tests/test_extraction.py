import random

import pytest

from certpipe.document import main_text
from certpipe.extraction import (
    DateCandidate,
    QualityFlag,
    Role,
    RuleBackend,
    correct_year,
    extract_death_dates,
    extract_mentions,
    extract_record,
    get_backend,
)
from certpipe.synthetic import generate_corpus


# --- death dates -----------------------------------------------------------


def test_numeric_date():
    (cand,) = extract_death_dates("den 5 Mei 1887")
    assert (cand.year, cand.month, cand.day) == (1887, 5, 5)
    assert cand.raw == "den 5 Mei 1887"


def test_ordinal_word_date():
    (cand,) = extract_death_dates("den vijfden Mei 1887")
    assert cand.iso == "1887-05-05"


def test_written_year_date():
    (cand,) = extract_death_dates("den vijfden Mei achttienhonderd zeven en tachtig")
    assert cand.iso == "1887-05-05"


def test_der_maand_form():
    (cand,) = extract_death_dates("den achtsten der maand Februari 1901")
    assert cand.iso == "1901-02-08"


def test_invalid_calendar_date_skipped():
    assert extract_death_dates("den 30 Februari 1887") == []
    assert extract_death_dates("den 29 Februari 1888") != []  # leap year
    assert extract_death_dates("den 29 Februari 1887") == []


def test_no_dates():
    assert extract_death_dates("geen datum in deze tekst") == []


def test_candidates_ranked_by_death_cue_proximity():
    text = (
        "In het jaar 1887, den 6 Mei 1887, verscheen Louis Martis, "
        "dewelke verklaarde dat op den 5 Mei 1887 alhier is overleden: Maria."
    )
    cands = extract_death_dates(text)
    assert len(cands) == 2
    assert cands[0].day == 5  # the death date outranks the registration date
    assert cands[1].day == 6


def test_spans_within_text():
    text = "voor ons op den 12 Maart 1845 is overleden"
    (cand,) = extract_death_dates(text)
    s, e = cand.span
    assert 0 <= s < e <= len(text)
    assert text[s:e] == cand.raw


# --- year correction ---------------------------------------------------------


def dc(year, month=5, day=12):
    return DateCandidate(year, month, day, (0, 0), "x")


def test_wrong_year_forced_to_scan_year():
    fixed = correct_year(dc(1932), 1887)
    assert (fixed.year, fixed.month, fixed.day) == (1887, 5, 12)
    assert fixed.year_corrected


def test_matching_year_unchanged():
    cand = dc(1887)
    assert correct_year(cand, 1887) is cand


def test_prior_december_allowed():
    cand = DateCandidate(1886, 12, 31, (0, 0), "x")
    assert correct_year(cand, 1887) is cand


def test_leap_day_clamped():
    cand = DateCandidate(1888, 2, 29, (0, 0), "x")
    fixed = correct_year(cand, 1887)
    assert (fixed.year, fixed.month, fixed.day) == (1887, 2, 28)


def test_correct_year_idempotent_fuzz():
    rng = random.Random(5)
    for _ in range(200):
        scan_year = rng.randint(1831, 1950)
        cand = DateCandidate(rng.randint(1831, 1950), rng.randint(1, 12), rng.randint(1, 28), (0, 0), "x")
        once = correct_year(cand, scan_year)
        assert once.year in (scan_year - 1, scan_year)
        assert correct_year(once, scan_year) == once


# --- mentions ----------------------------------------------------------------


def test_informant_with_age_and_profession():
    text = "verscheen Louis Martis, oud 37 jaren, landbouwer, wonende alhier"
    (m,) = extract_mentions(text)
    assert m.name_tokens == ("Louis", "Martis")
    assert m.role == Role.INFORMANT
    assert m.age == 37
    assert m.profession == "landbouwer"


def test_written_age():
    text = "verscheen Louis Martis, oud zeven en dertig jaren, landbouwer"
    (m,) = extract_mentions(text)
    assert m.age == 37


def test_no_capitalized_sequences():
    assert extract_mentions("geen namen in deze lopende tekst") == []


def test_deceased_after_death_cue():
    text = "alhier is overleden: Maria Nicolina Garmers, oud 59 jaren"
    (m,) = extract_mentions(text)
    assert m.role == Role.DECEASED
    assert m.name_tokens == ("Maria", "Nicolina", "Garmers")


def test_parent_roles():
    text = "dochter van Johan Garmers en Anna Maria Martis, beiden alhier"
    ms = extract_mentions(text)
    assert [(m.role, m.name) for m in ms] == [
        (Role.FATHER, "Johan Garmers"),
        (Role.MOTHER, "Anna Maria Martis"),
    ]


def test_witness_chain_inherits_role():
    text = "in tegenwoordigheid van Pieter Palm, oud 40 jaren, en Willem Koolman, oud 35 jaren"
    ms = extract_mentions(text)
    assert [m.role for m in ms] == [Role.WITNESS, Role.WITNESS]
    assert ms[1].age == 35


def test_spouse_cue():
    (m,) = extract_mentions("weduwe van Carel Winkel")
    assert m.role == Role.SPOUSE


def test_name_particles_kept_inside():
    text = "verscheen Johan van der Daal, oud 40 jaren"
    (m,) = extract_mentions(text)
    assert m.name_tokens == ("Johan", "van", "der", "Daal")


def test_formula_words_not_names():
    text = "In het jaar 1887, den zesden Mei, compareerden voor ons, Ambtenaar van den Burgerlijken Stand"
    assert extract_mentions(text) == []


def test_mention_spans_non_decreasing():
    corpus = generate_corpus(n=8)
    for doc in corpus.docs:
        center, _ = main_text(doc)
        ms = extract_mentions(center)
        starts = [m.span[0] for m in ms]
        assert starts == sorted(starts)
        for m in ms:
            assert 0 <= m.span[0] < m.span[1] <= len(center)


# --- records -----------------------------------------------------------------


def test_record_flags_no_date():
    backend = RuleBackend()
    rec = backend.extract("is overleden: Maria Garmers, oud 3 jaren", None)
    assert QualityFlag.NO_DATE in rec.flags
    assert QualityFlag.NO_NAME not in rec.flags


def test_record_flags_stillborn_allows_no_name():
    backend = RuleBackend()
    rec = backend.extract(
        "dat op den 5 Mei 1887 alhier levenloos is geboren een kind", None
    )
    assert QualityFlag.STILLBORN in rec.flags
    assert QualityFlag.NO_NAME not in rec.flags
    assert rec.deceased_candidates == ()


def test_extract_record_year_correction_flag():
    corpus = generate_corpus(n=20)
    backend = RuleBackend()
    by_typo = {}
    for doc, truth in zip(corpus.docs, corpus.truths):
        rec = extract_record(doc, backend)
        by_typo.setdefault(truth.year_typo, []).append(rec)
    assert all(QualityFlag.YEAR_CORRECTED in r.flags for r in by_typo[True])
    assert all(QualityFlag.YEAR_CORRECTED not in r.flags for r in by_typo[False])


def test_extract_record_failure_isolated():
    class Exploding:
        name = "exploding"

        def extract(self, text, scan):
            raise RuntimeError("boom")

    corpus = generate_corpus(n=1)
    rec = extract_record(corpus.docs[0], Exploding())
    assert QualityFlag.EXTRACTION_FAILED in rec.flags
    assert QualityFlag.NO_DATE in rec.flags


def test_margin_mentions_collected():
    corpus = generate_corpus(n=2)
    doc = corpus.docs[1]  # index 1 carries a margin note with the name
    _, margins = main_text(doc)
    assert margins
    rec = extract_record(corpus.docs[1], RuleBackend())
    margin_names = [m.name for m in rec.other_mentions if m.role == Role.UNKNOWN]
    assert corpus.truths[1].deceased_name in margin_names


def test_synthetic_corpus_grammar_closed():
    corpus = generate_corpus(n=20)
    backend = RuleBackend()
    for doc, truth in zip(corpus.docs, corpus.truths):
        rec = extract_record(doc, backend)
        if truth.defect == "missing_date":
            assert QualityFlag.NO_DATE in rec.flags
            continue
        y, m, d = truth.death_date
        assert rec.death_dates[0].iso == f"{y:04d}-{m:02d}-{d:02d}"
        if truth.stillborn:
            assert QualityFlag.STILLBORN in rec.flags
        elif truth.defect is None:
            assert rec.deceased_candidates[0].name == truth.deceased_name


def test_extraction_deterministic():
    corpus = generate_corpus(n=5)
    backend = RuleBackend()
    first = [extract_record(doc, backend) for doc in corpus.docs]
    second = [extract_record(doc, backend) for doc in corpus.docs]
    assert first == second


def test_get_backend():
    assert get_backend("rules").name == "rules"
    with pytest.raises(KeyError):
        get_backend("chatgpt")


def test_cue_tables_from_dir(tmp_path):
    (tmp_path / "death_cues.txt").write_text("overleden\nbezweken\n", encoding="utf-8")
    tables = __import__("certpipe.extraction", fromlist=["CueTables"]).CueTables.from_dir(tmp_path)
    assert "bezweken" in tables.death_cues
    assert tables.months  # untouched tables keep the bundled defaults
    (m,) = extract_mentions("bezweken is: Maria Garmers, oud 3 jaren", tables)
    assert m.role == Role.DECEASED
