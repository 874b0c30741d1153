"""Deterministic synthetic certificate corpus for demos and end-to-end tests.

Generates documents that follow the certificate formulas of the three form
eras, with known ground truth per document and optional planted defects:

* ``garbled_name`` — the deceased's name is written with a misspelled token
  that is absent from the bundled name lexicon (gates the record for review)
* ``missing_date`` — the certificate carries no parseable date (gates)

Non-gating variations (wrong written year that the pipeline must correct,
stillbirth records, margin notes) are mixed in deterministically by index.
"""

from __future__ import annotations

import json
import random
import textwrap
from dataclasses import dataclass
from pathlib import Path

from .document import HtrDocument, TextLine, TextRegion, document_to_json
from .dutch import spell_number, spell_ordinal_day, spell_year
from .geometry import Point
from .scans import CITY, District, ScanId, format_scan_filename

PAGE_W, PAGE_H = 2400, 3400

FIRST_NAMES = [
    "Johan", "Maria", "Louis", "Anna", "Frederik", "Nicolina", "Pieter",
    "Elisabeth", "Willem", "Catharina", "Hendrik", "Johanna", "Jacobus",
    "Cornelia", "Theodorus", "Francisca", "Jan", "Helena", "Carel", "Sophia",
]
SURNAMES = [
    "Garmers", "Martis", "Curiel", "Palm", "Koolman", "Leito", "Cijntje",
    "Bakhuis", "Romer", "Statius", "Evertsz", "Daal", "Zimmerman", "Girigori",
    "Henriquez", "Maduro", "Pietersz", "Winkel", "Gorsira", "Specht",
]
PROFESSIONS = [
    "landbouwer", "schoenmaker", "smid", "visser", "timmerman", "kleermaker",
    "metselaar", "bakker", "koopman", "zeeman", "naaister", "zonder beroep",
]
MONTH_NAMES = {
    1: "Januari", 2: "Februari", 3: "Maart", 4: "April", 5: "Mei", 6: "Juni",
    7: "Juli", 8: "Augustus", 9: "September", 10: "October", 11: "November",
    12: "December",
}

GARBLED = "garbled_name"
MISSING_DATE = "missing_date"

DEFAULT_DEFECTS = {3: GARBLED, 11: MISSING_DATE, 17: GARBLED}

_YEARS = [1845, 1887, 1860, 1901, 1872, 1932, 1850, 1895, 1920, 1940]


@dataclass(frozen=True)
class CertificateTruth:
    scan: ScanId
    deceased_name: str | None     # real name; None for a stillbirth
    death_date: tuple[int, int, int]
    informant_name: str
    informant_age: int
    informant_profession: str
    father_name: str | None
    mother_name: str | None
    deceased_age: int | None
    defect: str | None = None
    stillborn: bool = False
    year_typo: bool = False       # written year is wrong; truth keeps the scan year

    def to_dict(self) -> dict:
        y, m, d = self.death_date
        return {
            "scan": format_scan_filename(self.scan),
            "deceased_name": self.deceased_name,
            "death_date": f"{y:04d}-{m:02d}-{d:02d}",
            "informant_name": self.informant_name,
            "defect": self.defect,
            "stillborn": self.stillborn,
            "year_typo": self.year_typo,
        }


@dataclass
class SyntheticCorpus:
    docs: list[HtrDocument]
    truths: list[CertificateTruth]
    lexicon_counts: dict[str, int]

    def write(self, out_dir: Path) -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for doc in self.docs:
            name = format_scan_filename(doc.scan).rsplit(".", 1)[0] + ".json"
            (out_dir / name).write_text(document_to_json(doc), encoding="utf-8")
        (out_dir / "ground_truth.json").write_text(
            json.dumps(
                [t.to_dict() for t in self.truths],
                ensure_ascii=False, sort_keys=True, indent=2,
            ),
            encoding="utf-8",
        )
        with open(out_dir / "names.csv", "w", encoding="utf-8") as fh:
            fh.write("name,count\n")
            for token in sorted(self.lexicon_counts):
                fh.write(f"{token},{self.lexicon_counts[token]}\n")


def _date_phrase(day: int, month: int, year: int, style: int) -> str:
    month_name = MONTH_NAMES[month]
    if style == 0:
        return f"den {day} {month_name} {year}"
    if style == 1:
        return f"den {spell_ordinal_day(day)} {month_name} {year}"
    return f"den {spell_ordinal_day(day)} {month_name} {spell_year(year)}"


def _age_phrase(age: int, written: bool) -> str:
    return f"oud {spell_number(age)} jaren" if written else f"oud {age} jaren"


def _pick_scan(index: int) -> ScanId:
    year = _YEARS[index % len(_YEARS)]
    if index % 5 == 2:
        district = District.numbered(2 + index % 3)  # 2..4 valid in every era
    else:
        district = CITY
    return ScanId(year, district, index + 1)


def _garble(token: str) -> str:
    return token + "q"


def generate_certificate_text(truth: CertificateTruth, index: int) -> tuple[list[str], list[str]]:
    """Render the certificate as wrapped center-column lines plus margin
    texts, exercising the date and age spelling variants by index."""
    y, m, d = truth.death_date
    style = index % 3
    written_year = y - 40 if truth.year_typo else y
    reg_day = min(d + 1, 28)
    reg_month = m

    if truth.defect == MISSING_DATE:
        opening = (
            "In het jaar dezes, den vijfden dezer maand, verscheen voor ons, "
            "Ambtenaar van den Burgerlijken Stand van het eiland Curaçao,"
        )
        death_when = "dat alhier"
    else:
        if index % 4 == 0:
            reg = _date_phrase(reg_day, reg_month, y, 0)
        else:
            reg = f"den {spell_ordinal_day(reg_day)} der maand {MONTH_NAMES[reg_month]}"
        verb = "compareerden" if truth.scan.year < 1869 else "verscheen"
        opening = (
            f"In het jaar {y}, {reg}, {verb} voor ons, Ambtenaar van den "
            f"Burgerlijken Stand van het eiland Curaçao,"
        )
        death_when = f"dat op {_date_phrase(d, m, written_year, style)} des avonds ten acht ure, alhier"

    informant = (
        f"{truth.informant_name}, {_age_phrase(truth.informant_age, index % 2 == 1)}, "
        f"{truth.informant_profession}, wonende alhier,"
    )

    if truth.stillborn:
        death = (
            f"dewelke ons verklaard heeft, {death_when} levenloos is geboren "
            f"een kind van het vrouwelijk geslacht, dochter van {truth.father_name} "
            f"en {truth.mother_name}, beiden wonende alhier."
        )
    else:
        shown_name = truth.deceased_name
        if truth.defect == GARBLED:
            tokens = shown_name.split()
            tokens[0] = _garble(tokens[0])
            shown_name = " ".join(tokens)
        parentage = ""
        if truth.father_name and truth.mother_name:
            parentage = f", dochter van {truth.father_name} en {truth.mother_name}"
        death = (
            f"dewelke ons verklaard heeft, {death_when} is overleden: "
            f"{shown_name}, {_age_phrase(truth.deceased_age, False)}, "
            f"zonder beroep, geboren alhier{parentage}."
        )

    closing = "en is deze akte door ons onderteekend."
    body = " ".join([opening, informant, death, closing])
    lines = textwrap.wrap(body, width=52)

    margins = []
    if index % 6 == 1 and truth.deceased_name:
        margins.append(truth.deceased_name)
    return lines, margins


def build_document(truth: CertificateTruth, index: int, rng: random.Random) -> HtrDocument:
    lines, margins = generate_certificate_text(truth, index)
    regions = []

    center_left, center_right = 360, 1960
    top = 300
    line_h = 60
    center_lines = []
    for i, text in enumerate(lines):
        yline = top + 60 + i * line_h
        center_lines.append(
            TextLine(
                id=f"c{i}",
                baseline=(Point(center_left + 20, yline), Point(center_right - 20, yline + rng.randint(-3, 3))),
                text=text,
            )
        )
    stored = list(center_lines)
    rng.shuffle(stored)  # reading order must be recovered from geometry
    bottom = top + 120 + len(lines) * line_h
    regions.append(
        TextRegion(
            id="center",
            polygon=(
                Point(center_left, top), Point(center_right, top),
                Point(center_right, bottom), Point(center_left, bottom),
            ),
            lines=tuple(stored),
        )
    )

    for mi, margin_text in enumerate(margins):
        left, right = 80, 300
        mtop = top + 200 * (mi + 1)
        regions.append(
            TextRegion(
                id=f"margin{mi}",
                polygon=(
                    Point(left, mtop), Point(right, mtop),
                    Point(right, mtop + 160), Point(left, mtop + 160),
                ),
                lines=(
                    TextLine(
                        id=f"m{mi}",
                        baseline=(Point(left + 10, mtop + 80), Point(right - 10, mtop + 80)),
                        text=margin_text,
                    ),
                ),
            )
        )

    return HtrDocument(
        scan=truth.scan, page_width=PAGE_W, page_height=PAGE_H, regions=tuple(regions)
    )


def generate_corpus(
    n: int = 20,
    seed: int = 1887,
    defects: dict[int, str] | None = None,
) -> SyntheticCorpus:
    """Build ``n`` certificates with ground truth; ``defects`` maps document
    index to a planted defect kind. Fully deterministic for a given seed."""
    defects = DEFAULT_DEFECTS if defects is None else defects
    rng = random.Random(seed)
    lexicon_counts: dict[str, int] = {}
    for pool in (FIRST_NAMES, SURNAMES):
        for token in pool:
            lexicon_counts[token] = 2 + rng.randint(0, 110)

    docs = []
    truths = []
    for i in range(n):
        scan = _pick_scan(i)
        stillborn = i % 9 == 4 and defects.get(i) is None
        first = FIRST_NAMES[(i * 3) % len(FIRST_NAMES)]
        middle = FIRST_NAMES[(i * 7 + 5) % len(FIRST_NAMES)]
        surname = SURNAMES[(i * 11 + 2) % len(SURNAMES)]
        father = f"{FIRST_NAMES[(i + 4) % len(FIRST_NAMES)]} {surname}"
        mother = (
            f"{FIRST_NAMES[(i + 9) % len(FIRST_NAMES)]} "
            f"{SURNAMES[(i * 5 + 7) % len(SURNAMES)]}"
        )
        truth = CertificateTruth(
            scan=scan,
            deceased_name=None if stillborn else f"{first} {middle} {surname}",
            death_date=(scan.year, 1 + (i * 5) % 12, 1 + (i * 7) % 28),
            informant_name=(
                f"{FIRST_NAMES[(i * 13 + 1) % len(FIRST_NAMES)]} "
                f"{SURNAMES[(i * 3 + 5) % len(SURNAMES)]}"
            ),
            informant_age=23 + (i * 7) % 50,
            informant_profession=PROFESSIONS[i % len(PROFESSIONS)],
            father_name=father if (stillborn or i % 2 == 0) else None,
            mother_name=mother if (stillborn or i % 2 == 0) else None,
            deceased_age=None if stillborn else 20 + (i * 13) % 70,
            defect=defects.get(i),
            stillborn=stillborn,
            year_typo=i % 10 == 7 and defects.get(i) is None,
        )
        truths.append(truth)
        docs.append(build_document(truth, i, rng))
    return SyntheticCorpus(docs, truths, lexicon_counts)
