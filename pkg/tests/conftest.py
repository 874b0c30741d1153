from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from certpipe.extraction import Role
from certpipe.lexicon import build_lexicon
from certpipe.linking import PersonRow
from certpipe.scans import CITY, District, ScanId, format_scan_filename


@pytest.fixture
def table2_rows() -> list[PersonRow]:
    """The two link-group examples: one plausible, one impossible."""
    g = ("Johan", "Frederik", "Garmers")
    m = ("Louis", "Martis")
    return [
        PersonRow(g, Role.WITNESS, 1873, 31, "shoemaker", None, "t2:1"),
        PersonRow(g, Role.FATHER, 1873, 31, "shoemaker", "Maria Nicolina Garmers", "t2:2"),
        PersonRow(g, Role.DECEASED, 1901, 59, "smith", "07-12-1841", "t2:3"),
        PersonRow(m, Role.INFORMANT, 1874, 37, "farmer", None, "t2:4"),
        PersonRow(m, Role.DECEASED, 1878, 41, "farmer", "1837", "t2:5"),
        PersonRow(m, Role.DECEASED, 1913, 75, "farmer", "1837", "t2:6"),
    ]


TABLE2_CSV = """name,role,year,age,profession,other
Johan Frederik Garmers,witness,1873,31,shoemaker,
Johan Frederik Garmers,father,1873,31,shoemaker,Maria Nicolina Garmers
Johan Frederik Garmers,deceased,1901,59,smith,07-12-1841
Louis Martis,informant,1874,37,farmer,
Louis Martis,deceased,1878,41,farmer,1837
Louis Martis,deceased,1913,75,farmer,1837
"""


@pytest.fixture
def table2_csv(tmp_path) -> Path:
    path = tmp_path / "table2.csv"
    path.write_text(TABLE2_CSV, encoding="utf-8")
    return path


# 50 entries: engineered tie-break cases plus plausible name tokens.
TOY_LEXICON_COUNTS = {
    "Maria": 100, "Marian": 5,           # equidistant from "Mariak": frequency wins
    "Rosalia": 7, "Rosalio": 7,          # equal frequency: lexicographic wins
    "Zeldzaam": 1,                       # below the replacement floor
    "Johan": 90, "Frederik": 40, "Garmers": 55, "Louis": 60, "Martis": 45,
    "Nicolina": 25, "Anna": 80, "Pieter": 70, "Elisabeth": 35, "Willem": 65,
    "Catharina": 30, "Hendrik": 50, "Johanna": 42, "Jacobus": 28, "Cornelia": 22,
    "Theodorus": 18, "Francisca": 16, "Jan": 85, "Helena": 33, "Carel": 27,
    "Sophia": 38, "Curiel": 21, "Palm": 47, "Koolman": 19, "Leito": 14,
    "Cijntje": 12, "Bakhuis": 11, "Romer": 13, "Statius": 9, "Evertsz": 8,
    "Daal": 24, "Zimmerman": 7, "Girigori": 6, "Henriquez": 15, "Maduro": 29,
    "Pietersz": 10, "Winkel": 17, "Gorsira": 5, "Specht": 4, "Quandus": 3,
    "Isenia": 26, "Rosaria": 23, "Felipa": 20, "Balentien": 6, "Sillie": 3,
}


@pytest.fixture(scope="session")
def toy_lexicon():
    assert len(TOY_LEXICON_COUNTS) == 50
    return build_lexicon(TOY_LEXICON_COUNTS, source="toy")


def make_scan_tree(root: Path) -> dict:
    """Plant a 50-file corpus: 42 unique certificate scans, 5 byte-duplicate
    copies and 3 same-certificate rescans with different bytes."""
    years = [1835, 1850, 1887, 1901, 1940]
    districts = {
        1835: [CITY, District.grouped("West", 2)],
        1850: [CITY, District.numbered(9)],
        1887: [CITY, District.numbered(3)],
        1901: [CITY, District.numbered(5)],
        1940: [CITY, District.numbered(2)],
    }
    paths: list[Path] = []
    made = 0
    for year in years:
        for district in districts[year]:
            ddir = root / f"O.R. {year}" / f"O.R. {year} {district.label}"
            ddir.mkdir(parents=True, exist_ok=True)
            for number in range(1, 6):
                if made >= 42:
                    break
                name = format_scan_filename(ScanId(year, district, number))
                path = ddir / name
                path.write_bytes(f"scan {year} {district.label} {number}".encode())
                paths.append(path)
                made += 1

    identical, scan_dups = [], []
    for path in paths[:5]:
        copy_dir = path.parent / "renamed"
        copy_dir.mkdir(exist_ok=True)
        copy = copy_dir / path.name
        copy.write_bytes(path.read_bytes())
        identical.append((path, copy))
    for path in paths[5:8]:
        other = path.with_suffix(".jpg")
        other.write_bytes(path.read_bytes() + b" rescan")
        scan_dups.append((path, other))
    return {"root": root, "identical": identical, "scan_dups": scan_dups, "unique": paths}


@pytest.fixture
def planted_corpus(tmp_path):
    return make_scan_tree(tmp_path / "corpus")
