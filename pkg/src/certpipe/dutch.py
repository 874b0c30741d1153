"""Dutch number words, ordinal days and month names as used on the
19th/20th-century certificates, including historical spelling variants.

Month and ordinal tables live in data files (one ``term,value`` entry per
line) so deployments can extend them; the number-word grammar for written
years ("achttienhonderd zeven en tachtig") is systematic and lives here.
"""

from __future__ import annotations

import re
from importlib import resources

UNITS = {
    "een": 1, "twee": 2, "drie": 3, "vier": 4, "vijf": 5,
    "zes": 6, "zeven": 7, "acht": 8, "negen": 9,
}
TEENS = {
    "tien": 10, "elf": 11, "twaalf": 12, "dertien": 13, "veertien": 14,
    "vijftien": 15, "zestien": 16, "zeventien": 17, "achttien": 18,
    "negentien": 19,
}
TENS = {
    "twintig": 20, "dertig": 30, "veertig": 40, "vijftig": 50,
    "zestig": 60, "zeventig": 70, "tachtig": 80, "negentig": 90,
}

# joined compounds use a linking "en", with a diaeresis after twee/drie;
# stored as unit-plus-"e" so that form = join + "n" + tens
_JOIN_FORMS = {"een": "eene", "twee": "tweeë", "drie": "drieë", "vier": "viere",
               "vijf": "vijfe", "zes": "zese", "zeven": "zevene", "acht": "achte",
               "negen": "negene"}


def _load_table(name: str) -> dict[str, int]:
    table: dict[str, int] = {}
    text = resources.files("certpipe.data").joinpath(name).read_text("utf-8")
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        term, _, value = line.rpartition(",")
        table[term.strip().lower()] = int(value)
    return table


def load_terms(path) -> list[str]:
    """Read a cue/term list: UTF-8, one entry per line, # comments."""
    from pathlib import Path

    text = Path(path).read_text(encoding="utf-8")
    return [l.strip() for l in text.splitlines() if l.strip() and not l.startswith("#")]


def load_packaged_terms(name: str) -> list[str]:
    text = resources.files("certpipe.data").joinpath(name).read_text("utf-8")
    return [l.strip() for l in text.splitlines() if l.strip() and not l.startswith("#")]


def month_table() -> dict[str, int]:
    return _load_table("months.txt")


def ordinal_table() -> dict[str, int]:
    return _load_table("ordinals.txt")


def parse_number_words(text: str) -> int | None:
    """Parse 1-99 written in Dutch: "zeven", "tachtig", "zeven en tachtig",
    "zevenentachtig". Returns None when the words do not form a number."""
    s = text.strip().lower()
    if s in UNITS:
        return UNITS[s]
    if s in TEENS:
        return TEENS[s]
    if s in TENS:
        return TENS[s]
    m = re.fullmatch(r"(\w+)\s+en\s+(\w+)", s)
    if m and m.group(1) in UNITS and m.group(2) in TENS:
        return UNITS[m.group(1)] + TENS[m.group(2)]
    for unit, joined in _JOIN_FORMS.items():
        for tens_word, tens_val in TENS.items():
            if s == f"{joined}n{tens_word}":
                return UNITS[unit] + tens_val
    return None


def parse_written_year(text: str) -> int | None:
    """Parse a written-out year like "achttienhonderd zeven en tachtig" or
    "negentien honderd vijf". Returns None if the text is not one."""
    s = text.strip().lower()
    m = re.fullmatch(r"(achttien|negentien)\s*honderd(?:\s+(.+))?", s)
    if not m:
        return None
    base = 1800 if m.group(1) == "achttien" else 1900
    rest = m.group(2)
    if rest is None:
        return base
    value = parse_number_words(rest)
    return base + value if value is not None else None


def _alt(words) -> str:
    return "(?:" + "|".join(sorted(words, key=len, reverse=True)) + ")"


def written_year_pattern() -> str:
    """Regex fragment matching exactly the written years this module parses."""
    unit = _alt(UNITS)
    teen = _alt(TEENS)
    tens = _alt(TENS)
    joined = _alt(f"{j}n{t}" for j in _JOIN_FORMS.values() for t in TENS)
    remainder = rf"(?:{unit}\s+en\s+{tens}|{joined}|{teen}|{tens}|{unit})"
    return rf"(?:achttien|negentien)\s*honderd(?:\s+{remainder})?"


def spell_number(n: int) -> str:
    """Spell 1-99 in the spaced historical style ("zeven en tachtig")."""
    if not 1 <= n <= 99:
        raise ValueError(f"can only spell 1-99, got {n}")
    if n <= 9:
        return next(w for w, v in UNITS.items() if v == n)
    if n <= 19:
        return next(w for w, v in TEENS.items() if v == n)
    tens_word = next(w for w, v in TENS.items() if v == n - n % 10)
    if n % 10 == 0:
        return tens_word
    return f"{spell_number(n % 10)} en {tens_word}"


def spell_year(year: int) -> str:
    """Spell a year 1800-1999 the way the certificates write it."""
    if not 1800 <= year <= 1999:
        raise ValueError(f"can only spell 1800-1999, got {year}")
    base = "achttienhonderd" if year < 1900 else "negentienhonderd"
    rest = year % 100
    return base if rest == 0 else f"{base} {spell_number(rest)}"


_ORDINAL_BASE = {
    1: "eersten", 2: "tweeden", 3: "derden", 4: "vierden", 5: "vijfden",
    6: "zesden", 7: "zevenden", 8: "achtsten", 9: "negenden", 10: "tienden",
    11: "elfden", 12: "twaalfden", 13: "dertienden", 14: "veertienden",
    15: "vijftienden", 16: "zestienden", 17: "zeventienden",
    18: "achttienden", 19: "negentienden", 20: "twintigsten",
    30: "dertigsten",
}


def spell_ordinal_day(day: int) -> str:
    """Historical genitive ordinal for a day of the month ("vijfden")."""
    if not 1 <= day <= 31:
        raise ValueError(f"day out of range: {day}")
    if day in _ORDINAL_BASE:
        return _ORDINAL_BASE[day]
    unit = day % 10
    tens = next(w for w, v in TENS.items() if v == day - unit)
    return f"{spell_number(unit)} en {tens}sten"
