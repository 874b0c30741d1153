"""Scan file naming scheme: parsing, canonical formatting, district schema.

Scan files are named like ``O.R. 1887 Stad 411.JPG``: a year, a district
label and a zero-padded certificate number, optionally followed by a single
letter marking an accompanying note. The district label is either the city
(``Stad``), a numbered outer district (``Buiten 9e distr``) or, in the
earliest decade, a grouped outer district (``Buiten West 2e distr``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .errors import MalformedName, NumberZero, YearOutOfRange

YEAR_MIN = 1831
YEAR_MAX = 1950

GROUPED_YEAR_MAX = 1840  # grouped districts occur only in 1831-1840

GROUPS = ("Oost", "Midden", "West")

# Grouped districts mapped onto the later 2-9 numbering, east to west.
# One archive folder is known to have West 1 and West 3 swapped, so callers
# can pass their own table where that matters.
DEFAULT_GROUP_NUMBERING: Mapping[tuple[str, int], int] = {
    ("Oost", 1): 2,
    ("Oost", 2): 3,
    ("Oost", 3): 4,
    ("Midden", 1): 5,
    ("Midden", 2): 6,
    ("West", 3): 7,
    ("West", 2): 8,
    ("West", 1): 9,
}


@dataclass(frozen=True)
class District:
    """A district label: the city, a numbered or a grouped outer district."""

    group: str | None = None  # one of GROUPS for grouped districts
    n: int | None = None      # district number; None means the city

    def __post_init__(self):
        if self.group is not None:
            if self.group not in GROUPS:
                raise MalformedName(f"unknown district group {self.group!r}")
            if (self.group, self.n) not in DEFAULT_GROUP_NUMBERING:
                raise MalformedName(
                    f"no grouped district {self.group} {self.n}"
                )
        elif self.n is not None and not 2 <= self.n <= 10:
            raise MalformedName(f"numbered district out of range: {self.n}")

    @classmethod
    def city(cls) -> "District":
        return cls()

    @classmethod
    def numbered(cls, n: int) -> "District":
        return cls(n=n)

    @classmethod
    def grouped(cls, group: str, n: int) -> "District":
        return cls(group=group, n=n)

    @property
    def is_city(self) -> bool:
        return self.n is None

    @property
    def is_grouped(self) -> bool:
        return self.group is not None

    @property
    def label(self) -> str:
        if self.is_city:
            return "Stad"
        if self.group is not None:
            return f"Buiten {self.group} {self.n}e distr"
        return f"Buiten {self.n}e distr"

    @property
    def sort_key(self) -> tuple:
        if self.is_city:
            return (0, 0, "")
        if self.group is None:
            return (1, self.n, "")
        return (2, self.n, self.group)

    def __str__(self) -> str:
        return self.label


CITY = District.city()


@dataclass(frozen=True)
class ScanId:
    """Parsed identity of one certificate scan."""

    year: int
    district: District
    number: int
    note_suffix: str | None = None

    def __post_init__(self):
        if not YEAR_MIN <= self.year <= YEAR_MAX:
            raise YearOutOfRange(f"year {self.year} outside {YEAR_MIN}-{YEAR_MAX}")
        if self.number < 1:
            raise NumberZero(f"certificate number must be >= 1, got {self.number}")
        if self.note_suffix is not None and not re.fullmatch(r"[a-z]", self.note_suffix):
            raise MalformedName(f"note suffix must be one letter a-z: {self.note_suffix!r}")
        if self.district.is_grouped and self.year > GROUPED_YEAR_MAX:
            raise MalformedName(
                f"grouped district {self.district.label!r} outside {YEAR_MIN}-{GROUPED_YEAR_MAX}"
            )

    @property
    def is_note(self) -> bool:
        return self.note_suffix is not None

    @property
    def sort_key(self) -> tuple:
        return (self.year, self.district.sort_key, self.number, self.note_suffix or "")

    def __str__(self) -> str:
        return format_scan_filename(self)


_NAME_RE = re.compile(
    r"^O\.R\.\s+(?P<year>\d{4})\s+"
    r"(?P<district>Stad|Buiten\s+(?:(?P<group>Oost|Midden|West)\s+)?(?P<dn>\d{1,2})e\s+distr)\s+"
    r"(?P<number>\d+)(?P<suffix>[a-z])?"
    r"\.(?P<ext>[Jj][Pp][Ee]?[Gg])$"
)


def parse_scan_filename(name: str) -> ScanId:
    """Parse a scan base file name into a :class:`ScanId`.

    Spacing is tolerated loosely (runs of blanks collapse); everything else
    is enforced strictly, mirroring the archive's naming rules.
    """
    m = _NAME_RE.match(name.strip())
    if m is None:
        raise MalformedName(f"not a scan file name: {name!r}")
    year = int(m.group("year"))
    if not YEAR_MIN <= year <= YEAR_MAX:
        raise YearOutOfRange(f"year {year} outside {YEAR_MIN}-{YEAR_MAX} in {name!r}")
    if m.group("district") == "Stad":
        district = CITY
    elif m.group("group") is not None:
        district = District.grouped(m.group("group"), int(m.group("dn")))
    else:
        district = District.numbered(int(m.group("dn")))
    number = int(m.group("number"))
    if number == 0:
        raise NumberZero(f"certificate number 0 in {name!r}")
    return ScanId(year, district, number, m.group("suffix"))


def format_scan_filename(scan: ScanId) -> str:
    """Render the canonical file name: single spaces, 3-digit number, .JPG."""
    suffix = scan.note_suffix or ""
    return f"O.R. {scan.year} {scan.district.label} {scan.number:03d}{suffix}.JPG"


@dataclass(frozen=True)
class DistrictSchema:
    """Expected districts for one year of the civil registry."""

    era: tuple[int, int]
    expected: frozenset[District]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(d.label for d in sorted(self.expected, key=lambda d: d.sort_key))


_ERAS = ((1831, 1863), (1864, 1924), (1925, 1950))


def district_schema(year: int) -> DistrictSchema:
    """Expected district set for a year: nine (1831-1863, grouped labels up
    to 1840), five (1864-1924) or three (1925-1950) districts."""
    if not YEAR_MIN <= year <= YEAR_MAX:
        raise YearOutOfRange(f"year {year} outside {YEAR_MIN}-{YEAR_MAX}")
    if year <= 1863:
        era = _ERAS[0]
        if year <= GROUPED_YEAR_MAX:
            expected = {CITY} | {
                District.grouped(g, n) for (g, n) in DEFAULT_GROUP_NUMBERING
            }
        else:
            expected = {CITY} | {District.numbered(n) for n in range(2, 10)}
    elif year <= 1924:
        era = _ERAS[1]
        expected = {CITY} | {District.numbered(n) for n in range(2, 6)}
    else:
        era = _ERAS[2]
        expected = {CITY} | {District.numbered(n) for n in range(2, 4)}
    return DistrictSchema(era=era, expected=frozenset(expected))
