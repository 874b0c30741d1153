"""Link person mentions across certificates by exact normalized name and
birth-year interval, and judge the plausibility of each link group.

A reported age pins the birth year to a two-year window (the birthday falls
before or after the certificate date); a recorded birth date pins it
exactly. Rows with neither are kept but never linked.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import EmptyFile, NegativeAge
from .extraction import Role
from .lexicon import normalize_token
from .scans import YEAR_MAX, YEAR_MIN


@dataclass(frozen=True)
class PersonRow:
    name_tokens: tuple[str, ...]
    role: Role
    cert_year: int
    age: int | None = None
    profession: str | None = None
    other: str | None = None
    source: str = ""

    def __post_init__(self):
        if self.age is not None and self.age < 0:
            raise NegativeAge(f"age {self.age} in {self.source or self.name}")

    @property
    def name(self) -> str:
        return " ".join(self.name_tokens)

    @property
    def recorded_birth_year(self) -> int | None:
        """Birth year parsed from the free-text column: a dd-mm-yyyy date or
        a bare year; anything else is opaque."""
        if not self.other:
            return None
        text = self.other.strip()
        m = re.fullmatch(r"(\d{1,2})-(\d{1,2})-(\d{4})", text)
        if m:
            return int(m.group(3))
        if re.fullmatch(r"\d{4}", text):
            return int(text)
        return None

    @property
    def linkable(self) -> bool:
        return self.age is not None or self.recorded_birth_year is not None


@dataclass(frozen=True)
class BirthInterval:
    low: int
    high: int

    def __post_init__(self):
        if self.high != self.low + 1:
            raise ValueError("birth interval must span exactly two years")


def birth_interval(cert_year: int, age: int) -> BirthInterval:
    """Two-year window implied by a reported age: the person was born in
    cert_year - age, or the year before if the birthday was still to come."""
    if age < 0:
        raise NegativeAge(f"age must be >= 0, got {age}")
    return BirthInterval(cert_year - age - 1, cert_year - age)


def _link_bounds(row: PersonRow) -> tuple[int, int] | None:
    # age wins when present; a recorded birth year gives a degenerate window
    if row.age is not None:
        iv = birth_interval(row.cert_year, row.age)
        return iv.low, iv.high
    year = row.recorded_birth_year
    if year is not None:
        return year, year
    return None


class GroupVerdict(str, Enum):
    PLAUSIBLE = "Plausible"
    SUSPECT = "Suspect"


MULTIPLE_DEATHS = "MultipleDeaths"
ACTIVITY_AFTER_DEATH = "ActivityAfterDeath"


@dataclass(frozen=True)
class LinkGroup:
    key: tuple[str, int]  # (normalized name, representative birth year)
    members: tuple[PersonRow, ...]
    verdict: GroupVerdict
    reasons: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "name": self.key[0],
            "birth_year": self.key[1],
            "verdict": self.verdict.value,
            "reasons": list(self.reasons),
            "members": [
                {
                    "name": m.name,
                    "role": m.role.value,
                    "cert_year": m.cert_year,
                    "age": m.age,
                    "profession": m.profession,
                    "other": m.other,
                    "source": m.source,
                }
                for m in self.members
            ],
        }


def validate_group(members: Sequence[PersonRow]) -> tuple[GroupVerdict, tuple[str, ...]]:
    """A person dies once and does nothing afterwards: more than one
    deceased row, or a deceased row earlier than any other member's
    certificate year, makes the group suspect."""
    reasons = []
    deceased = [m for m in members if m.role == Role.DECEASED]
    if len(deceased) > 1:
        reasons.append(MULTIPLE_DEATHS)
    if deceased:
        first_death = min(m.cert_year for m in deceased)
        if any(m.cert_year > first_death for m in members):
            reasons.append(ACTIVITY_AFTER_DEATH)
    verdict = GroupVerdict.SUSPECT if reasons else GroupVerdict.PLAUSIBLE
    return verdict, tuple(reasons)


def name_key(tokens: Iterable[str], any_order: bool = False) -> str:
    norm = [normalize_token(t) for t in tokens]
    if any_order:
        norm.sort()
    return " ".join(norm)


def build_link_groups(
    rows: Iterable[PersonRow], tolerance: int = 0, any_order: bool = False
) -> list[LinkGroup]:
    """Partition linkable rows of the same exact name into groups whose
    birth windows mutually overlap (within ``tolerance`` years).

    Greedy over rows sorted by ascending birth estimate, maintaining the
    group's window intersection, so membership is order-independent and all
    members pairwise overlap. Singletons are dropped here and counted by
    :func:`link_stats`.
    """
    by_name: dict[str, list[tuple[tuple[int, int], PersonRow]]] = {}
    for row in rows:
        if not row.name_tokens:
            continue
        bounds = _link_bounds(row)
        if bounds is None:
            continue
        by_name.setdefault(name_key(row.name_tokens, any_order), []).append((bounds, row))

    groups: list[LinkGroup] = []
    for key in sorted(by_name):
        entries = sorted(
            by_name[key],
            key=lambda e: (e[0][0], e[0][1], e[1].cert_year, e[1].role.value, e[1].source),
        )
        cluster: list[tuple[tuple[int, int], PersonRow]] = []
        lo = hi = 0

        def flush():
            if len(cluster) >= 2:
                members = tuple(r for _, r in cluster)
                verdict, reasons = validate_group(members)
                groups.append(LinkGroup((key, lo), members, verdict, reasons))

        for bounds, row in entries:
            if not cluster:
                cluster = [(bounds, row)]
                lo, hi = bounds
                continue
            if bounds[0] <= hi + tolerance and lo <= bounds[1] + tolerance:
                cluster.append((bounds, row))
                lo = max(lo, bounds[0])
                hi = min(hi, bounds[1])
            else:
                flush()
                cluster = [(bounds, row)]
                lo, hi = bounds
        flush()
    return groups


@dataclass
class LinkStats:
    n_rows: int = 0
    n_linkable_rows: int = 0
    unique_names: int = 0
    unique_linkable_names: int = 0
    n_groups: int = 0
    n_singletons: int = 0
    reporter_names: int = 0
    reporter_deceased_matches: int = 0
    match_fraction: float = 0.0
    role_pair_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "n_linkable_rows": self.n_linkable_rows,
            "unique_names": self.unique_names,
            "unique_linkable_names": self.unique_linkable_names,
            "n_groups": self.n_groups,
            "n_singletons": self.n_singletons,
            "reporter_names": self.reporter_names,
            "reporter_deceased_matches": self.reporter_deceased_matches,
            "match_fraction": self.match_fraction,
            "role_pair_counts": dict(sorted(self.role_pair_counts.items())),
        }


_REPORTER_ROLES = (Role.WITNESS, Role.INFORMANT)


def link_stats(groups: Sequence[LinkGroup], rows: Iterable[PersonRow],
               any_order: bool = False) -> LinkStats:
    """Counting report over groups: how many reporter names (witnesses or
    informants) link to exactly one death record, and which role pairs occur
    in those unique-death groups."""
    rows = list(rows)
    stats = LinkStats(n_rows=len(rows))
    linkable = [r for r in rows if r.name_tokens and r.linkable]
    stats.n_linkable_rows = len(linkable)
    stats.unique_names = len({name_key(r.name_tokens, any_order) for r in rows if r.name_tokens})
    stats.unique_linkable_names = len({name_key(r.name_tokens, any_order) for r in linkable})
    stats.n_groups = len(groups)
    grouped_rows = sum(len(g.members) for g in groups)
    stats.n_singletons = stats.n_linkable_rows - grouped_rows

    reporter_keys = {
        name_key(r.name_tokens, any_order)
        for r in linkable
        if r.role in _REPORTER_ROLES
    }
    stats.reporter_names = len(reporter_keys)

    matched: set[str] = set()
    for g in groups:
        deceased = [m for m in g.members if m.role == Role.DECEASED]
        if len(deceased) != 1:
            continue  # no death record, or no unique one
        other_roles = {m.role for m in g.members if m.role != Role.DECEASED}
        for role in other_roles:
            pair = f"{role.value}->deceased"
            stats.role_pair_counts[pair] = stats.role_pair_counts.get(pair, 0) + 1
        if any(role in _REPORTER_ROLES for role in other_roles):
            matched.add(g.key[0])
    stats.reporter_deceased_matches = len(matched & reporter_keys)
    stats.match_fraction = (
        stats.reporter_deceased_matches / stats.reporter_names if stats.reporter_names else 0.0
    )
    return stats


_DEFAULT_COLUMNS = {
    "name": "name",
    "role": "role",
    "year": "year",
    "age": "age",
    "profession": "profession",
    "other": "other",
}

_ROLE_ALIASES = {r.value: r for r in Role}


@dataclass
class GoldRows:
    rows: list[PersonRow]
    malformed: list[tuple[int, str]]


def load_gold_rows(path: Path, columns: Mapping[str, str] | None = None) -> GoldRows:
    """Load person rows from a CSV with a header; the column mapping is
    header-name driven and overridable. Malformed rows are collected."""
    mapping = {**_DEFAULT_COLUMNS, **(columns or {})}
    path = Path(path)
    rows: list[PersonRow] = []
    malformed: list[tuple[int, str]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise EmptyFile(f"no header in {path}")
        for lineno, raw in enumerate(reader, start=2):
            name = (raw.get(mapping["name"]) or "").strip()
            if not name:
                malformed.append((lineno, "empty name"))
                continue
            role = _ROLE_ALIASES.get((raw.get(mapping["role"]) or "").strip().lower(), Role.UNKNOWN)
            try:
                year = int((raw.get(mapping["year"]) or "").strip())
            except ValueError:
                malformed.append((lineno, "bad year"))
                continue
            if not YEAR_MIN <= year <= YEAR_MAX:
                malformed.append((lineno, f"year {year} out of range"))
                continue
            age_text = (raw.get(mapping["age"]) or "").strip()
            age = None
            if age_text:
                try:
                    age = int(age_text)
                except ValueError:
                    malformed.append((lineno, "bad age"))
                    continue
                if age < 0:
                    malformed.append((lineno, "negative age"))
                    continue
            rows.append(
                PersonRow(
                    name_tokens=tuple(name.split()),
                    role=role,
                    cert_year=year,
                    age=age,
                    profession=(raw.get(mapping["profession"]) or "").strip() or None,
                    other=(raw.get(mapping["other"]) or "").strip() or None,
                    source=f"{path.name}:{lineno}",
                )
            )
    if not rows and not malformed:
        raise EmptyFile(f"no data rows in {path}")
    return GoldRows(rows, malformed)
