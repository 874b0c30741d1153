"""Rule-based entity extraction from certificate text.

Recognizes death dates (numeric, ordinal-word and written-out Dutch year
forms), person mentions with roles derived from the certificate formulas
("verscheen"/"compareerden" for the person reporting, "is overleden" for
the deceased, "zoon van"/"dochter van" for parents), ages ("oud ... jaren")
and professions from a configurable list.

The cue vocabulary lives in data files so it can be adapted without code
changes; the packaged defaults cover the three certificate form eras.
"""

from __future__ import annotations

import calendar
import re
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Protocol, runtime_checkable

from . import dutch
from .document import HtrDocument, LayoutConfig, DEFAULT_LAYOUT, main_text
from .errors import NoRegions
from .scans import ScanId


class Role(str, Enum):
    DECEASED = "deceased"
    FATHER = "father"
    MOTHER = "mother"
    SPOUSE = "spouse"
    WITNESS = "witness"
    INFORMANT = "informant"
    UNKNOWN = "unknown"


class QualityFlag(str, Enum):
    NO_NAME = "NoName"
    NO_DATE = "NoDate"
    YEAR_CORRECTED = "YearCorrected"
    STILLBORN = "Stillborn"
    UNKNOWN_TOKENS = "UnknownTokens"
    EXTRACTION_FAILED = "ExtractionFailed"


# review-queue gating: these flags send a record to a human
GATING_FLAGS = frozenset(
    {QualityFlag.NO_NAME, QualityFlag.NO_DATE, QualityFlag.UNKNOWN_TOKENS,
     QualityFlag.EXTRACTION_FAILED}
)


@dataclass(frozen=True)
class DateCandidate:
    year: int
    month: int
    day: int
    span: tuple[int, int]
    raw: str
    year_corrected: bool = False

    def __post_init__(self):
        if not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")
        if not 1 <= self.day <= calendar.monthrange(self.year, self.month)[1]:
            raise ValueError(f"day out of range: {self.year}-{self.month}-{self.day}")

    @property
    def iso(self) -> str:
        return f"{self.year:04d}-{self.month:02d}-{self.day:02d}"


@dataclass(frozen=True)
class PersonMention:
    name_tokens: tuple[str, ...]
    role: Role
    span: tuple[int, int]
    age: int | None = None
    profession: str | None = None

    @property
    def name(self) -> str:
        return " ".join(self.name_tokens)


@dataclass(frozen=True)
class ExtractedRecord:
    scan: ScanId | None
    deceased_candidates: tuple[PersonMention, ...]
    death_dates: tuple[DateCandidate, ...]
    other_mentions: tuple[PersonMention, ...]
    flags: tuple[QualityFlag, ...]

    @property
    def top_deceased(self) -> PersonMention | None:
        return self.deceased_candidates[0] if self.deceased_candidates else None

    @property
    def top_date(self) -> DateCandidate | None:
        return self.death_dates[0] if self.death_dates else None


def compute_flags(
    deceased_candidates,
    death_dates,
    *,
    stillborn: bool = False,
    year_corrected: bool = False,
    unknown_tokens: bool = False,
    extraction_failed: bool = False,
) -> tuple[QualityFlag, ...]:
    """Quality flags consistent with record content: NoDate iff no dates,
    NoName iff no deceased candidate and the record is not a stillbirth."""
    flags: list[QualityFlag] = []
    if extraction_failed:
        flags.append(QualityFlag.EXTRACTION_FAILED)
    if not deceased_candidates and not stillborn:
        flags.append(QualityFlag.NO_NAME)
    if not death_dates:
        flags.append(QualityFlag.NO_DATE)
    if year_corrected:
        flags.append(QualityFlag.YEAR_CORRECTED)
    if stillborn:
        flags.append(QualityFlag.STILLBORN)
    if unknown_tokens:
        flags.append(QualityFlag.UNKNOWN_TOKENS)
    return tuple(flags)


# --- cue tables ---------------------------------------------------------------

_NAME_PARTICLES = {"van", "de", "der", "den", "ten", "ter", "te", "du", "la", "di"}


@dataclass(frozen=True)
class CueTables:
    months: dict[str, int]
    ordinals: dict[str, int]
    death_cues: tuple[str, ...]
    appearance_cues: tuple[str, ...]
    witness_cues: tuple[str, ...]
    parent_cues: tuple[str, ...]
    spouse_cues: tuple[str, ...]
    stillborn_cues: tuple[str, ...]
    professions: tuple[str, ...]
    name_stopwords: frozenset[str]

    @classmethod
    def default(cls) -> "CueTables":
        global _DEFAULT_TABLES
        if _DEFAULT_TABLES is None:
            _DEFAULT_TABLES = cls(
                months=dutch.month_table(),
                ordinals=dutch.ordinal_table(),
                death_cues=tuple(dutch.load_packaged_terms("death_cues.txt")),
                appearance_cues=tuple(dutch.load_packaged_terms("appearance_cues.txt")),
                witness_cues=tuple(dutch.load_packaged_terms("witness_cues.txt")),
                parent_cues=tuple(dutch.load_packaged_terms("parent_cues.txt")),
                spouse_cues=tuple(dutch.load_packaged_terms("spouse_cues.txt")),
                stillborn_cues=tuple(dutch.load_packaged_terms("stillborn_cues.txt")),
                professions=tuple(dutch.load_packaged_terms("professions.txt")),
                name_stopwords=frozenset(dutch.load_packaged_terms("name_stopwords.txt")),
            )
        return _DEFAULT_TABLES

    def with_overrides(self, paths: dict[str, Path]) -> "CueTables":
        """Replace individual cue lists with files given per table name."""
        kwargs = {}
        for name, path in paths.items():
            terms = dutch.load_terms(path)
            if name == "name_stopwords":
                kwargs[name] = frozenset(terms)
            elif name in ("months", "ordinals"):
                kwargs[name] = {
                    t.rpartition(",")[0].strip().lower(): int(t.rpartition(",")[2])
                    for t in terms
                }
            else:
                kwargs[name] = tuple(terms)
        return replace(self, **kwargs)

    @classmethod
    def from_dir(cls, directory: Path) -> "CueTables":
        """Defaults overridden by any ``<table>.txt`` present in a directory
        (months, ordinals, *_cues, professions, name_stopwords)."""
        directory = Path(directory)
        names = (
            "months", "ordinals", "death_cues", "appearance_cues", "witness_cues",
            "parent_cues", "spouse_cues", "stillborn_cues", "professions",
            "name_stopwords",
        )
        paths = {n: directory / f"{n}.txt" for n in names if (directory / f"{n}.txt").exists()}
        return cls.default().with_overrides(paths)


_DEFAULT_TABLES: CueTables | None = None


def _phrase_pattern(terms: Iterable[str]) -> re.Pattern:
    alts = sorted(terms, key=len, reverse=True)
    body = "|".join(re.escape(t).replace(r"\ ", r"\s+") for t in alts)
    return re.compile(rf"(?<!\w)(?:{body})(?!\w)", re.IGNORECASE)


# --- death dates --------------------------------------------------------------


def _date_regex(tables: CueTables) -> re.Pattern:
    ordinal = "|".join(
        re.escape(w).replace(r"\ ", r"\s+")
        for w in sorted(tables.ordinals, key=len, reverse=True)
    )
    month = "|".join(re.escape(m) for m in sorted(tables.months, key=len, reverse=True))
    written_year = dutch.written_year_pattern()
    return re.compile(
        rf"(?:(?<!\w)den\s+)?"
        rf"(?P<day>(?<!\d)[0-3]?\d(?:den|sten|en|e)?|{ordinal})\s+"
        rf"(?:der\s+maand\s+)?"
        rf"(?P<month>{month})\s+"
        rf"(?:van\s+het\s+jaar\s+)?"
        rf"(?P<year>\d{{4}}|{written_year})(?!\d)",
        re.IGNORECASE,
    )


def _parse_day(raw: str, tables: CueTables) -> int | None:
    key = re.sub(r"\s+", " ", raw.strip().lower())
    if key in tables.ordinals:
        return tables.ordinals[key]
    m = re.fullmatch(r"(\d{1,2})(?:den|sten|en|e)?", key)
    return int(m.group(1)) if m else None


def _span_distance(a: tuple[int, int], b: tuple[int, int]) -> int:
    if a[1] <= b[0]:
        return b[0] - a[1]
    if b[1] <= a[0]:
        return a[0] - b[1]
    return 0


def extract_death_dates(text: str, tables: CueTables | None = None) -> list[DateCandidate]:
    """Find calendar-valid date expressions and rank them by proximity to
    the nearest death cue; text without cues keeps appearance order."""
    tables = tables or CueTables.default()
    candidates: list[DateCandidate] = []
    for m in _date_regex(tables).finditer(text):
        day = _parse_day(m.group("day"), tables)
        if day is None:
            continue
        month = tables.months.get(m.group("month").lower())
        raw_year = m.group("year")
        year = (
            int(raw_year)
            if raw_year.isdigit()
            else dutch.parse_written_year(re.sub(r"\s+", " ", raw_year))
        )
        if month is None or year is None:
            continue
        try:
            candidates.append(
                DateCandidate(year=year, month=month, day=day, span=m.span(), raw=m.group())
            )
        except ValueError:
            continue  # not a real calendar date (e.g. 30 February)

    cue_spans = [m.span() for m in _phrase_pattern(tables.death_cues).finditer(text)]
    far = len(text) + 1

    def rank(c: DateCandidate) -> tuple[int, int]:
        if not cue_spans:
            return (far, c.span[0])
        return (min(_span_distance(c.span, s) for s in cue_spans), c.span[0])

    candidates.sort(key=rank)
    return candidates


def correct_year(candidate: DateCandidate, scan_year: int) -> DateCandidate:
    """Force the file-name year onto a candidate whose year is implausible.

    A death is registered in the certificate's year or, for late-December
    deaths, the year before; anything else becomes the scan year. Feb 29
    falling on a non-leap target year is clamped to Feb 28. Idempotent.
    """
    if candidate.year in (scan_year - 1, scan_year):
        return candidate
    day = candidate.day
    if candidate.month == 2 and day == 29 and not calendar.isleap(scan_year):
        day = 28
    return replace(candidate, year=scan_year, day=day, year_corrected=True)


# --- person mentions ----------------------------------------------------------

_TOKEN_RE = re.compile(r"[^\W\d_][\w'’\-]*", re.UNICODE)

_ROLE_BY_CATEGORY = {
    "death": Role.DECEASED,
    "appearance": Role.INFORMANT,
    "witness": Role.WITNESS,
    "parent": Role.FATHER,
    "spouse": Role.SPOUSE,
}

_CUE_WINDOW = 120     # chars before a name in which a cue still applies
_DETAIL_WINDOW = 90   # chars after a name searched for age/profession
_AND_GAP_RE = re.compile(r"[\s,]*\ben\s+\Z")


@dataclass(frozen=True)
class _Run:
    tokens: tuple[str, ...]
    start: int
    end: int


def _name_runs(text: str, stopwords: frozenset[str]) -> list[_Run]:
    """Capitalized token sequences, allowing lowercase particles inside,
    trimmed of stopwords and particles at both ends."""
    toks = [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]
    runs: list[_Run] = []
    i = 0
    while i < len(toks):
        word, start, end = toks[i]
        if not word[0].isupper():
            i += 1
            continue
        j = i
        last_end = end
        while j + 1 < len(toks):
            nxt, nstart, nend = toks[j + 1]
            gap = text[last_end:nstart]
            if gap.strip() != "":
                break
            if nxt[0].isupper() or nxt in _NAME_PARTICLES:
                j += 1
                last_end = nend
            else:
                break
        chunk = toks[i : j + 1]
        # trim stopwords/particles (and trailing particles) at the edges
        while chunk and (chunk[0][0] in stopwords or chunk[0][0] in _NAME_PARTICLES):
            chunk = chunk[1:]
        while chunk and (chunk[-1][0] in stopwords or chunk[-1][0] in _NAME_PARTICLES):
            chunk = chunk[:-1]
        if chunk and any(len(t[0]) > 1 for t in chunk):
            runs.append(
                _Run(tuple(t[0] for t in chunk), chunk[0][1], chunk[-1][2])
            )
        i = j + 1
    return runs


def _parse_age(raw: str) -> int | None:
    raw = raw.strip()
    if raw.isdigit():
        age = int(raw)
        return age if age <= 120 else None
    return dutch.parse_number_words(raw)


def extract_mentions(text: str, tables: CueTables | None = None) -> list[PersonMention]:
    """Turn capitalized name runs into role-tagged person mentions.

    The role comes from the nearest cue phrase ending shortly before the
    name; names chained with "en" inherit the previous role, except after a
    parent cue where the second name is the mother. Age ("oud ... jaren")
    and a known profession are picked up from the text right after the name.
    """
    tables = tables or CueTables.default()
    cue_res = {
        "death": _phrase_pattern(tables.death_cues),
        "appearance": _phrase_pattern(tables.appearance_cues),
        "witness": _phrase_pattern(tables.witness_cues),
        "parent": _phrase_pattern(tables.parent_cues),
        "spouse": _phrase_pattern(tables.spouse_cues),
    }
    profession_re = _phrase_pattern(tables.professions)
    age_re = re.compile(
        r"\boud\s+(?P<age>\d{1,3}|[^\W\d_]+(?:\s+en\s+[^\W\d_]+)?)\s+jaren?\b",
        re.IGNORECASE,
    )

    runs = _name_runs(text, tables.name_stopwords)
    mentions: list[PersonMention] = []
    prev_end = 0
    prev_role: Role | None = None
    for idx, run in enumerate(runs):
        window_start = max(prev_end, run.start - _CUE_WINDOW)
        window = text[window_start : run.start]
        best_end = -1
        category = None
        for cat, cre in cue_res.items():
            for m in cre.finditer(window):
                if m.end() > best_end:
                    best_end, category = m.end(), cat
        if category is not None:
            role = _ROLE_BY_CATEGORY[category]
        elif prev_role is not None and _AND_GAP_RE.search(text[prev_end : run.start]):
            role = Role.MOTHER if prev_role == Role.FATHER else prev_role
        else:
            role = Role.UNKNOWN

        detail_end = min(len(text), run.end + _DETAIL_WINDOW)
        if idx + 1 < len(runs):
            detail_end = min(detail_end, runs[idx + 1].start)
        detail = text[run.end : detail_end]
        age_m = age_re.search(detail)
        age = _parse_age(age_m.group("age")) if age_m else None
        prof_m = profession_re.search(detail)
        profession = re.sub(r"\s+", " ", prof_m.group().lower()) if prof_m else None

        mentions.append(
            PersonMention(
                name_tokens=run.tokens,
                role=role,
                span=(run.start, run.end),
                age=age,
                profession=profession,
            )
        )
        prev_end = run.end
        prev_role = role
    return mentions


# --- backends -----------------------------------------------------------------


@runtime_checkable
class ExtractorBackend(Protocol):
    """Contract for extraction backends; the bundled rule backend is pure."""

    name: str

    def extract(self, text: str, scan: ScanId | None) -> ExtractedRecord: ...


class RuleBackend:
    """Cue-grammar extraction; deterministic for byte-identical input."""

    name = "rules"

    def __init__(self, tables: CueTables | None = None):
        self.tables = tables or CueTables.default()

    def extract(self, text: str, scan: ScanId | None) -> ExtractedRecord:
        dates = tuple(extract_death_dates(text, self.tables))
        mentions = extract_mentions(text, self.tables)
        deceased = tuple(m for m in mentions if m.role == Role.DECEASED)
        others = tuple(m for m in mentions if m.role != Role.DECEASED)
        stillborn = bool(_phrase_pattern(self.tables.stillborn_cues).search(text))
        flags = compute_flags(deceased, dates, stillborn=stillborn)
        return ExtractedRecord(scan, deceased, dates, others, flags)


_BACKENDS = {"rules": RuleBackend}


def get_backend(name: str, tables: CueTables | None = None) -> ExtractorBackend:
    try:
        cls = _BACKENDS[name]
    except KeyError:
        raise KeyError(f"unknown extractor backend {name!r}; known: {sorted(_BACKENDS)}")
    return cls(tables)


def extract_record(
    doc: HtrDocument,
    backend: ExtractorBackend,
    layout_config: LayoutConfig = DEFAULT_LAYOUT,
    tables: CueTables | None = None,
) -> ExtractedRecord:
    """Run a backend over the document's center column and finalize flags.

    Margin texts are scanned for raw mentions too (margin notes may correct
    the deceased's name); their spans are relative to the margin string they
    were found in. A backend failure yields a record flagged
    ExtractionFailed instead of aborting the batch.
    """
    tables = tables or CueTables.default()
    try:
        center, margins = main_text(doc, layout_config)
    except NoRegions:
        center, margins = "", []
    try:
        record = backend.extract(center, doc.scan)
    except Exception:
        return ExtractedRecord(
            doc.scan, (), (), (),
            compute_flags((), (), extraction_failed=True),
        )

    others = list(record.other_mentions)
    for margin in margins:
        others.extend(extract_mentions(margin, tables))

    dates = record.death_dates
    year_corrected = False
    if doc.scan is not None:
        dates = tuple(correct_year(d, doc.scan.year) for d in dates)
        year_corrected = any(d.year_corrected for d in dates)

    stillborn = QualityFlag.STILLBORN in record.flags
    return ExtractedRecord(
        scan=doc.scan,
        deceased_candidates=record.deceased_candidates,
        death_dates=dates,
        other_mentions=tuple(others),
        flags=compute_flags(
            record.deceased_candidates, dates,
            stillborn=stillborn, year_corrected=year_corrected,
        ),
    )
