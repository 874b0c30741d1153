"""Known-name lexicon: fuzzy token correction, the known-token quality gate
and name-completion helpers.

Lookup is case-folded and diacritic-composed (NFC), so ``Görmers`` written
with a decomposed umlaut matches the composed spelling; diacritics are kept,
not stripped. The lexicon is immutable after loading; the review loop grows
it through :meth:`Lexicon.merged_with`, which returns a new version.
"""

from __future__ import annotations

import csv
import unicodedata
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .errors import EmptyLexicon, EmptyName, NoEligibleEntry
from .extraction import ExtractedRecord, PersonMention, Role


def normalize_token(token: str) -> str:
    return unicodedata.normalize("NFC", token).casefold()


def levenshtein(a: str, b: str) -> int:
    """Minimal insert/delete/substitute count between two strings, unit
    costs, over Unicode code points."""
    if a == b:
        return 0
    if len(a) > len(b):
        a, b = b, a
    previous = list(range(len(a) + 1))
    for i, cb in enumerate(b, start=1):
        current = [i] + [0] * len(a)
        for j, ca in enumerate(a, start=1):
            cost = 0 if ca == cb else 1
            current[j] = min(
                previous[j] + 1,        # delete
                current[j - 1] + 1,     # insert
                previous[j - 1] + cost, # substitute
            )
        previous = current
    return previous[-1]


@dataclass(frozen=True)
class Lexicon:
    entries: Mapping[str, int]          # normalized token -> frequency >= 1
    display: Mapping[str, str]          # normalized token -> display spelling
    source: str = ""
    malformed: tuple[tuple[int, str], ...] = ()  # (line number, reason) from loading

    def __contains__(self, token: str) -> bool:
        return normalize_token(token) in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def frequency(self, token: str) -> int:
        return self.entries.get(normalize_token(token), 0)

    def spelling(self, token: str) -> str:
        key = normalize_token(token)
        return self.display.get(key, token)

    @property
    def token_mass(self) -> int:
        return sum(self.entries.values())

    def merged_with(self, tokens: Iterable[str], source: str | None = None) -> "Lexicon":
        """New lexicon with +1 frequency per confirmed token occurrence."""
        entries = dict(self.entries)
        display = dict(self.display)
        for token in tokens:
            key = normalize_token(token)
            if not key:
                continue
            entries[key] = entries.get(key, 0) + 1
            display.setdefault(key, token)
        return Lexicon(entries, display, source or self.source, self.malformed)


def build_lexicon(counts: Mapping[str, int], source: str = "") -> Lexicon:
    entries: dict[str, int] = {}
    display: dict[str, str] = {}
    for token, count in counts.items():
        key = normalize_token(token)
        if not key or count < 1:
            continue
        entries[key] = entries.get(key, 0) + count
        display.setdefault(key, token)
    if not entries:
        raise EmptyLexicon(f"no usable entries ({source or 'in-memory'})")
    return Lexicon(entries, display, source)


def load_lexicon(path: Path, source: str | None = None) -> Lexicon:
    """Load a ``name[,count]`` CSV; multi-token names are split and their
    counts summed per token. A header row is skipped when its count column
    is not numeric; later bad rows are collected as malformed, not fatal.
    """
    path = Path(path)
    entries: dict[str, int] = {}
    display: dict[str, str] = {}
    malformed: list[tuple[int, str]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not "".join(row).strip():
                continue
            name = row[0].strip()
            count = 1
            if len(row) > 1 and row[1].strip():
                try:
                    count = int(row[1].strip())
                except ValueError:
                    if lineno == 1:
                        continue  # header
                    malformed.append((lineno, f"bad count {row[1]!r}"))
                    continue
            if not name:
                malformed.append((lineno, "empty name"))
                continue
            if count < 1:
                malformed.append((lineno, f"non-positive count {count}"))
                continue
            for token in name.split():
                key = normalize_token(token)
                entries[key] = entries.get(key, 0) + count
                display.setdefault(key, token)
    if not entries:
        raise EmptyLexicon(f"no usable entries in {path}")
    return Lexicon(entries, display, source or str(path), tuple(malformed))


def closest_known(token: str, lexicon: Lexicon, min_freq: int = 2) -> tuple[str, int]:
    """Closest lexicon entry with frequency >= min_freq.

    Ties break toward the largest frequency, then the lexicographically
    smallest entry. Distances are computed on normalized forms; the returned
    token is the entry's display spelling.
    """
    if not token:
        raise EmptyName("cannot match an empty token")
    if not lexicon.entries:
        raise EmptyLexicon("empty lexicon")
    needle = normalize_token(token)
    best: tuple[int, int, str] | None = None
    for entry, freq in lexicon.entries.items():
        if freq < min_freq:
            continue
        d = levenshtein(needle, entry)
        key = (d, -freq, entry)
        if best is None or key < best:
            best = key
    if best is None:
        raise NoEligibleEntry(f"no lexicon entry has frequency >= {min_freq}")
    return lexicon.display.get(best[2], best[2]), best[0]


class Verdict(str, Enum):
    ACCEPT = "Accept"
    FLAG = "Flag"


def quality_gate(name_tokens: Iterable[str], lexicon: Lexicon) -> Verdict:
    """Accept iff every token occurs in the lexicon (any frequency); an
    empty name is flagged."""
    tokens = list(name_tokens)
    if not tokens:
        return Verdict.FLAG
    return Verdict.ACCEPT if all(t in lexicon for t in tokens) else Verdict.FLAG


@dataclass(frozen=True)
class TokenCorrection:
    replaced: bool
    distance: int


@dataclass(frozen=True)
class CorrectionResult:
    original: tuple[str, ...]
    corrected: tuple[str, ...]
    per_token: tuple[TokenCorrection, ...]
    verdict: Verdict

    @property
    def changed(self) -> bool:
        return any(t.replaced for t in self.per_token)


def post_correct_name(
    name_tokens: Iterable[str], lexicon: Lexicon, min_freq: int = 2
) -> CorrectionResult:
    """Replace each unknown token with its closest eligible lexicon entry.

    Known tokens (any frequency) are kept. When no entry reaches the
    frequency floor the token is kept and the verdict is Flag. Idempotent:
    correcting a corrected name changes nothing.
    """
    original = tuple(name_tokens)
    if not original:
        raise EmptyName("empty name")
    corrected: list[str] = []
    per_token: list[TokenCorrection] = []
    stuck = False
    for token in original:
        if token in lexicon:
            corrected.append(token)
            per_token.append(TokenCorrection(False, 0))
            continue
        try:
            replacement, distance = closest_known(token, lexicon, min_freq)
        except NoEligibleEntry:
            corrected.append(token)
            per_token.append(TokenCorrection(False, 0))
            stuck = True
            continue
        corrected.append(replacement)
        per_token.append(TokenCorrection(True, distance))
    verdict = Verdict.FLAG if stuck else quality_gate(corrected, lexicon)
    return CorrectionResult(original, tuple(corrected), tuple(per_token), verdict)


def names_equal_any_order(a: Iterable[str], b: Iterable[str]) -> bool:
    """True iff the normalized token multisets are equal."""
    return sorted(map(normalize_token, a)) == sorted(map(normalize_token, b))


def _surname_position_tokens(record: ExtractedRecord) -> set[str]:
    out = set()
    for m in record.other_mentions:
        if m.role in (Role.FATHER, Role.MOTHER) and m.name_tokens:
            out.add(normalize_token(m.name_tokens[-1]))
    return out


def append_mother_surname(record: ExtractedRecord) -> ExtractedRecord:
    """Add a deceased-name candidate completed with the mother's surname.

    When the top candidate carries no token matching the surname position of
    either parent, the mother's final token is appended as an additional
    candidate; existing candidates are never overwritten.
    """
    top = record.top_deceased
    if top is None:
        return record
    mothers = [m for m in record.other_mentions if m.role == Role.MOTHER and m.name_tokens]
    if not mothers:
        return record
    surnames = _surname_position_tokens(record)
    if any(normalize_token(t) in surnames for t in top.name_tokens):
        return record
    mother_surname = mothers[0].name_tokens[-1]
    candidate = PersonMention(
        name_tokens=top.name_tokens + (mother_surname,),
        role=Role.DECEASED,
        span=top.span,
        age=top.age,
        profession=top.profession,
    )
    return replace(
        record, deceased_candidates=record.deceased_candidates + (candidate,)
    )
