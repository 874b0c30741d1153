"""Evaluation metrics: character error rate and found/exact/partial
accuracy reports for names and dates.

The paper-style report shape is three rate columns over a fixed sample:
names score found / exact / partial (edit distance up to a cap), dates
score found / exact / corrected (exact after forcing the file-name year).
Id sets back every rate so subset relations can be asserted, not just
compared as rounded fractions.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import EmptyReference, NoPairs
from .extraction import DateCandidate, correct_year
from .lexicon import levenshtein, normalize_token


def normalize_newlines(s: str) -> str:
    return s.replace("\r\n", "\n").replace("\r", "\n")


def normalize_text(s: str) -> str:
    """Whitespace normalization for free-text scoring: newline-normalize,
    collapse blank runs within lines, trim line ends and outer whitespace."""
    s = normalize_newlines(s)
    lines = [re.sub(r"[ \t]+", " ", line).strip() for line in s.split("\n")]
    return "\n".join(lines).strip()


def cer(reference: str, hypothesis: str) -> float:
    """Edit distance over Unicode code points divided by reference length,
    after newline normalization."""
    ref = normalize_newlines(reference)
    hyp = normalize_newlines(hypothesis)
    if not ref:
        raise EmptyReference("reference text is empty")
    return levenshtein(ref, hyp) / len(ref)


@dataclass(frozen=True)
class EvalPair:
    id: str
    gold: str
    predicted: str | None = None


@dataclass(frozen=True)
class CerReport:
    label: str
    per_doc: tuple[tuple[str, float], ...]
    aggregate: float
    total_edits: int
    total_ref_chars: int
    n: int

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "n": self.n,
            "aggregate_cer": self.aggregate,
            "total_edits": self.total_edits,
            "total_ref_chars": self.total_ref_chars,
            "per_doc": [{"id": i, "cer": c} for i, c in self.per_doc],
        }


def cer_report(pairs: Sequence[EvalPair], label: str = "cer") -> CerReport:
    """Per-document CER plus the edit-mass weighted aggregate
    (total edits / total reference characters, never a mean of means)."""
    if not pairs:
        raise NoPairs("no evaluation pairs")
    per_doc = []
    total_edits = 0
    total_ref = 0
    for p in pairs:
        ref = normalize_newlines(p.gold)
        if not ref:
            raise EmptyReference(f"empty reference for {p.id}")
        hyp = normalize_newlines(p.predicted or "")
        edits = levenshtein(ref, hyp)
        per_doc.append((p.id, edits / len(ref)))
        total_edits += edits
        total_ref += len(ref)
    return CerReport(
        label=label,
        per_doc=tuple(per_doc),
        aggregate=total_edits / total_ref,
        total_edits=total_edits,
        total_ref_chars=total_ref,
        n=len(pairs),
    )


@dataclass(frozen=True)
class AccuracyReport:
    label: str
    n: int
    found_rate: float
    exact_rate: float
    partial_rate: float | None = None
    corrected_rate: float | None = None
    max_partial_distance: int | None = None
    found_ids: frozenset[str] = frozenset()
    exact_ids: frozenset[str] = frozenset()
    partial_ids: frozenset[str] = frozenset()
    corrected_ids: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        d = {
            "label": self.label,
            "n": self.n,
            "found": self.found_rate,
            "exact": self.exact_rate,
        }
        if self.partial_rate is not None:
            d["partial"] = self.partial_rate
            d["max_partial_distance"] = self.max_partial_distance
        if self.corrected_rate is not None:
            d["corrected"] = self.corrected_rate
        return d


def _normalize_name(name: str) -> str:
    return " ".join(normalize_token(t) for t in name.split())


def name_accuracy(
    pairs: Sequence[EvalPair],
    max_dist: int = 3,
    any_order: bool = False,
    include_missing: bool = True,
    label: str = "names",
) -> AccuracyReport:
    """Found / exact / partial rates for predicted names.

    Exact means normalized equality (token multisets when ``any_order``);
    partial means exact or within ``max_dist`` edits. Missing predictions
    count against all rates unless ``include_missing`` is off, in which case
    exact/partial are rated over found pairs only.
    """
    if not pairs:
        raise NoPairs("no evaluation pairs")
    found, exact, partial = set(), set(), set()
    for p in pairs:
        if p.predicted is None or not p.predicted.strip():
            continue
        found.add(p.id)
        gold = _normalize_name(p.gold)
        pred = _normalize_name(p.predicted)
        if any_order:
            is_exact = sorted(gold.split()) == sorted(pred.split())
        else:
            is_exact = gold == pred
        if is_exact:
            exact.add(p.id)
        if is_exact or levenshtein(gold, pred) <= max_dist:
            partial.add(p.id)
    denom = len(found) if not include_missing and found else len(pairs)
    return AccuracyReport(
        label=label,
        n=len(pairs),
        found_rate=len(found) / len(pairs),
        exact_rate=len(exact) / denom,
        partial_rate=len(partial) / denom,
        max_partial_distance=max_dist,
        found_ids=frozenset(found),
        exact_ids=frozenset(exact),
        partial_ids=frozenset(partial),
    )


_DATE_RE = re.compile(r"(\d{4})-(\d{1,2})-(\d{1,2})")


def _parse_iso(text: str | None) -> tuple[int, int, int] | None:
    if not text:
        return None
    m = _DATE_RE.fullmatch(text.strip())
    if not m:
        return None
    return int(m.group(1)), int(m.group(2)), int(m.group(3))


def date_accuracy(
    pairs: Sequence[EvalPair],
    scan_years: Mapping[str, int] | None = None,
    include_missing: bool = True,
    label: str = "dates",
) -> AccuracyReport:
    """Found / exact / corrected rates for predicted dates (ISO strings).

    Corrected equality re-scores each prediction after forcing the scan
    year from ``scan_years`` onto implausible years, mirroring the year
    correction applied in the pipeline.
    """
    if not pairs:
        raise NoPairs("no evaluation pairs")
    scan_years = scan_years or {}
    found, exact, corrected = set(), set(), set()
    for p in pairs:
        pred = _parse_iso(p.predicted)
        gold = _parse_iso(p.gold)
        if pred is None:
            continue
        found.add(p.id)
        if gold is None:
            continue
        if pred == gold:
            exact.add(p.id)
            corrected.add(p.id)
            continue
        scan_year = scan_years.get(p.id)
        if scan_year is None:
            continue
        try:
            cand = DateCandidate(pred[0], pred[1], pred[2], (0, 0), p.predicted or "")
        except ValueError:
            continue
        fixed = correct_year(cand, scan_year)
        if (fixed.year, fixed.month, fixed.day) == gold:
            corrected.add(p.id)
    denom = len(found) if not include_missing and found else len(pairs)
    return AccuracyReport(
        label=label,
        n=len(pairs),
        found_rate=len(found) / len(pairs),
        exact_rate=len(exact) / denom,
        corrected_rate=len(corrected) / denom,
        found_ids=frozenset(found),
        exact_ids=frozenset(exact),
        corrected_ids=frozenset(corrected),
    )


# --- report emission -----------------------------------------------------------

_COLUMNS = ("label", "n", "found", "exact", "partial", "corrected", "aggregate_cer")


def _report_row(report) -> dict:
    d = report.to_dict()
    return {c: d.get(c, "") for c in _COLUMNS}


def emit_report(reports: Sequence, fmt: str = "text") -> str:
    """Render reports as an aligned text table, JSON, or CSV. Layout is
    deterministic: fixed column order, rows in input order."""
    if not reports:
        raise NoPairs("nothing to report")
    if fmt == "json":
        return json.dumps(
            {"format": "certpipe-report/1", "reports": [r.to_dict() for r in reports]},
            ensure_ascii=False, sort_keys=True, indent=2,
        )
    rows = [_report_row(r) for r in reports]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {k: (f"{v:.6f}" if isinstance(v, float) else v) for k, v in row.items()}
            )
        return buf.getvalue()
    if fmt == "text":
        def fmt_cell(v):
            if isinstance(v, float):
                return f"{100 * v:5.1f}%"
            return str(v)
        table = [[fmt_cell(row[c]) for c in _COLUMNS] for row in rows]
        widths = [
            max(len(c), *(len(r[i]) for r in table)) for i, c in enumerate(_COLUMNS)
        ]
        lines = ["  ".join(c.ljust(w) for c, w in zip(_COLUMNS, widths))]
        for r in table:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {fmt!r}")


def read_report_csv(text: str) -> list[dict]:
    """Parse back a CSV report; numeric cells become floats/ints again."""
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed = {}
        for key, value in row.items():
            if value is None or value == "":
                parsed[key] = None
            elif key == "n":
                parsed[key] = int(value)
            elif key == "label":
                parsed[key] = value
            else:
                try:
                    parsed[key] = float(value)
                except ValueError:
                    parsed[key] = value
        out.append(parsed)
    return out
