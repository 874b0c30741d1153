"""Pipeline orchestration: configuration, the batch run, record
persistence, and merging human corrections back into records and lexicon.

Records and review events persist as line-delimited JSON with sorted keys,
so runs over identical inputs are byte-identical and the correction log can
be replayed against the original records at any time.
"""

from __future__ import annotations

import hashlib
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

from .document import LayoutConfig, main_text, parse_document
from .errors import ConfigError, NoRegions, OrphanEvent, ParseError
from .extraction import (
    CueTables,
    ExtractedRecord,
    GATING_FLAGS,
    PersonMention,
    QualityFlag,
    Role,
    extract_record,
    get_backend,
)
from .lexicon import (
    CorrectionResult,
    Lexicon,
    append_mother_surname,
    load_lexicon,
    post_correct_name,
)
from .linking import PersonRow, build_link_groups, link_stats
from .scans import parse_scan_filename

RECORD_FORMAT = "certpipe-record/1"


@dataclass
class PipelineConfig:
    corpus: str = ""
    lexicon: str = ""
    backend: str = "rules"
    output: str = "out"
    review_store: str = ""      # defaults to <output>/review
    tables: str = ""            # directory of cue/table files overriding the bundled ones
    margin_min_frac: float = 0.05
    merged_right_frac: float = 0.90
    max_dist: int = 3
    min_freq: int = 2
    link_tolerance: int = 0
    any_order: bool = False
    workers: int = 1

    def layout(self) -> LayoutConfig:
        return LayoutConfig(self.margin_min_frac, self.merged_right_frac)

    def cue_tables(self) -> CueTables:
        return CueTables.from_dir(self.tables) if self.tables else CueTables.default()

    def review_dir(self) -> Path:
        return Path(self.review_store) if self.review_store else Path(self.output) / "review"


_KV_RE = re.compile(r"^(?P<key>[A-Za-z_][A-Za-z0-9_]*)\s*=\s*(?P<value>.+?)\s*$")


def _parse_value(raw: str):
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    if raw in ("true", "false"):
        return raw == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def load_config(path: Path, overrides: dict | None = None) -> PipelineConfig:
    """Read a flat ``key = value`` config file (strings, numbers, booleans)
    and apply overrides on top; unknown keys are rejected."""
    values: dict = {}
    path = Path(path)
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _KV_RE.match(stripped)
        if not m:
            raise ConfigError(f"{path}:{lineno}: not a key = value line: {line!r}")
        values[m.group("key")] = _parse_value(m.group("value"))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return make_config(values)


def make_config(values: dict) -> PipelineConfig:
    known = {f.name: f.type for f in fields(PipelineConfig)}
    unknown = set(values) - set(known)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    config = PipelineConfig(**values)
    if config.workers < 1:
        raise ConfigError("workers must be >= 1")
    if config.min_freq < 1 or config.max_dist < 0 or config.link_tolerance < 0:
        raise ConfigError("thresholds out of range")
    return config


# --- record serialization ------------------------------------------------------


def _mention_to_dict(m: PersonMention) -> dict:
    return {
        "name_tokens": list(m.name_tokens),
        "role": m.role.value,
        "span": list(m.span),
        "age": m.age,
        "profession": m.profession,
    }


def record_to_dict(
    record: ExtractedRecord,
    source: str,
    correction: CorrectionResult | None = None,
) -> dict:
    return {
        "format": RECORD_FORMAT,
        "scan": str(record.scan) if record.scan else None,
        "source": source,
        "deceased_candidates": [_mention_to_dict(m) for m in record.deceased_candidates],
        "death_dates": [
            {
                "iso": d.iso,
                "span": list(d.span),
                "raw": d.raw,
                "year_corrected": d.year_corrected,
            }
            for d in record.death_dates
        ],
        "other_mentions": [_mention_to_dict(m) for m in record.other_mentions],
        "flags": [f.value for f in record.flags],
        "correction": None
        if correction is None
        else {
            "original": list(correction.original),
            "corrected": list(correction.corrected),
            "replaced": [t.replaced for t in correction.per_token],
            "distances": [t.distance for t in correction.per_token],
            "verdict": correction.verdict.value,
        },
    }


def dump_jsonl(rows: Iterable[dict], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def load_jsonl(path: Path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def item_id_for(scan_label: str) -> str:
    return hashlib.sha256(scan_label.encode("utf-8")).hexdigest()[:12]


def top_name(record_dict: dict) -> str | None:
    candidates = record_dict.get("deceased_candidates") or []
    if not candidates:
        return None
    return " ".join(candidates[0]["name_tokens"])


def top_date(record_dict: dict) -> str | None:
    dates = record_dict.get("death_dates") or []
    return dates[0]["iso"] if dates else None


def correct_records(
    records: list[dict], lexicon: Lexicon, min_freq: int = 2
) -> list[dict]:
    """Post-correct the top deceased candidate of each record dict.

    Unknown tokens are replaced via the lexicon; a record whose original
    tokens were not all known gets the UnknownTokens flag (the known-token
    gate), which routes it to the review queue.
    """
    out = []
    for rec in records:
        rec = dict(rec)
        candidates = rec.get("deceased_candidates") or []
        if candidates:
            tokens = tuple(candidates[0]["name_tokens"])
            result = post_correct_name(tokens, lexicon, min_freq=min_freq)
            rec["correction"] = {
                "original": list(result.original),
                "corrected": list(result.corrected),
                "replaced": [t.replaced for t in result.per_token],
                "distances": [t.distance for t in result.per_token],
                "verdict": result.verdict.value,
            }
            flags = list(rec.get("flags") or [])
            if (result.changed or result.verdict.value == "Flag") and (
                QualityFlag.UNKNOWN_TOKENS.value not in flags
            ):
                flags.append(QualityFlag.UNKNOWN_TOKENS.value)
            rec["flags"] = flags
            if result.changed:
                corrected = dict(candidates[0])
                corrected["name_tokens"] = list(result.corrected)
                rec["deceased_candidates"] = [candidates[0], corrected] + list(candidates[1:])
        out.append(rec)
    return out


def rows_from_records(records: Sequence[dict]) -> list[PersonRow]:
    """Person rows for linking: the top deceased candidate plus every other
    mention, with the certificate year taken from the scan name."""
    rows = []
    for rec in records:
        scan_label = rec.get("scan")
        if not scan_label:
            continue
        scan = parse_scan_filename(scan_label)
        candidates = rec.get("deceased_candidates") or []
        if candidates:
            top = candidates[0]
            rows.append(
                PersonRow(
                    name_tokens=tuple(top["name_tokens"]),
                    role=Role.DECEASED,
                    cert_year=scan.year,
                    age=top.get("age"),
                    profession=top.get("profession"),
                    source=scan_label,
                )
            )
        for m in rec.get("other_mentions") or []:
            role = Role(m["role"]) if m.get("role") in {r.value for r in Role} else Role.UNKNOWN
            rows.append(
                PersonRow(
                    name_tokens=tuple(m["name_tokens"]),
                    role=role,
                    cert_year=scan.year,
                    age=m.get("age"),
                    profession=m.get("profession"),
                    source=scan_label,
                )
            )
    return rows


def gating_flags(flags: Iterable[str]) -> list[str]:
    gating = {f.value for f in GATING_FLAGS}
    return [f for f in flags if f in gating]


@dataclass
class RunSummary:
    documents: int = 0
    records: int = 0
    review_items: int = 0
    groups: int = 0
    flag_counts: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "documents": self.documents,
            "records": self.records,
            "review_items": self.review_items,
            "groups": self.groups,
            "flag_counts": dict(sorted(self.flag_counts.items())),
            "outputs": dict(sorted(self.outputs.items())),
        }


def _record_sort_key(rec: dict) -> tuple:
    label = rec.get("scan")
    if label:
        try:
            return (0,) + parse_scan_filename(label).sort_key
        except Exception:
            pass
    return (1, rec.get("source") or "", 0, "")


def _process_document(path: Path, backend, layout: LayoutConfig, tables: CueTables) -> dict:
    try:
        doc = parse_document(path)
    except ParseError:
        scan = None
        try:
            scan = parse_scan_filename(path.stem + ".JPG")
        except Exception:
            pass
        stub = ExtractedRecord(
            scan, (), (), (),
            (QualityFlag.EXTRACTION_FAILED, QualityFlag.NO_NAME, QualityFlag.NO_DATE),
        )
        return {**record_to_dict(stub, source=path.name), "excerpt": ""}
    record = extract_record(doc, backend, layout_config=layout, tables=tables)
    record = append_mother_surname(record)
    try:
        center, _ = main_text(doc, layout)
    except NoRegions:
        center = ""
    return {**record_to_dict(record, source=path.name), "excerpt": center[:400]}


def discover_documents(corpus: Path) -> list[Path]:
    corpus = Path(corpus)
    return sorted(
        p for p in corpus.rglob("*")
        if p.is_file() and p.suffix.lower() in (".json", ".xml")
        and p.name not in ("ground_truth.json",)
    )


def run_pipeline(config: PipelineConfig) -> RunSummary:
    """Execute ingest, extract, correct, link and review-store stages.

    Per-document failures are isolated into ExtractionFailed records; all
    outputs are deterministic for identical inputs and configuration.
    """
    corpus = Path(config.corpus)
    out_dir = Path(config.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    tables = config.cue_tables()
    backend = get_backend(config.backend, tables)
    layout = config.layout()

    files = discover_documents(corpus)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            raw_records = list(
                pool.map(lambda p: _process_document(p, backend, layout, tables), files)
            )
    else:
        raw_records = [_process_document(p, backend, layout, tables) for p in files]

    excerpts = {}
    records = []
    for rec in raw_records:
        excerpts[rec.get("scan") or rec.get("source")] = rec.pop("excerpt", "")
        records.append(rec)

    if config.lexicon:
        lexicon = load_lexicon(config.lexicon)
        records = correct_records(records, lexicon, min_freq=config.min_freq)

    records.sort(key=_record_sort_key)
    records_path = out_dir / "records.jsonl"
    dump_jsonl(records, records_path)

    rows = rows_from_records(records)
    groups = build_link_groups(rows, tolerance=config.link_tolerance, any_order=config.any_order)
    stats = link_stats(groups, rows, any_order=config.any_order)
    groups_path = out_dir / "groups.json"
    groups_path.write_text(
        json.dumps(
            {"format": "certpipe-groups/1", "groups": [g.to_dict() for g in groups]},
            ensure_ascii=False, sort_keys=True, indent=2,
        ),
        encoding="utf-8",
    )

    flag_counts: dict[str, int] = {}
    for rec in records:
        for flag in rec.get("flags") or []:
            flag_counts[flag] = flag_counts.get(flag, 0) + 1

    review_dir = config.review_dir()
    review_dir.mkdir(parents=True, exist_ok=True)
    items = []
    for rec in records:
        gates = gating_flags(rec.get("flags") or [])
        if not gates:
            continue
        label = rec.get("scan") or rec.get("source")
        items.append(
            {
                "id": item_id_for(label),
                "scan": label,
                "flags": rec.get("flags") or [],
                "gating_flags": gates,
                "name": top_name(rec),
                "date": top_date(rec),
                "excerpt": excerpts.get(label, ""),
                "status": "pending",
                "record": rec,
            }
        )
    dump_jsonl(items, review_dir / "items.jsonl")
    (review_dir / "events.jsonl").touch()

    stats_path = out_dir / "stats.json"
    stats_path.write_text(
        json.dumps(
            {
                "format": "certpipe-stats/1",
                "link": stats.to_dict(),
                "flag_counts": dict(sorted(flag_counts.items())),
            },
            ensure_ascii=False, sort_keys=True, indent=2,
        ),
        encoding="utf-8",
    )

    summary = RunSummary(
        documents=len(files),
        records=len(records),
        review_items=len(items),
        groups=len(groups),
        flag_counts=flag_counts,
        outputs={
            "records": str(records_path),
            "groups": str(groups_path),
            "stats": str(stats_path),
            "review": str(review_dir),
        },
    )
    (out_dir / "run_summary.json").write_text(
        json.dumps(summary.to_dict(), ensure_ascii=False, sort_keys=True, indent=2),
        encoding="utf-8",
    )
    return summary


# --- merging human corrections ---------------------------------------------------


NAME_FIELD = "deceased_name"
DATE_FIELD = "death_date"
ROLE_FIELD = "role_mention"
CORRECTION_FIELDS = (NAME_FIELD, DATE_FIELD, ROLE_FIELD)


def merge_corrections(
    records: Sequence[dict], events: Sequence[dict], lexicon: Lexicon
) -> tuple[list[dict], Lexicon]:
    """Apply review events to records and grow the lexicon.

    Corrected values override extracted ones, keeping provenance; the tokens
    of every human-confirmed name (a corrected value, or the stored top name
    of an accepted item) join the lexicon at +1 frequency per token.
    Replaying the same event log reproduces the same output bytes.
    """
    by_id: dict[str, dict] = {}
    order: list[str] = []
    for rec in records:
        label = rec.get("scan") or rec.get("source") or ""
        iid = item_id_for(label)
        merged = dict(rec)
        merged["item_id"] = iid
        merged["final_name"] = {"value": top_name(rec), "provenance": "extraction"}
        merged["final_date"] = {"value": top_date(rec), "provenance": "extraction"}
        merged["review_status"] = "unreviewed"
        merged["applied_events"] = []
        by_id[iid] = merged
        order.append(iid)

    confirmed_tokens: list[str] = []
    for event in events:
        iid = event.get("item_id")
        if iid not in by_id:
            raise OrphanEvent(f"event for unknown item {iid!r}")
        merged = by_id[iid]
        merged["applied_events"].append(dict(event))
        if event.get("type") == "accept":
            merged["review_status"] = "accepted"
            name = merged["final_name"]["value"]
            if name:
                confirmed_tokens.extend(name.split())
        elif event.get("type") == "correction":
            merged["review_status"] = "corrected"
            fieldname = event.get("field")
            new = event.get("new")
            if fieldname == NAME_FIELD:
                merged["final_name"] = {"value": new, "provenance": "human"}
                if new:
                    confirmed_tokens.extend(str(new).split())
            elif fieldname == DATE_FIELD:
                merged["final_date"] = {"value": new, "provenance": "human"}
            elif fieldname == ROLE_FIELD:
                merged.setdefault("role_corrections", []).append(dict(event))
            else:
                raise OrphanEvent(f"event with unknown field {fieldname!r}")
        else:
            raise OrphanEvent(f"event with unknown type {event.get('type')!r}")

    merged_lexicon = lexicon.merged_with(confirmed_tokens) if confirmed_tokens else lexicon
    return [by_id[iid] for iid in order], merged_lexicon
