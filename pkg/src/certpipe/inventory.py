"""Corpus inventory: walk a scan tree, count per year/district, detect
duplicates against the naming scheme, and plan the cleanup.

Two duplicate kinds exist in the archive: byte-identical files and distinct
scans of the same certificate (same year/district/number/suffix). Cleanup
deletes the former and moves the latter into an ``x-duplicates`` folder,
which later scans skip.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath
from typing import Iterable

from .errors import FilesystemError, UnreadableDirectory
from .scans import District, ScanId, district_schema, parse_scan_filename

X_DUPLICATES = "x-duplicates"

IDENTICAL_FILE = "identical_file"
DUPLICATE_SCAN = "duplicate_scan"

_SCAN_EXTENSIONS = {".jpg", ".jpeg"}


def digest_file(path: Path) -> str:
    """sha256 over the full file bytes, hex encoded."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        while chunk := fh.read(1 << 20):
            h.update(chunk)
    return h.hexdigest()


@dataclass(frozen=True)
class ScanFile:
    path: str  # corpus-relative POSIX path
    digest: str
    scan: ScanId


@dataclass(frozen=True)
class DuplicateSet:
    kind: str  # IDENTICAL_FILE or DUPLICATE_SCAN
    members: tuple[str, ...]
    keep: str

    def __post_init__(self):
        assert len(self.members) >= 2 and self.keep in self.members

    @property
    def losers(self) -> tuple[str, ...]:
        return tuple(p for p in self.members if p != self.keep)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "members": list(self.members), "keep": self.keep}


def find_duplicates(files: Iterable[tuple[str, str, ScanId]]) -> list[DuplicateSet]:
    """Group (path, digest, scan id) triples into duplicate sets.

    Byte-identical files share a digest. Duplicate scans share the scan id
    key but differ in bytes; each distinct digest contributes one
    representative (its lexicographically smallest path), so a pair of
    identical copies never doubles as a scan duplicate with itself.
    """
    by_digest: dict[str, list[str]] = {}
    by_key: dict[tuple, dict[str, str]] = {}  # key -> digest -> smallest path
    for path, digest, scan in files:
        path = str(PurePosixPath(path))
        by_digest.setdefault(digest, []).append(path)
        reps = by_key.setdefault((scan.year, scan.district, scan.number, scan.note_suffix), {})
        if digest not in reps or path < reps[digest]:
            reps[digest] = path

    sets: list[DuplicateSet] = []
    for digest, paths in by_digest.items():
        if len(paths) >= 2:
            members = tuple(sorted(paths))
            sets.append(DuplicateSet(IDENTICAL_FILE, members, members[0]))
    for key, reps in by_key.items():
        if len(reps) >= 2:
            members = tuple(sorted(reps.values()))
            sets.append(DuplicateSet(DUPLICATE_SCAN, members, members[0]))
    sets.sort(key=lambda s: (s.kind, s.keep))
    return sets


def scan_corpus(
    root: Path, workers: int | None = None
) -> tuple[list[ScanFile], list[tuple[str, str]]]:
    """Walk ``root`` and return (parsed scan files, skipped (path, reason)).

    Files inside ``x-duplicates`` folders are ignored; non-image files are
    ignored silently, malformed image names are reported in the skip list.
    """
    root = Path(root)
    if not root.is_dir():
        raise UnreadableDirectory(f"not a readable directory: {root}")

    candidates: list[tuple[str, Path]] = []
    skipped: list[tuple[str, str]] = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames[:] = sorted(d for d in dirnames if d != X_DUPLICATES)
        for name in sorted(filenames):
            full = Path(dirpath) / name
            rel = str(PurePosixPath(full.relative_to(root).as_posix()))
            if full.suffix.lower() not in _SCAN_EXTENSIONS:
                continue
            candidates.append((rel, full))

    files: list[ScanFile] = []
    paths = [full for _, full in candidates]
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            digests = list(pool.map(digest_file, paths))
    else:
        digests = [digest_file(p) for p in paths]
    for (rel, full), digest in zip(candidates, digests):
        try:
            scan = parse_scan_filename(full.name)
        except Exception as exc:
            skipped.append((rel, str(exc)))
            continue
        files.append(ScanFile(rel, digest, scan))
    return files, skipped


@dataclass
class InventoryReport:
    root: str
    counts: dict[tuple[int, District], int] = field(default_factory=dict)
    missing_districts: list[tuple[int, District]] = field(default_factory=list)
    extra_districts: list[tuple[int, District]] = field(default_factory=list)
    note_files: list[str] = field(default_factory=list)
    duplicate_sets: list[DuplicateSet] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)
    certificate_files: int = 0
    total_files: int = 0

    def to_dict(self) -> dict:
        return {
            "format": "certpipe-inventory/1",
            "root": self.root,
            "total_files": self.total_files,
            "certificate_files": self.certificate_files,
            "counts": [
                {"year": y, "district": d.label, "count": c}
                for (y, d), c in sorted(self.counts.items(), key=lambda kv: (kv[0][0], kv[0][1].sort_key))
            ],
            "missing_districts": [
                {"year": y, "district": d.label}
                for y, d in self.missing_districts
            ],
            "extra_districts": [
                {"year": y, "district": d.label}
                for y, d in self.extra_districts
            ],
            "note_files": list(self.note_files),
            "duplicate_sets": [s.to_dict() for s in self.duplicate_sets],
            "skipped": [{"path": p, "reason": r} for p, r in self.skipped],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=2)


def build_inventory(root: Path, workers: int | None = None) -> InventoryReport:
    """Inventory a corpus tree: per-(year, district) counts, missing and
    extra districts against the era schema, note files and duplicate sets.

    Counts cover certificate scans (no note suffix), with byte-identical
    copies counted once. Ordering is deterministic regardless of directory
    listing order.
    """
    root = Path(root)
    files, skipped = scan_corpus(root, workers=workers)
    report = InventoryReport(root=str(root), skipped=skipped, total_files=len(files))

    report.duplicate_sets = find_duplicates(
        [(f.path, f.digest, f.scan) for f in files]
    )
    identical_losers = {
        p for s in report.duplicate_sets if s.kind == IDENTICAL_FILE for p in s.losers
    }

    observed: dict[int, set[District]] = {}
    for f in sorted(files, key=lambda f: f.scan.sort_key):
        observed.setdefault(f.scan.year, set()).add(f.scan.district)
        if f.scan.is_note:
            report.note_files.append(f.path)
            continue
        report.certificate_files += 1
        if f.path in identical_losers:
            continue
        key = (f.scan.year, f.scan.district)
        report.counts[key] = report.counts.get(key, 0) + 1

    for year in sorted(observed):
        expected = district_schema(year).expected
        seen = observed[year]
        for d in sorted(expected - seen, key=lambda d: d.sort_key):
            report.missing_districts.append((year, d))
        for d in sorted(seen - expected, key=lambda d: d.sort_key):
            report.extra_districts.append((year, d))
    return report


@dataclass(frozen=True)
class CleanAction:
    op: str  # "delete" | "move"
    path: str
    dest: str | None = None

    def to_dict(self) -> dict:
        d = {"op": self.op, "path": self.path}
        if self.dest is not None:
            d["dest"] = self.dest
        return d


@dataclass
class CleanPlan:
    root: str
    actions: list[CleanAction]
    applied: bool = False

    def to_dict(self) -> dict:
        return {
            "format": "certpipe-clean/1",
            "root": self.root,
            "applied": self.applied,
            "actions": [a.to_dict() for a in self.actions],
        }


def plan_clean(report: InventoryReport) -> CleanPlan:
    """Derive cleanup actions: delete identical-copy losers, move duplicate
    scan losers under ``x-duplicates`` keeping their relative path."""
    actions: list[CleanAction] = []
    deleted: set[str] = set()
    for s in report.duplicate_sets:
        if s.kind != IDENTICAL_FILE:
            continue
        for p in s.losers:
            if p not in deleted:
                actions.append(CleanAction("delete", p))
                deleted.add(p)
    for s in report.duplicate_sets:
        if s.kind != DUPLICATE_SCAN:
            continue
        for p in s.losers:
            if p in deleted:
                continue  # already handled as a byte-identical copy
            actions.append(CleanAction("move", p, f"{X_DUPLICATES}/{p}"))
    actions.sort(key=lambda a: (a.op, a.path))
    return CleanPlan(root=report.root, actions=actions)


def clean(report: InventoryReport, apply: bool = False, log_path: Path | None = None) -> CleanPlan:
    """Build the cleanup plan; with ``apply`` execute it sequentially,
    logging each action as one JSON line.

    A filesystem failure aborts mid-plan and raises :class:`FilesystemError`;
    the log of completed actions stands, and re-running against the cleaned
    tree plans only the remainder.
    """
    plan = plan_clean(report)
    if not apply:
        return plan

    root = Path(report.root)
    log_path = Path(log_path) if log_path else root / "clean-log.jsonl"
    with open(log_path, "a", encoding="utf-8") as log:
        for action in plan.actions:
            src = root / action.path
            try:
                if action.op == "delete":
                    src.unlink()
                else:
                    dest = root / action.dest
                    dest.parent.mkdir(parents=True, exist_ok=True)
                    src.rename(dest)
            except OSError as exc:
                log.write(json.dumps({**action.to_dict(), "status": "failed", "error": str(exc)}) + "\n")
                raise FilesystemError(f"{action.op} failed for {src}: {exc}", log_path=log_path) from exc
            log.write(json.dumps({**action.to_dict(), "status": "done"}, sort_keys=True) + "\n")
    plan.applied = True
    return plan
