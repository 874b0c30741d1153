"""Command line interface: one verb per pipeline stage plus the full run
and the review service. ``CERTPIPE_CONFIG`` names the default config file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .document import document_to_json, parse_document
from .errors import CertpipeError
from .extraction import get_backend
from .inventory import build_inventory, clean
from .lexicon import load_lexicon
from .linking import build_link_groups, link_stats, load_gold_rows
from .metrics import EvalPair, cer_report, date_accuracy, emit_report, name_accuracy
from .pipeline import (
    PipelineConfig,
    correct_records,
    discover_documents,
    dump_jsonl,
    load_config,
    load_jsonl,
    make_config,
    merge_corrections,
    run_pipeline,
    top_date,
    top_name,
)
from .review import ReviewStore, serve_review
from .scans import parse_scan_filename
from .synthetic import generate_corpus


def _write_or_print(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")
    else:
        print(text)


def cmd_inventory(args) -> int:
    report = build_inventory(Path(args.root), workers=args.workers)
    _write_or_print(report.to_json(), args.json)
    if args.json:
        print(f"inventory: {report.certificate_files} certificate scans, "
              f"{len(report.duplicate_sets)} duplicate sets -> {args.json}")
    return 0


def cmd_clean(args) -> int:
    report = build_inventory(Path(args.root))
    plan = clean(report, apply=args.apply, log_path=args.log)
    print(json.dumps(plan.to_dict(), ensure_ascii=False, sort_keys=True, indent=2))
    if not args.apply:
        print(f"dry-run: {len(plan.actions)} actions planned (use --apply to execute)",
              file=sys.stderr)
    return 0


def cmd_ingest(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in map(Path, args.files):
        doc = parse_document(path)
        target = out_dir / (path.stem + ".json")
        target.write_text(document_to_json(doc), encoding="utf-8")
        print(f"{path} -> {target}")
    return 0


def cmd_extract(args) -> int:
    from .extraction import extract_record
    from .lexicon import append_mother_surname
    from .pipeline import record_to_dict

    backend = get_backend(args.backend)
    records = []
    for path in sorted(discover_documents(Path(args.docs))):
        doc = parse_document(path)
        record = append_mother_surname(extract_record(doc, backend))
        records.append(record_to_dict(record, source=path.name))
    dump_jsonl(records, Path(args.out))
    print(f"extracted {len(records)} records -> {args.out}")
    return 0


def cmd_correct(args) -> int:
    records = load_jsonl(Path(args.records))
    lexicon = load_lexicon(Path(args.lexicon))
    corrected = correct_records(records, lexicon, min_freq=args.min_freq)
    dump_jsonl(corrected, Path(args.out))
    flagged = sum(1 for r in corrected if "UnknownTokens" in (r.get("flags") or []))
    print(f"corrected {len(corrected)} records ({flagged} gated) -> {args.out}")
    return 0


def _parse_column_mapping(spec: str | None) -> dict | None:
    if not spec:
        return None
    mapping = {}
    for pair in spec.split(","):
        key, _, value = pair.partition("=")
        if not value:
            raise CertpipeError(f"--columns entries must look like name=naam, got {pair!r}")
        mapping[key.strip()] = value.strip()
    return mapping


def cmd_link(args) -> int:
    gold = load_gold_rows(Path(args.rows), columns=_parse_column_mapping(args.columns))
    groups = build_link_groups(gold.rows, tolerance=args.tolerance, any_order=args.any_order)
    stats = link_stats(groups, gold.rows, any_order=args.any_order)
    payload = {
        "format": "certpipe-groups/1",
        "groups": [g.to_dict() for g in groups],
    }
    Path(args.out).write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2), encoding="utf-8"
    )
    if args.stats:
        Path(args.stats).write_text(
            json.dumps(stats.to_dict(), ensure_ascii=False, sort_keys=True, indent=2),
            encoding="utf-8",
        )
    print(f"{len(groups)} link groups -> {args.out}"
          + (f"; stats -> {args.stats}" if args.stats else ""))
    if gold.malformed:
        print(f"skipped {len(gold.malformed)} malformed rows", file=sys.stderr)
    return 0


def _load_gold_eval(path: Path) -> list[dict]:
    import csv

    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def cmd_eval(args) -> int:
    gold_rows = _load_gold_eval(Path(args.gold))
    reports = []
    if args.metric in ("names", "dates"):
        records = {r.get("scan"): r for r in load_jsonl(Path(args.pred))}
        if args.metric == "names":
            pairs = [
                EvalPair(row["id"], row["name"], top_name(records.get(row["id"]) or {}))
                for row in gold_rows
            ]
            reports.append(name_accuracy(pairs, max_dist=args.max_dist, any_order=args.any_order))
        else:
            pairs = [
                EvalPair(row["id"], row["date"], top_date(records.get(row["id"]) or {}))
                for row in gold_rows
            ]
            scan_years = {}
            for row in gold_rows:
                try:
                    scan_years[row["id"]] = parse_scan_filename(row["id"]).year
                except CertpipeError:
                    pass
            reports.append(date_accuracy(pairs, scan_years))
    elif args.metric == "cer":
        from .document import main_text

        pairs = []
        docs = {p.stem: p for p in discover_documents(Path(args.pred))}
        for row in gold_rows:
            doc_path = docs.get(Path(row["id"]).stem)
            hyp = ""
            if doc_path is not None:
                center, _ = main_text(parse_document(doc_path))
                hyp = center
            pairs.append(EvalPair(row["id"], row["reference"], hyp))
        reports.append(cer_report(pairs))
    else:
        raise CertpipeError(f"unknown metric {args.metric!r}")
    _write_or_print(emit_report(reports, fmt=args.format), args.out)
    return 0


def _config_from_args(args) -> PipelineConfig:
    overrides = {
        "corpus": args.corpus,
        "lexicon": args.lexicon,
        "output": args.output,
        "backend": args.backend,
        "workers": args.workers,
    }
    config_path = args.config or os.environ.get("CERTPIPE_CONFIG")
    if config_path:
        return load_config(Path(config_path), overrides)
    return make_config({k: v for k, v in overrides.items() if v is not None})


def cmd_run(args) -> int:
    config = _config_from_args(args)
    summary = run_pipeline(config)
    print(json.dumps(summary.to_dict(), ensure_ascii=False, sort_keys=True, indent=2))
    return 0


def cmd_review_serve(args) -> int:
    store = ReviewStore.open(Path(args.store))
    server = serve_review(
        store,
        host=args.host,
        port=args.port,
        token=args.token,
        static_dir=Path(args.ui) if args.ui else None,
    )
    host, port = server.server_address[:2]
    print(f"review service on http://{host}:{port}/ "
          f"({len(store.list_items(status='pending')['items'])} pending shown first page)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def cmd_merge(args) -> int:
    records = load_jsonl(Path(args.records))
    events = load_jsonl(Path(args.events))
    lexicon = load_lexicon(Path(args.lexicon))
    merged, new_lexicon = merge_corrections(records, events, lexicon)
    dump_jsonl(merged, Path(args.out))
    if args.lexicon_out:
        with open(args.lexicon_out, "w", encoding="utf-8") as fh:
            fh.write("name,count\n")
            for key in sorted(new_lexicon.entries):
                fh.write(f"{new_lexicon.display.get(key, key)},{new_lexicon.entries[key]}\n")
    print(f"merged {len(events)} events into {len(merged)} records -> {args.out}"
          f" (lexicon mass {lexicon.token_mass} -> {new_lexicon.token_mass})")
    return 0


def cmd_synth(args) -> int:
    corpus = generate_corpus(n=args.count, seed=args.seed)
    corpus.write(Path(args.out))
    print(f"wrote {len(corpus.docs)} synthetic documents, ground_truth.json "
          f"and names.csv -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="certpipe",
        description="Certificate pipeline: inventory, ingest, extract, correct, link, evaluate, review.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inventory", help="inventory a scan tree")
    p.add_argument("root")
    p.add_argument("--json", help="write the report to this file")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_inventory)

    p = sub.add_parser("clean", help="plan or apply duplicate cleanup")
    p.add_argument("root")
    p.add_argument("--apply", action="store_true")
    p.add_argument("--log", help="action log path (default <root>/clean-log.jsonl)")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("ingest", help="convert document files to canonical JSON")
    p.add_argument("files", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("extract", help="extract records from ingested documents")
    p.add_argument("docs")
    p.add_argument("--backend", default="rules")
    p.add_argument("--out", default="records.jsonl")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("correct", help="lexicon-correct and gate extracted names")
    p.add_argument("records")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--min-freq", type=int, default=2, dest="min_freq")
    p.add_argument("--out", default="corrected.jsonl")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("link", help="build link groups from a person-rows CSV")
    p.add_argument("rows")
    p.add_argument("--out", default="groups.json")
    p.add_argument("--stats")
    p.add_argument("--tolerance", type=int, default=0)
    p.add_argument("--any-order", action="store_true", dest="any_order")
    p.add_argument("--columns", help="header mapping, e.g. name=naam,role=rol")
    p.set_defaults(func=cmd_link)

    p = sub.add_parser("eval", help="score predictions against a gold CSV")
    p.add_argument("--gold", required=True)
    p.add_argument("--pred", required=True, help="records.jsonl or a docs dir for cer")
    p.add_argument("--metric", choices=("names", "dates", "cer"), required=True)
    p.add_argument("--max-dist", type=int, default=3, dest="max_dist")
    p.add_argument("--any-order", action="store_true", dest="any_order")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run", help="run the whole pipeline over a document corpus")
    p.add_argument("--config", help="config file (or CERTPIPE_CONFIG)")
    p.add_argument("--corpus")
    p.add_argument("--lexicon")
    p.add_argument("--output")
    p.add_argument("--backend")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("review-serve", help="serve the review queue API and UI")
    p.add_argument("store", help="review store directory (items.jsonl, events.jsonl)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--token", help="shared token, required off loopback")
    p.add_argument("--ui", help="static assets directory to serve at /")
    p.set_defaults(func=cmd_review_serve)

    p = sub.add_parser("merge", help="merge review events into records and lexicon")
    p.add_argument("records")
    p.add_argument("events")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", default="merged.jsonl")
    p.add_argument("--lexicon-out", dest="lexicon_out")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("synth", help="write the bundled synthetic demo corpus")
    p.add_argument("--out", default="synthetic-corpus")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=1887)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CertpipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
