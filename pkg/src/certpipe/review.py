"""Review queue store and HTTP service for the human correction loop.

Flagged records become review items; volunteers correct the deceased name
or death date, or accept the extraction as-is. Items move Pending ->
Corrected/Accepted exactly once; all writes go through one lock and append
to an event log that :func:`certpipe.pipeline.merge_corrections` replays.

The API is JSON over HTTP. It binds to loopback by default; binding
anywhere else requires a shared token, which clients send in the
``X-Review-Token`` header.
"""

from __future__ import annotations

import calendar
import json
import re
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .errors import ConfigError, InvalidCorrection, ItemNotPending, UnknownItem
from .pipeline import CORRECTION_FIELDS, DATE_FIELD, NAME_FIELD, load_jsonl

PENDING = "pending"
CORRECTED = "corrected"
ACCEPTED = "accepted"

API_FORMAT = "certpipe-review/1"


def _valid_iso_date(text: str) -> bool:
    m = re.fullmatch(r"(\d{4})-(\d{1,2})-(\d{1,2})", text.strip())
    if not m:
        return False
    year, month, day = int(m.group(1)), int(m.group(2)), int(m.group(3))
    return 1 <= month <= 12 and 1 <= day <= calendar.monthrange(year, month)[1]


class ReviewStore:
    """Item snapshots plus an append-only event log on disk.

    Writes are serialized through one lock; reads work on the in-memory
    state, which is an exact replay of ``items.jsonl`` + ``events.jsonl``.
    """

    def __init__(self, items: list[dict], events_path: Path):
        self._lock = threading.Lock()
        self._items: dict[str, dict] = {}
        self._order: list[str] = []
        for item in items:
            self._items[item["id"]] = dict(item)
            self._order.append(item["id"])
        self.events_path = Path(events_path)
        self.events: list[dict] = []

    @classmethod
    def open(cls, store_dir: Path) -> "ReviewStore":
        store_dir = Path(store_dir)
        items_path = store_dir / "items.jsonl"
        events_path = store_dir / "events.jsonl"
        items = load_jsonl(items_path) if items_path.exists() else []
        store = cls(items, events_path)
        if events_path.exists():
            for event in load_jsonl(events_path):
                store._apply(event)
                store.events.append(event)
        return store

    def _apply(self, event: dict) -> None:
        item = self._items.get(event.get("item_id"))
        if item is None:
            return
        if event.get("type") == "accept":
            item["status"] = ACCEPTED
        elif event.get("type") == "correction":
            item["status"] = CORRECTED
            if event.get("field") == NAME_FIELD:
                item["name"] = event.get("new")
            elif event.get("field") == DATE_FIELD:
                item["date"] = event.get("new")

    def _append_events(self, events: list[dict]) -> None:
        self.events_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.events_path, "a", encoding="utf-8") as fh:
            for event in events:
                fh.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")
        self.events.extend(events)

    # --- queries ---------------------------------------------------------

    def list_items(self, offset: int = 0, limit: int = 20, status: str = PENDING) -> dict:
        rows = [
            self._public_item(self._items[iid])
            for iid in self._order
            if status in ("all", self._items[iid].get("status"))
        ]
        page = rows[offset : offset + limit]
        next_offset = offset + limit if offset + limit < len(rows) else None
        return {
            "format": API_FORMAT,
            "items": page,
            "total": len(rows),
            "next_offset": next_offset,
        }

    def get(self, item_id: str) -> dict:
        item = self._items.get(item_id)
        if item is None:
            raise UnknownItem(item_id)
        return {"format": API_FORMAT, "item": dict(item)}

    @staticmethod
    def _public_item(item: dict) -> dict:
        return {
            "id": item["id"],
            "scan": item.get("scan"),
            "flags": item.get("flags", []),
            "name": item.get("name"),
            "date": item.get("date"),
            "status": item.get("status", PENDING),
        }

    # --- transitions -----------------------------------------------------

    def submit_corrections(
        self,
        item_id: str,
        corrections: list[dict],
        reviewer: str,
        stillborn: bool = False,
    ) -> list[dict]:
        """Validate and apply one correction submission; the item leaves
        Pending exactly once, so a concurrent second submit conflicts."""
        if not corrections:
            raise InvalidCorrection("no corrections in body")
        for c in corrections:
            fieldname = c.get("field")
            if fieldname not in CORRECTION_FIELDS:
                raise InvalidCorrection(f"unknown field {fieldname!r}")
            new = (c.get("new_value") or "").strip()
            if fieldname == NAME_FIELD and not new and not stillborn:
                raise InvalidCorrection("empty name requires the stillborn mark")
            if fieldname == DATE_FIELD and not _valid_iso_date(new):
                raise InvalidCorrection(f"not a calendar date: {c.get('new_value')!r}")
        with self._lock:
            item = self._items.get(item_id)
            if item is None:
                raise UnknownItem(item_id)
            if item.get("status") != PENDING:
                raise ItemNotPending(item_id)
            now = time.time()
            events = []
            for c in corrections:
                fieldname = c["field"]
                old = item.get("name") if fieldname == NAME_FIELD else item.get("date")
                events.append(
                    {
                        "type": "correction",
                        "item_id": item_id,
                        "field": fieldname,
                        "old": old,
                        "new": (c.get("new_value") or "").strip(),
                        "stillborn": bool(stillborn),
                        "reviewer": reviewer,
                        "timestamp": now,
                    }
                )
            for event in events:
                self._apply(event)
            self._append_events(events)
            return events

    def accept(self, item_id: str, reviewer: str) -> dict:
        with self._lock:
            item = self._items.get(item_id)
            if item is None:
                raise UnknownItem(item_id)
            if item.get("status") != PENDING:
                raise ItemNotPending(item_id)
            event = {
                "type": "accept",
                "item_id": item_id,
                "reviewer": reviewer,
                "timestamp": time.time(),
            }
            self._apply(event)
            self._append_events([event])
            return event


_ITEM_RE = re.compile(r"^/api/items/([0-9a-f]+)$")
_CORRECT_RE = re.compile(r"^/api/items/([0-9a-f]+)/corrections$")
_ACCEPT_RE = re.compile(r"^/api/items/([0-9a-f]+)/accept$")

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
}


def make_handler(store: ReviewStore, token: str | None, static_dir: Path | None):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):  # keep test output quiet
            pass

        def _send_json(self, status: int, payload: dict):
            body = json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _authorized(self) -> bool:
            if token is None:
                return True
            return self.headers.get("X-Review-Token") == token

        def _read_body(self) -> dict | None:
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return None
            try:
                data = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                return None
            return data if isinstance(data, dict) else None

        def do_GET(self):
            if not self._authorized():
                return self._send_json(401, {"error": "missing or bad token"})
            url = urlparse(self.path)
            if url.path == "/api/queue":
                query = parse_qs(url.query)
                offset = int(query.get("offset", ["0"])[0])
                limit = min(int(query.get("limit", ["20"])[0]), 200)
                status = query.get("status", [PENDING])[0]
                return self._send_json(200, store.list_items(offset, limit, status))
            m = _ITEM_RE.match(url.path)
            if m:
                try:
                    return self._send_json(200, store.get(m.group(1)))
                except UnknownItem:
                    return self._send_json(404, {"error": "unknown item"})
            return self._serve_static(url.path)

        def do_POST(self):
            if not self._authorized():
                return self._send_json(401, {"error": "missing or bad token"})
            url = urlparse(self.path)
            body = self._read_body()
            m = _CORRECT_RE.match(url.path)
            if m:
                if body is None or not isinstance(body.get("corrections"), list):
                    return self._send_json(400, {"error": "body must carry a corrections list"})
                try:
                    events = store.submit_corrections(
                        m.group(1),
                        body["corrections"],
                        reviewer=str(body.get("reviewer") or "anonymous"),
                        stillborn=bool(body.get("stillborn")),
                    )
                except UnknownItem:
                    return self._send_json(404, {"error": "unknown item"})
                except ItemNotPending:
                    return self._send_json(409, {"error": "item is not pending"})
                except InvalidCorrection as exc:
                    return self._send_json(400, {"error": str(exc)})
                return self._send_json(200, {"status": CORRECTED, "events": events})
            m = _ACCEPT_RE.match(url.path)
            if m:
                try:
                    event = store.accept(
                        m.group(1), reviewer=str((body or {}).get("reviewer") or "anonymous")
                    )
                except UnknownItem:
                    return self._send_json(404, {"error": "unknown item"})
                except ItemNotPending:
                    return self._send_json(409, {"error": "item is not pending"})
                return self._send_json(200, {"status": ACCEPTED, "event": event})
            return self._send_json(404, {"error": "no such endpoint"})

        def _serve_static(self, path: str):
            if static_dir is None:
                return self._send_json(404, {"error": "no such endpoint"})
            rel = "index.html" if path in ("", "/") else path.lstrip("/")
            target = (static_dir / rel).resolve()
            if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
                return self._send_json(404, {"error": "not found"})
            body = target.read_bytes()
            self.send_response(200)
            ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

    return Handler


_LOOPBACK = ("127.0.0.1", "::1", "localhost")


def serve_review(
    store: ReviewStore,
    host: str = "127.0.0.1",
    port: int = 8765,
    token: str | None = None,
    static_dir: Path | None = None,
) -> ThreadingHTTPServer:
    """Create the HTTP server (call ``serve_forever`` to run it).

    Non-loopback binds are refused unless a shared token is configured.
    """
    if host not in _LOOPBACK and not token:
        raise ConfigError(f"binding to {host!r} requires --token")
    handler = make_handler(store, token, Path(static_dir) if static_dir else None)
    return ThreadingHTTPServer((host, port), handler)
