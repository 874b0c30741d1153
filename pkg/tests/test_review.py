import json
import threading
import urllib.error
import urllib.request
from pathlib import Path

import pytest

from certpipe.errors import ConfigError
from certpipe.pipeline import load_jsonl, make_config, run_pipeline
from certpipe.review import ReviewStore, serve_review
from certpipe.synthetic import generate_corpus


@pytest.fixture
def store_dir(tmp_path) -> Path:
    corpus = generate_corpus(n=20)
    corpus.write(tmp_path / "corpus")
    config = make_config(
        {
            "corpus": str(tmp_path / "corpus"),
            "lexicon": str(tmp_path / "corpus" / "names.csv"),
            "output": str(tmp_path / "out"),
        }
    )
    run_pipeline(config)
    return tmp_path / "out" / "review"


@pytest.fixture
def server(store_dir):
    store = ReviewStore.open(store_dir)
    httpd = serve_review(store, host="127.0.0.1", port=0)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    yield base, store
    httpd.shutdown()
    httpd.server_close()


def request(method: str, url: str, body: dict | None = None, headers: dict | None = None):
    data = json.dumps(body).encode() if body is not None else None
    req = urllib.request.Request(url, data=data, method=method, headers=headers or {})
    if data is not None:
        req.add_header("Content-Type", "application/json")
    try:
        with urllib.request.urlopen(req) as resp:
            return resp.status, json.loads(resp.read().decode())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read().decode())


def test_queue_lists_flagged_items(server, store_dir):
    base, _ = server
    status, payload = request("GET", f"{base}/api/queue")
    assert status == 200
    items = load_jsonl(store_dir / "items.jsonl")
    assert payload["total"] == len(items)
    assert [i["id"] for i in payload["items"]] == [i["id"] for i in items]
    assert all(i["status"] == "pending" for i in payload["items"])


def test_queue_empty_on_fresh_store(tmp_path):
    empty = tmp_path / "review"
    empty.mkdir()
    store = ReviewStore.open(empty)
    assert store.list_items() == {
        "format": "certpipe-review/1",
        "items": [],
        "total": 0,
        "next_offset": None,
    }


def test_queue_paging(server):
    base, _ = server
    status, page1 = request("GET", f"{base}/api/queue?offset=0&limit=2")
    assert status == 200
    assert len(page1["items"]) == 2
    assert page1["next_offset"] == 2
    status, page2 = request("GET", f"{base}/api/queue?offset=2&limit=2")
    assert status == 200
    assert page2["next_offset"] is None
    ids = [i["id"] for i in page1["items"]] + [i["id"] for i in page2["items"]]
    assert len(set(ids)) == len(ids) == page1["total"]


def test_get_item_includes_excerpt(server):
    base, store = server
    item_id = store.list_items()["items"][0]["id"]
    status, payload = request("GET", f"{base}/api/items/{item_id}")
    assert status == 200
    assert payload["item"]["id"] == item_id
    assert "record" in payload["item"]
    assert isinstance(payload["item"]["excerpt"], str)


def test_get_unknown_item_404(server):
    base, _ = server
    status, _ = request("GET", f"{base}/api/items/abcdefabcdef")
    assert status == 404


def test_submit_valid_correction(server, store_dir):
    base, store = server
    item_id = store.list_items()["items"][0]["id"]
    status, payload = request(
        "POST",
        f"{base}/api/items/{item_id}/corrections",
        {
            "reviewer": "vol1",
            "corrections": [{"field": "deceased_name", "new_value": "Maria Garmers"}],
        },
    )
    assert status == 200
    assert payload["status"] == "corrected"
    status, payload = request("GET", f"{base}/api/items/{item_id}")
    assert payload["item"]["status"] == "corrected"
    assert payload["item"]["name"] == "Maria Garmers"
    events = load_jsonl(store_dir / "events.jsonl")
    assert len(events) == 1
    assert events[0]["field"] == "deceased_name"
    assert events[0]["reviewer"] == "vol1"


def test_second_correction_conflicts(server):
    base, store = server
    item_id = store.list_items()["items"][0]["id"]
    body = {"corrections": [{"field": "deceased_name", "new_value": "Anna Palm"}]}
    first, _ = request("POST", f"{base}/api/items/{item_id}/corrections", body)
    second, _ = request("POST", f"{base}/api/items/{item_id}/corrections", body)
    assert first == 200
    assert second == 409


def test_concurrent_double_submit_one_wins(server):
    base, store = server
    item_id = store.list_items()["items"][0]["id"]
    body = {"corrections": [{"field": "deceased_name", "new_value": "Anna Palm"}]}
    barrier = threading.Barrier(2)
    results = []

    def submit():
        barrier.wait()
        results.append(request("POST", f"{base}/api/items/{item_id}/corrections", body)[0])

    threads = [threading.Thread(target=submit) for _ in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(results) == [200, 409]


def test_invalid_bodies_rejected(server):
    base, store = server
    item_id = store.list_items()["items"][0]["id"]
    cases = [
        None,
        {"corrections": "not a list"},
        {"corrections": []},
        {"corrections": [{"field": "shoe_size", "new_value": "44"}]},
        {"corrections": [{"field": "deceased_name", "new_value": "  "}]},
        {"corrections": [{"field": "death_date", "new_value": "1887-02-31"}]},
        {"corrections": [{"field": "death_date", "new_value": "gisteren"}]},
    ]
    for body in cases:
        status, _ = request("POST", f"{base}/api/items/{item_id}/corrections", body)
        assert status == 400, body
    # the item is still pending afterwards
    status, payload = request("GET", f"{base}/api/items/{item_id}")
    assert payload["item"]["status"] == "pending"


def test_empty_name_requires_stillborn_mark(server):
    base, store = server
    item_id = store.list_items()["items"][0]["id"]
    status, _ = request(
        "POST",
        f"{base}/api/items/{item_id}/corrections",
        {"stillborn": True, "corrections": [{"field": "deceased_name", "new_value": ""}]},
    )
    assert status == 200


def test_accept_flow(server):
    base, store = server
    item_id = store.list_items()["items"][0]["id"]
    status, payload = request("POST", f"{base}/api/items/{item_id}/accept", {"reviewer": "v"})
    assert status == 200
    assert payload["status"] == "accepted"
    status, _ = request("POST", f"{base}/api/items/{item_id}/accept", {"reviewer": "v"})
    assert status == 409


def test_store_reopen_replays_events(server, store_dir):
    base, store = server
    item_id = store.list_items()["items"][0]["id"]
    request(
        "POST",
        f"{base}/api/items/{item_id}/corrections",
        {"corrections": [{"field": "death_date", "new_value": "1887-05-05"}]},
    )
    reopened = ReviewStore.open(store_dir)
    assert reopened.get(item_id)["item"]["status"] == "corrected"
    assert reopened.get(item_id)["item"]["date"] == "1887-05-05"


def test_nonloopback_bind_requires_token(store_dir):
    store = ReviewStore.open(store_dir)
    with pytest.raises(ConfigError):
        serve_review(store, host="0.0.0.0", port=0)


def test_token_guard(store_dir):
    store = ReviewStore.open(store_dir)
    httpd = serve_review(store, host="127.0.0.1", port=0, token="geheim")
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    try:
        status, _ = request("GET", f"{base}/api/queue")
        assert status == 401
        status, _ = request("GET", f"{base}/api/queue", headers={"X-Review-Token": "geheim"})
        assert status == 200
    finally:
        httpd.shutdown()
        httpd.server_close()


def test_static_assets_served(tmp_path, store_dir):
    ui = tmp_path / "ui"
    (ui / "assets").mkdir(parents=True)
    (ui / "index.html").write_text("<html><body>review</body></html>", encoding="utf-8")
    (ui / "assets" / "app.js").write_text("export {};", encoding="utf-8")
    store = ReviewStore.open(store_dir)
    httpd = serve_review(store, host="127.0.0.1", port=0, static_dir=ui)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    try:
        with urllib.request.urlopen(f"{base}/") as resp:
            assert resp.status == 200
            assert b"review" in resp.read()
        with urllib.request.urlopen(f"{base}/assets/app.js") as resp:
            assert resp.status == 200
        status, _ = request("GET", f"{base}/assets/../secret")
        assert status == 404
    finally:
        httpd.shutdown()
        httpd.server_close()
