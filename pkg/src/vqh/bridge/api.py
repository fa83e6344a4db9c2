"""The HTTP "book" service: dataset store, REST endpoints, and SSE push.

A book is one experiment's complete serialized dataset.  Books persist as an
append-only directory of JSON files keyed by id, with an in-memory index for
lookups.  Subscribers on /events receive one `book` event per accepted POST;
during a live run the same stream carries `records` batches for UI feeds.
"""
from __future__ import annotations

import json
import logging
import queue
import re
import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

log = logging.getLogger(__name__)

RETRY_BACKOFF = 0.2
_ID_PATTERN = re.compile(r"^[A-Za-z0-9_\-]+$")


@dataclass
class Book:
    """One experiment: config + QUBO source + every per-iteration result."""

    id: str
    created_at: str
    config: dict
    qubo_csv: str
    operators: list[str]
    raw: list[dict]
    marginals: list[list[float]]
    values: list[float]
    states: list[str]

    def __post_init__(self):
        lengths = {len(self.raw), len(self.marginals), len(self.values), len(self.states)}
        if len(lengths) != 1:
            raise ValueError(f"per-iteration arrays disagree on length: {lengths}")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "created_at": self.created_at,
            "config": self.config,
            "qubo_csv": self.qubo_csv,
            "operators": self.operators,
            "raw": self.raw,
            "marginals": self.marginals,
            "values": self.values,
            "states": self.states,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Book":
        return cls(**{k: data[k] for k in (
            "id", "created_at", "config", "qubo_csv",
            "operators", "raw", "marginals", "values", "states",
        )})


class BookStore:
    """Append-only JSON-file store with read-your-writes semantics."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._index: dict[str, str] = {}  # id -> created_at, insertion ordered
        for path in sorted(self.root.glob("book_*.json")):
            try:
                data = json.loads(path.read_text())
                self._index[data["id"]] = data.get("created_at", "")
            except (json.JSONDecodeError, KeyError):
                log.warning("skipping unreadable book file %s", path)

    def _path(self, book_id: str) -> Path:
        return self.root / f"book_{book_id}.json"

    def add(self, data: dict) -> str:
        """Store a book dict; assigns an id when absent, rejects collisions."""
        with self._lock:
            book_id = str(data.get("id") or "") or self._next_id()
            if not _ID_PATTERN.match(book_id):
                raise ValueError(f"invalid book id {book_id!r}")
            if book_id in self._index:
                raise KeyError(f"book {book_id!r} already exists")
            data = dict(data)
            data["id"] = book_id
            data.setdefault("created_at", time.strftime("%Y-%m-%dT%H:%M:%S"))
            self._path(book_id).write_text(json.dumps(data) + "\n")
            self._index[book_id] = data["created_at"]
            return book_id

    def _next_id(self) -> str:
        numbers = [int(i) for i in self._index if i.isdigit()]
        return str(max(numbers, default=0) + 1)

    def get(self, book_id: str) -> dict | None:
        with self._lock:
            if book_id not in self._index:
                return None
        return json.loads(self._path(book_id).read_text())

    def latest(self) -> dict | None:
        with self._lock:
            if not self._index:
                return None
            last = list(self._index)[-1]
        return self.get(last)

    def index(self) -> list[dict]:
        with self._lock:
            return [{"id": i, "created_at": t} for i, t in self._index.items()]


class EventBroadcaster:
    """Fan-out of server-sent events; one unbounded queue per subscriber."""

    def __init__(self):
        self._lock = threading.Lock()
        self._subscribers: list[queue.SimpleQueue] = []

    def subscribe(self) -> queue.SimpleQueue:
        q: queue.SimpleQueue = queue.SimpleQueue()
        with self._lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q) -> None:
        with self._lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def publish(self, event: str, data: dict) -> None:
        with self._lock:
            targets = list(self._subscribers)
        for q in targets:
            q.put((event, data))


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "vqh-api"

    def log_message(self, fmt, *args):  # route through logging, not stderr
        log.debug("%s " + fmt, self.address_string(), *args)

    @property
    def store(self) -> BookStore:
        return self.server.store  # type: ignore[attr-defined]

    @property
    def broadcaster(self) -> EventBroadcaster:
        return self.server.broadcaster  # type: ignore[attr-defined]

    @property
    def session_hooks(self):
        return self.server.session_hooks  # type: ignore[attr-defined]

    def _send_json(self, status: int, payload) -> None:
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(data)

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length)

    def do_GET(self):
        path = self.path.split("?")[0].rstrip("/") or "/"
        if path == "/health":
            self._send_json(200, {"status": "ok"})
        elif path == "/books":
            self._send_json(200, self.store.index())
        elif path == "/books/latest":
            book = self.store.latest()
            if book is None:
                self._send_json(404, {"error": "no books yet"})
            else:
                self._send_json(200, book)
        elif path.startswith("/books/"):
            book = self.store.get(path.removeprefix("/books/"))
            if book is None:
                self._send_json(404, {"error": "unknown book id"})
            else:
                self._send_json(200, book)
        elif path == "/events":
            self._serve_events()
        else:
            self._send_json(404, {"error": f"no route {path}"})

    def do_POST(self):
        path = self.path.split("?")[0].rstrip("/")
        if path == "/books":
            self._post_book()
        elif path.startswith("/session/"):
            self._post_session(path.removeprefix("/session/"))
        else:
            self._send_json(404, {"error": f"no route {path}"})

    def _post_book(self):
        try:
            data = json.loads(self._read_body())
            if not isinstance(data, dict):
                raise ValueError("book payload must be a JSON object")
        except (json.JSONDecodeError, ValueError) as exc:
            self._send_json(400, {"error": f"malformed book: {exc}"})
            return
        try:
            book_id = self.store.add(data)
        except KeyError as exc:
            self._send_json(409, {"error": str(exc)})
            return
        except ValueError as exc:
            self._send_json(400, {"error": str(exc)})
            return
        self.broadcaster.publish("book", {"id": book_id})
        self._send_json(201, {"id": book_id})

    def _post_session(self, action: str):
        hooks = self.session_hooks
        if hooks is None:
            self._send_json(404, {"error": "no session attached"})
            return
        try:
            if action == "qubo":
                body = self._read_body().decode("utf-8")
                if self.headers.get("Content-Type", "").startswith("application/json"):
                    body = json.loads(body)["csv"]
                hooks.replace_qubo(body)
                self._send_json(200, {"status": "ok"})
            elif action == "run":
                run_id = hooks.start_run()
                self._send_json(202, {"id": run_id})
            elif action == "stop":
                hooks.stop_sound()
                self._send_json(200, {"status": "stopped"})
            else:
                self._send_json(404, {"error": f"unknown session action {action!r}"})
        except RuntimeError as exc:  # busy
            self._send_json(409, {"error": str(exc)})
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            self._send_json(400, {"error": str(exc)})

    def _serve_events(self):
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        q = self.broadcaster.subscribe()
        try:
            self.wfile.write(b": connected\n\n")
            self.wfile.flush()
            while self.server.running:  # type: ignore[attr-defined]
                try:
                    event, data = q.get(timeout=1.0)
                except queue.Empty:
                    self.wfile.write(b": keep-alive\n\n")
                    self.wfile.flush()
                    continue
                frame = f"event: {event}\ndata: {json.dumps(data)}\n\n"
                self.wfile.write(frame.encode("utf-8"))
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            pass
        finally:
            self.broadcaster.unsubscribe(q)


@dataclass
class ApiServer:
    store: BookStore
    host: str = "127.0.0.1"
    port: int = 0
    session_hooks: object | None = None
    broadcaster: EventBroadcaster = field(default_factory=EventBroadcaster)

    def start(self) -> "ApiServer":
        self._httpd = ThreadingHTTPServer((self.host, self.port), _Handler)
        self._httpd.daemon_threads = True
        self._httpd.store = self.store
        self._httpd.broadcaster = self.broadcaster
        self._httpd.session_hooks = self.session_hooks
        self._httpd.running = True
        self.port = self._httpd.server_address[1]
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def stop(self) -> None:
        self._httpd.running = False
        self._httpd.shutdown()
        self._httpd.server_close()
        self._thread.join(timeout=5)


def serve_api(store: BookStore, bind: str = "127.0.0.1:0", session_hooks=None) -> ApiServer:
    """Start the service on the bind address; port 0 picks a free port."""
    host, _, port = bind.rpartition(":")
    server = ApiServer(
        store, host=host or "127.0.0.1", port=int(port or 0), session_hooks=session_hooks
    )
    return server.start()


def post_book(url: str, book: dict, retries: int = 3) -> str:
    """POST a book; transient failures retry with backoff, 4xx fails at once."""
    endpoint = url.rstrip("/") + "/books"
    payload = json.dumps(book).encode("utf-8")
    last_error: Exception | None = None
    for attempt in range(retries):
        request = urllib.request.Request(
            endpoint, data=payload, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=10) as response:
                return json.loads(response.read())["id"]
        except urllib.error.HTTPError as exc:
            if 400 <= exc.code < 500:
                raise RuntimeError(f"book rejected: {exc.code} {exc.read().decode()}")
            last_error = exc
        except urllib.error.URLError as exc:
            last_error = exc
        time.sleep(RETRY_BACKOFF * 2**attempt)
    raise RuntimeError(f"book POST failed after {retries} attempts: {last_error}")
