"""JSON-over-HTTP transformation service.

Endpoints (every body carries ``"v": 1``):

``POST /transform``
    request: ``tree`` (document text), optional ``format`` (``canonical`` |
    ``android_xml``, sniffed when absent), ``render`` (view renderer kind),
    ``seed``, ``library_id`` (must match the loaded library when given).
    response: ``representation``, ``tokens_before``, ``tokens_after``,
    ``reduction``, ``latency_us``, ``library_id``.
``GET /healthz``
    ``status``, ``library_id``, ``programs``.
``POST /reload``
    re-reads the library file; the old library stays active on failure.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional

from ..dsl import ast as A
from ..dsl.parser import ProgramSyntaxError, parse_library
from ..dsl.validate import validate_program
from ..evaluation import baseline_views, reduction
from ..interpreter import PredicateEvaluationError, apply_library
from ..representations import KIND_ALIASES, VIEW_KINDS, MissingSeed, render
from ..tokens import DEFAULT_COUNTER, TokenCounter
from ..tree import TreeError, parse_android_xml, parse_canonical

API_VERSION = 1
MAX_BODY = 32 * 1024 * 1024


class LibraryLoadFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class LoadedLibrary:
    library_id: str
    programs: tuple
    path: str


def load_library(path) -> LoadedLibrary:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise LibraryLoadFailure(f"{path}: {exc}") from exc
    try:
        programs = parse_library(text)
    except ProgramSyntaxError as exc:
        raise LibraryLoadFailure(f"{path}: {exc}") from exc
    for p in programs:
        problems = validate_program(p)
        if problems:
            raise LibraryLoadFailure(f"{path}: program {p.program_id}: {problems[0]}")
    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]
    return LoadedLibrary(digest, tuple(programs), str(path))


class RequestError(Exception):
    def __init__(self, status: int, error: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.error = error
        self.detail = detail


class TransformService:
    """Request handling independent of the HTTP layer.

    The only shared state is the current library reference, replaced whole on reload.
    """

    def __init__(self, library_path, counter: TokenCounter = DEFAULT_COUNTER):
        self.library_path = library_path
        self.counter = counter
        self._library = load_library(library_path)
        self._reload_lock = threading.Lock()

    @property
    def library(self) -> LoadedLibrary:
        return self._library

    def reload(self) -> LoadedLibrary:
        with self._reload_lock:
            self._library = load_library(self.library_path)
            return self._library

    def health(self) -> dict:
        lib = self._library
        return {"v": API_VERSION, "status": "ok", "library_id": lib.library_id,
                "programs": len(lib.programs)}

    def transform(self, body: dict) -> dict:
        if body.get("v") != API_VERSION:
            raise RequestError(400, "UnsupportedVersion", f"expected v={API_VERSION}")
        document = body.get("tree")
        if not isinstance(document, str):
            raise RequestError(400, "BadRequest", "field 'tree' must be a string")
        requested = body.get("render") or "hierarchical"
        kind = KIND_ALIASES.get(requested, requested)
        if kind not in VIEW_KINDS:
            raise RequestError(400, "BadRequest", f"unknown render kind {requested!r}")
        lib = self._library  # one consistent snapshot for the whole request
        wanted = body.get("library_id")
        if wanted is not None and wanted != lib.library_id:
            raise RequestError(409, "LibraryMismatch",
                               f"requested {wanted}, serving {lib.library_id}")
        fmt = body.get("format") or ("android_xml" if document.lstrip().startswith("<")
                                     else "canonical")
        try:
            if fmt == "android_xml":
                tree = parse_android_xml(document)
            elif fmt == "canonical":
                tree = parse_canonical(document)
            else:
                raise RequestError(400, "BadRequest", f"unknown format {fmt!r}")
        except TreeError as exc:
            raise RequestError(400, type(exc).__name__, str(exc)) from exc
        start = time.perf_counter_ns()
        try:
            views = apply_library(list(lib.programs), tree)
        except PredicateEvaluationError as exc:
            raise RequestError(500, "PredicateEvaluationError", str(exc)) from exc
        latency_us = (time.perf_counter_ns() - start) // 1000
        seed = body.get("seed")
        try:
            before = render(baseline_views(tree), kind, seed, self.counter)
            after = render(views, kind, seed, self.counter)
        except MissingSeed as exc:
            raise RequestError(400, "MissingSeed", str(exc)) from exc
        return {
            "v": API_VERSION,
            "library_id": lib.library_id,
            "representation": after.text,
            "tokens_before": before.token_count,
            "tokens_after": after.token_count,
            "reduction": reduction(before.token_count, after.token_count),
            "latency_us": latency_us,
        }


def _handler_for(service: TransformService):
    class Handler(BaseHTTPRequestHandler):
        server_version = "uitrim"
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):  # quiet by default
            pass

        def _send(self, status: int, payload: dict) -> None:
            data = json.dumps(payload, sort_keys=True).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def _error(self, exc: RequestError) -> None:
            self._send(exc.status, {"v": API_VERSION, "error": exc.error, "detail": exc.detail})

        def _body(self) -> dict:
            length = int(self.headers.get("Content-Length") or 0)
            if length > MAX_BODY:
                raise RequestError(413, "TooLarge", f"body over {MAX_BODY} bytes")
            raw = self.rfile.read(length) if length else b""
            if not raw:
                return {}
            try:
                body = json.loads(raw)
            except ValueError as exc:
                raise RequestError(400, "BadRequest", f"invalid JSON: {exc}") from exc
            if not isinstance(body, dict):
                raise RequestError(400, "BadRequest", "body must be a JSON object")
            return body

        def do_GET(self):
            if self.path == "/healthz":
                self._send(200, service.health())
            else:
                self._send(404, {"v": API_VERSION, "error": "NotFound", "detail": self.path})

        def do_POST(self):
            try:
                body = self._body()
                if self.path == "/transform":
                    self._send(200, service.transform(body))
                elif self.path == "/reload":
                    try:
                        lib = service.reload()
                    except LibraryLoadFailure as exc:
                        raise RequestError(500, "LibraryLoadFailure", str(exc)) from exc
                    self._send(200, {"v": API_VERSION, "status": "reloaded",
                                     "library_id": lib.library_id,
                                     "programs": len(lib.programs)})
                else:
                    raise RequestError(404, "NotFound", self.path)
            except RequestError as exc:
                self._error(exc)

    return Handler


def parse_bind(bind: str) -> tuple[str, int]:
    host, sep, port = bind.rpartition(":")
    if not sep:
        return "127.0.0.1", int(bind)
    return host or "127.0.0.1", int(port)


def make_server(library_path, bind: str = "127.0.0.1:8080",
                counter: TokenCounter = DEFAULT_COUNTER) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; raises LibraryLoadFailure up front."""
    service = TransformService(library_path, counter)
    server = ThreadingHTTPServer(parse_bind(bind), _handler_for(service))
    server.daemon_threads = True
    server.service = service
    return server


def serve(library_path, bind: str = "127.0.0.1:8080",
          counter: TokenCounter = DEFAULT_COUNTER,
          ready: Optional[threading.Event] = None) -> None:
    server = make_server(library_path, bind, counter)
    if ready is not None:
        ready.set()
    try:
        server.serve_forever()
    finally:
        server.server_close()


def identity_library_text() -> str:
    return A.format_library([A.identity_program()])
