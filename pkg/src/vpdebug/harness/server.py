"""Loopback HTTP server speaking the model, critic and refiner protocol.

Used by tests and for trying the remote backends without a trained model.
"""

from __future__ import annotations

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Optional, Sequence

from vpdebug.loop.loccodec import LocCodecError, decode_loc, encode_loc

# handler signatures: each takes the decoded request body and returns the response body
Handler = Callable[[dict], dict]


class RecordOracle:
    """Critic and refiner answers looked up from injected records.

    A record's incorrect program gets ``p_correct = 0`` and its marked
    text; its correct program gets ``p_correct = 1``. Unknown programs get
    ``unknown_score`` and no location. The refiner maps a record's marked
    incorrect program to the correct program and echoes anything else.
    """

    def __init__(self, records: Sequence, unknown_score: float = 0.0):
        self.unknown_score = unknown_score
        self.incorrect = {r.program_incorrect: r for r in records}
        self.correct = {r.program_correct for r in records}

    def critic(self, body: dict) -> dict:
        program = body["program"]
        if program in self.correct:
            return {"p_correct": 1.0, "marked_program": None}
        rec = self.incorrect.get(program)
        if rec is not None:
            return {"p_correct": 0.0, "marked_program": encode_loc(program, rec.loc)}
        return {"p_correct": self.unknown_score, "marked_program": None}

    def refine(self, body: dict) -> dict:
        program = body["program"]
        rec = self.incorrect.get(program)
        try:
            clean, span = decode_loc(body.get("marked_program") or "")
        except LocCodecError:
            clean, span = None, None
        if rec is not None and clean == program and span == rec.loc:
            return {"program": rec.program_correct}
        return {"program": program}


class MockServer:
    """Threaded server on ``host:port`` (port 0 picks a free one).

    ``model`` and ``vocab`` back ``/v1/next`` and ``/v1/vocab``; ``critic``
    and ``refine`` back the other two routes. Missing backends answer 404.
    ``fail_next`` makes the next N requests answer HTTP 503 and ``delay``
    sleeps before every answer, for exercising client error paths.
    """

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        model=None,
        vocab=None,
        critic: Optional[Handler] = None,
        refine: Optional[Handler] = None,
    ):
        self.model = model
        self.vocab = vocab
        self.routes: dict[tuple[str, str], Handler] = {}
        if vocab is not None:
            self.routes[("GET", "/v1/vocab")] = lambda body: {"tokens": list(vocab.tokens)}
        if model is not None:
            self.routes[("POST", "/v1/next")] = self._next
        if critic is not None:
            self.routes[("POST", "/v1/critic")] = critic
        if refine is not None:
            self.routes[("POST", "/v1/refine")] = refine
        self.fail_next = 0
        self.delay = 0.0
        self.requests = 0
        self._lock = threading.Lock()
        self._httpd = ThreadingHTTPServer((host, port), self._handler_class())
        self._httpd.daemon_threads = True
        self._thread: Optional[threading.Thread] = None

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def _next(self, body: dict) -> dict:
        context = body["context"]
        if not isinstance(context, list) or not all(isinstance(i, int) for i in context):
            raise ValueError("context must be a list of token ids")
        dist = self.model.next_distribution(context)
        return {"probs": [float(x) for x in getattr(dist, "probs", dist)]}

    def _handler_class(self):
        server = self

        class _Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt, *args):  # keep test output quiet
                pass

            def _send(self, status: int, payload: dict):
                data = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def _dispatch(self, method: str):
                with server._lock:
                    server.requests += 1
                    failing = server.fail_next > 0
                    if failing:
                        server.fail_next -= 1
                if server.delay:
                    time.sleep(server.delay)
                if failing:
                    return self._send(503, {"error": "injected failure"})
                route = server.routes.get((method, self.path))
                if route is None:
                    return self._send(404, {"error": f"no route {method} {self.path}"})
                body = {}
                if method == "POST":
                    length = int(self.headers.get("Content-Length") or 0)
                    try:
                        body = json.loads(self.rfile.read(length) or b"{}")
                    except json.JSONDecodeError as e:
                        return self._send(400, {"error": f"invalid JSON: {e}"})
                    if not isinstance(body, dict):
                        return self._send(400, {"error": "body must be a JSON object"})
                try:
                    return self._send(200, route(body))
                except (KeyError, TypeError, ValueError) as e:
                    return self._send(400, {"error": f"bad request: {e}"})

            def do_GET(self):
                self._dispatch("GET")

            def do_POST(self):
                self._dispatch("POST")

        return _Handler

    def start(self) -> "MockServer":
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self):
        self._httpd.serve_forever()

    def stop(self):
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join()

    def __enter__(self) -> "MockServer":
        return self.start()

    def __exit__(self, *exc):
        self.stop()
