"""A tiny in-process answer server for exercising the real HTTP path."""

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class StubAnswerServer:
    """Serves POST /v1/answer from a contains-rule script.

    Rules are checked in order; the first whose ``question_contains`` and
    ``context_contains`` substrings both appear wins.  Unmatched requests get
    the script's default answer.  Malformed bodies get a 400.
    """

    def __init__(self, script: dict):
        self.script = script
        self.request_count = 0
        self.fail_first = 0  # serve this many 503s before behaving
        self._lock = threading.Lock()
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                with outer._lock:
                    outer.request_count += 1
                    should_fail = outer.fail_first > 0
                    if should_fail:
                        outer.fail_first -= 1
                if should_fail:
                    self._reply(503, {"error": "warming up"})
                    return
                if self.path != "/v1/answer":
                    self._reply(404, {"error": "unknown path"})
                    return
                try:
                    length = int(self.headers.get("Content-Length", "0"))
                    body = json.loads(self.rfile.read(length).decode("utf-8"))
                    question = body["question"]
                    context = body["context"]
                except (ValueError, KeyError, UnicodeDecodeError):
                    self._reply(400, {"error": "malformed request"})
                    return
                for rule in outer.script.get("rules", []):
                    if (
                        rule["question_contains"] in question
                        and rule["context_contains"] in context
                    ):
                        self._reply(200, {"answer": rule["answer"]})
                        return
                self._reply(200, {"answer": outer.script.get("default", "not relevant")})

            def _reply(self, status, payload):
                data = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address
        return f"http://{host}:{port}"

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self._server.shutdown()
        self._server.server_close()
        self._thread.join(timeout=5)
