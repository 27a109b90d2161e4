"""Minimal threaded HTTP front end: POST /ask and GET /health."""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .errors import EmptyQuestion
from .pipeline import System, ask


def make_server(system: System, host: str, port: int) -> ThreadingHTTPServer:
    class Handler(BaseHTTPRequestHandler):
        def _send(self, status: int, payload: dict):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_GET(self):
            if self.path == "/health":
                self._send(200, {"status": "ok"})
            else:
                self._send(404, {"error": "not found"})

        def do_POST(self):
            if self.path != "/ask":
                self._send(404, {"error": "not found"})
                return
            length = int(self.headers.get("Content-Length", 0))
            try:
                doc = json.loads(self.rfile.read(length).decode("utf-8"))
                question = doc.get("question", "")
            except (ValueError, UnicodeDecodeError):
                self._send(400, {"error": "invalid JSON body"})
                return
            try:
                response = ask(system, question)
            except EmptyQuestion:
                self._send(400, {"error": "question is empty"})
                return
            self._send(200, response.to_dict())

        def log_message(self, fmt, *args):  # quiet by default
            pass

    return ThreadingHTTPServer((host, port), Handler)


def serve(system: System, addr: str) -> None:
    host, _, port = addr.rpartition(":")
    server = make_server(system, host or "127.0.0.1", int(port))
    try:
        server.serve_forever()
    finally:
        server.server_close()
