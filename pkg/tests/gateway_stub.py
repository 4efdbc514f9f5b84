"""Local HTTP stand-in for the model gateway."""

import json
import threading
import time
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


def walk_then_stop(request, hits):
    """Moves to the alphabetically last candidate twice, then stops."""
    moves = sum(1 for h in request["history"])
    if moves >= 2 or not request["candidates"]:
        return {"action": "stop", "rationale": "close enough"}
    return {"action": "move", "target_id": sorted(c["id"] for c in request["candidates"])[-1]}


@contextmanager
def serve(respond=walk_then_stop, status=200, delay=0.0, token=None):
    """Yield (url, log). ``respond(request, hits)`` builds the JSON answer;
    it may return bytes to send a raw body."""
    log = []

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):
            body = self.rfile.read(int(self.headers["Content-Length"]))
            request = json.loads(body)
            log.append({"request": request, "auth": self.headers.get("Authorization")})
            if delay:
                time.sleep(delay)
            if token is not None and self.headers.get("Authorization") != f"Bearer {token}":
                self.send_response(401)
                self.end_headers()
                return
            if status != 200:
                self.send_response(status)
                self.end_headers()
                return
            answer = respond(request, len(log))
            data = answer if isinstance(answer, bytes) else json.dumps(answer).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            try:
                self.wfile.write(data)
            except (BrokenPipeError, ConnectionResetError):
                pass

        def log_message(self, *args):
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    server.daemon_threads = True
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}/act", log
    finally:
        server.shutdown()
        server.server_close()
