"""Static HTTP server for serving an app corpus to a live browser.

GET-only, with caching disabled on every response so repeated page loads
always fetch the working copy from disk.
"""

from __future__ import annotations

import threading
from functools import partial
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path


class _Handler(SimpleHTTPRequestHandler):
    def end_headers(self):
        self.send_header("Cache-Control", "no-store")
        super().end_headers()

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass  # keep evaluation output clean


class StaticFileServer:
    """Serves a directory on 127.0.0.1; port 0 picks an ephemeral port."""

    def __init__(self, root_dir: Path | str, host: str = "127.0.0.1", port: int = 0):
        self.root_dir = str(root_dir)
        self._server = ThreadingHTTPServer(
            (host, port), partial(_Handler, directory=self.root_dir)
        )
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "StaticFileServer":
        self._thread = threading.Thread(
            target=self._server.serve_forever, name="tracetrim-fileserver", daemon=True
        )
        self._thread.start()
        return self

    def stop(self):
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc_info):
        self.stop()
