"""Live-browser evaluation over the remote-debugging protocol.

Talks to a local browser's debug endpoint (host:port) via its WebSocket
protocol: opens a tab, serves the working copy over HTTP with caching
disabled, navigates, streams a trace, polls the document for the load
sentinel, and captures a PNG screenshot. Used by the demo-app smoke test;
the sim harness covers everything else deterministically.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import socket
import struct
import time
import urllib.error
import urllib.request
from urllib.parse import urlsplit

from .correctness import Screenshot
from .errors import HarnessUnavailable
from .fileserver import StaticFileServer
from .harness import AppState, HarnessResult
from .trace import parse_trace

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
_TRACE_CATEGORIES = (
    "devtools.timeline,disabled-by-default-devtools.timeline,"
    "v8.execute,blink.user_timing"
)
SENTINEL_POLL_MS = 50.0


def _accept_key(key: str) -> str:
    digest = hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def encode_frame(payload: bytes, opcode: int = 0x1) -> bytes:
    """Encode one masked client frame (FIN set, no extensions)."""
    header = bytearray([0x80 | opcode])
    length = len(payload)
    if length < 126:
        header.append(0x80 | length)
    elif length < 1 << 16:
        header.append(0x80 | 126)
        header.extend(struct.pack(">H", length))
    else:
        header.append(0x80 | 127)
        header.extend(struct.pack(">Q", length))
    mask = os.urandom(4)
    header.extend(mask)
    masked = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return bytes(header) + masked


class _SocketReader:
    def __init__(self, sock: socket.socket):
        self.sock = sock
        self.buffer = b""

    def read_exact(self, count: int) -> bytes:
        while len(self.buffer) < count:
            chunk = self.sock.recv(65536)
            if not chunk:
                raise HarnessUnavailable("browser closed the debug connection")
            self.buffer += chunk
        data, self.buffer = self.buffer[:count], self.buffer[count:]
        return data

    def read_until(self, marker: bytes) -> bytes:
        while marker not in self.buffer:
            chunk = self.sock.recv(65536)
            if not chunk:
                raise HarnessUnavailable("connection closed during handshake")
            self.buffer += chunk
        index = self.buffer.index(marker) + len(marker)
        data, self.buffer = self.buffer[:index], self.buffer[index:]
        return data


def read_frame(reader: _SocketReader) -> tuple[bool, int, bytes]:
    """Read one server frame: (fin, opcode, payload)."""
    first, second = reader.read_exact(2)
    fin = bool(first & 0x80)
    opcode = first & 0x0F
    masked = second & 0x80
    length = second & 0x7F
    if length == 126:
        (length,) = struct.unpack(">H", reader.read_exact(2))
    elif length == 127:
        (length,) = struct.unpack(">Q", reader.read_exact(8))
    mask = reader.read_exact(4) if masked else b""
    payload = reader.read_exact(length)
    if mask:
        payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return fin, opcode, payload


class _WebSocket:
    """Minimal synchronous WebSocket client for a local debug endpoint."""

    def __init__(self, url: str, timeout_s: float = 30.0):
        parts = urlsplit(url)
        host = parts.hostname or "127.0.0.1"
        port = parts.port or 80
        resource = parts.path or "/"
        if parts.query:
            resource += "?" + parts.query
        try:
            self.sock = socket.create_connection((host, port), timeout=timeout_s)
        except OSError as exc:
            raise HarnessUnavailable(f"cannot connect to {url}: {exc}") from exc
        self.reader = _SocketReader(self.sock)
        key = base64.b64encode(os.urandom(16)).decode("ascii")
        request = (
            f"GET {resource} HTTP/1.1\r\n"
            f"Host: {host}:{port}\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Key: {key}\r\n"
            "Sec-WebSocket-Version: 13\r\n\r\n"
        )
        self.sock.sendall(request.encode("ascii"))
        response = self.reader.read_until(b"\r\n\r\n").decode("latin-1")
        if " 101 " not in response.split("\r\n")[0]:
            raise HarnessUnavailable(f"handshake rejected: {response.splitlines()[0]}")
        expected = _accept_key(key)
        if f"sec-websocket-accept: {expected.lower()}" not in response.lower():
            raise HarnessUnavailable("handshake accept key mismatch")

    def send_text(self, text: str):
        self.sock.sendall(encode_frame(text.encode("utf-8"), opcode=0x1))

    def recv_text(self, deadline: float) -> str:
        fragments: list[bytes] = []
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise TimeoutError("websocket receive deadline exceeded")
            self.sock.settimeout(remaining)
            try:
                fin, opcode, payload = read_frame(self.reader)
            except socket.timeout as exc:
                raise TimeoutError("websocket receive timed out") from exc
            if opcode == 0x9:  # ping
                self.sock.sendall(encode_frame(payload, opcode=0xA))
                continue
            if opcode == 0x8:  # close
                raise HarnessUnavailable("browser closed the session")
            if opcode in (0x1, 0x2, 0x0):
                fragments.append(payload)
                if fin:
                    return b"".join(fragments).decode("utf-8")

    def close(self):
        try:
            self.sock.sendall(encode_frame(b"", opcode=0x8))
        except OSError:
            pass
        self.sock.close()


class _CdpSession:
    def __init__(self, ws_url: str):
        self.ws = _WebSocket(ws_url)
        self.next_id = 1
        self.events: list[dict] = []

    def call(self, method: str, params: dict | None = None, timeout_s: float = 30.0) -> dict:
        message_id = self.next_id
        self.next_id += 1
        self.ws.send_text(
            json.dumps({"id": message_id, "method": method, "params": params or {}})
        )
        deadline = time.monotonic() + timeout_s
        while True:
            message = json.loads(self.ws.recv_text(deadline))
            if message.get("id") == message_id:
                if "error" in message:
                    raise HarnessUnavailable(
                        f"{method} failed: {message['error'].get('message')}"
                    )
                return message.get("result", {})
            if "method" in message:
                self.events.append(message)

    def drain_until(self, method: str, timeout_s: float) -> None:
        deadline = time.monotonic() + timeout_s
        while True:
            if any(e.get("method") == method for e in self.events):
                return
            message = json.loads(self.ws.recv_text(deadline))
            if "method" in message:
                self.events.append(message)

    def close(self):
        self.ws.close()


class LiveHarness:
    """Evaluation backend driving a local browser; one evaluation at a time."""

    def __init__(self, endpoint: str = "127.0.0.1:9222"):
        self.endpoint = endpoint

    def _http(self, path: str, method: str = "GET") -> dict | list:
        url = f"http://{self.endpoint}{path}"
        request = urllib.request.Request(url, method=method)
        try:
            with urllib.request.urlopen(request, timeout=10) as response:
                return json.loads(response.read().decode("utf-8"))
        except (urllib.error.URLError, OSError) as exc:
            raise HarnessUnavailable(f"debug endpoint unreachable: {exc}") from exc

    def _new_tab(self) -> dict:
        try:
            return self._http("/json/new?about:blank", method="PUT")
        except HarnessUnavailable:
            return self._http("/json/new?about:blank", method="GET")

    def evaluate(self, app: AppState, timeout_ms: float) -> HarnessResult:
        """One page load: trace, sentinel poll, screenshot.

        wall_clock_ms covers the load phase (navigation to sentinel or
        deadline), so it stays within timeout_ms plus polling slack;
        trace collection and screenshot capture happen after the clock
        stops.
        """
        if timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")
        tab = self._new_tab()
        ws_url = tab.get("webSocketDebuggerUrl")
        if not ws_url:
            raise HarnessUnavailable("debug endpoint returned no webSocketDebuggerUrl")
        session = _CdpSession(ws_url)
        server = StaticFileServer(app.root_dir).start()
        loaded = False
        timed_out = False
        try:
            session.call("Page.enable")
            session.call("Runtime.enable")
            session.call(
                "Tracing.start",
                {"categories": _TRACE_CATEGORIES, "transferMode": "ReportEvents"},
            )
            started = time.monotonic()
            session.call("Page.navigate", {"url": f"{server.url}/{app.page}"})

            probe = (
                "!!(document.body && document.body.innerText.indexOf("
                + json.dumps(app.sentinel_text)
                + ") >= 0)"
            )
            deadline = started + timeout_ms / 1000.0
            while time.monotonic() < deadline:
                result = session.call(
                    "Runtime.evaluate",
                    {"expression": probe, "returnByValue": True},
                )
                if result.get("result", {}).get("value") is True:
                    loaded = True
                    break
                time.sleep(SENTINEL_POLL_MS / 1000.0)
            else:
                timed_out = True
            load_phase_ms = (time.monotonic() - started) * 1000.0

            session.call("Tracing.end")
            session.drain_until("Tracing.tracingComplete", timeout_s=30.0)
            raw_events = []
            for event in session.events:
                if event.get("method") == "Tracing.dataCollected":
                    raw_events.extend(event.get("params", {}).get("value", []))

            shot = session.call("Page.captureScreenshot", {"format": "png"})
            screenshot = Screenshot.from_png(base64.b64decode(shot["data"]))
        finally:
            session.close()
            server.stop()
            tab_id = tab.get("id")
            if tab_id:
                try:
                    self._http(f"/json/close/{tab_id}")
                except HarnessUnavailable:
                    pass

        parsed = parse_trace(json.dumps({"traceEvents": raw_events}), strict=False)
        return HarnessResult(
            events=parsed.events,
            screenshot=screenshot,
            loaded=loaded and not timed_out,
            timed_out=timed_out,
            wall_clock_ms=load_phase_ms,
        )
