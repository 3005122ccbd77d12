"""JSON-RPC 2.0 message framing with Content-Length headers over byte streams."""

from __future__ import annotations

import json
import threading
from typing import Optional

PARSE_ERROR = -32700
METHOD_NOT_FOUND = -32601
INVALID_PARAMS = -32602
INTERNAL_ERROR = -32603


class FramingError(ValueError):
    """Stream contents do not form a valid framed message."""


def read_message(stream) -> Optional[dict]:
    """Read one framed message; None on clean EOF."""
    content_length = None
    while True:
        line = stream.readline()
        if not line:
            return None
        line = line.strip()
        if not line:
            break
        if line.lower().startswith(b"content-length:"):
            try:
                content_length = int(line.split(b":", 1)[1].strip())
            except ValueError as exc:
                raise FramingError(f"bad Content-Length header: {line!r}") from exc
    if content_length is None:
        raise FramingError("missing Content-Length header")
    body = b""
    while len(body) < content_length:
        chunk = stream.read(content_length - len(body))
        if not chunk:
            raise FramingError("stream closed mid-message")
        body += chunk
    try:
        return json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FramingError(f"unparseable message body: {exc}") from exc


class MessageWriter:
    """Serializes framed writes from concurrent threads."""

    def __init__(self, stream):
        self._stream = stream
        self._lock = threading.Lock()

    def write(self, message: dict) -> None:
        body = json.dumps(message, ensure_ascii=False).encode("utf-8")
        frame = b"Content-Length: %d\r\n\r\n" % len(body) + body
        with self._lock:
            self._stream.write(frame)
            self._stream.flush()

    def respond(self, msg_id, result) -> None:
        self.write({"jsonrpc": "2.0", "id": msg_id, "result": result})

    def respond_error(self, msg_id, code: int, message: str) -> None:
        self.write(
            {"jsonrpc": "2.0", "id": msg_id, "error": {"code": code, "message": message}}
        )

    def notify(self, method: str, params) -> None:
        self.write({"jsonrpc": "2.0", "method": method, "params": params})
