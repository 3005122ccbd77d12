"""Latency-oriented HTTP inference service.

POST /v1/completion takes a cursor context, builds the masked model input,
decodes one suggestion, and returns it with timing. Each request is handled
the moment it arrives on its own thread -- there is no request batching, so
a slow generation never delays an independent request. GET /healthz answers
without touching the generation path.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from .backends import (
    BackendUnavailable,
    CompletionBackend,
    DecodeParams,
    EmptyVocabulary,
    GenerationTimeout,
    UnknownSample,
)
from .prompt import (
    DEFAULT_METADATA_FIELDS,
    BudgetTooSmall,
    CursorContext,
    build_inference_input,
)
from .tokenization import DEFAULT_TRIGGERS, TriggerSet

logger = logging.getLogger(__name__)

MAX_BODY_BYTES = 1 << 20  # 1 MiB request cap
DEFAULT_DEADLINE_MS = 1000


@dataclass
class ServiceConfig:
    budget: int = 2048
    split: float = 0.7
    deadline_ms: int = DEFAULT_DEADLINE_MS
    params: DecodeParams = DecodeParams()
    triggers: TriggerSet = DEFAULT_TRIGGERS
    metadata_fields: tuple = DEFAULT_METADATA_FIELDS


class InferenceService:
    """Request pipeline around an immutable backend; stateless across calls."""

    def __init__(self, backend: CompletionBackend, config: Optional[ServiceConfig] = None):
        self.backend = backend
        self.config = config or ServiceConfig()
        self._fingerprint = backend.fingerprint()
        self._degraded = False

    def handle_completion(self, payload) -> tuple[int, dict]:
        """Returns (http_status, response_body)."""
        error = self._validate(payload)
        if error is not None:
            return 400, {"error": error}
        ctx = CursorContext(
            file_path=payload.get("file_path", ""),
            language=payload["language"],
            before=payload.get("before", ""),
            after=payload.get("after", ""),
            kernel=payload.get("kernel"),
        )
        request_id = payload["request_id"]
        try:
            prompt = build_inference_input(
                ctx,
                budget=self.config.budget,
                split=self.config.split,
                triggers=self.config.triggers,
                metadata_fields=self.config.metadata_fields,
            )
        except BudgetTooSmall as exc:
            return 400, {"error": str(exc)}
        started = time.monotonic()
        deadline_s = started + self.config.deadline_ms / 1000.0
        try:
            completion = self.backend.generate(
                prompt,
                self.config.params,
                ctx=ctx,
                request_id=request_id,
                deadline_s=deadline_s,
            )
        except GenerationTimeout:
            return 504, {"error": "generation deadline exceeded", "request_id": request_id}
        except (BackendUnavailable, EmptyVocabulary) as exc:
            self._degraded = True
            return 503, {"error": str(exc), "request_id": request_id}
        except UnknownSample as exc:
            return 404, {"error": f"unknown sample: {exc}", "request_id": request_id}
        latency_ms = int((time.monotonic() - started) * 1000)
        self._degraded = False
        if latency_ms > self.config.deadline_ms:
            return 504, {"error": "generation deadline exceeded", "request_id": request_id}
        return 200, {
            "request_id": request_id,
            "completion_text": completion.text,
            "strategy": completion.strategy,
            "model_latency_ms": latency_ms,
            "input_tokens": prompt.input_token_count,
        }

    def healthcheck(self) -> dict:
        return {
            "status": "degraded" if self._degraded else "ok",
            "backend_id": self.backend.backend_id,
            "model_fingerprint": self._fingerprint,
        }

    @staticmethod
    def _validate(payload) -> Optional[str]:
        if not isinstance(payload, dict):
            return "body must be a JSON object"
        language = payload.get("language")
        if not isinstance(language, str) or not language:
            return "language must be a non-empty string"
        request_id = payload.get("request_id")
        if not isinstance(request_id, str) or not request_id:
            return "request_id must be a non-empty string"
        for name in ("before", "after"):
            if not isinstance(payload.get(name, ""), str):
                return f"{name} must be a string"
        if not isinstance(payload.get("file_path", ""), str):
            return "file_path must be a string"
        kernel = payload.get("kernel")
        if kernel is not None and not isinstance(kernel, str):
            return "kernel must be a string"
        return None


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    service: InferenceService = None  # set by make_server

    def do_GET(self):
        if self.path == "/healthz":
            self._send(200, self.service.healthcheck())
        else:
            self._send(404, {"error": "not found"})

    def do_POST(self):
        if self.path != "/v1/completion":
            self._send(404, {"error": "not found"})
            return
        length = self.headers.get("Content-Length")
        if length is None:
            self.close_connection = True
            self._send(411, {"error": "Content-Length required"})
            return
        length = int(length)
        if length > MAX_BODY_BYTES:
            # body stays unread; the connection cannot be reused
            self.close_connection = True
            self._send(413, {"error": f"body exceeds {MAX_BODY_BYTES} bytes"})
            return
        body = self.rfile.read(length)
        try:
            payload = json.loads(body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            self._send(400, {"error": "body is not valid JSON"})
            return
        try:
            status, response = self.service.handle_completion(payload)
        except Exception:
            logger.exception("completion handler crashed")
            status, response = 500, {"error": "internal error"}
        self._send(status, response)

    def _send(self, status: int, body: dict) -> None:
        data = json.dumps(body, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, format, *args):
        logger.debug("%s %s", self.address_string(), format % args)


def make_server(service: InferenceService, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


class ServiceRunner:
    """Runs the HTTP server on a background thread; for tests and embedding."""

    def __init__(self, service: InferenceService, host: str = "127.0.0.1", port: int = 0):
        self.server = make_server(service, host, port)
        self._thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self.server.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self):
        self._thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


def serve_forever(service: InferenceService, host: str, port: int) -> None:
    server = make_server(service, host, port)
    logger.info("listening on %s:%d", *server.server_address[:2])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
