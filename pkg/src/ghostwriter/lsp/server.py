"""Threaded JSON-RPC language server around the orchestrator core.

One processing thread owns the orchestrator; a reader thread feeds it
parsed messages and backend workers feed it results, so document events
apply in order while backend calls for different documents overlap. The
only meaningful request is textDocument/inlineCompletions; suggestions for
a document are superseded by newer activity and answered with empty items.
"""

from __future__ import annotations

import logging
import queue
import threading
from typing import Callable, Optional

import requests

from .. import __version__
from ..telemetry import EventLog
from .orchestrator import Orchestrator, OrchestratorConfig
from .documents import VersionRegression
from .rpc import (
    FramingError,
    INTERNAL_ERROR,
    METHOD_NOT_FOUND,
    MessageWriter,
    read_message,
)

logger = logging.getLogger(__name__)

BackendCall = Callable[[dict], dict]


def http_backend_call(service_url: str, timeout_s: float = 10.0) -> BackendCall:
    """Completion poster against the inference service wire format."""
    session = requests.Session()
    url = service_url.rstrip("/") + "/v1/completion"

    def call(payload: dict) -> dict:
        response = session.post(url, json=payload, timeout=timeout_s)
        response.raise_for_status()
        return response.json()

    return call


class LspServer:
    def __init__(
        self,
        reader,
        writer,
        backend_call: BackendCall,
        clock=None,
        telemetry: Optional[EventLog] = None,
        config: Optional[OrchestratorConfig] = None,
    ):
        self.core = Orchestrator(clock=clock, telemetry=telemetry, config=config)
        self.backend_call = backend_call
        self._reader = reader
        self._writer = MessageWriter(writer)
        self._queue: queue.Queue = queue.Queue()
        self._rpc_ids: dict[str, object] = {}
        self._running = False
        self._request_seq = 0

    # -- lifecycle ----------------------------------------------------------

    def run(self) -> None:
        self._running = True
        reader_thread = threading.Thread(target=self._read_loop, daemon=True)
        reader_thread.start()
        while self._running:
            timeout = self._timeout_to_next_deadline()
            try:
                item = self._queue.get(timeout=timeout)
            except queue.Empty:
                item = None
            if item is not None:
                kind, payload = item
                if kind == "msg":
                    self._handle_message(payload)
                elif kind == "deliver":
                    request_id, response, is_error = payload
                    self._flush_resolution(self.core.deliver(request_id, response, is_error))
                elif kind == "eof":
                    self._running = False
            self._poll_due()

    def _read_loop(self) -> None:
        while True:
            try:
                message = read_message(self._reader)
            except FramingError as exc:
                logger.error("dropping unreadable frame: %s", exc)
                continue
            except (OSError, ValueError):
                message = None
            if message is None:
                self._queue.put(("eof", None))
                return
            self._queue.put(("msg", message))

    def _timeout_to_next_deadline(self) -> Optional[float]:
        deadline = self.core.next_deadline()
        if deadline is None:
            return None
        return max(0.0, (deadline - self.core.clock.now_ms()) / 1000.0)

    # -- dispatch -------------------------------------------------------------

    def _poll_due(self) -> None:
        result = self.core.poll()
        for request_id, items in result.resolved:
            self._respond_items(request_id, items)
        for order in result.dispatches:
            worker = threading.Thread(
                target=self._call_backend, args=(order,), daemon=True
            )
            worker.start()

    def _call_backend(self, order) -> None:
        try:
            response = self.backend_call(order.payload)
            self._queue.put(("deliver", (order.request_id, response, False)))
        except Exception as exc:
            logger.warning("backend call failed for %s: %s", order.request_id, exc)
            self._queue.put(("deliver", (order.request_id, None, True)))

    def _flush_resolution(self, resolution) -> None:
        if resolution is None:
            return
        request_id, items = resolution
        self._respond_items(request_id, items)

    def _respond_items(self, request_id: str, items: list) -> None:
        rpc_id = self._rpc_ids.pop(request_id, None)
        if rpc_id is None:
            return
        self._writer.respond(rpc_id, {"items": items})

    # -- message handling -----------------------------------------------------

    def _handle_message(self, message: dict) -> None:
        method = message.get("method")
        msg_id = message.get("id")
        params = message.get("params") or {}
        try:
            if method == "initialize":
                self._writer.respond(
                    msg_id,
                    {
                        "capabilities": {
                            "textDocumentSync": {"openClose": True, "change": 2}
                        },
                        "serverInfo": {"name": "gw-lsp", "version": __version__},
                    },
                )
            elif method == "initialized":
                pass
            elif method == "shutdown":
                self._writer.respond(msg_id, None)
            elif method == "exit":
                self._running = False
            elif method == "textDocument/didOpen":
                doc = params["textDocument"]
                self.core.did_open(
                    doc["uri"], doc.get("languageId", ""), doc.get("text", ""), doc.get("version", 0)
                )
            elif method == "textDocument/didChange":
                doc = params["textDocument"]
                try:
                    cancelled = self.core.did_change(
                        doc["uri"], params.get("contentChanges", []), doc.get("version", 0)
                    )
                except VersionRegression as exc:
                    logger.warning("%s", exc)
                    cancelled = []
                for request_id in cancelled:
                    self._respond_items(request_id, [])
            elif method == "textDocument/didClose":
                for request_id in self.core.did_close(params["textDocument"]["uri"]):
                    self._respond_items(request_id, [])
            elif method == "textDocument/inlineCompletions":
                self._handle_inline(msg_id, params)
            elif method == "cc/received":
                self.core.cc_received(
                    params.get("requestId", ""), params.get("clientTimestampMs", 0)
                )
            elif method == "cc/accepted":
                self.core.cc_accepted(params.get("requestId", ""))
            elif msg_id is not None:
                self._writer.respond_error(
                    msg_id, METHOD_NOT_FOUND, f"unsupported method: {method}"
                )
        except Exception:
            logger.exception("error handling %s", method)
            if msg_id is not None and method != "textDocument/inlineCompletions":
                self._writer.respond_error(msg_id, INTERNAL_ERROR, "internal error")
            elif msg_id is not None:
                # completion failures surface as an empty item list, never errors
                self._writer.respond(msg_id, {"items": []})

    def _handle_inline(self, msg_id, params: dict) -> None:
        uri = params["textDocument"]["uri"]
        position = params.get("position", {})
        self._request_seq += 1
        request_id = f"r{self._request_seq}"
        if msg_id is not None:
            self._rpc_ids[request_id] = msg_id
        decision = self.core.inline_completions(
            request_id, uri, position.get("line", 0), position.get("character", 0)
        )
        for stale_id in decision.cancelled:
            self._respond_items(stale_id, [])
        if decision.resolved:
            self._respond_items(request_id, decision.items)


def run_stdio(
    backend_call: BackendCall,
    telemetry: Optional[EventLog] = None,
    config: Optional[OrchestratorConfig] = None,
) -> None:
    import sys

    server = LspServer(
        sys.stdin.buffer, sys.stdout.buffer, backend_call, telemetry=telemetry, config=config
    )
    server.run()
