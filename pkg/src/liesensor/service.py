"""HTTP verification service.

Endpoints (JSON over HTTP/1.1):
  POST /api/v1/verify                  {session_id, text, image_pgm_b64}
  GET  /api/v1/sessions/{id}/history   ordered verification results
  GET  /api/v1/health                  loaded model identifiers

Sessions are in-memory, created on first use, with lock-guarded appends so
concurrent verifies into one session never lose or duplicate message ids.
Requests are handled on one thread each; loaded models are never mutated.
"""

from __future__ import annotations

import base64
import binascii
import json
import logging
import os
import threading
import uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from liesensor.cnn.network import Network
from liesensor.cnn.weights_io import load_weights
from liesensor.errors import DataFormatError, LieSensorError
from liesensor.textclf.bundle import TextModelBundle, load_bundle
from liesensor.verifier import VerificationResult, verify_message
from liesensor.vision.cascade import Cascade, DetectParams, load_cascade
from liesensor.vision.image import read_pgm_bytes

log = logging.getLogger(__name__)

ENV_PREFIX = "LIESENSOR_"


@dataclass
class ServiceConfig:
    bind_address: str = "127.0.0.1"
    port: int = 8770
    model_bundle: str = ""
    cnn_weights: str = ""
    cascade: str = ""
    max_image_bytes: int = 1_000_000
    request_timeout: float = 30.0
    min_neighbors: int = 2

    _INT_FIELDS = ("port", "max_image_bytes", "min_neighbors")
    _FLOAT_FIELDS = ("request_timeout",)

    @classmethod
    def from_file(cls, path, env: Optional[dict] = None) -> "ServiceConfig":
        """key=value lines; environment variables LIESENSOR_<KEY> override."""
        values: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise DataFormatError(f"{path} line {lineno}: expected key=value")
                key, value = (part.strip() for part in line.split("=", 1))
                values[key] = value
        env = os.environ if env is None else env
        config = cls()
        for name in config.__dataclass_fields__:
            override = env.get(ENV_PREFIX + name.upper())
            raw = override if override is not None else values.get(name)
            if raw is None:
                continue
            if name in cls._INT_FIELDS:
                setattr(config, name, int(raw))
            elif name in cls._FLOAT_FIELDS:
                setattr(config, name, float(raw))
            else:
                setattr(config, name, raw)
        unknown = set(values) - set(config.__dataclass_fields__)
        if unknown:
            raise DataFormatError(f"{path}: unknown config key(s) {sorted(unknown)}")
        return config


class SessionStore:
    """Append-only per-session logs with atomic, uniquely-numbered appends."""

    def __init__(self):
        self._lock = threading.Lock()
        self._sessions: dict[str, list[VerificationResult]] = {}
        self._counters: dict[str, int] = {}

    def next_message_id(self, session_id: str) -> str:
        with self._lock:
            n = self._counters.get(session_id, 0) + 1
            self._counters[session_id] = n
            return f"{session_id}-{n:06d}"

    def append(self, session_id: str, result: VerificationResult) -> None:
        with self._lock:
            self._sessions.setdefault(session_id, []).append(result)

    def history(self, session_id: str) -> list[VerificationResult]:
        with self._lock:
            return list(self._sessions.get(session_id, []))


@dataclass
class ServiceState:
    bundle: Optional[TextModelBundle] = None
    network: Optional[Network] = None
    cascade: Optional[Cascade] = None
    config: ServiceConfig = field(default_factory=ServiceConfig)
    sessions: SessionStore = field(default_factory=SessionStore)

    @property
    def ready(self) -> bool:
        return self.bundle is not None and self.network is not None and self.cascade is not None

    @classmethod
    def load(cls, config: ServiceConfig) -> "ServiceState":
        """Load every referenced artifact; any failure aborts startup."""
        bundle = load_bundle(config.model_bundle)
        network = load_weights(config.cnn_weights)
        cascade = load_cascade(config.cascade)
        return cls(bundle=bundle, network=network, cascade=cascade, config=config)


class _ApiError(Exception):
    def __init__(self, status: int, code: str, detail: str = ""):
        super().__init__(detail or code)
        self.status = status
        self.code = code
        self.detail = detail


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    state: ServiceState  # injected by make_server

    # --- plumbing -------------------------------------------------------
    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, code: str, detail: str = "") -> None:
        self._send_json(status, {"error": code, "detail": detail})

    # --- routing --------------------------------------------------------
    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        try:
            if self.path == "/api/v1/health":
                self._handle_health()
            elif self.path.startswith("/api/v1/sessions/") and self.path.endswith("/history"):
                session_id = self.path[len("/api/v1/sessions/") : -len("/history")].strip("/")
                self._handle_history(session_id)
            else:
                self._error(404, "not_found", self.path)
        except Exception:
            self._internal_error()

    def do_POST(self):
        try:
            if self.path == "/api/v1/verify":
                self._handle_verify()
            else:
                self._error(404, "not_found", self.path)
        except _ApiError as exc:
            self._error(exc.status, exc.code, exc.detail)
        except Exception:
            self._internal_error()

    def _internal_error(self):
        error_id = uuid.uuid4().hex[:12]
        log.exception("internal error %s on %s", error_id, self.path)
        try:
            self._error(500, "internal_error", f"error id {error_id}")
        except Exception:
            pass

    # --- handlers -------------------------------------------------------
    def _handle_health(self):
        if not self.state.ready:
            self._error(503, "not_ready", "models are not loaded")
            return
        self._send_json(
            200,
            {
                "status": "ok",
                "model_versions": {
                    "bundle": self.state.bundle.version,
                    "bundle_model": self.state.bundle.model_kind,
                    "cascade_stages": self.state.cascade.n_stages,
                },
            },
        )

    def _handle_history(self, session_id: str):
        results = self.state.sessions.history(session_id)
        self._send_json(200, {"session_id": session_id, "results": [r.to_dict() for r in results]})

    def _read_body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        if length <= 0:
            raise _ApiError(400, "bad_request", "missing request body")
        return self.rfile.read(length)

    def _handle_verify(self):
        if not self.state.ready:
            raise _ApiError(503, "not_ready", "models are not loaded")
        try:
            payload = json.loads(self._read_body().decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise _ApiError(400, "bad_json", str(exc)) from exc
        if not isinstance(payload, dict):
            raise _ApiError(400, "bad_request", "body must be a JSON object")
        session_id = str(payload.get("session_id") or "").strip() or "default"
        text = payload.get("text") or ""
        if not isinstance(text, str):
            raise _ApiError(400, "bad_request", "text must be a string")
        image_b64 = payload.get("image_pgm_b64") or ""
        if not isinstance(image_b64, str):
            raise _ApiError(400, "bad_request", "image_pgm_b64 must be a string")
        if not text.strip() and not image_b64:
            raise _ApiError(422, "empty_request", "both text and image are empty")
        image = None
        if image_b64:
            try:
                raw = base64.b64decode(image_b64, validate=True)
            except (binascii.Error, ValueError) as exc:
                raise _ApiError(400, "bad_image_encoding", str(exc)) from exc
            if len(raw) > self.state.config.max_image_bytes:
                raise _ApiError(
                    413, "image_too_large",
                    f"{len(raw)} bytes exceeds limit {self.state.config.max_image_bytes}",
                )
            try:
                image = read_pgm_bytes(raw)
            except DataFormatError as exc:
                raise _ApiError(400, "bad_pgm", str(exc)) from exc
        message_id = self.state.sessions.next_message_id(session_id)
        try:
            result = verify_message(
                text=text,
                image=image,
                bundle=self.state.bundle,
                network=self.state.network,
                cascade=self.state.cascade,
                detect_params=DetectParams(min_neighbors=self.state.config.min_neighbors),
                message_id=message_id,
            )
        except LieSensorError as exc:
            raise _ApiError(500, "verification_failed", str(exc)) from exc
        self.state.sessions.append(session_id, result)
        response = result.to_dict()
        response["session_id"] = session_id
        self._send_json(200, response)


def make_server(state: ServiceState) -> ThreadingHTTPServer:
    """Threaded server bound per the config; caller runs serve_forever()."""
    handler = type("BoundHandler", (_Handler,), {"state": state})
    server = ThreadingHTTPServer((state.config.bind_address, state.config.port), handler)
    server.daemon_threads = True
    if state.config.request_timeout:
        handler.timeout = state.config.request_timeout
    return server


def serve(config: ServiceConfig) -> None:
    state = ServiceState.load(config)
    server = make_server(state)
    host, port = server.server_address[:2]
    log.info("verification service listening on %s:%d", host, port)
    try:
        server.serve_forever()
    finally:
        server.server_close()
