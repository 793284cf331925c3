"""HTTP service exposing bundles, sessions and event streams.

JSON API:

  GET  /api/profiles                      profile cards for the loaded bundles
  POST /api/sessions                      {"bundle_id": ...} -> 201 {"session_id"}
  POST /api/sessions/{id}/messages        {"text": ...} -> 202 (409 while busy)
  GET  /api/sessions/{id}/events?after=N  long-poll (optional &wait=secs), or a
                                          server-sent event stream when the
                                          client sends Accept: text/event-stream
  GET  /                                  web chat assets

Message handling is serialized per session: a second post while one is being
processed returns 409. Event logs are append-only, so reads are idempotent:
repeating a request with the same `after` redelivers the same events.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

from .bundle import AgentBundle, read_bundle
from .errors import PersonaForgeError
from .runtime import (
    ChatSession,
    GenerationAdapter,
    SessionEvent,
    create_session,
    emit_error,
    step,
)

logger = logging.getLogger(__name__)

DEFAULT_BIND = "127.0.0.1:8080"
DEFAULT_TTL_SECS = 1800.0
LONG_POLL_MAX_WAIT = 30.0

ENV_BIND_ADDR = "PF_BIND_ADDR"
ENV_BUNDLE_DIR = "PF_BUNDLE_DIR"
ENV_SESSION_TTL = "PF_SESSION_TTL_SECS"
ENV_WEBCHAT_DIR = "PF_WEBCHAT_DIR"


@dataclass(frozen=True)
class ProfileCard:
    """One selectable entry in the profile picker."""

    bundle_id: str
    profile_label: str
    description: str
    avatar: str
    font_scale: float
    high_contrast: bool

    def to_json(self) -> dict:
        return {
            "bundle_id": self.bundle_id,
            "profile_label": self.profile_label,
            "description": self.description,
            "avatar": self.avatar,
            "font_scale": self.font_scale,
            "high_contrast": self.high_contrast,
        }


class SessionBusyError(PersonaForgeError):
    """A previous message for this session is still being processed."""


class UnknownResourceError(PersonaForgeError):
    pass


class _SessionSlot:
    def __init__(self, session: ChatSession):
        self.session = session
        self.lock = threading.Lock()
        self.changed = threading.Condition(self.lock)
        self.processing = False
        self.last_activity = time.monotonic()

    def touch(self) -> None:
        self.last_activity = time.monotonic()


class AgentService:
    """Bundle registry plus session bookkeeping, independent of HTTP."""

    def __init__(
        self,
        bundles: list[AgentBundle],
        adapter: Optional[GenerationAdapter] = None,
        ttl_secs: Optional[float] = None,
        assets_dir: Optional[str | Path] = None,
    ):
        self.bundles: dict[str, AgentBundle] = {}
        for bundle in bundles:
            self.bundles.setdefault(bundle.bundle_id, bundle)  # dedupe by digest
        self.adapter = adapter
        if ttl_secs is None:
            ttl_secs = float(os.environ.get(ENV_SESSION_TTL, DEFAULT_TTL_SECS))
        self.ttl_secs = ttl_secs
        if assets_dir is None:
            assets_dir = os.environ.get(ENV_WEBCHAT_DIR, "")
        self.assets_dir = Path(assets_dir) if assets_dir else None
        self._slots: dict[str, _SessionSlot] = {}
        self._registry_lock = threading.Lock()

    # -- sessions -----------------------------------------------------------

    def list_profiles(self) -> list[ProfileCard]:
        cards = []
        for bundle in self.bundles.values():
            features = bundle.directives.deterministic
            cards.append(
                ProfileCard(
                    bundle_id=bundle.bundle_id,
                    profile_label=bundle.profile_label,
                    description=(
                        f"{bundle.agent.name} personalized with "
                        f"{bundle.provenance.configuration}"
                    ),
                    avatar=features.avatar,
                    font_scale=features.text_style.font_scale,
                    high_contrast=features.text_style.high_contrast,
                )
            )
        return cards

    def create_session(self, bundle_id: str) -> str:
        self._evict_idle()
        bundle = self.bundles.get(bundle_id)
        if bundle is None:
            raise UnknownResourceError(f"unknown bundle: {bundle_id!r}")
        session = create_session(bundle, self.adapter)
        with self._registry_lock:
            self._slots[session.id] = _SessionSlot(session)
        return session.id

    def _slot(self, session_id: str) -> _SessionSlot:
        with self._registry_lock:
            slot = self._slots.get(session_id)
        if slot is None:
            raise UnknownResourceError(f"unknown session: {session_id!r}")
        return slot

    def post_message(self, session_id: str, text: str) -> None:
        """Accept one message; processing happens on a worker thread."""
        self._evict_idle()
        slot = self._slot(session_id)
        with slot.lock:
            if slot.processing:
                raise SessionBusyError("a previous message is still being processed")
            slot.processing = True
            slot.touch()
        worker = threading.Thread(
            target=self._process_message, args=(slot, text), daemon=True
        )
        worker.start()

    def _process_message(self, slot: _SessionSlot, text: str) -> None:
        try:
            events = step(slot.session, text, self.adapter)
            logger.debug("session %s: %d events", slot.session.id, len(events))
        except PersonaForgeError as exc:
            with slot.lock:
                emit_error(slot.session, str(exc))
        except Exception:
            logger.exception("unexpected failure while processing a message")
            with slot.lock:
                emit_error(slot.session, "internal error while processing the message")
        finally:
            with slot.changed:
                slot.processing = False
                slot.touch()
                slot.changed.notify_all()

    def get_events(
        self, session_id: str, after: int, wait: float = 0.0
    ) -> list[SessionEvent]:
        """Events with sequence > after; optionally long-poll up to `wait` s."""
        self._evict_idle()
        slot = self._slot(session_id)
        deadline = time.monotonic() + min(wait, LONG_POLL_MAX_WAIT)
        with slot.changed:
            slot.touch()
            while True:
                events = [e for e in slot.session.events if e.sequence > after]
                if events:
                    return events
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    return []
                slot.changed.wait(remaining)

    def _evict_idle(self) -> None:
        if self.ttl_secs <= 0:
            return
        cutoff = time.monotonic() - self.ttl_secs
        with self._registry_lock:
            expired = [
                sid
                for sid, slot in self._slots.items()
                if slot.last_activity < cutoff and not slot.processing
            ]
            for sid in expired:
                del self._slots[sid]


# ---------------------------------------------------------------------------
# HTTP layer


_FALLBACK_PAGE = """<!doctype html>
<html>
<head><meta charset="utf-8"><title>personaforge</title></head>
<body>
<h1>personaforge service</h1>
<p>The web chat client is not installed. Build it with
<code>npm run build</code> in the <code>frontend/</code> directory and start
the service with <code>--assets frontend/dist</code> (or set
<code>PF_WEBCHAT_DIR</code>).</p>
<p>API: <a href="/api/profiles">/api/profiles</a></p>
</body>
</html>
"""

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".ico": "image/x-icon",
}


def event_to_json(event: SessionEvent) -> dict:
    return {
        "kind": event.kind,
        "payload": event.payload,
        "sequence": event.sequence,
        "ts": event.ts,
    }


class _Handler(BaseHTTPRequestHandler):
    service: AgentService  # set by make_server
    protocol_version = "HTTP/1.1"

    # -- helpers --------------------------------------------------------

    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        logger.debug("%s - %s", self.address_string(), format % args)

    def _send_json(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> Optional[dict]:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b""
        try:
            data = json.loads(raw.decode("utf-8")) if raw else {}
        except ValueError:
            return None
        return data if isinstance(data, dict) else None

    # -- routing --------------------------------------------------------

    def do_GET(self) -> None:
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        try:
            if url.path == "/api/profiles":
                cards = [card.to_json() for card in self.service.list_profiles()]
                self._send_json(200, {"profiles": cards})
            elif (
                len(parts) == 4
                and parts[0] == "api"
                and parts[1] == "sessions"
                and parts[3] == "events"
            ):
                self._handle_events(parts[2], url.query)
            elif parts and parts[0] == "api":
                self._send_json(404, {"error": "not found"})
            else:
                self._serve_static(url.path)
        except UnknownResourceError as exc:
            self._send_json(404, {"error": str(exc)})
        except BrokenPipeError:
            pass

    def do_POST(self) -> None:
        url = urlparse(self.path)
        parts = [p for p in url.path.split("/") if p]
        try:
            if url.path == "/api/sessions":
                data = self._read_json()
                if data is None or not data.get("bundle_id"):
                    self._send_json(400, {"error": "expected JSON with bundle_id"})
                    return
                session_id = self.service.create_session(data["bundle_id"])
                self._send_json(201, {"session_id": session_id})
            elif (
                len(parts) == 4
                and parts[0] == "api"
                and parts[1] == "sessions"
                and parts[3] == "messages"
            ):
                data = self._read_json()
                text = (data or {}).get("text", "")
                if not isinstance(text, str) or not text.strip():
                    self._send_json(400, {"error": "expected JSON with non-empty text"})
                    return
                self.service.post_message(parts[2], text)
                self._send_json(202, {"accepted": True})
            else:
                self._send_json(404, {"error": "not found"})
        except SessionBusyError as exc:
            self._send_json(409, {"error": str(exc)})
        except UnknownResourceError as exc:
            self._send_json(404, {"error": str(exc)})

    # -- event delivery ---------------------------------------------------

    def _handle_events(self, session_id: str, query: str) -> None:
        params = parse_qs(query)
        try:
            after = int(params.get("after", ["0"])[0])
            wait = float(params.get("wait", ["0"])[0])
        except ValueError:
            self._send_json(400, {"error": "after and wait must be numeric"})
            return
        if "text/event-stream" in self.headers.get("Accept", ""):
            self._stream_events(session_id, after)
            return
        events = self.service.get_events(session_id, after, wait)
        self._send_json(200, {"events": [event_to_json(e) for e in events]})

    def _stream_events(self, session_id: str, after: int) -> None:
        self.service._slot(session_id)  # 404 before committing to the stream
        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Connection", "close")
        self.end_headers()
        cursor = after
        try:
            while True:
                events = self.service.get_events(session_id, cursor, wait=25.0)
                if not events:
                    self.wfile.write(b": keep-alive\n\n")
                    self.wfile.flush()
                    continue
                for event in events:
                    data = json.dumps(event_to_json(event))
                    frame = f"id: {event.sequence}\ndata: {data}\n\n"
                    self.wfile.write(frame.encode("utf-8"))
                    cursor = event.sequence
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError, UnknownResourceError):
            return

    # -- static assets ------------------------------------------------------

    def _serve_static(self, path: str) -> None:
        if path in ("", "/"):
            path = "/index.html"
        assets = self.service.assets_dir
        if assets is not None:
            root = assets.resolve()
            candidate = (root / path.lstrip("/")).resolve()
            if root in candidate.parents or candidate == root:
                if candidate.is_file():
                    body = candidate.read_bytes()
                    content_type = _CONTENT_TYPES.get(
                        candidate.suffix, "application/octet-stream"
                    )
                    self.send_response(200)
                    self.send_header("Content-Type", content_type)
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                    return
            self._send_json(404, {"error": "not found"})
            return
        if path == "/index.html":
            body = _FALLBACK_PAGE.encode("utf-8")
            self.send_response(200)
            self.send_header("Content-Type", "text/html; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return
        self._send_json(404, {"error": "not found"})


def make_server(service: AgentService, bind_addr: Optional[str] = None) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server for a service."""
    if bind_addr is None:
        bind_addr = os.environ.get(ENV_BIND_ADDR, DEFAULT_BIND)
    host, _, port_text = bind_addr.rpartition(":")
    if not host:
        raise ValueError(f"bind address must look like host:port, got {bind_addr!r}")
    handler = type("BoundHandler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, int(port_text)), handler)
    server.daemon_threads = True
    return server


def load_bundles(paths: list[str | Path]) -> list[AgentBundle]:
    return [read_bundle(path) for path in paths]


def bundle_paths_from_env() -> list[Path]:
    directory = os.environ.get(ENV_BUNDLE_DIR, "")
    if not directory:
        return []
    return sorted(Path(directory).glob("*.pab"))
