"""Control client: encodes operator inputs, resolves them through the
mapping, and pushes the resolved sequences to every configured remote.

One bounded FIFO queue feeds one sender thread (the queue's only consumer).
The sender never blocks on a sick endpoint: items for an endpoint that is
mid-reconnect are parked on that endpoint's backlog and the per-endpoint
connector thread flushes them, re-stamped under the new session, once the
link is back. Within a session the remote therefore observes CONTROL
sequence numbers as a strictly increasing 1..n with no reordering.

Sequence numbers are stamped at write time, not enqueue time: a reconnect
starts a fresh session whose numbering restarts at 1, so a parked item must
receive its number under the session that actually carries it.
"""

from __future__ import annotations

import asyncio
import json
import logging
import queue
import secrets
import shlex
import socket
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware

from . import payloads, protocol
from .events import Resolution
from .mapping import Action, InputKey, LoadedMapping, UnmappedInput, load_mapping
from .protocol import FrameBuffer, Message, MessageKind, ProtocolError, SessionKey, keepalive_due
from .webutil import stream_queue_to_ws

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1


class BadInput(ValueError):
    """A raw operator action is missing fields or malformed."""


class Backpressure(Exception):
    """The send queue is full and the configured policy is to error."""


class Incompatible(Exception):
    """Remote speaks a different protocol version; not retried."""


class KeyMismatch(Exception):
    """Remote rejected or garbled the first exchange; wrong pre-shared key."""


@dataclass(frozen=True)
class EndpointConfig:
    host: str
    port: int
    interface_id: str
    resolution: Optional[Resolution] = None  # overrides what the remote reports


@dataclass(frozen=True)
class AgentConfig:
    endpoints: tuple[EndpointConfig, ...]
    session_key_hex: str
    mapping_path: str
    keepalive_interval_ms: int = 5000
    queue_capacity: int = 1024
    backpressure: str = "block"  # block | drop | error
    read_timeout_ms: int = 500
    connect_timeout_ms: int = 2000
    backoff_initial_ms: int = 500
    backoff_cap_ms: int = 30000
    max_retries: Optional[int] = None  # None = retry forever
    ack_wait_ms: int = 5000
    version: int = PROTOCOL_VERSION

    def key(self) -> SessionKey:
        return SessionKey.from_hex(self.session_key_hex)


_CONFIG_FIELDS = {
    "endpoints",
    "session_key_hex",
    "mapping_path",
    "keepalive_interval_ms",
    "queue_capacity",
    "backpressure",
    "read_timeout_ms",
    "connect_timeout_ms",
    "backoff_initial_ms",
    "backoff_cap_ms",
    "max_retries",
    "ack_wait_ms",
    "version",
}


class ConfigError(ValueError):
    pass


def load_agent_config(path: Union[str, Path]) -> AgentConfig:
    base = Path(path).parent
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be an object")
    extra = set(doc) - _CONFIG_FIELDS
    if extra:
        raise ConfigError(f"{path}: unknown field(s) {sorted(extra)}")
    for req in ("endpoints", "session_key_hex", "mapping_path"):
        if req not in doc:
            raise ConfigError(f"{path}: missing field {req!r}")
    endpoints = []
    ids = set()
    for i, ep in enumerate(doc["endpoints"]):
        if not isinstance(ep, dict) or not {"host", "port", "interface_id"} <= set(ep):
            raise ConfigError(f"{path}: endpoint {i} needs host, port, interface_id")
        if set(ep) - {"host", "port", "interface_id", "resolution"}:
            raise ConfigError(f"{path}: endpoint {i} has unknown fields")
        if ep["interface_id"] in ids:
            raise ConfigError(f"{path}: duplicate endpoint interface_id {ep['interface_id']!r}")
        ids.add(ep["interface_id"])
        res = None
        if "resolution" in ep and ep["resolution"] is not None:
            res = Resolution(int(ep["resolution"]["width"]), int(ep["resolution"]["height"]))
        endpoints.append(
            EndpointConfig(str(ep["host"]), int(ep["port"]), str(ep["interface_id"]), res)
        )
    mapping_path = doc["mapping_path"]
    if not Path(mapping_path).is_absolute():
        mapping_path = str(base / mapping_path)
    try:
        SessionKey.from_hex(doc["session_key_hex"])
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from None
    kwargs = {
        k: doc[k]
        for k in _CONFIG_FIELDS - {"endpoints", "session_key_hex", "mapping_path"}
        if k in doc
    }
    if doc.get("backpressure", "block") not in ("block", "drop", "error"):
        raise ConfigError(f"{path}: backpressure must be block, drop, or error")
    return AgentConfig(
        endpoints=tuple(endpoints),
        session_key_hex=doc["session_key_hex"],
        mapping_path=mapping_path,
        **kwargs,
    )


def encode_input(raw: dict) -> InputKey:
    """Canonicalize a raw operator action; injective on distinct actions."""
    if not isinstance(raw, dict):
        raise BadInput("raw action must be a mapping")
    extra = set(raw) - {"interface_id", "widget_id", "action", "payload"}
    if extra:
        raise BadInput(f"unknown field(s) {sorted(extra)}")
    for req in ("interface_id", "widget_id", "action"):
        if not isinstance(raw.get(req), str) or not raw[req]:
            raise BadInput(f"{req} must be a non-empty string")
    payload = raw.get("payload")
    if payload is not None and not isinstance(payload, str):
        raise BadInput("payload must be a string when present")
    try:
        action = Action.parse(raw["action"])
    except Exception:
        raise BadInput(f"unknown action {raw['action']!r}") from None
    return InputKey(raw["interface_id"], raw["widget_id"], action, payload)


def backoff_delay_ms(attempt: int, initial_ms: int = 500, cap_ms: int = 30000) -> int:
    """Capped exponential backoff: 0.5 s, 1 s, 2 s, 4 s, ... up to the cap."""
    return min(cap_ms, initial_ms * (2 ** min(attempt, 30)))


class DispatchHandle:
    """Per-endpoint outcome of one dispatched action; resolved by ACK or failure."""

    def __init__(self, interface_id: str):
        self.interface_id = interface_id
        self.status: Optional[str] = None  # applied | stale | error | failed | dropped
        self.detail: Optional[str] = None
        self.latency_ms: Optional[float] = None
        self._event = threading.Event()

    def resolve(self, status: str, detail: Optional[str] = None, latency_ms: Optional[float] = None) -> None:
        if self._event.is_set():
            return
        self.status, self.detail, self.latency_ms = status, detail, latency_ms
        self._event.set()

    def wait(self, timeout_s: Optional[float]) -> bool:
        return self._event.wait(timeout_s)


@dataclass
class DispatchResult:
    key: InputKey
    handles: list[DispatchHandle]
    skipped: list[tuple[str, str]]  # (interface_id, reason)

    @property
    def dispatched(self) -> int:
        return len(self.handles)


@dataclass
class _OutboundControl:
    interface_id: str
    payload: bytes
    handle: DispatchHandle


_UP = "up"
_CONNECTING = "connecting"
_DOWN = "down"


class _Connection:
    """One endpoint: socket, session counters, backlog, connector and reader threads."""

    def __init__(self, agent: "LocalAgent", endpoint: EndpointConfig):
        self.agent = agent
        self.endpoint = endpoint
        self.state = _CONNECTING
        self.down_reason: Optional[str] = None
        self.target_resolution: Optional[Resolution] = endpoint.resolution
        self.sock: Optional[socket.socket] = None
        self.session_id = b"\x00" * 16
        self.control_seq = 0
        self.ping_seq = 0
        self.last_send_ms = 0
        self.last_pong_ms: Optional[int] = None
        self.pending: dict[int, tuple[DispatchHandle, float]] = {}
        self.backlog: deque[_OutboundControl] = deque()
        self.lock = threading.RLock()
        self.reconnect_event = threading.Event()
        self.ready_event = threading.Event()  # first session up, or permanently down
        self._sock_gen = 0
        self._connector: Optional[threading.Thread] = None

    # -- called from the agent/sender thread ----------------------------------

    def start(self) -> None:
        self._connector = threading.Thread(
            target=self._connector_loop, name=f"connect-{self.endpoint.interface_id}", daemon=True
        )
        self._connector.start()

    def close(self) -> None:
        self.reconnect_event.set()
        with self.lock:
            if self.sock is not None:
                try:
                    self.sock.close()
                except OSError:
                    pass
        if self._connector is not None:
            self._connector.join(timeout=2)

    def submit(self, item: _OutboundControl) -> None:
        with self.lock:
            if self.state == _DOWN:
                log.error(
                    "dropping action for DOWN endpoint %s: %s",
                    self.endpoint.interface_id, self.down_reason,
                )
                item.handle.resolve("failed", f"endpoint down: {self.down_reason}")
                return
            if self.state == _UP and not self.backlog:
                try:
                    self._write_control_locked(item)
                    return
                except OSError as e:
                    log.warning("%s: write failed (%s); will resend after reconnect",
                                self.endpoint.interface_id, e)
                    self._mark_broken_locked()
            self.backlog.append(item)

    def maybe_ping(self, now_ms: int, interval_ms: int) -> None:
        with self.lock:
            if self.state != _UP:
                return
            if not keepalive_due(self.last_send_ms, now_ms, interval_ms):
                return
            self.ping_seq += 1
            msg = Message(MessageKind.PING, self.session_id, self.ping_seq)
            try:
                self._send_locked(msg)
            except OSError:
                self._mark_broken_locked()

    # -- internals --------------------------------------------------------------

    def _write_control_locked(self, item: _OutboundControl) -> None:
        seq = self.control_seq + 1
        msg = Message(MessageKind.CONTROL, self.session_id, seq, item.payload)
        t0 = time.perf_counter()
        self.pending[seq] = (item.handle, t0)
        try:
            self._send_locked(msg)
        except OSError:
            del self.pending[seq]
            raise
        self.control_seq = seq

    def _send_locked(self, msg: Message) -> None:
        if self.sock is None:
            raise OSError("not connected")
        for chunk in self.agent._frame_tap(self.endpoint.interface_id,
                                           protocol.encode_message(msg, self.agent._key)):
            self.sock.sendall(chunk)
        self.last_send_ms = self.agent._now_ms()

    def _mark_broken_locked(self) -> None:
        if self.state == _UP:
            self.state = _CONNECTING
            self._sock_gen += 1  # tells the old reader it is stale
            self._fail_pending_locked("connection lost before ack")
            self.reconnect_event.set()

    def _fail_pending_locked(self, reason: str) -> None:
        for handle, _ in self.pending.values():
            handle.resolve("failed", reason)
        self.pending.clear()

    def _drop_backlog_locked(self, reason: str) -> None:
        while self.backlog:
            item = self.backlog.popleft()
            log.error("dropping queued action for %s: %s", self.endpoint.interface_id, reason)
            item.handle.resolve("failed", reason)

    def _connector_loop(self) -> None:
        while not self.agent._stop.is_set():
            if not self._establish():
                return  # permanently down
            self.reconnect_event.wait()
            self.reconnect_event.clear()
            if self.agent._stop.is_set():
                return
            with self.lock:
                if self.sock is not None:
                    try:
                        self.sock.close()
                    except OSError:
                        pass
                    self.sock = None

    def _establish(self) -> bool:
        cfg = self.agent._config
        attempt = 0
        while not self.agent._stop.is_set():
            try:
                sock = socket.create_connection(
                    (self.endpoint.host, self.endpoint.port),
                    timeout=cfg.connect_timeout_ms / 1000,
                )
            except OSError as e:
                attempt += 1
                if cfg.max_retries is not None and attempt > cfg.max_retries:
                    self._go_down(f"unreachable after {cfg.max_retries} retries: {e}")
                    return False
                delay = backoff_delay_ms(attempt - 1, cfg.backoff_initial_ms, cfg.backoff_cap_ms)
                log.warning("%s: connect failed (%s), retrying in %d ms",
                            self.endpoint.interface_id, e, delay)
                self.agent._sleep(delay / 1000)
                continue
            try:
                session_id, resolution = self._handshake(sock)
            except (Incompatible, KeyMismatch) as e:
                sock.close()
                self._go_down(f"{type(e).__name__}: {e}")
                return False
            except OSError as e:
                sock.close()
                attempt += 1
                if cfg.max_retries is not None and attempt > cfg.max_retries:
                    self._go_down(f"handshake failed after {cfg.max_retries} retries: {e}")
                    return False
                delay = backoff_delay_ms(attempt - 1, cfg.backoff_initial_ms, cfg.backoff_cap_ms)
                self.agent._sleep(delay / 1000)
                continue

            sock.settimeout(cfg.read_timeout_ms / 1000)
            with self.lock:
                self.sock = sock
                self.session_id = session_id
                self.control_seq = 0
                self.ping_seq = 0
                self.last_send_ms = self.agent._now_ms()
                if self.endpoint.resolution is None:
                    self.target_resolution = resolution
                self._sock_gen += 1
                gen = self._sock_gen
                self.state = _UP
            reader = threading.Thread(
                target=self._reader_loop, args=(sock, gen),
                name=f"read-{self.endpoint.interface_id}", daemon=True,
            )
            reader.start()
            self._flush_backlog()
            self.ready_event.set()
            log.info("%s: session up (%s)", self.endpoint.interface_id, session_id.hex()[:8])
            return True
        return False

    def _handshake(self, sock: socket.socket) -> tuple[bytes, Optional[Resolution]]:
        cfg = self.agent._config
        session_id = secrets.token_bytes(16)
        hello = Message(
            MessageKind.HELLO,
            session_id,
            0,
            payloads.encode_hello(cfg.version, self.agent._reference_resolution),
        )
        sock.settimeout(cfg.connect_timeout_ms / 1000)
        sock.sendall(protocol.encode_message(hello, self.agent._key))
        buf = FrameBuffer()
        while True:
            data = sock.recv(65536)
            if not data:
                raise KeyMismatch("remote closed the connection during the handshake")
            try:
                frames = buf.feed(data)
            except protocol.BadFrame as e:
                raise KeyMismatch(f"garbled handshake reply: {e}") from None
            if not frames:
                continue
            try:
                msg = protocol.decode_message(frames[0], self.agent._key)
            except protocol.BadPadding:
                raise KeyMismatch("cannot decrypt the handshake reply") from None
            except ProtocolError as e:
                raise KeyMismatch(f"garbled handshake reply: {e}") from None
            if msg.kind != MessageKind.HELLO:
                raise Incompatible(f"expected HELLO, got {msg.kind.name}")
            info = payloads.decode_hello(msg.payload)
            if info.version != cfg.version:
                raise Incompatible(f"remote version {info.version}, ours {cfg.version}")
            return session_id, info.resolution

    def _flush_backlog(self) -> None:
        # lock per item, not around the whole drain, so the reader thread can
        # keep consuming ACKs while a long backlog flushes
        while True:
            with self.lock:
                if not self.backlog or self.state != _UP:
                    return
                item = self.backlog[0]
                try:
                    self._write_control_locked(item)
                except OSError:
                    self._mark_broken_locked()
                    return
                self.backlog.popleft()

    def _go_down(self, reason: str) -> None:
        with self.lock:
            self.state = _DOWN
            self.down_reason = reason
            self._fail_pending_locked(reason)
            self._drop_backlog_locked(reason)
        self.ready_event.set()
        log.error("endpoint %s marked DOWN: %s", self.endpoint.interface_id, reason)

    def _reader_loop(self, sock: socket.socket, gen: int) -> None:
        buf = FrameBuffer()
        while not self.agent._stop.is_set():
            with self.lock:
                if gen != self._sock_gen:
                    return  # socket replaced under us
            try:
                data = sock.recv(65536)
            except socket.timeout:
                continue
            except OSError:
                break
            if not data:
                break
            try:
                frames = buf.feed(data)
            except protocol.BadFrame as e:
                log.error("%s: corrupt inbound stream: %s", self.endpoint.interface_id, e)
                break
            ok = True
            for frame in frames:
                if not self._handle_inbound(frame):
                    ok = False
                    break
            if not ok:
                break
        with self.lock:
            if gen == self._sock_gen:
                self._mark_broken_locked()

    def _handle_inbound(self, frame: protocol.Frame) -> bool:
        try:
            msg = protocol.decode_message(frame, self.agent._key)
        except ProtocolError as e:
            log.error("%s: undecodable reply: %s", self.endpoint.interface_id, e)
            return False
        if msg.kind == MessageKind.PONG:
            self.last_pong_ms = self.agent._now_ms()
            return True
        if msg.kind == MessageKind.ACK:
            try:
                ack = payloads.decode_ack(msg.payload)
            except payloads.PayloadError as e:
                log.warning("%s: bad ACK payload: %s", self.endpoint.interface_id, e)
                return True
            with self.lock:
                entry = self.pending.pop(ack.seq, None)
            if entry is None:
                log.warning("%s: ACK for unknown seq %d", self.endpoint.interface_id, ack.seq)
                return True
            handle, t0 = entry
            latency_ms = (time.perf_counter() - t0) * 1000
            if ack.status != payloads.ACK_APPLIED:
                log.warning("%s: seq %d acked as %s (%s)",
                            self.endpoint.interface_id, ack.seq, ack.status, ack.detail)
            handle.resolve(ack.status, ack.detail, latency_ms)
            self.agent._notify_confirmation(self.endpoint.interface_id, ack, latency_ms)
            return True
        log.warning("%s: unexpected %s from remote", self.endpoint.interface_id, msg.kind.name)
        return True


@dataclass
class ActionReport:
    line_no: int
    text: str
    dispatched: int
    applied: int
    skipped: list[tuple[str, str]]
    statuses: list[tuple[str, Optional[str], Optional[float]]]  # (iface, status, latency)

    @property
    def passed(self) -> bool:
        return self.dispatched > 0 and self.applied == self.dispatched


@dataclass
class ScriptReport:
    actions: list[ActionReport] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.actions)

    @property
    def passed(self) -> int:
        return sum(1 for a in self.actions if a.passed)

    def latencies_ms(self) -> list[float]:
        out = []
        for a in self.actions:
            out.extend(lat for _, _, lat in a.statuses if lat is not None)
        return out


class ScriptError(ValueError):
    pass


def parse_script(text: str) -> list[tuple[int, str, Union[int, dict]]]:
    """Parse a scenario script into ("sleep", ms) and action entries.

    One action per line: `<interface> <widget> <action> [payload]`; `#`
    starts a comment; `sleep <ms>` pauses between actions. Quoted payloads
    keep their spaces.
    """
    entries: list[tuple[int, str, Union[int, dict]]] = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            tokens = shlex.split(line, comments=True)
        except ValueError as e:
            raise ScriptError(f"line {line_no}: {e}") from None
        if not tokens:
            continue
        if tokens[0] == "sleep":
            if len(tokens) != 2 or not tokens[1].isdigit():
                raise ScriptError(f"line {line_no}: sleep needs a millisecond count")
            entries.append((line_no, line, int(tokens[1])))
            continue
        if len(tokens) < 3 or len(tokens) > 4:
            raise ScriptError(
                f"line {line_no}: expected <interface> <widget> <action> [payload]"
            )
        raw: dict = {
            "interface_id": tokens[0],
            "widget_id": tokens[1],
            "action": tokens[2],
        }
        if len(tokens) == 4:
            raw["payload"] = tokens[3]
        entries.append((line_no, line, raw))
    return entries


class LocalAgent:
    def __init__(
        self,
        config: AgentConfig,
        *,
        clock_ms: Optional[Callable[[], int]] = None,
        sleep: Optional[Callable[[float], None]] = None,
        frame_tap: Optional[Callable[[str, bytes], list[bytes]]] = None,
    ):
        self._config = config
        self._key = config.key()
        self._mapping: LoadedMapping = load_mapping(config.mapping_path)
        self._reference_resolution = self._mapping.reference_resolution
        self._now_ms = clock_ms or (lambda: int(time.monotonic() * 1000))
        self._sleep = sleep or time.sleep
        # Fault-injection hook: maps one outbound frame to the byte chunks
        # actually written (tests duplicate frames through this).
        self._frame_tap = frame_tap or (lambda _iface, frame: [frame])
        self._queue: "queue.Queue[_OutboundControl]" = queue.Queue(maxsize=config.queue_capacity)
        self._connections: dict[str, _Connection] = {
            ep.interface_id: _Connection(self, ep) for ep in config.endpoints
        }
        self._stop = threading.Event()
        self._sender: Optional[threading.Thread] = None
        self._confirm_listeners: list[Callable[[dict], None]] = []

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> None:
        for conn in self._connections.values():
            conn.start()
        self._sender = threading.Thread(target=self._sender_loop, name="sender", daemon=True)
        self._sender.start()

    def stop(self) -> None:
        self._stop.set()
        for conn in self._connections.values():
            conn.close()
        if self._sender is not None:
            self._sender.join(timeout=2)

    def wait_ready(self, timeout_s: float = 15.0) -> dict[str, str]:
        """Block until every endpoint is up or permanently down; returns states."""
        deadline = time.monotonic() + timeout_s
        for conn in self._connections.values():
            remaining = max(0.0, deadline - time.monotonic())
            conn.ready_event.wait(remaining)
        return self.endpoint_states()

    def endpoint_states(self) -> dict[str, str]:
        return {iface: conn.state for iface, conn in self._connections.items()}

    def endpoint_info(self) -> list[dict]:
        out = []
        for conn in self._connections.values():
            res = conn.target_resolution
            out.append(
                {
                    "interface_id": conn.endpoint.interface_id,
                    "host": conn.endpoint.host,
                    "port": conn.endpoint.port,
                    "state": conn.state,
                    "resolution": None if res is None else {"width": res.width, "height": res.height},
                }
            )
        return out

    def reload_mapping(self) -> None:
        """Atomically swap in a freshly-loaded table (hot reload)."""
        self._mapping = load_mapping(self._config.mapping_path)

    # -- dispatch ---------------------------------------------------------------

    def dispatch(self, key: InputKey) -> DispatchResult:
        """Resolve `key` per endpoint and enqueue a CONTROL for each hit.

        Unmapped endpoints are skipped with a warning; partial mappings are a
        normal deployment state, not an error.
        """
        mapping = self._mapping
        handles: list[DispatchHandle] = []
        skipped: list[tuple[str, str]] = []
        for iface, conn in self._connections.items():
            if conn.state == _DOWN:
                skipped.append((iface, "endpoint down"))
                log.warning("skipping %s: endpoint down", iface)
                continue
            resolution = conn.target_resolution
            if resolution is None:
                skipped.append((iface, "resolution unknown (no session yet)"))
                log.warning("skipping %s: resolution not yet known", iface)
                continue
            try:
                resolved = mapping.table.resolve(key, resolution)
            except UnmappedInput:
                skipped.append((iface, "unmapped"))
                log.warning("unmapped input for %s: %s", iface, key)
                continue
            payload = payloads.encode_control(iface, resolved.events, mapping.click_delay_ms)
            handle = DispatchHandle(iface)
            self._enqueue(_OutboundControl(iface, payload, handle))
            handles.append(handle)
        return DispatchResult(key=key, handles=handles, skipped=skipped)

    def send_action(self, raw: dict) -> DispatchResult:
        return self.dispatch(encode_input(raw))

    def _enqueue(self, item: _OutboundControl) -> None:
        policy = self._config.backpressure
        if policy == "block":
            self._queue.put(item)
            return
        try:
            self._queue.put_nowait(item)
        except queue.Full:
            if policy == "error":
                raise Backpressure("send queue full") from None
            log.warning("send queue full; dropping action for %s", item.interface_id)
            item.handle.resolve("dropped", "send queue full")

    def _sender_loop(self) -> None:
        interval = self._config.keepalive_interval_ms
        while not self._stop.is_set():
            try:
                item = self._queue.get(timeout=0.05)
            except queue.Empty:
                item = None
            if item is not None:
                self._connections[item.interface_id].submit(item)
            now = self._now_ms()
            for conn in self._connections.values():
                conn.maybe_ping(now, interval)

    # -- confirmations ------------------------------------------------------------

    def add_confirmation_listener(self, fn: Callable[[dict], None]) -> None:
        self._confirm_listeners.append(fn)

    def _notify_confirmation(self, interface_id: str, ack: payloads.AckInfo, latency_ms: float) -> None:
        doc = {
            "interface_id": interface_id,
            "seq": ack.seq,
            "status": ack.status,
            "detail": ack.detail,
            "latency_ms": latency_ms,
        }
        for fn in list(self._confirm_listeners):
            try:
                fn(doc)
            except Exception:
                log.exception("confirmation listener failed")

    # -- script execution -----------------------------------------------------------

    def run_script(self, path: Union[str, Path]) -> ScriptReport:
        entries = parse_script(Path(path).read_text())
        report = ScriptReport()
        wait_s = self._config.ack_wait_ms / 1000
        for line_no, text, entry in entries:
            if isinstance(entry, int):
                self._sleep(entry / 1000)
                continue
            result = self.send_action(entry)
            for handle in result.handles:
                handle.wait(wait_s)
            applied = sum(1 for h in result.handles if h.status == payloads.ACK_APPLIED)
            report.actions.append(
                ActionReport(
                    line_no=line_no,
                    text=text,
                    dispatched=result.dispatched,
                    applied=applied,
                    skipped=result.skipped,
                    statuses=[
                        (h.interface_id, h.status or "timeout", h.latency_ms)
                        for h in result.handles
                    ],
                )
            )
        return report


def build_bridge_app(agent: LocalAgent) -> FastAPI:
    """HTTP+WebSocket bridge the demo UI talks to.

    POST /action dispatches one raw action and returns the per-endpoint
    outcomes; /confirmations streams every ACK as it arrives.
    """
    app = FastAPI()
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.get("/endpoints")
    def endpoints() -> list[dict]:
        return agent.endpoint_info()

    @app.post("/action")
    def action(raw: dict) -> dict:
        wait_ms = raw.pop("wait_ms", agent._config.ack_wait_ms)
        try:
            result = agent.send_action(raw)
        except BadInput as e:
            raise HTTPException(status_code=400, detail=str(e)) from None
        for handle in result.handles:
            handle.wait(wait_ms / 1000)
        return {
            "dispatched": result.dispatched,
            "skipped": [{"interface_id": i, "reason": r} for i, r in result.skipped],
            "results": [
                {
                    "interface_id": h.interface_id,
                    "status": h.status or "timeout",
                    "latency_ms": h.latency_ms,
                    "detail": h.detail,
                }
                for h in result.handles
            ],
        }

    @app.websocket("/confirmations")
    async def confirmations(ws: WebSocket) -> None:
        await ws.accept()
        loop = asyncio.get_running_loop()
        q: asyncio.Queue = asyncio.Queue()

        def listener(doc: dict) -> None:
            loop.call_soon_threadsafe(q.put_nowait, doc)

        agent.add_confirmation_listener(listener)
        try:
            await stream_queue_to_ws(ws, q)
        except WebSocketDisconnect:
            pass
        finally:
            agent._confirm_listeners.remove(listener)

    return app
