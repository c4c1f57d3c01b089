"""Control server: decrypts inbound sequences and replays them on its screen.

One screen instance per server. Any number of reader threads may be live,
but every screen mutation passes through one lock, so replay order is the
arrival order and snapshots are never torn. Sequence numbers are guarded
per session: only last_applied + 1 is applied, anything else is
acknowledged as stale and leaves the screen untouched, which makes
at-least-once delivery from the client side idempotent.
"""

from __future__ import annotations

import asyncio
import logging
import socket
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware

from . import payloads, protocol
from .protocol import (
    FrameBuffer,
    Message,
    MessageKind,
    ProtocolError,
    SessionKey,
    encode_message,
)
from .screen import ClickConfig, ReplayError, ScreenSpec, VirtualScreen, logical_state
from .webutil import HttpServerThread, stream_queue_to_ws

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1


def replay_guard(seq: int, last_applied: int) -> bool:
    """Accept only the immediate successor; duplicates and gaps are stale."""
    return seq == last_applied + 1


@dataclass(eq=False)  # identity semantics: the peer list tracks live objects
class _PeerInfo:
    addr: str
    session_id: str
    last_applied: int = 0
    connected_at_ms: int = 0


@dataclass
class _Stats:
    applied: int = 0
    stale: int = 0
    errors: int = 0
    pings: int = 0
    last_seq: int = 0
    peers: list = field(default_factory=list)


class RemoteAgent:
    def __init__(
        self,
        spec: ScreenSpec,
        key: SessionKey,
        port: int = 0,
        *,
        real_time: bool = False,
        ack_enabled: bool = True,
        multi_writer: bool = False,
        state_port: Optional[int] = None,
        version: int = PROTOCOL_VERSION,
        read_timeout_s: float = 0.5,
    ):
        self._spec = spec
        self._key = key
        self._requested_port = port
        self._real_time = real_time
        self._ack_enabled = ack_enabled
        self._multi_writer = multi_writer
        self._state_port = state_port
        self._version = version
        self._read_timeout_s = read_timeout_s

        self.screen = VirtualScreen(spec)
        self._screen_lock = threading.Lock()
        self._stats = _Stats()
        self._started_at = 0.0

        self._listener: Optional[socket.socket] = None
        self._accept_thread: Optional[threading.Thread] = None
        self._conn_threads: list[threading.Thread] = []
        self._live_socks: list[socket.socket] = []
        self._writer_lock = threading.Lock()
        self._stop = threading.Event()

        self._subscribers: list[tuple[asyncio.AbstractEventLoop, asyncio.Queue]] = []
        self._sub_lock = threading.Lock()
        self._http: Optional[HttpServerThread] = None

    # -- lifecycle ------------------------------------------------------------

    def start(self) -> None:
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            listener.bind(("0.0.0.0", self._requested_port))
        except OSError:
            listener.close()
            raise
        listener.listen(8)
        listener.settimeout(0.2)
        self._listener = listener
        self._started_at = time.monotonic()
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()
        if self._state_port is not None:
            self._http = HttpServerThread(self._build_state_app(), port=self._state_port)
            self._http.start()
        log.info("remote agent listening on %d", self.port)

    def stop(self) -> None:
        self._stop.set()
        if self._http is not None:
            self._http.stop()
        if self._listener is not None:
            self._listener.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=2)
        for t in self._conn_threads:
            t.join(timeout=2)

    @property
    def port(self) -> int:
        assert self._listener is not None, "agent not started"
        return self._listener.getsockname()[1]

    @property
    def http_port(self) -> int:
        assert self._http is not None, "state server not enabled"
        return self._http.port

    # -- TCP side -------------------------------------------------------------

    def _accept_loop(self) -> None:
        assert self._listener is not None
        while not self._stop.is_set():
            try:
                sock, addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            with self._writer_lock:
                if self._live_socks and not self._multi_writer:
                    # exclusive control, newest wins: a reconnecting client
                    # must be able to displace its own half-dead session
                    log.warning("new controller %s displaces the current one", addr)
                    for old in self._live_socks:
                        try:
                            old.shutdown(socket.SHUT_RDWR)
                        except OSError:
                            pass
                self._live_socks.append(sock)
            t = threading.Thread(target=self._serve_connection, args=(sock, addr), daemon=True)
            t.start()
            self._conn_threads.append(t)

    def _serve_connection(self, sock: socket.socket, addr) -> None:
        peer = _PeerInfo(addr=f"{addr[0]}:{addr[1]}", session_id="")
        try:
            sock.settimeout(self._read_timeout_s)
            self._connection_loop(sock, peer)
        finally:
            sock.close()
            with self._writer_lock:
                if sock in self._live_socks:
                    self._live_socks.remove(sock)
            with self._screen_lock:
                if peer in self._stats.peers:
                    self._stats.peers.remove(peer)

    def _connection_loop(self, sock: socket.socket, peer: _PeerInfo) -> None:
        buf = FrameBuffer()
        greeted = False
        while not self._stop.is_set():
            try:
                data = sock.recv(65536)
            except socket.timeout:
                continue
            except OSError:
                return
            if not data:
                return
            try:
                frames = buf.feed(data)
            except protocol.BadFrame as e:
                log.error("%s: corrupt stream, closing: %s", peer.addr, e)
                return
            for frame in frames:
                try:
                    msg = protocol.decode_message(frame, self._key)
                except protocol.BadPadding:
                    log.error("%s: KeyMismatch (decrypt failed), closing", peer.addr)
                    return
                except ProtocolError as e:
                    log.error("%s: BadFrame (%s), closing", peer.addr, e)
                    return
                if not greeted:
                    if msg.kind != MessageKind.HELLO or not self._handshake(sock, msg, peer):
                        return
                    greeted = True
                    continue
                if not self._handle_message(sock, msg, peer):
                    return

    def _handshake(self, sock: socket.socket, msg: Message, peer: _PeerInfo) -> bool:
        try:
            hello = payloads.decode_hello(msg.payload)
        except payloads.PayloadError as e:
            log.error("%s: bad HELLO: %s", peer.addr, e)
            return False
        peer.session_id = msg.session_id.hex()
        peer.connected_at_ms = int((time.monotonic() - self._started_at) * 1000)
        with self._screen_lock:
            self._stats.peers.append(peer)
        reply = Message(
            kind=MessageKind.HELLO,
            session_id=msg.session_id,
            seq=0,
            payload=payloads.encode_hello(self._version, self._spec.resolution),
        )
        self._send(sock, reply)
        if hello.version != self._version:
            log.error(
                "%s: incompatible protocol version %d (ours %d), closing",
                peer.addr, hello.version, self._version,
            )
            return False
        return True

    def _handle_message(self, sock: socket.socket, msg: Message, peer: _PeerInfo) -> bool:
        if msg.kind == MessageKind.PING:
            self._stats.pings += 1
            self._send(sock, Message(MessageKind.PONG, msg.session_id, msg.seq))
            return True
        if msg.kind == MessageKind.CONTROL:
            self._handle_control(sock, msg, peer)
            return True
        log.warning("%s: unexpected %s, ignoring", peer.addr, msg.kind.name)
        return True

    def _handle_control(self, sock: socket.socket, msg: Message, peer: _PeerInfo) -> None:
        def ack(status: str, detail: Optional[str] = None, index: Optional[int] = None) -> None:
            if self._ack_enabled:
                self._send(
                    sock,
                    Message(
                        MessageKind.ACK,
                        msg.session_id,
                        msg.seq,
                        payloads.encode_ack(msg.seq, status, detail, index),
                    ),
                )

        if not replay_guard(msg.seq, peer.last_applied):
            with self._screen_lock:
                self._stats.stale += 1
            if msg.seq > peer.last_applied + 1:
                log.warning(
                    "%s: seq gap (got %d, expected %d)", peer.addr, msg.seq, peer.last_applied + 1
                )
            ack(payloads.ACK_STALE, detail=f"last_applied={peer.last_applied}")
            return

        try:
            control = payloads.decode_control(msg.payload)
        except payloads.PayloadError as e:
            with self._screen_lock:
                self._stats.errors += 1
            ack(payloads.ACK_ERROR, detail=str(e))
            return

        cfg = ClickConfig(click_delay_ms=control.click_delay_ms)
        sleeper = time.sleep if self._real_time else None
        with self._screen_lock:
            try:
                self.screen.replay(control.events, cfg, sleeper=sleeper)
            except ReplayError as e:
                self._stats.errors += 1
                peer.last_applied = msg.seq  # consumed, even though it failed
                self._stats.last_seq = msg.seq
                ack(payloads.ACK_ERROR, detail=str(e.cause), index=e.index)
                return
            peer.last_applied = msg.seq
            self._stats.applied += 1
            self._stats.last_seq = msg.seq
            doc = self._state_doc_locked()
        self._publish(doc)
        ack(payloads.ACK_APPLIED)

    def _send(self, sock: socket.socket, msg: Message) -> None:
        try:
            sock.sendall(encode_message(msg, self._key))
        except OSError as e:
            log.warning("reply failed: %s", e)

    # -- state documents --------------------------------------------------------

    def _state_doc_locked(self) -> dict:
        snap = self.screen.snapshot()
        return {
            "snapshot": snap,
            "logical": logical_state(snap),
            "session": {
                "peers": [
                    {"addr": p.addr, "session_id": p.session_id, "last_applied": p.last_applied}
                    for p in self._stats.peers
                ],
                "applied": self._stats.applied,
                "stale": self._stats.stale,
                "errors": self._stats.errors,
                "last_seq": self._stats.last_seq,
                "uptime_ms": int((time.monotonic() - self._started_at) * 1000),
            },
        }

    def state_document(self) -> dict:
        with self._screen_lock:
            return self._state_doc_locked()

    def snapshot(self) -> dict:
        with self._screen_lock:
            return self.screen.snapshot()

    # -- state endpoint ----------------------------------------------------------

    def _publish(self, doc: dict) -> None:
        with self._sub_lock:
            subscribers = list(self._subscribers)
        for loop, queue in subscribers:
            loop.call_soon_threadsafe(queue.put_nowait, doc)

    def _build_state_app(self) -> FastAPI:
        app = FastAPI()
        app.add_middleware(
            CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
        )
        agent = self

        @app.get("/state")
        def get_state() -> dict:
            return agent.state_document()

        @app.websocket("/state/stream")
        async def state_stream(ws: WebSocket) -> None:
            await ws.accept()
            loop = asyncio.get_running_loop()
            queue: asyncio.Queue = asyncio.Queue()
            with agent._sub_lock:
                agent._subscribers.append((loop, queue))
            try:
                await ws.send_json(agent.state_document())
                await stream_queue_to_ws(ws, queue)
            except WebSocketDisconnect:
                pass
            finally:
                with agent._sub_lock:
                    agent._subscribers.remove((loop, queue))

        return app
