"""Network service for sessions, plus the matching client.

A connection speaks newline-delimited JSON wire messages by default.  If
its first bytes look like an HTTP GET, the server performs an RFC 6455
WebSocket upgrade and the same one-line messages travel as text frames.
Both doors lead to the same handler, so browsers and plain sockets see
identical behavior.

Subscriptions are per-connection cursors over a session's append-only
event log.  After every handled message, and whenever a session reports
new events (live mode), the connection sends one gapless event_batch per
subscribed session.  A slow reader only delays its own stream; cursors
never skip.

create_session implicitly subscribes the creating connection from the
start of the log, so the reply is session_created followed by a batch
beginning with the banner event.
"""

from __future__ import annotations

import base64
import hashlib
import socket
import struct
import threading
import time
from pathlib import Path
from typing import Callable

from casbridge.corpus import CorpusError, find_corpus, load_script
from casbridge.session import (
    InvalidAnswerError,
    ReplayMismatchError,
    Session,
    SessionRegistry,
    UnknownProfileError,
    UnknownSessionError,
    WrongStateError,
)
from casbridge.transcript import persist_transcript
from casbridge.wire import WireError, WireMessage, decode_message, encode_message, event_to_record

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"


# ---------------------------------------------------------------------------
# Transports: same recv/send interface over two different doors.


class _NdjsonTransport:
    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._buf = bytearray()

    def recv_message(self) -> str | None:
        while True:
            nl = self._buf.find(b"\n")
            if nl >= 0:
                line = self._buf[:nl]
                del self._buf[: nl + 1]
                return line.decode("utf-8", errors="replace").rstrip("\r")
            try:
                data = self._sock.recv(4096)
            except OSError:
                return None
            if not data:
                return None
            self._buf += data

    def send_message(self, text: str) -> None:
        self._sock.sendall(text.encode("utf-8") + b"\n")

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


class _WebSocketTransport:
    """Server side of an upgraded connection; text frames only."""

    def __init__(self, sock: socket.socket, pending: bytes):
        self._sock = sock
        self._buf = bytearray(pending)
        self._send_lock = threading.Lock()

    # -- byte plumbing --

    def _recv_exact(self, n: int) -> bytes | None:
        while len(self._buf) < n:
            try:
                data = self._sock.recv(4096)
            except OSError:
                return None
            if not data:
                return None
            self._buf += data
        out = bytes(self._buf[:n])
        del self._buf[:n]
        return out

    def _recv_frame(self) -> tuple[int, bytes] | None:
        head = self._recv_exact(2)
        if head is None:
            return None
        fin = head[0] & 0x80
        opcode = head[0] & 0x0F
        masked = head[1] & 0x80
        length = head[1] & 0x7F
        if length == 126:
            ext = self._recv_exact(2)
            if ext is None:
                return None
            length = struct.unpack(">H", ext)[0]
        elif length == 127:
            ext = self._recv_exact(8)
            if ext is None:
                return None
            length = struct.unpack(">Q", ext)[0]
        if masked:
            key = self._recv_exact(4)
            if key is None:
                return None
        payload = self._recv_exact(length) if length else b""
        if payload is None:
            return None
        if masked:
            payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
        if not fin:
            # Accumulate the rest of a fragmented message.
            rest = self._recv_frame()
            if rest is None:
                return None
            _, more = rest
            payload += more
        return opcode, payload

    def recv_message(self) -> str | None:
        while True:
            frame = self._recv_frame()
            if frame is None:
                return None
            opcode, payload = frame
            if opcode == 0x1:  # text
                return payload.decode("utf-8", errors="replace")
            if opcode == 0x9:  # ping -> pong
                self._send_frame(0xA, payload)
                continue
            if opcode == 0x8:  # close
                self._send_frame(0x8, b"")
                return None
            # binary and pong frames are ignored

    def _send_frame(self, opcode: int, payload: bytes) -> None:
        head = bytearray([0x80 | opcode])
        n = len(payload)
        if n < 126:
            head.append(n)
        elif n <= 0xFFFF:
            head.append(126)
            head += struct.pack(">H", n)
        else:
            head.append(127)
            head += struct.pack(">Q", n)
        with self._send_lock:
            self._sock.sendall(bytes(head) + payload)

    def send_message(self, text: str) -> None:
        self._send_frame(0x1, text.encode("utf-8"))

    def close(self) -> None:
        try:
            self._send_frame(0x8, b"")
        except OSError:
            pass
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


def _websocket_accept(key: str) -> str:
    digest = hashlib.sha1((key + _WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def _upgrade_websocket(sock: socket.socket) -> _WebSocketTransport | None:
    """Read the HTTP request and answer the upgrade; None refuses."""
    buf = bytearray()
    while b"\r\n\r\n" not in buf:
        data = sock.recv(4096)
        if not data:
            return None
        buf += data
        if len(buf) > 65536:
            return None
    head, _, pending = bytes(buf).partition(b"\r\n\r\n")
    headers: dict[str, str] = {}
    for line in head.split(b"\r\n")[1:]:
        name, _, value = line.partition(b":")
        headers[name.decode("latin-1").strip().lower()] = value.decode(
            "latin-1"
        ).strip()
    key = headers.get("sec-websocket-key")
    if "websocket" not in headers.get("upgrade", "").lower() or not key:
        sock.sendall(
            b"HTTP/1.1 426 Upgrade Required\r\n"
            b"Connection: close\r\n\r\n"
            b"this endpoint speaks the wire protocol over WebSocket or raw TCP\n"
        )
        return None
    response = (
        "HTTP/1.1 101 Switching Protocols\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        f"Sec-WebSocket-Accept: {_websocket_accept(key)}\r\n\r\n"
    )
    sock.sendall(response.encode("ascii"))
    return _WebSocketTransport(sock, pending)


# ---------------------------------------------------------------------------
# Server


class _Connection:
    def __init__(self, server: "BridgeServer", transport):
        self.server = server
        self.transport = transport
        self.cursors: dict[str, int] = {}  # session_id -> last seq sent
        self._lock = threading.Lock()
        self._wake_pending = False
        self.closed = False

    # -- outbound --

    def send(self, msg: WireMessage) -> None:
        try:
            self.transport.send_message(encode_message(msg))
        except OSError:
            self.closed = True

    def send_error(self, code: str, message: str, session_id: str = "") -> None:
        self.send(
            WireMessage(
                "error", session_id, {"code": code, "message": message}
            )
        )

    def flush(self) -> None:
        """Send pending events for every subscription, in subscribe order."""
        for sid in list(self.cursors):
            try:
                session = self.server.registry.get(sid)
            except UnknownSessionError:
                continue
            events = session.poll_events(self.cursors[sid])
            if not events:
                continue
            self.cursors[sid] = events[-1].seq
            self.send(
                WireMessage(
                    "event_batch",
                    sid,
                    {"events": [event_to_record(e) for e in events]},
                )
            )

    def wake(self) -> None:
        """A session appended events, possibly on another thread.

        Sessions notify from inside their own operations, so this may fire
        while the handler thread still holds our lock (it re-checks after
        releasing).  Never block here: just ring the doorbell.
        """
        self._wake_pending = True
        self._try_flush()

    def _try_flush(self) -> None:
        while self._wake_pending and not self.closed:
            if not self._lock.acquire(blocking=False):
                return  # current holder re-checks the bell on its way out
            try:
                self._wake_pending = False
                self.flush()
            finally:
                self._lock.release()

    # -- inbound --

    def run(self) -> None:
        while True:
            line = self.transport.recv_message()
            if line is None:
                break
            if not line.strip():
                continue
            with self._lock:
                try:
                    msg = decode_message(line)
                except WireError as exc:
                    self.send_error("bad_message", str(exc))
                else:
                    self.handle(msg)
                self.flush()
            self._try_flush()
        self.closed = True

    def handle(self, msg: WireMessage) -> None:
        if msg.type == "create_session":
            self._create(msg)
        elif msg.type == "send_input":
            self._send_input(msg)
        elif msg.type == "subscribe":
            self._subscribe(msg)
        elif msg.type == "terminate":
            self._terminate(msg)
        else:
            # A client sent a server-to-client type.
            self.send_error("bad_message", f"unexpected message type {msg.type!r}")

    def _get(self, msg: WireMessage) -> Session | None:
        try:
            return self.server.registry.get(msg.session_id)
        except UnknownSessionError:
            self.send_error(
                "unknown_session", f"unknown session {msg.session_id!r}", msg.session_id
            )
            return None

    def _create(self, msg: WireMessage) -> None:
        body = msg.body
        profile = body.get("profile", "")
        mode = body.get("mode", "replay")
        script = None
        if mode == "replay":
            corpus = body.get("corpus", "")
            if not corpus:
                self.send_error("bad_message", "replay session needs a corpus name")
                return
            try:
                script = load_script(
                    find_corpus(corpus, self.server.corpus_dir)
                )
            except CorpusError as exc:
                self.send_error("unknown_corpus", str(exc))
                return
        elif mode != "live":
            self.send_error("bad_message", f"unknown mode {mode!r}")
            return
        try:
            session = self.server.registry.create(
                profile, mode=mode, script=script, command=body.get("command")
            )
        except UnknownProfileError as exc:
            self.send_error("unknown_profile", str(exc))
            return
        except Exception as exc:  # live spawn failure
            self.send_error("backend_error", str(exc))
            return
        self.cursors[session.id] = -1
        session.add_listener(self.wake)
        self.send(
            WireMessage(
                "session_created",
                session.id,
                {"profile": profile, "mode": mode},
            )
        )

    def _send_input(self, msg: WireMessage) -> None:
        session = self._get(msg)
        if session is None:
            return
        text = msg.body.get("text")
        if not isinstance(text, str):
            self.send_error("bad_message", "send_input body needs text", msg.session_id)
            return
        try:
            session.send_input(text)
        except WrongStateError as exc:
            self.send_error("wrong_state", str(exc), msg.session_id)
            return
        except InvalidAnswerError as exc:
            self.send_error("invalid_answer", str(exc), msg.session_id)
            return
        except ReplayMismatchError as exc:
            self.send_error("replay_mismatch", str(exc), msg.session_id)
            return
        self.send(WireMessage("input_accepted", msg.session_id, {"text": text}))

    def _subscribe(self, msg: WireMessage) -> None:
        session = self._get(msg)
        if session is None:
            return
        after = msg.body.get("after_seq", -1)
        if not isinstance(after, int):
            self.send_error("bad_message", "after_seq must be an integer", msg.session_id)
            return
        self.cursors[session.id] = after
        session.add_listener(self.wake)

    def _terminate(self, msg: WireMessage) -> None:
        session = self._get(msg)
        if session is None:
            return
        session.terminate()


class BridgeServer:
    """Accepts wire connections and manages one session registry."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        registry: SessionRegistry | None = None,
        corpus_dir: str | Path | None = None,
        transcript_dir: str | Path | None = None,
        clock: Callable[[], float] = time.time,
    ):
        self.registry = registry if registry is not None else SessionRegistry(clock=clock)
        self.corpus_dir = corpus_dir
        self.transcript_dir = Path(transcript_dir) if transcript_dir else None
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(16)
        self.host, self.port = self._sock.getsockname()[:2]
        self._connections: list[_Connection] = []
        self._accept_thread: threading.Thread | None = None
        self._stopping = False

    @property
    def address(self) -> tuple[str, int]:
        return self.host, self.port

    def start(self) -> "BridgeServer":
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()
        return self

    def _accept_loop(self) -> None:
        while not self._stopping:
            try:
                sock, _addr = self._sock.accept()
            except OSError:
                return
            thread = threading.Thread(
                target=self._serve_connection, args=(sock,), daemon=True
            )
            thread.start()

    def _serve_connection(self, sock: socket.socket) -> None:
        try:
            first = sock.recv(4, socket.MSG_PEEK)
        except OSError:
            sock.close()
            return
        if first.startswith(b"GET"):
            transport = _upgrade_websocket(sock)
            if transport is None:
                sock.close()
                return
        else:
            transport = _NdjsonTransport(sock)
        conn = _Connection(self, transport)
        self._connections.append(conn)
        try:
            conn.run()
        finally:
            conn.closed = True
            transport.close()
            if conn in self._connections:
                self._connections.remove(conn)

    def stop(self) -> None:
        """Close the listener, end sessions, flush transcripts."""
        self._stopping = True
        try:
            self._sock.close()
        except OSError:
            pass
        for conn in list(self._connections):
            conn.closed = True
            conn.transport.close()
        self.registry.terminate_all()
        if self.transcript_dir is not None:
            self.transcript_dir.mkdir(parents=True, exist_ok=True)
            for session in self.registry.all():
                persist_transcript(
                    session.events, self.transcript_dir / f"{session.id}.jsonl"
                )


# ---------------------------------------------------------------------------
# Client


class WireClient:
    """Blocking newline-delimited client for the wire protocol."""

    def __init__(self, host: str, port: int, timeout: float | None = 10.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._transport = _NdjsonTransport(self._sock)

    def send(self, msg: WireMessage) -> None:
        self._transport.send_message(encode_message(msg))

    def recv(self) -> WireMessage | None:
        """Next server message, or None on EOF."""
        line = self._transport.recv_message()
        if line is None:
            return None
        return decode_message(line)

    def recv_until(self, *types: str) -> list[WireMessage]:
        """Collect messages until one of the given types arrives (inclusive)."""
        out: list[WireMessage] = []
        while True:
            msg = self.recv()
            if msg is None:
                return out
            out.append(msg)
            if msg.type in types:
                return out

    def settimeout(self, timeout: float | None) -> None:
        self._sock.settimeout(timeout)

    def close(self) -> None:
        self._transport.close()
