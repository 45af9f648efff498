"""TCP plumbing with newline-framed message extraction.

The native connection model is reverse connect: the trusted daemon
dials out to a socket the untrusted peer listens on.  LISTEN mode
(bind, accept one peer) exists for tests and benches.

A Connection is single-owner.  Frame extraction is exactly the
newline-split of the byte stream, regardless of TCP segmentation, and
the receive buffer is bounded by max_frame.
"""

from __future__ import annotations

import enum
import socket
from dataclasses import dataclass

from .errors import (
    BindFailureError,
    ConnectRefusedError,
    ConnectTimeoutError,
    FrameTooLargeError,
    PeerClosedError,
    TransportError,
)
from .wire import MAX_FRAME

_RECV_CHUNK = 65536


class ConnectionMode(enum.Enum):
    REVERSE_CONNECT = "reverse"
    LISTEN = "listen"


@dataclass(frozen=True)
class Endpoint:
    """One side of the TCP rendezvous."""

    host: str
    port: int
    mode: ConnectionMode = ConnectionMode.REVERSE_CONNECT

    def __post_init__(self) -> None:
        # Port 0 is allowed only when binding (ephemeral pick).
        low = 0 if self.mode is ConnectionMode.LISTEN else 1
        if not (low <= self.port <= 65535):
            raise ValueError(f"port out of range: {self.port}")


def parse_hostport(text: str) -> tuple[str, int]:
    """Split a HOST:PORT string; raises ValueError on anything else."""
    host, sep, port = text.rpartition(":")
    if not sep or not host:
        raise ValueError(f"endpoint must be HOST:PORT, got {text!r}")
    return host, int(port)


class Connection:
    """One open TCP connection with buffered frame extraction."""

    def __init__(self, sock: socket.socket, *, max_frame: int = MAX_FRAME) -> None:
        sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        sock.settimeout(None)
        self._sock = sock
        self._max_frame = max_frame
        self._buf = bytearray()
        self._open = True
        try:
            self._peer = "%s:%d" % sock.getpeername()[:2]
        except OSError:
            self._peer = "?"

    @property
    def is_open(self) -> bool:
        return self._open

    @property
    def peer(self) -> str:
        return self._peer

    def send(self, data: bytes) -> None:
        """Write all bytes, preserving order; short writes are retried."""
        if not self._open:
            raise PeerClosedError("connection is closed")
        try:
            self._sock.sendall(data)
        except (BrokenPipeError, ConnectionResetError) as exc:
            self.close()
            raise PeerClosedError(f"peer closed during send: {exc}") from exc
        except OSError as exc:
            self.close()
            raise TransportError(f"send failed: {exc}") from exc

    def receive_frame(self) -> bytes:
        """Block until one newline-terminated line is buffered; return it.

        The terminator is included; bytes after it stay buffered for the
        next call.  More than max_frame bytes without a newline is a
        protocol violation: the connection is closed.
        """
        if not self._open:
            raise PeerClosedError("connection is closed")
        while True:
            idx = self._buf.find(b"\n")
            if idx != -1:
                frame = bytes(self._buf[: idx + 1])
                del self._buf[: idx + 1]
                if len(frame) > self._max_frame:
                    self.close()
                    raise FrameTooLargeError(
                        f"frame is {len(frame)} bytes, limit {self._max_frame}"
                    )
                return frame
            if len(self._buf) > self._max_frame:
                self.close()
                raise FrameTooLargeError(
                    f"{len(self._buf)} buffered bytes without a terminator"
                )
            self._fill()

    def receive_exact(self, n: int) -> bytes:
        """Block until exactly n bytes are available and return them."""
        if not self._open:
            raise PeerClosedError("connection is closed")
        while len(self._buf) < n:
            self._fill()
        out = bytes(self._buf[:n])
        del self._buf[:n]
        return out

    def _fill(self) -> None:
        if not self._open:
            raise PeerClosedError("connection is closed")
        try:
            chunk = self._sock.recv(_RECV_CHUNK)
        except OSError as exc:
            was_open = self._open
            self.close()
            if not was_open:
                raise PeerClosedError("connection closed locally") from exc
            raise TransportError(f"recv failed: {exc}") from exc
        if not chunk:
            self.close()
            where = "mid-frame" if self._buf else "between frames"
            raise PeerClosedError(f"peer closed connection {where}")
        self._buf.extend(chunk)

    def close(self) -> None:
        """Idempotent; the peer observes EOF."""
        if not self._open:
            return
        self._open = False
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()

    def __enter__(self) -> "Connection":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class Listener:
    """Bound server socket handing out Connections one accept at a time."""

    def __init__(self, host: str, port: int, *, backlog: int = 16) -> None:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind((host, port))
            sock.listen(backlog)
        except OSError as exc:
            sock.close()
            raise BindFailureError(f"cannot bind {host}:{port}: {exc}") from exc
        self._sock = sock
        self.host, self.port = sock.getsockname()[:2]

    def accept(self, timeout: float | None = None, *, max_frame: int = MAX_FRAME) -> Connection:
        self._sock.settimeout(timeout)
        try:
            peer_sock, _ = self._sock.accept()
        except socket.timeout as exc:
            raise ConnectTimeoutError("timed out waiting for a peer") from exc
        except OSError as exc:
            raise TransportError(f"accept failed: {exc}") from exc
        return Connection(peer_sock, max_frame=max_frame)

    def close(self) -> None:
        self._sock.close()

    def __enter__(self) -> "Listener":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def connect(
    host: str,
    port: int,
    *,
    timeout: float | None = None,
    max_frame: int = MAX_FRAME,
) -> Connection:
    """Dial out to (host, port), blocking up to timeout."""
    try:
        sock = socket.create_connection((host, port), timeout=timeout)
    except ConnectionRefusedError as exc:
        raise ConnectRefusedError(f"{host}:{port} refused the connection") from exc
    except (socket.timeout, TimeoutError) as exc:
        raise ConnectTimeoutError(f"connecting to {host}:{port} timed out") from exc
    except OSError as exc:
        raise TransportError(f"cannot connect to {host}:{port}: {exc}") from exc
    return Connection(sock, max_frame=max_frame)


def net_connect(
    endpoint: Endpoint,
    *,
    timeout: float | None = None,
    max_frame: int = MAX_FRAME,
) -> Connection:
    """Establish one connection per the endpoint's mode.

    REVERSE_CONNECT dials out; LISTEN binds, accepts exactly one peer
    and returns that connection.
    """
    if endpoint.mode is ConnectionMode.REVERSE_CONNECT:
        return connect(endpoint.host, endpoint.port, timeout=timeout, max_frame=max_frame)
    with Listener(endpoint.host, endpoint.port) as listener:
        return listener.accept(timeout, max_frame=max_frame)


def net_send(conn: Connection, data: bytes) -> None:
    conn.send(data)


def net_receive_frame(conn: Connection) -> bytes:
    return conn.receive_frame()


def net_disconnect(conn: Connection) -> None:
    conn.close()
