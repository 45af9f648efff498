"""Long-lived request daemon and its dispatch table.

The daemon is invoked once and then serves cache and re-encryption
requests over the wire protocol until it receives QUIT or a signal.
Exactly one thread owns the cache and processes frames in arrival
order; connection handling happens on reader threads that feed it
through a queue, so responses on a connection are never reordered and
no request input can kill the serving loop.

In reverse-connect mode (the default) the daemon dials out to the
untrusted peer's listening socket, retrying until it appears, and
redials after the peer hangs up.  LISTEN mode binds a socket and serves
any number of peers, one request at a time.

Graceful shutdown has nothing to flush: the cache is write-through.
"""

from __future__ import annotations

import argparse
import contextlib
import enum
import logging
import os
import queue
import signal
import sys
import threading
from dataclasses import dataclass
from pathlib import Path

from . import crypto
from .cache import Cache, CacheConfig, Policy, init_cache
from .errors import (
    BadPaddingError,
    FrameTooLargeError,
    IdTooLongError,
    InvalidFrameError,
    KevlarError,
    MalformedEnvelopeError,
    NotFoundError,
    StoreError,
    TransportError,
    ValueTooLongError,
)
from .store import open_store
from .transport import (
    Connection,
    ConnectionMode,
    Endpoint,
    Listener,
    connect,
    parse_hostport,
)
from .wire import (
    MAX_FRAME,
    OP_ERR,
    OP_OK,
    OP_PING,
    OP_QUERY,
    OP_QUIT,
    OP_REENC,
    OP_SAVE,
    WireFrame,
    frame_parse,
    frame_serialize,
)

logger = logging.getLogger(__name__)


class ErrorCode(enum.Enum):
    """Wire-level failure classes; every failed request maps to one."""

    NOT_FOUND = "NOT_FOUND"
    BAD_REQUEST = "BAD_REQUEST"
    CRYPTO_FAIL = "CRYPTO_FAIL"
    STORE_FAIL = "STORE_FAIL"
    TOO_LARGE = "TOO_LARGE"


@dataclass(frozen=True)
class DaemonConfig:
    endpoint: Endpoint
    store_dir: Path
    keyfile: Path
    cache: CacheConfig
    max_frame: int = MAX_FRAME
    connect_timeout: float = 1.0
    retry_interval: float = 0.05


def _ok(*fields: bytes) -> WireFrame:
    return WireFrame(OP_OK, fields)


def _err(code: ErrorCode, detail: str) -> WireFrame:
    return WireFrame(OP_ERR, (code.value.encode("ascii"), detail.encode("utf-8")))


class _BadArity(Exception):
    pass


def _expect(fields: tuple[bytes, ...], count: int, op: str) -> None:
    if len(fields) != count:
        raise _BadArity(f"{op} expects {count} field(s), got {len(fields)}")


def dispatch(frame: WireFrame, cache: Cache) -> WireFrame:
    """Map one request frame to its response frame.

    Never raises for request-level problems; those become ERR frames.
    For REENC the stored values are used as keys in place and appear in
    no response or log.
    """
    op, fields = frame.op, frame.fields
    try:
        if op == OP_PING or op == OP_QUIT:
            _expect(fields, 0, op)
            return _ok()
        if op == OP_SAVE:
            _expect(fields, 2, op)
            cache.save_object(fields[0], fields[1])
            return _ok()
        if op == OP_QUERY:
            _expect(fields, 1, op)
            return _ok(cache.query(fields[0]))
        if op == OP_REENC:
            _expect(fields, 3, op)
            src_key = cache.query(fields[0])
            dst_key = cache.query(fields[1])
            if len(src_key) != crypto.KEY_SIZE or len(dst_key) != crypto.KEY_SIZE:
                return _err(ErrorCode.CRYPTO_FAIL, "stored value is not a 32-byte key")
            envelope = crypto.CipherEnvelope.from_bytes(fields[2])
            return _ok(crypto.reencrypt(src_key, dst_key, envelope).to_bytes())
        return _err(ErrorCode.BAD_REQUEST, f"unknown op {op}")
    except _BadArity as exc:
        return _err(ErrorCode.BAD_REQUEST, str(exc))
    except (IdTooLongError, ValueTooLongError) as exc:
        return _err(ErrorCode.TOO_LARGE, str(exc))
    except NotFoundError as exc:
        return _err(ErrorCode.NOT_FOUND, str(exc))
    except (BadPaddingError, MalformedEnvelopeError) as exc:
        return _err(ErrorCode.CRYPTO_FAIL, str(exc))
    except StoreError as exc:
        return _err(ErrorCode.STORE_FAIL, str(exc))
    except ValueError as exc:
        return _err(ErrorCode.BAD_REQUEST, str(exc))


class Daemon:
    """One store, one cache, one request-processing thread.

    Usage: construct, start() (spawns the connection source), then
    serve_forever() on the thread that is to own the cache.
    """

    def __init__(self, config: DaemonConfig) -> None:
        self.config = config
        self._store = open_store(config.store_dir, config.keyfile)
        self._cache = init_cache(config.cache, self._store)
        self._queue: queue.Queue = queue.Queue()
        self._stop = threading.Event()
        self._conns: set[Connection] = set()
        self._conns_lock = threading.Lock()
        self._listener: Listener | None = None
        self._threads: list[threading.Thread] = []

    @property
    def address(self) -> tuple[str, int]:
        """The endpoint in use; in LISTEN mode the actually bound one."""
        if self._listener is not None:
            return (self._listener.host, self._listener.port)
        return (self.config.endpoint.host, self.config.endpoint.port)

    @property
    def cache(self) -> Cache:
        return self._cache

    def start(self) -> None:
        endpoint = self.config.endpoint
        if endpoint.mode is ConnectionMode.LISTEN:
            self._listener = Listener(endpoint.host, endpoint.port)
            source = threading.Thread(target=self._acceptor, name="kevlar-accept", daemon=True)
        else:
            source = threading.Thread(target=self._dialer, name="kevlar-dial", daemon=True)
        source.start()
        self._threads.append(source)

    def serve_forever(self) -> None:
        """Process frames in arrival order until QUIT or shutdown()."""
        while not self._stop.is_set():
            try:
                kind, conn, payload = self._queue.get(timeout=0.1)
            except queue.Empty:
                continue
            if kind == "closed":
                with self._conns_lock:
                    self._conns.discard(conn)
                continue
            self._handle_frame(conn, payload)

    def shutdown(self) -> None:
        """Stop serving and close every connection; safe from any thread."""
        self._stop.set()
        if self._listener is not None:
            self._listener.close()
        with self._conns_lock:
            conns = list(self._conns)
        for conn in conns:
            conn.close()

    def close(self) -> None:
        self._cache.free()
        self._store.close()

    # -- internals ---------------------------------------------------------

    def _handle_frame(self, conn: Connection, raw: bytes) -> None:
        try:
            frame = frame_parse(raw, max_frame=self.config.max_frame)
        except InvalidFrameError as exc:
            logger.debug("rejecting malformed frame from %s: %s", conn.peer, exc)
            self._respond(conn, _err(ErrorCode.BAD_REQUEST, str(exc)))
            return
        response = dispatch(frame, self._cache)
        logger.debug("%s %s -> %s", conn.peer, frame.op, response.op)
        self._respond(conn, response)
        if frame.op == OP_QUIT and response.op == OP_OK:
            logger.info("QUIT received, shutting down")
            self.shutdown()

    def _respond(self, conn: Connection, response: WireFrame) -> None:
        try:
            data = frame_serialize(response, max_frame=self.config.max_frame)
        except InvalidFrameError:
            data = frame_serialize(_err(ErrorCode.TOO_LARGE, "response exceeds frame limit"))
        try:
            conn.send(data)
        except TransportError:
            conn.close()

    def _register(self, conn: Connection) -> None:
        with self._conns_lock:
            self._conns.add(conn)

    def _read_loop(self, conn: Connection) -> None:
        logger.debug("serving %s", conn.peer)
        while True:
            try:
                raw = conn.receive_frame()
            except FrameTooLargeError as exc:
                # Protocol violation: receive_frame already closed the line.
                logger.warning("dropping %s: %s", conn.peer, exc)
                break
            except TransportError as exc:
                logger.debug("connection %s done: %s", conn.peer, exc)
                conn.close()
                break
            self._queue.put(("frame", conn, raw))
        self._queue.put(("closed", conn, b""))

    def _acceptor(self) -> None:
        assert self._listener is not None
        while not self._stop.is_set():
            try:
                conn = self._listener.accept(timeout=0.2, max_frame=self.config.max_frame)
            except TransportError:
                continue
            self._register(conn)
            reader = threading.Thread(
                target=self._read_loop, args=(conn,), name="kevlar-read", daemon=True
            )
            reader.start()
            self._threads.append(reader)

    def _dialer(self) -> None:
        endpoint = self.config.endpoint
        while not self._stop.is_set():
            try:
                conn = connect(
                    endpoint.host,
                    endpoint.port,
                    timeout=self.config.connect_timeout,
                    max_frame=self.config.max_frame,
                )
            except TransportError:
                self._stop.wait(self.config.retry_interval)
                continue
            self._register(conn)
            self._read_loop(conn)


@contextlib.contextmanager
def daemon_in_thread(config: DaemonConfig):
    """Run a daemon on a background thread (tests and benches)."""
    daemon = Daemon(config)
    daemon.start()
    thread = threading.Thread(target=daemon.serve_forever, name="kevlar-serve", daemon=True)
    thread.start()
    try:
        yield daemon
    finally:
        daemon.shutdown()
        thread.join(timeout=5)
        daemon.close()


def run_daemon(config: DaemonConfig, *, handle_signals: bool = False, announce=None) -> int:
    """Open the store, build the cache, and serve until QUIT or signal.

    Returns 0 after a graceful stop; startup failures log a diagnostic
    and return 1.  Per-request failures never end the loop.
    """
    try:
        daemon = Daemon(config)
        daemon.start()
    except (KevlarError, OSError) as exc:
        print(f"kevlar-daemon: startup failed: {exc}", file=sys.stderr)
        return 1
    if handle_signals:
        for sig in (signal.SIGINT, signal.SIGTERM):
            signal.signal(sig, lambda *_: daemon.shutdown())
    if announce is not None:
        announce(daemon)
    try:
        daemon.serve_forever()
    finally:
        daemon.close()
    return 0


def _env(name: str, fallback: str) -> str:
    return os.environ.get(f"KEVLAR_{name}", fallback)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kevlar-daemon",
        description="Serve cache and re-encryption requests over the wire protocol.",
    )
    parser.add_argument("--endpoint", default=_env("ENDPOINT", "127.0.0.1:7600"),
                        help="HOST:PORT to dial (reverse mode) or bind (listen mode)")
    parser.add_argument("--mode", choices=("reverse", "listen"),
                        default=_env("MODE", "reverse"),
                        help="reverse: dial out to the peer's socket (default); listen: bind and accept")
    parser.add_argument("--store-dir", default=_env("STORE_DIR", "./kevlar-store"))
    parser.add_argument("--keyfile", default=_env("KEYFILE", "./kevlar.key"))
    parser.add_argument("--capacity", type=int, default=_env("CAPACITY", "128"))
    parser.add_argument("--buckets", type=int, default=_env("BUCKETS", "64"))
    parser.add_argument("--id-size", type=int, default=_env("ID_SIZE", "128"))
    parser.add_argument("--value-size", type=int, default=_env("VALUE_SIZE", "65536"))
    parser.add_argument("--policy", choices=("lru", "fifo"), default=_env("POLICY", "lru"))
    parser.add_argument("--max-frame", type=int, default=_env("MAX_FRAME", str(MAX_FRAME)))
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        host, port = parse_hostport(args.endpoint)
        mode = ConnectionMode.LISTEN if args.mode == "listen" else ConnectionMode.REVERSE_CONNECT
        config = DaemonConfig(
            endpoint=Endpoint(host, port, mode),
            store_dir=Path(args.store_dir),
            keyfile=Path(args.keyfile),
            cache=CacheConfig(
                capacity=args.capacity,
                bucket_count=args.buckets,
                id_size=args.id_size,
                value_size=args.value_size,
                policy=Policy(args.policy),
            ),
            max_frame=args.max_frame,
        )
    except (KevlarError, ValueError) as exc:
        parser.error(str(exc))

    def announce(daemon: Daemon) -> None:
        host, port = daemon.address
        verb = "listening on" if mode is ConnectionMode.LISTEN else "reverse-connecting to"
        print(f"kevlar-daemon: {verb} {host}:{port}", flush=True)

    return run_daemon(config, handle_signals=True, announce=announce)


if __name__ == "__main__":
    sys.exit(main())
