"""Durable sealed object store.

A userspace stand-in for TEE-style trusted storage: every object is one
file holding an AES-256-GCM sealed record, named by the SHA-256 of its
id.  Objects are confidential and tamper-evident at rest, and only a
handle opened with the same 32-byte sealing key can read them back.

On-disk layout of a sealed object:

    [4B magic "KVTZ"][1B version 0x01][12B nonce][ciphertext || 16B tag]

The plaintext record inside the AEAD is ``id_length (4B big-endian) ||
id || value``; magic and version are bound as associated data, so a flip
anywhere in the file fails authentication.  Overwrites go through a
temp-file-then-rename, so a reader never observes a torn record.

The sealing key lives in a keyfile (raw 32 bytes, owner-only); this is
an explicitly weaker stand-in for a hardware-unique key.
"""

from __future__ import annotations

import hashlib
import logging
import os
import struct
import tempfile
from pathlib import Path

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import BadKeyfileError, IntegrityError, NotFoundError, StoreIOError

logger = logging.getLogger(__name__)

MAGIC = b"KVTZ"
VERSION = 1
KEY_SIZE = 32
NONCE_SIZE = 12
TAG_SIZE = 16
OBJECT_SUFFIX = ".kvtz"

_HEADER = MAGIC + bytes([VERSION])
_HEADER_SIZE = len(_HEADER) + NONCE_SIZE


def _load_or_create_key(keyfile: Path) -> bytes:
    if keyfile.exists():
        try:
            key = keyfile.read_bytes()
        except OSError as exc:
            raise StoreIOError(f"cannot read keyfile {keyfile}: {exc}") from exc
        if len(key) != KEY_SIZE:
            raise BadKeyfileError(
                f"keyfile {keyfile} holds {len(key)} bytes, expected {KEY_SIZE}"
            )
        return key
    key = os.urandom(KEY_SIZE)
    try:
        fd = os.open(keyfile, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o600)
        try:
            os.write(fd, key)
        finally:
            os.close(fd)
    except OSError as exc:
        raise StoreIOError(f"cannot create keyfile {keyfile}: {exc}") from exc
    logger.info("generated new sealing key at %s", keyfile)
    return key


def open_store(root_dir: str | Path, keyfile: str | Path) -> "SecureStore":
    """Open (creating if needed) a sealed store rooted at root_dir.

    An absent keyfile is bootstrapped with 32 fresh random bytes and
    owner-only permissions.
    """
    root = Path(root_dir)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StoreIOError(f"cannot create store directory {root}: {exc}") from exc
    key = _load_or_create_key(Path(keyfile))
    return SecureStore(root, key)


class SecureStore:
    """Handle over one store directory, sealed under one key.

    Single-owner: transferable between threads but not meant for
    simultaneous use.  Two handles with different sealing keys cannot
    read each other's objects.
    """

    def __init__(self, root_dir: Path, sealing_key: bytes) -> None:
        if len(sealing_key) != KEY_SIZE:
            raise BadKeyfileError(f"sealing key must be {KEY_SIZE} bytes")
        self._root = Path(root_dir)
        self._aead = AESGCM(sealing_key)
        self._open = True

    @property
    def root_dir(self) -> Path:
        return self._root

    @property
    def is_open(self) -> bool:
        return self._open

    def close(self) -> None:
        self._open = False

    def __enter__(self) -> "SecureStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _check_open(self) -> None:
        if not self._open:
            raise ValueError("store handle is closed")

    def object_path(self, id: bytes) -> Path:
        """Deterministic object location: SHA-256(id) hex under root_dir.

        Hex naming confines any id (including path-hostile bytes) to the
        store directory.
        """
        self._check_open()
        digest = hashlib.sha256(bytes(id)).hexdigest()
        return self._root / (digest + OBJECT_SUFFIX)

    def write_ss(self, id: bytes, value: bytes) -> None:
        """Seal value under id, atomically replacing any previous object."""
        self._check_open()
        id = bytes(id)
        value = bytes(value)
        if not id:
            raise ValueError("id must be non-empty")
        record = struct.pack(">I", len(id)) + id + value
        nonce = os.urandom(NONCE_SIZE)
        sealed = _HEADER + nonce + self._aead.encrypt(nonce, record, _HEADER)
        path = self.object_path(id)
        try:
            fd, tmp = tempfile.mkstemp(dir=self._root, prefix=".write-")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(sealed)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, path)
            except BaseException:
                try:
                    os.unlink(tmp)
                except OSError:
                    pass
                raise
        except OSError as exc:
            raise StoreIOError(f"cannot write object for id {id!r}: {exc}") from exc

    def read_ss(self, id: bytes) -> bytes:
        """Return the most recently written value for id, in cleartext."""
        self._check_open()
        id = bytes(id)
        path = self.object_path(id)
        try:
            blob = path.read_bytes()
        except FileNotFoundError:
            raise NotFoundError(f"no object for id {id!r}") from None
        except OSError as exc:
            raise StoreIOError(f"cannot read object for id {id!r}: {exc}") from exc
        if len(blob) < _HEADER_SIZE + TAG_SIZE or blob[: len(_HEADER)] != _HEADER:
            raise IntegrityError(f"object for id {id!r} is malformed")
        nonce = blob[len(_HEADER) : _HEADER_SIZE]
        try:
            record = self._aead.decrypt(nonce, blob[_HEADER_SIZE:], _HEADER)
        except InvalidTag:
            raise IntegrityError(f"object for id {id!r} failed authentication") from None
        if len(record) < 4:
            raise IntegrityError(f"object for id {id!r} has a truncated record")
        (id_len,) = struct.unpack(">I", record[:4])
        if 4 + id_len > len(record) or record[4 : 4 + id_len] != id:
            raise IntegrityError(f"object for id {id!r} holds a different sealed id")
        return record[4 + id_len :]
