"""Wire protocol: strict base64 field coding and newline-delimited frames.

Everything crossing the TCP boundary is one protocol line:

    OP *("|" BASE64) "\\n"

OP is 1..32 uppercase ASCII letters.  Fields travel base64-encoded, so
the ``|`` delimiter and the ``\\n`` terminator can never occur inside
them.  Decoding is strict: non-alphabet characters, bad padding, and
non-canonical trailing bits are all rejected, which keeps serialize and
parse exact inverses of each other.
"""

from __future__ import annotations

import base64
import binascii
import re
from dataclasses import dataclass

from .errors import FrameTooLargeError, InvalidBase64Error, InvalidFrameError

#: Longest serialized protocol line accepted by default (1 MiB).
MAX_FRAME = 1024 * 1024

OP_SAVE = "SAVE"
OP_QUERY = "QUERY"
OP_REENC = "REENC"
OP_PING = "PING"
OP_QUIT = "QUIT"
OP_OK = "OK"
OP_ERR = "ERR"

#: Operation tags the daemon understands.  frame_parse accepts any tag
#: matching the grammar; rejecting unknown ones is the daemon's job.
KNOWN_OPS = frozenset(
    {OP_SAVE, OP_QUERY, OP_REENC, OP_PING, OP_QUIT, OP_OK, OP_ERR}
)

_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/"
_SYMBOL_VALUE = {c: i for i, c in enumerate(_ALPHABET)}

_B64_RE = re.compile(
    r"\A(?:[A-Za-z0-9+/]{4})*(?:[A-Za-z0-9+/]{2}==|[A-Za-z0-9+/]{3}=)?\Z"
)
_OP_RE = re.compile(r"\A[A-Z]{1,32}\Z")


def _validate_base64(text: str) -> None:
    """Reject anything outside the canonical padded encoding."""
    if not isinstance(text, str):
        raise InvalidBase64Error(f"expected str, got {type(text).__name__}")
    if not _B64_RE.match(text):
        raise InvalidBase64Error("not a canonical base64 string")
    # Canonical form also requires the unused low bits of the final
    # symbol to be zero: 4 bits before "==", 2 bits before "=".
    if text.endswith("=="):
        if _SYMBOL_VALUE[text[-3]] & 0x0F:
            raise InvalidBase64Error("non-canonical trailing bits")
    elif text.endswith("="):
        if _SYMBOL_VALUE[text[-2]] & 0x03:
            raise InvalidBase64Error("non-canonical trailing bits")


def base64_encode(data: bytes) -> str:
    """Encode bytes as canonical padded base64 text."""
    return base64.b64encode(bytes(data)).decode("ascii")


def base64_decode(text: str) -> bytes:
    """Decode canonical base64 text; raises InvalidBase64Error otherwise."""
    _validate_base64(text)
    try:
        return base64.b64decode(text, validate=True)
    except binascii.Error as exc:  # pragma: no cover - caught by validation
        raise InvalidBase64Error(str(exc)) from exc


def base64_decode_length(text: str) -> int:
    """Length of base64_decode(text), computed without decoding."""
    _validate_base64(text)
    if not text:
        return 0
    pad = 2 if text.endswith("==") else 1 if text.endswith("=") else 0
    return len(text) // 4 * 3 - pad


@dataclass(frozen=True)
class WireFrame:
    """One protocol message: an operation tag plus ordered byte fields."""

    op: str
    fields: tuple[bytes, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "fields", tuple(bytes(f) for f in self.fields))


def frame_serialize(frame: WireFrame, *, max_frame: int = MAX_FRAME) -> bytes:
    """Serialize a frame into one newline-terminated protocol line."""
    if not _OP_RE.match(frame.op):
        raise InvalidFrameError(f"illegal op tag: {frame.op!r}")
    parts = [frame.op]
    parts.extend(base64_encode(f) for f in frame.fields)
    line = ("|".join(parts) + "\n").encode("ascii")
    if len(line) > max_frame:
        raise FrameTooLargeError(f"frame is {len(line)} bytes, limit {max_frame}")
    return line


def frame_parse(line: bytes, *, max_frame: int = MAX_FRAME) -> WireFrame:
    """Parse one protocol line back into a WireFrame (inverse of serialize)."""
    if len(line) > max_frame:
        raise FrameTooLargeError(f"frame is {len(line)} bytes, limit {max_frame}")
    if not line.endswith(b"\n"):
        raise InvalidFrameError("missing newline terminator")
    body = line[:-1]
    if b"\n" in body:
        raise InvalidFrameError("embedded newline")
    try:
        text = body.decode("ascii")
    except UnicodeDecodeError as exc:
        raise InvalidFrameError("non-ASCII byte in frame") from exc
    parts = text.split("|")
    op = parts[0]
    if not _OP_RE.match(op):
        raise InvalidFrameError(f"illegal op tag: {op!r}")
    try:
        fields = tuple(base64_decode(p) for p in parts[1:])
    except InvalidBase64Error as exc:
        raise InvalidFrameError(f"invalid base64 field: {exc}") from exc
    return WireFrame(op, fields)
