from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from kevlar.errors import FrameTooLargeError, InvalidBase64Error, InvalidFrameError
from kevlar.wire import (
    KNOWN_OPS,
    MAX_FRAME,
    WireFrame,
    base64_decode,
    base64_decode_length,
    base64_encode,
    frame_parse,
    frame_serialize,
)

# RFC 4648 section 10 test vectors.
VECTORS = [
    (b"", ""),
    (b"f", "Zg=="),
    (b"fo", "Zm8="),
    (b"foo", "Zm9v"),
    (b"foob", "Zm9vYg=="),
    (b"fooba", "Zm9vYmE="),
    (b"foobar", "Zm9vYmFy"),
]

INVALID_B64 = [
    "Zg=",        # bad padding length
    "Zg",         # missing padding
    "Zg==!",      # non-alphabet byte
    "Zh==",       # non-canonical trailing bits
    "Zm9=",       # non-canonical trailing bits (one pad)
    "Zg==Zg==",   # embedded padding
    "====",
    "Z===",
    "=",
    "Zm9v\n",     # whitespace
    " Zg==",
    "Zg\x00==",
]


@pytest.mark.parametrize("raw,encoded", VECTORS)
def test_encode_vectors(raw, encoded):
    assert base64_encode(raw) == encoded


@pytest.mark.parametrize("raw,encoded", VECTORS)
def test_decode_vectors(raw, encoded):
    assert base64_decode(encoded) == raw


@pytest.mark.parametrize("text", INVALID_B64)
def test_decode_rejects_invalid(text):
    with pytest.raises(InvalidBase64Error):
        base64_decode(text)
    with pytest.raises(InvalidBase64Error):
        base64_decode_length(text)


@pytest.mark.parametrize(
    "text,length", [("Zg==", 1), ("Zm8=", 2), ("Zm9vYmFy", 6), ("", 0)]
)
def test_decode_length_vectors(text, length):
    assert base64_decode_length(text) == length


@given(st.binary(max_size=8192))
def test_roundtrip(data):
    text = base64_encode(data)
    assert base64_decode(text) == data
    assert base64_decode_length(text) == len(data)


def test_roundtrip_large():
    data = bytes(range(256)) * 400  # 100 KiB
    assert base64_decode(base64_encode(data)) == data


@given(st.text(alphabet="ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/=", max_size=64))
def test_decode_accepts_exactly_the_image_of_encode(text):
    # Decode either rejects, or the input was a canonical encoding.
    try:
        data = base64_decode(text)
    except InvalidBase64Error:
        return
    assert base64_encode(data) == text


# --- frames -----------------------------------------------------------


def test_frame_vectors():
    assert frame_serialize(WireFrame("PING")) == b"PING\n"
    assert frame_serialize(WireFrame("QUERY", (b"f",))) == b"QUERY|Zg==\n"
    b1, b2 = b"foob", b"x" * 5
    expected = f"OK|{base64_encode(b1)}|{base64_encode(b2)}\n".encode()
    assert frame_serialize(WireFrame("OK", (b1, b2))) == expected


def test_frame_parse_vectors():
    assert frame_parse(b"PING\n") == WireFrame("PING")
    assert frame_parse(b"QUERY|Zg==\n") == WireFrame("QUERY", (b"f",))
    assert frame_parse(b"OK|Zg==|Zm8=\n") == WireFrame("OK", (b"f", b"fo"))


def test_frame_empty_field_is_distinct():
    assert frame_parse(b"PING|\n") == WireFrame("PING", (b"",))
    assert frame_serialize(WireFrame("PING", (b"",))) == b"PING|\n"


def test_frame_unknown_op_passes_through():
    assert frame_parse(b"XYZ|Zg==\n").op == "XYZ"


@pytest.mark.parametrize(
    "line",
    [
        b"PING",              # missing newline
        b"PI\nNG\n",          # embedded newline
        b"\n",                # empty op
        b"|Zg==\n",           # empty op with field
        b"ping\n",            # lowercase op
        b"QUERY|Zg\x00==\n",  # non-alphabet byte in field
        b"QUERY|Zg=\n",       # bad padding
        b"PING\xff\n",        # non-ASCII
        b"A" * 40 + b"\n",    # op too long
    ],
)
def test_frame_parse_rejects(line):
    with pytest.raises(InvalidFrameError):
        frame_parse(line)


def test_frame_too_large():
    frame = WireFrame("SAVE", (b"x" * MAX_FRAME,))
    with pytest.raises(FrameTooLargeError):
        frame_serialize(frame)
    small = frame_serialize(WireFrame("SAVE", (b"x" * 64,)), max_frame=1024)
    with pytest.raises(FrameTooLargeError):
        frame_parse(small, max_frame=16)


@given(
    op=st.one_of(st.sampled_from(sorted(KNOWN_OPS)), st.text(alphabet="ABCXYZ", min_size=1, max_size=8)),
    fields=st.lists(st.binary(max_size=200), max_size=5),
)
def test_frame_roundtrip(op, fields):
    frame = WireFrame(op, tuple(fields))
    assert frame_parse(frame_serialize(frame)) == frame


@given(data=st.binary(max_size=60), pos=st.integers(min_value=0),
       replacement=st.sampled_from("ABZabz09+/="))
def test_single_char_mutations_never_alias(data, pos, replacement):
    # Injectivity: a changed encoding either fails or decodes to different bytes.
    text = base64_encode(data)
    if not text:
        return
    pos %= len(text)
    mutated = text[:pos] + replacement + text[pos + 1 :]
    try:
        decoded = base64_decode(mutated)
    except InvalidBase64Error:
        return
    assert mutated == text or decoded != data


# --- golden corpus (the wire ABI as shipped files) -----------------------

_DATA = Path(__file__).parent / "data"


def test_golden_valid_lines_roundtrip():
    blob = (_DATA / "wire_valid.bin").read_bytes()
    lines = [part + b"\n" for part in blob.split(b"\n")[:-1]]
    assert len(lines) >= 10
    for line in lines:
        frame = frame_parse(line)
        assert frame_serialize(frame) == line


def test_golden_invalid_lines_rejected():
    rows = (_DATA / "wire_invalid.hex").read_text().splitlines()
    specimens = [bytes.fromhex(row) for row in rows if row and not row.startswith("#")]
    assert len(specimens) >= 14
    for specimen in specimens:
        with pytest.raises(InvalidFrameError):
            frame_parse(specimen)
