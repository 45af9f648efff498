"""Independent AES-256-CBC / PKCS#7 reference, used only as a test oracle.

Everything is derived from first principles (GF(2^8) arithmetic, the
affine S-box construction, the round structure) rather than copied
tables, so it shares no code path with the implementation under test.
It is deliberately slow; tests pin it to published NIST vectors before
trusting it.
"""

from __future__ import annotations

BLOCK = 16


def _gf_mul(a: int, b: int) -> int:
    p = 0
    for _ in range(8):
        if b & 1:
            p ^= a
        hi = a & 0x80
        a = (a << 1) & 0xFF
        if hi:
            a ^= 0x1B
        b >>= 1
    return p


def _gf_inv(a: int) -> int:
    if a == 0:
        return 0
    for x in range(1, 256):
        if _gf_mul(a, x) == 1:
            return x
    raise ArithmeticError("unreachable")


def _rotl8(x: int, n: int) -> int:
    return ((x << n) | (x >> (8 - n))) & 0xFF


def _build_sbox() -> tuple[list[int], list[int]]:
    sbox = [0] * 256
    for x in range(256):
        b = _gf_inv(x)
        sbox[x] = b ^ _rotl8(b, 1) ^ _rotl8(b, 2) ^ _rotl8(b, 3) ^ _rotl8(b, 4) ^ 0x63
    inv = [0] * 256
    for x, s in enumerate(sbox):
        inv[s] = x
    return sbox, inv


_SBOX, _INV_SBOX = _build_sbox()


def _expand_key(key: bytes) -> list[bytes]:
    """AES-256 schedule: 15 round keys of 16 bytes."""
    if len(key) != 32:
        raise ValueError("reference oracle is AES-256 only")
    nk, rounds = 8, 14
    words = [list(key[4 * i : 4 * i + 4]) for i in range(nk)]
    rcon = 1
    for i in range(nk, 4 * (rounds + 1)):
        temp = list(words[i - 1])
        if i % nk == 0:
            temp = temp[1:] + temp[:1]
            temp = [_SBOX[b] for b in temp]
            temp[0] ^= rcon
            rcon = _gf_mul(rcon, 2)
        elif i % nk == 4:
            temp = [_SBOX[b] for b in temp]
        words.append([w ^ t for w, t in zip(words[i - nk], temp)])
    return [bytes(sum((words[4 * r + c] for c in range(4)), [])) for r in range(rounds + 1)]


def _xor(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b))


def _shift_rows(s: bytes) -> bytes:
    return bytes(s[r + 4 * ((c + r) % 4)] for c in range(4) for r in range(4))


def _inv_shift_rows(s: bytes) -> bytes:
    return bytes(s[r + 4 * ((c - r) % 4)] for c in range(4) for r in range(4))


def _mix_columns(s: bytes, inverse: bool = False) -> bytes:
    m = (14, 11, 13, 9) if inverse else (2, 3, 1, 1)
    out = bytearray(16)
    for c in range(4):
        col = s[4 * c : 4 * c + 4]
        for r in range(4):
            out[4 * c + r] = (
                _gf_mul(col[0], m[(0 - r) % 4])
                ^ _gf_mul(col[1], m[(1 - r) % 4])
                ^ _gf_mul(col[2], m[(2 - r) % 4])
                ^ _gf_mul(col[3], m[(3 - r) % 4])
            )
    return bytes(out)


def encrypt_block(key: bytes, block: bytes) -> bytes:
    rk = _expand_key(key)
    s = _xor(block, rk[0])
    for r in range(1, 14):
        s = bytes(_SBOX[b] for b in s)
        s = _shift_rows(s)
        s = _mix_columns(s)
        s = _xor(s, rk[r])
    s = bytes(_SBOX[b] for b in s)
    s = _shift_rows(s)
    return _xor(s, rk[14])


def decrypt_block(key: bytes, block: bytes) -> bytes:
    rk = _expand_key(key)
    s = _xor(block, rk[14])
    for r in range(13, 0, -1):
        s = _inv_shift_rows(s)
        s = bytes(_INV_SBOX[b] for b in s)
        s = _xor(s, rk[r])
        s = _mix_columns(s, inverse=True)
    s = _inv_shift_rows(s)
    s = bytes(_INV_SBOX[b] for b in s)
    return _xor(s, rk[0])


def pkcs7_pad(data: bytes) -> bytes:
    n = BLOCK - len(data) % BLOCK
    return data + bytes([n]) * n


def pkcs7_unpad(data: bytes) -> bytes:
    if not data or len(data) % BLOCK:
        raise ValueError("bad length")
    n = data[-1]
    if not 1 <= n <= BLOCK or data[-n:] != bytes([n]) * n:
        raise ValueError("bad padding")
    return data[:-n]


def cbc_encrypt(key: bytes, iv: bytes, plaintext: bytes) -> bytes:
    """PKCS#7-pad then CBC-encrypt; returns the body only (no IV)."""
    padded = pkcs7_pad(plaintext)
    out = bytearray()
    prev = iv
    for i in range(0, len(padded), BLOCK):
        prev = encrypt_block(key, _xor(padded[i : i + BLOCK], prev))
        out.extend(prev)
    return bytes(out)


def cbc_decrypt(key: bytes, iv: bytes, body: bytes) -> bytes:
    """CBC-decrypt a body and strip PKCS#7 padding strictly."""
    if not body or len(body) % BLOCK:
        raise ValueError("bad body length")
    out = bytearray()
    prev = iv
    for i in range(0, len(body), BLOCK):
        block = body[i : i + BLOCK]
        out.extend(_xor(decrypt_block(key, block), prev))
        prev = block
    return pkcs7_unpad(bytes(out))
