"""Symmetric payload encryption and in-place key rotation.

AES-256-CBC with PKCS#7 padding, the IV carried alongside the body.
The envelope is deliberately unauthenticated: it is the legacy wire
format of the systems this daemon serves, and a wrong key surfaces only
as a (probabilistic) padding failure.  The sealed store is the
authenticated tier.

reencrypt() changes the key of a cipher without the plaintext ever
leaving this module: it exists only as a local variable between the
inner decrypt and the outer encrypt.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from cryptography.hazmat.primitives import padding
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import BadPaddingError, MalformedEnvelopeError

KEY_SIZE = 32
IV_SIZE = 16
BLOCK_SIZE = 16


def generate_key() -> bytes:
    """Fresh random 32-byte AES-256 key."""
    return os.urandom(KEY_SIZE)


def _check_key(key: bytes) -> bytes:
    key = bytes(key)
    if len(key) != KEY_SIZE:
        raise ValueError(f"key must be exactly {KEY_SIZE} bytes, got {len(key)}")
    return key


@dataclass(frozen=True)
class CipherEnvelope:
    """IV plus CBC body; body length is a positive multiple of 16."""

    iv: bytes
    body: bytes

    def __post_init__(self) -> None:
        object.__setattr__(self, "iv", bytes(self.iv))
        object.__setattr__(self, "body", bytes(self.body))
        if len(self.iv) != IV_SIZE:
            raise MalformedEnvelopeError(f"iv must be {IV_SIZE} bytes, got {len(self.iv)}")
        if len(self.body) < BLOCK_SIZE or len(self.body) % BLOCK_SIZE:
            raise MalformedEnvelopeError(
                f"body length {len(self.body)} is not a positive multiple of {BLOCK_SIZE}"
            )

    def to_bytes(self) -> bytes:
        """Wire form: iv || body (framing belongs to the wire layer)."""
        return self.iv + self.body

    @classmethod
    def from_bytes(cls, data: bytes) -> CipherEnvelope:
        data = bytes(data)
        if len(data) < IV_SIZE + BLOCK_SIZE:
            raise MalformedEnvelopeError(f"envelope too short: {len(data)} bytes")
        return cls(data[:IV_SIZE], data[IV_SIZE:])


def encrypt(key: bytes, plaintext: bytes) -> CipherEnvelope:
    """Encrypt plaintext under a fresh random IV.

    PKCS#7 always pads, so the body is one block longer than the
    plaintext rounded down to a block boundary: len(body) =
    (len(plaintext)//16 + 1) * 16.
    """
    key = _check_key(key)
    iv = os.urandom(IV_SIZE)
    padder = padding.PKCS7(BLOCK_SIZE * 8).padder()
    padded = padder.update(bytes(plaintext)) + padder.finalize()
    encryptor = Cipher(algorithms.AES(key), modes.CBC(iv)).encryptor()
    return CipherEnvelope(iv, encryptor.update(padded) + encryptor.finalize())


def decrypt(key: bytes, envelope: CipherEnvelope) -> bytes:
    """Invert encrypt() under the same key, with strict padding checks.

    Padding validation is probabilistic tamper detection only: a wrong
    key slips through roughly once in 256 attempts and yields garbage.
    """
    key = _check_key(key)
    decryptor = Cipher(algorithms.AES(key), modes.CBC(envelope.iv)).decryptor()
    padded = decryptor.update(envelope.body) + decryptor.finalize()
    unpadder = padding.PKCS7(BLOCK_SIZE * 8).unpadder()
    try:
        return unpadder.update(padded) + unpadder.finalize()
    except ValueError as exc:
        raise BadPaddingError("invalid padding after decryption") from exc


def reencrypt(key_from: bytes, key_to: bytes, envelope: CipherEnvelope) -> CipherEnvelope:
    """Decrypt under key_from and encrypt under key_to with a fresh IV."""
    return encrypt(key_to, decrypt(key_from, envelope))
