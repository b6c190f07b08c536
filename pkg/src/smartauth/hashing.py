"""Digest arithmetic, unambiguous input framing, and counted hashing.

Every protocol value is a fixed-width digest.  Multi-part hash inputs are
framed with a 4-byte big-endian length prefix per part before hashing, so
two different part lists can never collide by concatenation (``h(a, b)``
and ``h(ab)`` see different input bytes).  Toy digest widths (1 and 2
bytes) exist only so oracle tests can enumerate the full value space.
"""

from __future__ import annotations

import hashlib
import random
import struct
from dataclasses import dataclass

SALT_SIZE = 16
MAX_PART_SIZE = 2**32 - 1

DIGEST_SIZES = {
    "sha256": 32,
    "toy8": 1,
    "toy16": 2,
}


class DigestLengthError(ValueError):
    """Raised when XOR is applied to digests of different widths."""


class OversizedPartError(ValueError):
    """Raised when a hash-input part does not fit a 4-byte length prefix."""


@dataclass(frozen=True)
class Digest:
    """An immutable fixed-width byte string supporting XOR masking."""

    value: bytes

    def __xor__(self, other: "Digest") -> "Digest":
        if not isinstance(other, Digest):
            return NotImplemented
        if len(self.value) != len(other.value):
            raise DigestLengthError(
                f"cannot xor digests of {len(self.value)} and {len(other.value)} bytes"
            )
        return Digest(bytes(a ^ b for a, b in zip(self.value, other.value)))

    def hex(self) -> str:
        return self.value.hex()

    def __bytes__(self) -> bytes:
        return self.value

    def __len__(self) -> int:
        return len(self.value)

    def __repr__(self) -> str:
        return f"Digest({self.value.hex()})"

    @classmethod
    def zero(cls, size: int) -> "Digest":
        return cls(bytes(size))


def encode_parts(parts: "list[bytes] | tuple[bytes, ...]") -> bytes:
    """Frame a sequence of byte strings into one unambiguous input.

    Each part is preceded by its length as a 4-byte big-endian integer,
    which makes the encoding injective over part lists.
    """
    chunks = []
    for part in parts:
        if len(part) > MAX_PART_SIZE:
            raise OversizedPartError(f"part of {len(part)} bytes exceeds the length prefix")
        chunks.append(struct.pack(">I", len(part)))
        chunks.append(part)
    return b"".join(chunks)


@dataclass(frozen=True)
class HashConfig:
    """Hash selection plus whether calls are counted.

    ``algorithm`` is one of ``sha256`` (the default, 32-byte digests) or
    the truncated toy variants ``toy8``/``toy16`` used only by exhaustive
    oracle tests.
    """

    algorithm: str = "sha256"
    count_calls: bool = True

    def __post_init__(self) -> None:
        if self.algorithm not in DIGEST_SIZES:
            raise ValueError(f"unknown hash algorithm {self.algorithm!r}")

    @property
    def digest_size(self) -> int:
        return DIGEST_SIZES[self.algorithm]


class Hasher:
    """Hash front end with a per-instance invocation counter.

    ``hash`` accepts any mix of ``bytes`` and ``Digest`` parts, frames
    them, and truncates sha256 to the configured width.  The counter
    increments by exactly one per ``hash`` call while counting is
    enabled; ``hash_uncounted`` computes the same digest without
    touching the counter (used for the biometric gate, which the cost
    accounting excludes).
    """

    def __init__(self, config: HashConfig | None = None) -> None:
        self.config = config or HashConfig()
        self.count = 0

    @property
    def digest_size(self) -> int:
        return self.config.digest_size

    def hash(self, *parts: "bytes | Digest") -> Digest:
        if self.config.count_calls:
            self.count += 1
        return self.hash_uncounted(*parts)

    def hash_uncounted(self, *parts: "bytes | Digest") -> Digest:
        raw = [bytes(p) if isinstance(p, Digest) else p for p in parts]
        full = hashlib.sha256(encode_parts(raw)).digest()
        return Digest(full[: self.digest_size])

    def reset_count(self) -> None:
        self.count = 0


class DigestRng:
    """Deterministic source of protocol nonces and registration salts.

    The same seed always yields the same draw sequence, which is what
    makes scenario transcripts reproducible byte for byte.
    """

    def __init__(self, seed: int, digest_size: int) -> None:
        self.digest_size = digest_size
        self._rng = random.Random(seed)

    def digest(self) -> Digest:
        return Digest(self._rng.randbytes(self.digest_size))

    def salt(self) -> bytes:
        return self._rng.randbytes(SALT_SIZE)
