"""Hash primitive and Merlin-chain commitment machinery.

Everything the protocol moves around is a 32-byte digest: chain values,
beacon outputs, block hashes.  Digests are plain ``bytes`` and always
render as 64 lowercase hex characters.

A Merlin chain is a reverse hash chain: the owner picks the final value
at random, hashes backwards to the first value, and then releases values
in forward index order.  Each released value is the hash of the next one,
so releasing V_x commits the owner to V_{x+1} while revealing nothing
about it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Callable

from lighthouse import _keccak

DIGEST_SIZE = 32
ZERO_DIGEST = b"\x00" * DIGEST_SIZE

HashFn = Callable[[bytes], bytes]


def sha3_256(data: bytes) -> bytes:
    """Default hash: SHA3-256 (FIPS 202)."""
    return hashlib.sha3_256(data).digest()


def keccak_256(data: bytes) -> bytes:
    """Pre-standard Keccak-256 (the Ethereum variant; 0x01 padding)."""
    return _keccak.keccak_256(data)


HASH_VARIANTS: dict[str, HashFn] = {
    "sha3-256": sha3_256,
    "keccak-256": keccak_256,
}


def get_hash(variant: str) -> HashFn:
    """Look up a hash function by its config name."""
    try:
        return HASH_VARIANTS[variant]
    except KeyError:
        raise ValueError(
            f"unknown hash variant {variant!r}; expected one of {sorted(HASH_VARIANTS)}"
        ) from None


def check_digest(value: bytes) -> bytes:
    if not isinstance(value, (bytes, bytearray)) or len(value) != DIGEST_SIZE:
        raise ValueError(f"digest must be exactly {DIGEST_SIZE} bytes")
    return bytes(value)


def to_hex(digest: bytes) -> str:
    return check_digest(digest).hex()


def from_hex(text: str) -> bytes:
    if len(text) != 2 * DIGEST_SIZE or text != text.lower():
        raise ValueError("digest hex must be 64 lowercase hex characters")
    return bytes.fromhex(text)


def xor_digests(a: bytes, b: bytes) -> bytes:
    return bytes(x ^ y for x, y in zip(a, b, strict=True))


def digest_bit(digest: bytes, bit_index: int) -> int:
    """Bit ``bit_index`` of a digest: byte 0 first, least significant bit first."""
    if not 0 <= bit_index < 8 * DIGEST_SIZE:
        raise ValueError("bit index out of range")
    return (digest[bit_index >> 3] >> (bit_index & 7)) & 1


def link_ok(prev: bytes, nxt: bytes, hash_fn: HashFn = sha3_256) -> bool:
    """True iff ``prev`` commits to ``nxt``, i.e. prev == hash(nxt)."""
    return prev == hash_fn(nxt)


class ChainExhausted(Exception):
    """All chain values have been released; the owner must provision a new chain."""


@dataclass(frozen=True)
class ChainCheckpoint:
    """Offsite-backup form of a chain: enough to rebuild it bit-exactly."""

    seed: bytes
    length: int
    released_up_to: int

    def __post_init__(self) -> None:
        check_digest(self.seed)
        if self.length < 1:
            raise ValueError("chain length must be at least 1")
        if not 0 <= self.released_up_to <= self.length:
            raise ValueError("released_up_to must be in [0, length]")

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed_hex": to_hex(self.seed),
                "length": self.length,
                "released_up_to": self.released_up_to,
            },
            sort_keys=True,
            separators=(",", ":"),
        )

    @classmethod
    def from_json(cls, text: str) -> "ChainCheckpoint":
        obj = json.loads(text)
        extra = set(obj) - {"seed_hex", "length", "released_up_to"}
        if extra:
            raise ValueError(f"unknown checkpoint keys: {sorted(extra)}")
        return cls(
            seed=from_hex(obj["seed_hex"]),
            length=int(obj["length"]),
            released_up_to=int(obj["released_up_to"]),
        )


class MerlinChain:
    """A producer's precomputed reverse hash chain with a release cursor.

    Values are indexed 1..n.  values[n] is the randomly chosen seed and
    values[x] = hash(values[x+1]) for x < n.  The cursor starts at 1 and
    points at the next value to release; n+1 means exhausted.

    Chains are single-owner mutable state; they are not safe for
    concurrent release, but values may be shared read-only.
    """

    def __init__(self, seed: bytes, length: int, hash_fn: HashFn = sha3_256):
        check_digest(seed)
        if length < 1:
            raise ValueError("chain length must be at least 1")
        values = [b""] * length
        values[length - 1] = bytes(seed)
        for x in range(length - 2, -1, -1):
            values[x] = hash_fn(values[x + 1])
        self._values = values
        self._hash_fn = hash_fn
        self.seed = bytes(seed)
        self.length = length
        self.cursor = 1

    @property
    def exhausted(self) -> bool:
        return self.cursor > self.length

    @property
    def remaining(self) -> int:
        return self.length - self.cursor + 1

    def value(self, index: int) -> bytes:
        """Chain value at a 1-based index (independent of the cursor)."""
        if not 1 <= index <= self.length:
            raise IndexError(f"chain index {index} out of range 1..{self.length}")
        return self._values[index - 1]

    def peek(self) -> tuple[int, bytes]:
        """Next (index, value) to be released, without advancing."""
        if self.exhausted:
            raise ChainExhausted(f"all {self.length} values released")
        return self.cursor, self._values[self.cursor - 1]

    def next(self) -> tuple[int, bytes]:
        """Release the next (index, value) and advance the cursor."""
        index, value = self.peek()
        self.cursor += 1
        return index, value

    def checkpoint(self) -> ChainCheckpoint:
        return ChainCheckpoint(
            seed=self.seed, length=self.length, released_up_to=self.cursor - 1
        )

    @classmethod
    def recover(
        cls, checkpoint: ChainCheckpoint, hash_fn: HashFn = sha3_256
    ) -> "MerlinChain":
        """Rebuild a chain from its backup; the cursor resumes after the last release."""
        chain = cls(checkpoint.seed, checkpoint.length, hash_fn=hash_fn)
        chain.cursor = checkpoint.released_up_to + 1
        return chain
