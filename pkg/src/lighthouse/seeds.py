"""Deterministic seed derivation.

Every random stream in a simulation is derived from the scenario's master
seed plus a string label, by hashing; Monte Carlo trial streams are
derived from (seed, mode, trial counter).  Derivations never depend on
execution order, so serial runs, parallel runs, and the compiled core all
see identical randomness.
"""

from __future__ import annotations

import hashlib
import struct

U64_MASK = (1 << 64) - 1


def le64(value: int) -> bytes:
    return struct.pack("<Q", value & U64_MASK)


def derive_digest(master_seed: int, *labels: str | int) -> bytes:
    """32-byte value from the master seed and a label path."""
    parts = [b"lighthouse-seed", str(master_seed).encode()]
    parts.extend(str(label).encode() for label in labels)
    return hashlib.sha3_256(b"\x00".join(parts)).digest()


def derive_int(master_seed: int, *labels: str | int) -> int:
    """Integer seed (for random.Random) from the master seed and labels."""
    return int.from_bytes(derive_digest(master_seed, *labels), "little")


class SplitMix64:
    """Tiny deterministic generator; mirrored exactly by the compiled core."""

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & U64_MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & U64_MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & U64_MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & U64_MASK
        return z ^ (z >> 31)

    def next_double(self) -> float:
        # 53-bit mantissa in [0, 1); bit-identical to the C implementation.
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)
