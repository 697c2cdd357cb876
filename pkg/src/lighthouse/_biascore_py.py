"""Pure-Python competition core: the fallback twin of the compiled module.

One "trial" is one block competition run to publication.  Per sub-round a
coin decides whether the coalition or an outside miner finds the block;
the coalition inspects the candidate and may discard it, an outsider
always publishes.  The three modes differ only in what the coalition can
inspect and which output bit is measured:

  raw (0)             inspect the candidate block hash bit; measure it.
  no collusion (1)    inspect the block hash bit; measure the bit of
                      hash(V || block hash) for a V unknown to miners.
  full collusion (2)  inspect hash(V || candidate) with V leaked by the
                      producer; measure that same output bit.

All randomness is counter-derived from (seed, mode, trial), so results do
not depend on scheduling and match the compiled core bit for bit.
"""

from __future__ import annotations

from hashlib import sha3_256 as _sha3

from lighthouse.seeds import SplitMix64, le64

BACKEND = "python"

MODE_RAW = 0
MODE_NO_COLLUSION = 1
MODE_FULL_COLLUSION = 2

_TAG_RNG = b"lh-bias-rng:"
_TAG_CAND = b"lh-bias-cand:"
_TAG_V = b"lh-bias-v:"

DEFAULT_DISCARD_CAP = 10_000


def sha3_256(data: bytes) -> bytes:
    return _sha3(data).digest()


def keccak_256(data: bytes) -> bytes:
    from lighthouse import _keccak

    return _keccak.keccak_256(data)


def bias_trials(
    mode: int,
    seed: int,
    trials: int,
    fraction: float,
    bit_index: int,
    desired: int,
    discard_cap: int = DEFAULT_DISCARD_CAP,
) -> tuple[int, int, int]:
    """Run ``trials`` competitions; return (desired-bit hits, discards, livelocks).

    A trial that reaches ``discard_cap`` consecutive coalition discards is
    counted as a livelock and publishes its last candidate.
    """
    if mode not in (MODE_RAW, MODE_NO_COLLUSION, MODE_FULL_COLLUSION):
        raise ValueError(f"unknown mode {mode}")
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be in [0, 1]")
    if not 0 <= bit_index < 256:
        raise ValueError("bit_index must be in [0, 255]")
    if desired not in (0, 1):
        raise ValueError("desired must be 0 or 1")

    byte_pos = bit_index >> 3
    shift = bit_index & 7
    seed_le = le64(seed)
    mode_le = le64(mode)

    hits = 0
    discards = 0
    livelocks = 0
    for trial in range(trials):
        trial_le = le64(trial)
        stream = SplitMix64(
            int.from_bytes(_sha3(_TAG_RNG + seed_le + mode_le + trial_le).digest()[:8], "little")
        )
        cand_prefix = _TAG_CAND + seed_le + trial_le
        if mode != MODE_RAW:
            value = _sha3(_TAG_V + seed_le + trial_le).digest()

        trial_discards = 0
        j = 0
        while True:
            coalition_won = stream.next_double() < fraction
            block_hash = _sha3(cand_prefix + le64(j)).digest()
            j += 1
            if mode == MODE_FULL_COLLUSION:
                out = _sha3(value + block_hash).digest()
                watched = out
            else:
                watched = block_hash
            bit = (watched[byte_pos] >> shift) & 1
            if coalition_won and bit != desired:
                trial_discards += 1
                if trial_discards >= discard_cap:
                    livelocks += 1
                    break
                continue
            break

        if mode == MODE_NO_COLLUSION:
            out = _sha3(value + block_hash).digest()
            bit = (out[byte_pos] >> shift) & 1
        elif mode == MODE_RAW:
            bit = (block_hash[byte_pos] >> shift) & 1
        else:
            bit = (out[byte_pos] >> shift) & 1

        hits += bit == desired
        discards += trial_discards
    return hits, discards, livelocks
