"""Simulated proof-of-work ledger with a discard-capable miner coalition.

The abstraction is fork-free: each block is decided by one *competition*.
Per sub-round, the coalition (holding fraction F of the hash power) finds
the candidate with probability F and may discard it after seeing its
hash; an outside miner publishes unconditionally.  Discarded candidates
never reach the chain but are counted, since each one is a forgone block
reward.

Block timestamps come from a simulated clock advanced by exponential
inter-block times (memoryless arrivals), and are forced to be strictly
increasing integers.  Everything is driven by one seeded generator, so a
given (seed, config, tx schedule) always yields the identical chain.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass
from typing import Iterator, Optional, Protocol, Sequence

from lighthouse.hashcore import DIGEST_SIZE, HashFn, ZERO_DIGEST, sha3_256, to_hex

HASH_WINDOW = 256  # how many recent block hashes stay resolvable
GENESIS_TIMESTAMP = 1_500_000_000
DEFAULT_BLOCK_INTERVAL = 15.0
DEFAULT_DISCARD_CAP = 10_000


class LivelockError(RuntimeError):
    """A competition hit the discard cap: the coalition rejects every candidate."""

    def __init__(self, number: int, discards: int):
        super().__init__(
            f"mining block {number} livelocked after {discards} discarded candidates"
        )
        self.number = number
        self.discards = discards


@dataclass(frozen=True)
class Block:
    number: int
    parent_hash: bytes
    hash: bytes
    timestamp: int
    nonce: int
    txs: tuple[bytes, ...] = ()

    def summary(self) -> dict:
        return {"number": self.number, "hash_hex": to_hex(self.hash), "timestamp": self.timestamp}


@dataclass(frozen=True)
class MineContext:
    """What a miner strategy may know about the block being mined."""

    number: int
    is_target: bool = False
    known_values: tuple[bytes, ...] = ()


class MinerStrategyLike(Protocol):
    def decide(self, candidate_hash: bytes, ctx: MineContext) -> bool: ...


@dataclass
class MinerPool:
    """Mining population: coalition fraction plus its publish/discard policy."""

    fraction: float = 0.0
    strategy: Optional[MinerStrategyLike] = None
    discard_cap: int = DEFAULT_DISCARD_CAP

    def __post_init__(self) -> None:
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError("coalition fraction must be in [0, 1]")


def tx_commitment(txs: Sequence[bytes], hash_fn: HashFn = sha3_256) -> bytes:
    parts = [struct.pack(">I", len(tx)) + tx for tx in txs]
    return hash_fn(b"".join(parts))


def block_header(
    parent_hash: bytes, number: int, timestamp: int, nonce: int, commitment: bytes
) -> bytes:
    return parent_hash + struct.pack(">QQQ", number, timestamp, nonce) + commitment


def mine_competition(
    pool: MinerPool,
    rng: random.Random,
    parent_hash: bytes,
    number: int,
    timestamp: int,
    txs: Sequence[bytes] = (),
    context: Optional[MineContext] = None,
    hash_fn: HashFn = sha3_256,
) -> tuple[Block, int]:
    """Run one block competition; return the published block and the discard count.

    Sub-round order is fixed (winner coin, then nonce, then hash, then the
    coalition's decision) so a seeded generator reproduces the competition
    exactly.
    """
    ctx = context if context is not None else MineContext(number=number)
    commitment = tx_commitment(txs, hash_fn)
    txs = tuple(txs)
    discards = 0
    while True:
        coalition_won = rng.random() < pool.fraction
        nonce = rng.getrandbits(64)
        candidate_hash = hash_fn(block_header(parent_hash, number, timestamp, nonce, commitment))
        if coalition_won and pool.strategy is not None:
            if not pool.strategy.decide(candidate_hash, ctx):
                discards += 1
                if discards >= pool.discard_cap:
                    raise LivelockError(number, discards)
                continue
        return (
            Block(
                number=number,
                parent_hash=parent_hash,
                hash=candidate_hash,
                timestamp=timestamp,
                nonce=nonce,
                txs=txs,
            ),
            discards,
        )


class ChainView:
    """A bounded window onto recent block hashes, as a contract would see it.

    ``block_hash(k)`` resolves only for the last ``HASH_WINDOW`` blocks:
    k in [tip - 255, tip].  Older (or future) numbers return None, which
    is an ordinary value, not a fault.
    """

    __slots__ = ("_hashes", "tip_number", "tip_timestamp")

    def __init__(self, hashes: Sequence[bytes], tip_number: int, tip_timestamp: int):
        self._hashes = hashes
        self.tip_number = tip_number
        self.tip_timestamp = tip_timestamp

    def block_hash(self, number: int) -> Optional[bytes]:
        if number < 0 or number > self.tip_number or number < self.tip_number - (HASH_WINDOW - 1):
            return None
        return self._hashes[number]

    def resolvable_numbers(self) -> range:
        return range(max(0, self.tip_number - (HASH_WINDOW - 1)), self.tip_number + 1)


@dataclass(frozen=True)
class TxContext:
    """Where a transaction executes: its block, that block's timestamp, and
    the hash window visible during execution (which ends at the parent)."""

    block_number: int
    block_timestamp: int
    view: ChainView


class Ledger:
    """One logical chain timeline; all mutation is serialized."""

    def __init__(
        self,
        seed: int = 0,
        pool: Optional[MinerPool] = None,
        block_interval: float = DEFAULT_BLOCK_INTERVAL,
        start_time: int = GENESIS_TIMESTAMP,
        hash_fn: HashFn = sha3_256,
    ):
        self.pool = pool if pool is not None else MinerPool()
        self.block_interval = block_interval
        self.hash_fn = hash_fn
        self.rng = random.Random(seed)
        self.clock = float(start_time)
        self.total_discards = 0
        genesis = Block(
            number=0,
            parent_hash=ZERO_DIGEST,
            hash=hash_fn(block_header(ZERO_DIGEST, 0, start_time, 0, tx_commitment((), hash_fn))),
            timestamp=start_time,
            nonce=0,
        )
        self.blocks: list[Block] = [genesis]
        self._hashes: list[bytes] = [genesis.hash]

    @property
    def tip(self) -> Block:
        return self.blocks[-1]

    def advance(self, txs: Sequence[bytes] = (), context: Optional[MineContext] = None) -> Block:
        """Mine and append the next block, advancing the simulated clock."""
        number = len(self.blocks)
        if self.block_interval > 0:
            self.clock += self.rng.expovariate(1.0 / self.block_interval)
        timestamp = max(self.tip.timestamp + 1, int(self.clock))
        block, discards = mine_competition(
            self.pool,
            self.rng,
            parent_hash=self.tip.hash,
            number=number,
            timestamp=timestamp,
            txs=txs,
            context=context,
            hash_fn=self.hash_fn,
        )
        self.total_discards += discards
        self.blocks.append(block)
        self._hashes.append(block.hash)
        return block

    def view_at(self, tip_number: int) -> ChainView:
        if not 0 <= tip_number < len(self.blocks):
            raise IndexError(f"no block {tip_number}")
        return ChainView(self._hashes, tip_number, self.blocks[tip_number].timestamp)

    def view(self) -> ChainView:
        return self.view_at(len(self.blocks) - 1)

    def tx_context(self, block_number: int) -> TxContext:
        """Execution context for a transaction included in ``block_number``.

        During execution the current block's own hash does not exist yet,
        so the visible window ends at the parent.
        """
        if not 1 <= block_number < len(self.blocks):
            raise IndexError(f"no mined block {block_number} to execute in")
        block = self.blocks[block_number]
        return TxContext(
            block_number=block_number,
            block_timestamp=block.timestamp,
            view=self.view_at(block_number - 1),
        )

    def iter_summaries(self) -> Iterator[dict]:
        for block in self.blocks:
            yield block.summary()
