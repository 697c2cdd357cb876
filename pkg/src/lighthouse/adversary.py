"""Producer and miner strategies for attack scenarios.

Strategies are pure decision functions over public state plus whatever
secrets the strategy legitimately holds (a producer knows its own chain;
colluding miners may have been leaked upcoming values).  They keep no
mutable state of their own, so independent trials can evaluate them in
parallel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

from lighthouse.contract import LighthouseContract
from lighthouse.hashcore import HashFn, MerlinChain, digest_bit, sha3_256
from lighthouse.ledger import ChainView, MineContext


@dataclass(frozen=True)
class BitPredicate:
    """Likes a digest iff one chosen bit has the wanted value."""

    bit_index: int
    desired: int

    def __post_init__(self) -> None:
        if not 0 <= self.bit_index < 256:
            raise ValueError("bit_index must be in [0, 255]")
        if self.desired not in (0, 1):
            raise ValueError("desired must be 0 or 1")

    def __call__(self, digest: bytes) -> bool:
        return digest_bit(digest, self.bit_index) == self.desired


# -- miner strategies ----------------------------------------------------

class MinerStrategy(Protocol):
    def decide(self, candidate_hash: bytes, ctx: MineContext) -> bool:
        """True publishes the candidate block, False discards it."""


class HonestMining:
    def decide(self, candidate_hash: bytes, ctx: MineContext) -> bool:
        return True


@dataclass(frozen=True)
class BitBias:
    """Discard candidates whose block-hash bit is not the wanted one.

    With ``only_target`` set, off-target blocks are published unfiltered;
    that is the economical variant when only the beacon's target block
    matters.
    """

    predicate: BitPredicate
    only_target: bool = False

    def decide(self, candidate_hash: bytes, ctx: MineContext) -> bool:
        if self.only_target and not ctx.is_target:
            return True
        return self.predicate(candidate_hash)


@dataclass(frozen=True)
class ProducerColluder:
    """Miners tipped off with upcoming producer values.

    When mining the target block they compute the candidate combined
    output from every leaked value and discard candidates the predicate
    dislikes.  Off-target blocks are published unfiltered.  Building this
    strategy without any leaked values is a configuration error, caught
    at scenario build time.
    """

    predicate: BitPredicate
    hash_fn: HashFn = sha3_256

    def decide(self, candidate_hash: bytes, ctx: MineContext) -> bool:
        if not ctx.is_target:
            return True
        if not ctx.known_values:
            raise ValueError("colluding miners have no leaked producer values")
        combined = bytes(32)
        for value in ctx.known_values:
            out = self.hash_fn(value + candidate_hash)
            combined = bytes(a ^ b for a, b in zip(combined, out))
        return self.predicate(combined)


# -- producer strategies -------------------------------------------------

class ProducerStrategy(Protocol):
    def act(
        self, name: str, view: ChainView, contract: LighthouseContract, chain: MerlinChain
    ) -> Optional[tuple[bytes, int]]:
        """Message (value, claimed_time) to submit after seeing ``view``, or None."""


def _round_ready(
    name: str,
    view: ChainView,
    contract: LighthouseContract,
    interval_blocks: int,
    extra_delay: int = 0,
) -> bool:
    """A prudent producer submits only messages that will be valid: after the
    round's target block is on chain, paced one pulse per ``interval_blocks``."""
    rec = contract.producers.get(name)
    if rec is None or rec.pulsed_this_round:
        return False
    if contract.target_block > view.tip_number:
        return False
    return view.tip_number >= contract.last_pulse_block + interval_blocks - 1 + extra_delay


@dataclass(frozen=True)
class HonestProducer:
    """Releases the next chain value once per interval, as soon as valid."""

    interval_blocks: int = 2

    def __post_init__(self) -> None:
        if self.interval_blocks < 2:
            raise ValueError("interval_blocks must be at least 2")

    def act(self, name, view, contract, chain):
        if not _round_ready(name, view, contract, self.interval_blocks):
            return None
        _, value = chain.next()
        return value, view.tip_timestamp


@dataclass(frozen=True)
class Withholder:
    """Previews its own upcoming output and goes silent when it dislikes it.

    Once the target block hash is public, the producer can compute the
    output its committed value will yield.  Withholding voids nothing; it
    just halts the lighthouse, visibly, until the owner reacts.
    """

    predicate: BitPredicate
    interval_blocks: int = 2
    hash_fn: HashFn = sha3_256

    def act(self, name, view, contract, chain):
        if not _round_ready(name, view, contract, self.interval_blocks):
            return None
        target_hash = view.block_hash(contract.target_block)
        if target_hash is None:
            return None
        _, upcoming = chain.peek()
        if not self.predicate(self.hash_fn(upcoming + target_hash)):
            return None
        _, value = chain.next()
        return value, view.tip_timestamp


@dataclass(frozen=True)
class Delayer:
    """Sits on each reveal for ``delay_blocks`` beyond the earliest valid
    moment.  Gains nothing: the target hash is already fixed."""

    delay_blocks: int
    interval_blocks: int = 2

    def act(self, name, view, contract, chain):
        if not _round_ready(name, view, contract, self.interval_blocks, self.delay_blocks):
            return None
        _, value = chain.next()
        return value, view.tip_timestamp


def build_clone_chains(
    shared_seed: bytes, member_count: int, length: int, hash_fn: HashFn = sha3_256
) -> list[MerlinChain]:
    """Identical chains for a colluding producer coalition (needs >= 2 members).

    With an even member count every combined output XORs to zero, which
    the contract refuses; an odd count cancels pairwise and pulses.
    """
    if member_count < 2:
        raise ValueError("a clone coalition needs at least 2 members")
    return [MerlinChain(shared_seed, length, hash_fn=hash_fn) for _ in range(member_count)]
