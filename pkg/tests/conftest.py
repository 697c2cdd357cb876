"""Shared test helpers: a harness that mines blocks and routes contract calls."""

from __future__ import annotations

import pytest

from lighthouse.contract import LighthouseContract, Outcome
from lighthouse.hashcore import MerlinChain, sha3_256
from lighthouse.ledger import Ledger, MinerPool, TxContext


class ContractHarness:
    """One ledger plus one contract, with transactions executed in the
    most recently mined block."""

    def __init__(
        self,
        seed: int = 0,
        owner: str = "owner",
        deregister_delay: int = 10,
        timestamp_rule: str = "printed",
        hash_fn=sha3_256,
        block_interval: float = 15.0,
    ):
        self.owner = owner
        self.ledger = Ledger(
            seed=seed, pool=MinerPool(), block_interval=block_interval, hash_fn=hash_fn
        )
        self.contract = LighthouseContract(
            owner=owner,
            deployed_block=0,
            deployed_timestamp=self.ledger.blocks[0].timestamp,
            deregister_delay=deregister_delay,
            hash_fn=hash_fn,
            timestamp_rule=timestamp_rule,
        )

    @property
    def tip_number(self) -> int:
        return self.ledger.tip.number

    def mine(self, count: int = 1) -> None:
        for _ in range(count):
            self.ledger.advance()

    def ctx(self) -> TxContext:
        """Context for a transaction in the latest mined block."""
        return self.ledger.tx_context(self.tip_number)

    def register(self, name: str, chain: MerlinChain, claimed_time: int | None = None) -> bool:
        ctx = self.ctx()
        _, value = chain.next()
        claimed = ctx.block_timestamp if claimed_time is None else claimed_time
        return self.contract.register_producer(ctx, self.owner, name, value, claimed)

    def submit_next(self, name: str, chain: MerlinChain, claimed_time: int | None = None):
        ctx = self.ctx()
        _, value = chain.next()
        claimed = ctx.block_timestamp if claimed_time is None else claimed_time
        return self.contract.submit_message(ctx, name, value, claimed)

    def run_honest_rounds(self, name: str, chain: MerlinChain, rounds: int) -> None:
        """Mine/submit at a valid 2-block cadence; every submit must pulse."""
        for _ in range(rounds):
            self.mine(2)
            outcome, _ = self.submit_next(name, chain)
            assert outcome == Outcome.PULSED


@pytest.fixture
def harness() -> ContractHarness:
    return ContractHarness()


def make_chain(tag: bytes = b"chain", length: int = 32, hash_fn=sha3_256) -> MerlinChain:
    return MerlinChain(sha3_256(tag), length, hash_fn=hash_fn)


# Contract-derived pulse-log fields, the verifier's detection surface.
# Producer-claimed times ("U") are inputs to the derivation, not claims the
# verifier can pin, so they are not part of the mutation universe.
TOP_FIELDS = ("round", "R_L", "T_L", "block")
BEACON_FIELDS = ("producer", "index", "V", "R", "T", "block_used")


def mutate_pulse_log(lines: list[str], rng) -> tuple[list[str], str]:
    """Apply one random single-field mutation (fresh value or bit flip) to a
    parsed pulse log; returns (mutated lines, description)."""
    import json as _json

    rows = [_json.loads(line) for line in lines]
    row_index = rng.randrange(len(rows))
    row = rows[row_index]
    if rng.random() < 0.5:
        field = rng.choice(TOP_FIELDS)
        holder = row
    else:
        beacon_index = rng.randrange(len(row["beacons"]))
        holder = row["beacons"][beacon_index]
        field = rng.choice(BEACON_FIELDS)

    original = holder[field]
    flip = rng.random() < 0.5
    if isinstance(original, int):
        if flip:
            mutated = original ^ (1 << rng.randrange(0, 40))
        else:
            mutated = rng.getrandbits(48)
            while mutated == original:
                mutated = rng.getrandbits(48)
    elif field in ("R_L", "V", "R"):
        if flip:
            raw = bytearray(bytes.fromhex(original))
            bit = rng.randrange(256)
            raw[bit // 8] ^= 1 << (bit % 8)
            mutated = raw.hex()
        else:
            mutated = rng.randbytes(32).hex()
            while mutated == original:
                mutated = rng.randbytes(32).hex()
    else:  # producer name
        if flip:
            raw = bytearray(original.encode())
            raw[rng.randrange(len(raw))] ^= 1
            mutated = raw.decode("latin1")
        else:
            mutated = original + "-evil"
    holder[field] = mutated

    mutated_lines = [
        _json.dumps(r, sort_keys=True, separators=(",", ":")) for r in rows
    ]
    kind = "bitflip" if flip else "replace"
    return mutated_lines, f"{kind} {field} in round row {row_index} ({original!r} -> {mutated!r})"
