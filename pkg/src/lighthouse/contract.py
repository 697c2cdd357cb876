"""The lighthouse contract: a sequential state machine over ledger blocks.

Producers feed it Merlin-chain values; it answers with per-producer beacon
pulses and, once every registered producer has pulsed in a round, one
combined lighthouse pulse.  The rules, in brief:

* A message is *accepted* only from a registered producer whose value is
  the next link of its chain (the stored value must equal the hash of the
  submitted one).  Acceptance always advances the stored chain value,
  even when the message is not valid for a pulse, so a burned value can
  never be reused.
* An accepted message is *valid* (produces a beacon pulse) only when it
  arrives at least two blocks after the previous lighthouse pulse, the
  round's target block hash is cached, and the producer has not already
  pulsed this round.  The target block is mined after the producer's
  previous value was revealed and before the current one, which is what
  keeps both miners and producers from steering the output.
* A valid message yields output = hash(value || target block hash) and a
  pulse time = min(timestamp of the previous pulse's block, the
  producer's claimed time); the claimed time can only move the pulse time
  earlier, never later.
* The combined output is the XOR of the round's beacon outputs and the
  combined time is the max of their times.  An all-zero combined output
  is refused and the round voided, which defeats cloned-chain coalitions.

The contract caches the target hash on *any* activity, because the ledger
only resolves the last 256 block hashes.  If the target falls out of that
window uncached, the contract logs the expiry and retargets to the block
after the current one.

All operations for one contract are totally ordered, mirroring the
transaction serialization of the chain it would live on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from lighthouse.hashcore import HashFn, ZERO_DIGEST, sha3_256, to_hex
from lighthouse.ledger import GENESIS_TIMESTAMP, TxContext

DEFAULT_DEREGISTER_DELAY = 10

# Event kinds, as they appear in the event log.
PULSE_EMITTED = "PulseEmitted"
MESSAGE_INVALID = "MessageInvalid"
MESSAGE_REJECTED = "MessageRejected"
HASH_EXPIRED = "HashExpired"
ZERO_COMBINED_REFUSED = "ZeroCombinedRefused"
PRODUCER_REGISTERED = "ProducerRegistered"
PRODUCER_DEREGISTERED = "ProducerDeregistered"

TIMESTAMP_RULES = ("printed", "prose")


class Outcome(enum.Enum):
    REJECTED = "rejected"
    ACCEPTED_INVALID = "accepted_invalid"
    PULSED = "pulsed"


@dataclass(frozen=True)
class ContractEvent:
    kind: str
    block: int
    detail: str


@dataclass(frozen=True)
class BeaconPulse:
    """One producer's pulse: its revealed value and the derived output."""

    producer: str
    index: int
    value: bytes
    claimed_time: int
    random_out: bytes
    time: int
    block_used: int


@dataclass(frozen=True)
class LighthousePulse:
    """One combined pulse; append-only history entries are never mutated."""

    round: int
    random_out: bytes
    time: int
    block: int
    beacons: tuple[BeaconPulse, ...]

    @property
    def contributors(self) -> tuple[tuple[str, int], ...]:
        return tuple((b.producer, b.index) for b in self.beacons)


@dataclass
class ProducerRecord:
    address: str
    last_value: bytes
    last_claimed_time: int
    last_value_block: int
    last_value_ts: int
    accepted_count: int = 1
    pulsed_this_round: bool = False
    pending: Optional[BeaconPulse] = None
    deregister_at: Optional[int] = None


class LighthouseContract:
    """Multi-producer contract; with one producer it degenerates to the
    single-producer protocol (see :class:`SingleProducerBeacon`)."""

    def __init__(
        self,
        owner: str,
        deployed_block: int = 0,
        deployed_timestamp: int = GENESIS_TIMESTAMP,
        deregister_delay: int = DEFAULT_DEREGISTER_DELAY,
        hash_fn: HashFn = sha3_256,
        timestamp_rule: str = "printed",
    ):
        if timestamp_rule not in TIMESTAMP_RULES:
            raise ValueError(f"timestamp_rule must be one of {TIMESTAMP_RULES}")
        if deregister_delay < 1:
            raise ValueError("deregister delay must be at least 1 block")
        self.owner = owner
        self.deregister_delay = deregister_delay
        self.hash_fn = hash_fn
        self.timestamp_rule = timestamp_rule
        self.producers: dict[str, ProducerRecord] = {}
        # Bootstrap: behave as if a pulse had occurred at deployment, so the
        # first round obeys the same spacing and target rules as every other.
        self.last_pulse_block = deployed_block
        self.last_pulse_ts = deployed_timestamp
        self.target_block = deployed_block + 1
        self.cached_target_hash: Optional[bytes] = None
        self.round_index = 0
        self.combine_attempts = 0
        self.pulse_history: list[LighthousePulse] = []
        self.event_log: list[ContractEvent] = []

    # -- internal plumbing -------------------------------------------------

    def _event(self, kind: str, block: int, detail: str) -> None:
        self.event_log.append(ContractEvent(kind=kind, block=block, detail=detail))

    def _sweep_deregistrations(self, ctx: TxContext) -> None:
        due = [
            name
            for name, rec in self.producers.items()
            if rec.deregister_at is not None and ctx.block_number >= rec.deregister_at
        ]
        for name in due:
            del self.producers[name]
            self._event(PRODUCER_DEREGISTERED, ctx.block_number, f"producer={name}")
        if due and self.producers:
            # Removing a hold-out can complete the round for everyone else.
            self._try_combine(ctx)

    def _cache_target(self, ctx: TxContext) -> None:
        if self.cached_target_hash is not None:
            return
        found = ctx.view.block_hash(self.target_block)
        if found is not None:
            self.cached_target_hash = found
        elif self.target_block <= ctx.view.tip_number:
            # Mined long ago and no longer resolvable: retarget to the block
            # after the current one, which nobody can know yet.
            self._event(
                HASH_EXPIRED,
                ctx.block_number,
                f"target={self.target_block} retarget={ctx.block_number + 1}",
            )
            self.target_block = ctx.block_number + 1

    def _begin(self, ctx: TxContext) -> None:
        self._sweep_deregistrations(ctx)
        self._cache_target(ctx)

    def _reset_round(self, ctx: TxContext) -> None:
        for rec in self.producers.values():
            rec.pulsed_this_round = False
            rec.pending = None
        self.target_block = ctx.block_number + 1
        self.cached_target_hash = None

    def _try_combine(self, ctx: TxContext) -> Optional[LighthousePulse]:
        if not self.producers:
            return None
        if not all(rec.pulsed_this_round for rec in self.producers.values()):
            return None
        self.combine_attempts += 1
        beacons = tuple(rec.pending for rec in self.producers.values())
        combined = bytes(len(ZERO_DIGEST))
        for beacon in beacons:
            combined = bytes(a ^ b for a, b in zip(combined, beacon.random_out))
        if combined == ZERO_DIGEST:
            self._event(
                ZERO_COMBINED_REFUSED,
                ctx.block_number,
                "combined output is zero; round voided",
            )
            self._reset_round(ctx)
            return None
        pulse = LighthousePulse(
            round=self.round_index,
            random_out=combined,
            time=max(beacon.time for beacon in beacons),
            block=ctx.block_number,
            beacons=beacons,
        )
        self.pulse_history.append(pulse)
        self._event(PULSE_EMITTED, ctx.block_number, f"round={pulse.round}")
        self.round_index += 1
        self.last_pulse_block = ctx.block_number
        self.last_pulse_ts = ctx.block_timestamp
        self._reset_round(ctx)
        return pulse

    # -- public operations ---------------------------------------------------

    def touch(self, ctx: TxContext) -> None:
        """Any activity lets the contract grab the target hash while it can."""
        self._begin(ctx)

    def register_producer(
        self, ctx: TxContext, caller: str, producer: str, value: bytes, claimed_time: int
    ) -> bool:
        """Owner-only.  The first message only anchors the producer's chain;
        it never produces a pulse, so registration cannot steer the output."""
        self._begin(ctx)
        if caller != self.owner:
            self._event(
                MESSAGE_REJECTED, ctx.block_number, f"register by non-owner caller={caller}"
            )
            return False
        if producer in self.producers:
            self._event(
                MESSAGE_REJECTED, ctx.block_number, f"producer={producer} already registered"
            )
            return False
        self.producers[producer] = ProducerRecord(
            address=producer,
            last_value=value,
            last_claimed_time=claimed_time,
            last_value_block=ctx.block_number,
            last_value_ts=ctx.block_timestamp,
        )
        self._event(PRODUCER_REGISTERED, ctx.block_number, f"producer={producer}")
        return True

    def request_deregister(self, ctx: TxContext, caller: str, producer: str) -> bool:
        """Owner-only; takes effect ``deregister_delay`` blocks later, so the
        owner cannot yank a producer between a reveal and its processing."""
        self._begin(ctx)
        if caller != self.owner:
            self._event(
                MESSAGE_REJECTED, ctx.block_number, f"deregister by non-owner caller={caller}"
            )
            return False
        rec = self.producers.get(producer)
        if rec is None:
            self._event(
                MESSAGE_REJECTED, ctx.block_number, f"deregister of unknown producer={producer}"
            )
            return False
        rec.deregister_at = ctx.block_number + self.deregister_delay
        return True

    def submit_message(
        self, ctx: TxContext, sender: str, value: bytes, claimed_time: int
    ) -> tuple[Outcome, Optional[LighthousePulse]]:
        """Process one producer message; returns the outcome and, when the
        message completed a round, the lighthouse pulse it triggered."""
        self._begin(ctx)
        rec = self.producers.get(sender)
        if rec is None:
            self._event(MESSAGE_REJECTED, ctx.block_number, f"sender={sender} not registered")
            return Outcome.REJECTED, None
        if rec.last_value != self.hash_fn(value):
            self._event(
                MESSAGE_REJECTED,
                ctx.block_number,
                f"sender={sender} value does not continue its chain",
            )
            return Outcome.REJECTED, None

        # Accepted: the chain anchor always advances, valid or not.
        prev_claimed_time = rec.last_claimed_time
        prev_value_ts = rec.last_value_ts
        rec.last_value = value
        rec.last_claimed_time = claimed_time
        rec.last_value_block = ctx.block_number
        rec.last_value_ts = ctx.block_timestamp
        rec.accepted_count += 1

        invalid_reason = None
        if ctx.block_number < self.last_pulse_block + 2:
            invalid_reason = (
                f"too early: block {ctx.block_number} < {self.last_pulse_block + 2}"
            )
        elif self.cached_target_hash is None:
            invalid_reason = f"target hash for block {self.target_block} unavailable"
        elif rec.pulsed_this_round:
            invalid_reason = "already pulsed this round"
        if invalid_reason is not None:
            self._event(
                MESSAGE_INVALID, ctx.block_number, f"sender={sender}: {invalid_reason}"
            )
            return Outcome.ACCEPTED_INVALID, None

        if self.timestamp_rule == "printed":
            pulse_time = min(self.last_pulse_ts, claimed_time)
        else:
            pulse_time = min(prev_claimed_time, prev_value_ts)
        rec.pending = BeaconPulse(
            producer=sender,
            index=rec.accepted_count,
            value=value,
            claimed_time=claimed_time,
            random_out=self.hash_fn(value + self.cached_target_hash),
            time=pulse_time,
            block_used=self.target_block,
        )
        rec.pulsed_this_round = True
        pulse = self._try_combine(ctx)
        return Outcome.PULSED, pulse

    def get_pulse(self, ctx: TxContext, index: int) -> LighthousePulse:
        """Customer retrieval; counts as activity (so it caches the target)."""
        self._begin(ctx)
        if not 0 <= index < len(self.pulse_history):
            raise LookupError(f"no pulse {index}; history has {len(self.pulse_history)}")
        return self.pulse_history[index]

    def get_latest(self, ctx: TxContext) -> Optional[LighthousePulse]:
        self._begin(ctx)
        return self.pulse_history[-1] if self.pulse_history else None


class SingleProducerBeacon:
    """Independent transcription of the one-producer protocol.

    Kept deliberately separate from :class:`LighthouseContract` (no shared
    round logic) so the two can be checked against each other: with one
    producer the contract must emit a bit-identical pulse stream.
    """

    def __init__(
        self,
        producer: str,
        deployed_block: int = 0,
        deployed_timestamp: int = GENESIS_TIMESTAMP,
        hash_fn: HashFn = sha3_256,
        timestamp_rule: str = "printed",
    ):
        if timestamp_rule not in TIMESTAMP_RULES:
            raise ValueError(f"timestamp_rule must be one of {TIMESTAMP_RULES}")
        self.producer = producer
        self.hash_fn = hash_fn
        self.timestamp_rule = timestamp_rule
        self.registered = False
        self.anchor_value: Optional[bytes] = None
        self.anchor_claimed_time = 0
        self.anchor_value_ts = 0
        self.accepted_count = 0
        self.last_pulse_block = deployed_block
        self.last_pulse_ts = deployed_timestamp
        self.target_block = deployed_block + 1
        self.cached_target_hash: Optional[bytes] = None
        self.history: list[LighthousePulse] = []

    def _refresh(self, ctx: TxContext) -> None:
        if self.cached_target_hash is None:
            found = ctx.view.block_hash(self.target_block)
            if found is not None:
                self.cached_target_hash = found
            elif self.target_block <= ctx.view.tip_number:
                self.target_block = ctx.block_number + 1

    def register(self, ctx: TxContext, value: bytes, claimed_time: int) -> None:
        self._refresh(ctx)
        if self.registered:
            raise ValueError("already registered")
        self.registered = True
        self.anchor_value = value
        self.anchor_claimed_time = claimed_time
        self.anchor_value_ts = ctx.block_timestamp
        self.accepted_count = 1

    def submit(self, ctx: TxContext, value: bytes, claimed_time: int) -> Outcome:
        self._refresh(ctx)
        if not self.registered or self.anchor_value != self.hash_fn(value):
            return Outcome.REJECTED
        prev_claimed_time = self.anchor_claimed_time
        prev_value_ts = self.anchor_value_ts
        self.anchor_value = value
        self.anchor_claimed_time = claimed_time
        self.anchor_value_ts = ctx.block_timestamp
        self.accepted_count += 1
        if ctx.block_number < self.last_pulse_block + 2 or self.cached_target_hash is None:
            return Outcome.ACCEPTED_INVALID
        if self.timestamp_rule == "printed":
            pulse_time = min(self.last_pulse_ts, claimed_time)
        else:
            pulse_time = min(prev_claimed_time, prev_value_ts)
        beacon = BeaconPulse(
            producer=self.producer,
            index=self.accepted_count,
            value=value,
            claimed_time=claimed_time,
            random_out=self.hash_fn(value + self.cached_target_hash),
            time=pulse_time,
            block_used=self.target_block,
        )
        self.history.append(
            LighthousePulse(
                round=len(self.history),
                random_out=beacon.random_out,
                time=beacon.time,
                block=ctx.block_number,
                beacons=(beacon,),
            )
        )
        self.last_pulse_block = ctx.block_number
        self.last_pulse_ts = ctx.block_timestamp
        self.target_block = ctx.block_number + 1
        self.cached_target_hash = None
        return Outcome.PULSED


def pulse_to_dict(pulse: LighthousePulse) -> dict:
    """Wire form of one pulse-log line (hashes as 64-char lowercase hex)."""
    return {
        "round": pulse.round,
        "R_L": to_hex(pulse.random_out),
        "T_L": pulse.time,
        "block": pulse.block,
        "beacons": [
            {
                "producer": b.producer,
                "index": b.index,
                "V": to_hex(b.value),
                "U": b.claimed_time,
                "R": to_hex(b.random_out),
                "T": b.time,
                "block_used": b.block_used,
            }
            for b in pulse.beacons
        ],
    }


def event_to_dict(event: ContractEvent) -> dict:
    return {"block": event.block, "event": event.kind, "detail": event.detail}
