"""Pulse-log verification by recomputation.

Everything the contract derives is re-derived here from public data
alone: chain links between successive revealed values, each beacon
output, each pulse time (under the default timestamp rule), the combined
XOR, the combined max-time, the zero-output refusal, and the two-block
spacing.  Producer-claimed times are inputs to the derivation, not
claims the log can prove.

The block-summary file anchors block hashes and timestamps; the event
log, when given, pins each pulse to its emission block.  The contract is
taken to be deployed at block 0 (the engine's convention), which anchors
the first round's time bound.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from lighthouse.hashcore import HashFn, ZERO_DIGEST, sha3_256

PULSE_KEYS = {"round", "R_L", "T_L", "block", "beacons"}
BEACON_KEYS = {"producer", "index", "V", "U", "R", "T", "block_used"}
BLOCK_KEYS = {"number", "hash_hex", "timestamp"}
EVENT_KEYS = {"block", "event", "detail"}

MAX_INDEX_GAP = 10_000
HASH_WINDOW = 256


class LogFormatError(ValueError):
    """A log line could not even be parsed into the expected shape."""


@dataclass(frozen=True)
class Violation:
    round: int  # -1 for file-level problems
    field: str
    message: str

    def __str__(self) -> str:
        where = f"round {self.round}" if self.round >= 0 else "log"
        return f"{where}: {self.field}: {self.message}"


@dataclass
class Verdict:
    ok: bool
    rounds_checked: int
    violations: list[Violation] = field(default_factory=list)


def _parse_json_line(line: str, lineno: int, what: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise LogFormatError(f"{what} line {lineno}: invalid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise LogFormatError(f"{what} line {lineno}: expected an object")
    return obj


def _hex_digest(obj: dict, key: str, lineno: int, what: str) -> bytes:
    raw = obj.get(key)
    if not isinstance(raw, str) or len(raw) != 64 or raw != raw.lower():
        raise LogFormatError(f"{what} line {lineno}: {key} must be 64 lowercase hex chars")
    try:
        return bytes.fromhex(raw)
    except ValueError as exc:
        raise LogFormatError(f"{what} line {lineno}: {key} is not hex") from exc


def _int_field(obj: dict, key: str, lineno: int, what: str) -> int:
    raw = obj.get(key)
    if not isinstance(raw, int) or isinstance(raw, bool):
        raise LogFormatError(f"{what} line {lineno}: {key} must be an integer")
    return raw


def parse_block_summaries(lines: Iterable[str]) -> tuple[dict[int, bytes], dict[int, int]]:
    """Block number -> (hash, timestamp); raises LogFormatError on bad shape."""
    hashes: dict[int, bytes] = {}
    times: dict[int, int] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        obj = _parse_json_line(line, lineno, "blocks")
        if set(obj) != BLOCK_KEYS:
            raise LogFormatError(f"blocks line {lineno}: keys must be {sorted(BLOCK_KEYS)}")
        number = _int_field(obj, "number", lineno, "blocks")
        if number in hashes:
            raise LogFormatError(f"blocks line {lineno}: duplicate block {number}")
        hashes[number] = _hex_digest(obj, "hash_hex", lineno, "blocks")
        times[number] = _int_field(obj, "timestamp", lineno, "blocks")
    return hashes, times


def verify_log(
    pulse_lines: Iterable[str],
    block_lines: Iterable[str],
    event_lines: Optional[Iterable[str]] = None,
    hash_fn: HashFn = sha3_256,
    max_index_gap: int = MAX_INDEX_GAP,
    deployment_block: int = 0,
) -> Verdict:
    """Recompute a pulse log against block summaries; list every violation."""
    violations: list[Violation] = []

    def flag(rnd: int, fld: str, message: str) -> None:
        violations.append(Violation(rnd, fld, message))

    block_hash, block_time = parse_block_summaries(block_lines)

    numbers = sorted(block_hash)
    if numbers and (numbers[0] != 0 or numbers[-1] != len(numbers) - 1):
        flag(-1, "blocks", "block numbers are not consecutive from 0")
    for a, b in zip(numbers, numbers[1:]):
        if block_time[b] <= block_time[a]:
            flag(-1, "blocks", f"timestamps not strictly increasing at block {b}")

    pulse_event_blocks: Optional[list[int]] = None
    if event_lines is not None:
        pulse_event_blocks = []
        for lineno, line in enumerate(event_lines, start=1):
            if not line.strip():
                continue
            obj = _parse_json_line(line, lineno, "events")
            if set(obj) != EVENT_KEYS:
                raise LogFormatError(f"events line {lineno}: keys must be {sorted(EVENT_KEYS)}")
            if obj["event"] == "PulseEmitted":
                pulse_event_blocks.append(_int_field(obj, "block", lineno, "events"))

    if deployment_block not in block_time:
        flag(-1, "blocks", f"deployment block {deployment_block} missing from summaries")
        return Verdict(ok=False, rounds_checked=0, violations=violations)

    prev_pulse_block = deployment_block
    known_values: dict[str, tuple[int, bytes]] = {}  # producer -> (index, value)
    first_round_seen = False
    rounds = 0
    pulse_blocks: list[int] = []

    for lineno, line in enumerate(pulse_lines, start=1):
        if not line.strip():
            continue
        obj = _parse_json_line(line, lineno, "pulses")
        if set(obj) != PULSE_KEYS:
            raise LogFormatError(f"pulses line {lineno}: keys must be {sorted(PULSE_KEYS)}")
        rnd = _int_field(obj, "round", lineno, "pulses")
        combined = _hex_digest(obj, "R_L", lineno, "pulses")
        combined_time = _int_field(obj, "T_L", lineno, "pulses")
        pulse_block = _int_field(obj, "block", lineno, "pulses")
        beacons_raw = obj.get("beacons")
        if not isinstance(beacons_raw, list) or not beacons_raw:
            raise LogFormatError(f"pulses line {lineno}: beacons must be a non-empty list")

        if rnd != rounds:
            flag(rnd, "round", f"expected round {rounds} at line {lineno}")

        if pulse_block not in block_hash:
            flag(rnd, "block", f"pulse block {pulse_block} not in block summaries")
        if pulse_block < prev_pulse_block + 2:
            flag(
                rnd,
                "block",
                f"pulse at block {pulse_block} violates 2-block spacing after {prev_pulse_block}",
            )

        seen_producers: set[str] = set()
        xor_accum = bytes(len(ZERO_DIGEST))
        max_time: Optional[int] = None
        prev_anchor_ts = block_time.get(prev_pulse_block)

        for idx, braw in enumerate(beacons_raw):
            if not isinstance(braw, dict) or set(braw) != BEACON_KEYS:
                raise LogFormatError(
                    f"pulses line {lineno}: beacons[{idx}] keys must be {sorted(BEACON_KEYS)}"
                )
            producer = braw["producer"]
            if not isinstance(producer, str):
                raise LogFormatError(f"pulses line {lineno}: beacons[{idx}].producer must be str")
            index = _int_field(braw, "index", lineno, "pulses")
            value = _hex_digest(braw, "V", lineno, "pulses")
            claimed = _int_field(braw, "U", lineno, "pulses")
            out = _hex_digest(braw, "R", lineno, "pulses")
            btime = _int_field(braw, "T", lineno, "pulses")
            block_used = _int_field(braw, "block_used", lineno, "pulses")

            bfield = f"beacons[{producer}]"
            if producer in seen_producers:
                flag(rnd, bfield, "duplicate contributor in one round")
            seen_producers.add(producer)

            if index < 2:
                flag(rnd, f"{bfield}.index", f"index {index} below first pulse index 2")

            if producer in known_values:
                prev_index, prev_value = known_values[producer]
                gap = index - prev_index
                if not 1 <= gap <= max_index_gap:
                    flag(rnd, f"{bfield}.index", f"index gap {gap} from {prev_index} implausible")
                else:
                    walked = value
                    for _ in range(gap):
                        walked = hash_fn(walked)
                    if walked != prev_value:
                        flag(rnd, f"{bfield}.V", "value does not chain to the previous reveal")
            elif first_round_seen:
                flag(rnd, bfield, "contributor appeared after the first round")
            known_values[producer] = (index, value)

            if not (pulse_block - HASH_WINDOW <= block_used <= pulse_block - 1):
                flag(
                    rnd,
                    f"{bfield}.block_used",
                    f"block {block_used} not in the window visible at block {pulse_block}",
                )
            elif block_used <= prev_pulse_block:
                flag(
                    rnd,
                    f"{bfield}.block_used",
                    f"target {block_used} not mined after the previous pulse block {prev_pulse_block}",
                )
            elif block_used not in block_hash:
                flag(rnd, f"{bfield}.block_used", f"block {block_used} not in block summaries")
            else:
                expected_out = hash_fn(value + block_hash[block_used])
                if out != expected_out:
                    flag(rnd, f"{bfield}.R", "output is not hash(value || target block hash)")

            if prev_anchor_ts is not None:
                expected_time = min(prev_anchor_ts, claimed)
                if btime != expected_time:
                    flag(
                        rnd,
                        f"{bfield}.T",
                        f"time {btime} != min(anchor {prev_anchor_ts}, claimed {claimed})",
                    )

            xor_accum = bytes(a ^ b for a, b in zip(xor_accum, out))
            max_time = btime if max_time is None else max(max_time, btime)

        if xor_accum != combined:
            flag(rnd, "R_L", "combined output is not the XOR of its contributors")
        if combined == ZERO_DIGEST:
            flag(rnd, "R_L", "combined output is zero; the contract refuses such pulses")
        if max_time is not None and combined_time != max_time:
            flag(rnd, "T_L", f"combined time {combined_time} != max contributor time {max_time}")

        missing = set(known_values) - seen_producers
        if missing and first_round_seen:
            # Shrinkage is legal only through deregistration; stop tracking
            # the departed so later rounds are not re-flagged.
            for name in missing:
                known_values.pop(name, None)

        first_round_seen = True
        prev_pulse_block = pulse_block
        pulse_blocks.append(pulse_block)
        rounds += 1

    if pulse_event_blocks is not None:
        if len(pulse_event_blocks) != rounds:
            flag(-1, "events", f"{len(pulse_event_blocks)} PulseEmitted events for {rounds} pulses")
        else:
            for rnd, (logged, evented) in enumerate(zip(pulse_blocks, pulse_event_blocks)):
                if logged != evented:
                    flag(rnd, "block", f"pulse block {logged} != PulseEmitted event block {evented}")

    return Verdict(ok=not violations, rounds_checked=rounds, violations=violations)
