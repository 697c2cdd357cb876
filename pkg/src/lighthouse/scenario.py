"""Scenario configs and the deterministic simulation engine.

A scenario is one JSON object: a master seed, a run length in blocks, a
miner population, a list of producers with strategies, and contract
options.  Unknown keys are rejected with field-precise messages, because
a typo in an adversary parameter silently changes what an experiment
measures.

The engine drives one ledger and one contract in lockstep.  For each
block: producers look at the chain as of the parent block and hand their
messages to the mempool, the block is mined (miner strategies get their
say per candidate), and then the block's transactions run against the
contract.  Every stream of randomness is derived from the master seed,
so a config reruns to byte-identical logs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from lighthouse import adversary
from lighthouse.adversary import BitPredicate
from lighthouse.contract import (
    HASH_EXPIRED,
    MESSAGE_INVALID,
    MESSAGE_REJECTED,
    PULSE_EMITTED,
    ZERO_COMBINED_REFUSED,
    LighthouseContract,
    SingleProducerBeacon,
    event_to_dict,
    pulse_to_dict,
)
from lighthouse.hashcore import HASH_VARIANTS, MerlinChain, from_hex, get_hash, to_hex
from lighthouse.ledger import Ledger, MineContext, MinerPool
from lighthouse.seeds import derive_digest, derive_int

STALL_DETECTED = "StallDetected"
OWNER = "owner"

DEFAULT_OUTPUTS = {
    "pulses": "pulses.jsonl",
    "events": "events.jsonl",
    "blocks": "blocks.jsonl",
    "summary": "summary.json",
}

MINER_STRATEGIES = ("honest", "bit-bias", "producer-colluder")
PRODUCER_STRATEGIES = ("honest", "withholder", "delayer", "clone")


class ConfigError(ValueError):
    """Scenario config rejected; the message names the offending field."""


def _require(obj: Any, path: str, typ: type, allow_bool: bool = False) -> Any:
    if isinstance(obj, bool) and typ is int and not allow_bool:
        raise ConfigError(f"{path}: expected {typ.__name__}, got bool")
    if typ is float and isinstance(obj, int) and not isinstance(obj, bool):
        return float(obj)
    if not isinstance(obj, typ):
        raise ConfigError(f"{path}: expected {typ.__name__}, got {type(obj).__name__}")
    return obj


def _check_keys(obj: dict, path: str, allowed: set[str]) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}")


@dataclass(frozen=True)
class MinerConfig:
    strategy: str = "honest"
    fraction: float = 0.0
    bit: int = 0
    desired: int = 1
    only_target: bool = False
    collude_with: tuple[str, ...] = ()


@dataclass(frozen=True)
class ProducerConfig:
    name: str
    strategy: str = "honest"
    chain_length: int = 64
    interval_blocks: int = 2
    bit: int = 0
    desired: int = 1
    delay_blocks: int = 0
    clone_group: Optional[str] = None


@dataclass(frozen=True)
class ContractConfig:
    deregister_delay: int = 10
    hash_variant: str = "sha3-256"
    timestamp_rule: str = "printed"
    stall_after: int = 8


@dataclass(frozen=True)
class ScenarioConfig:
    master_seed: int
    blocks: int
    producers: tuple[ProducerConfig, ...]
    miner: MinerConfig = MinerConfig()
    contract: ContractConfig = ContractConfig()
    block_interval: float = 15.0
    quiet_blocks: tuple[tuple[int, int], ...] = ()
    customer_touch_blocks: tuple[int, ...] = ()
    deregister_requests: tuple[tuple[int, str], ...] = ()
    outputs: dict[str, str] = field(default_factory=dict)


def _parse_miner(obj: dict, path: str) -> MinerConfig:
    _check_keys(obj, path, {"strategy", "fraction", "bit", "desired", "only_target", "collude_with"})
    strategy = _require(obj.get("strategy", "honest"), f"{path}.strategy", str)
    if strategy not in MINER_STRATEGIES:
        raise ConfigError(f"{path}.strategy: {strategy!r} not one of {MINER_STRATEGIES}")
    fraction = _require(obj.get("fraction", 0.0), f"{path}.fraction", float)
    if not 0.0 <= fraction <= 1.0:
        raise ConfigError(f"{path}.fraction: must be in [0, 1]")
    bit = _require(obj.get("bit", 0), f"{path}.bit", int)
    desired = _require(obj.get("desired", 1), f"{path}.desired", int)
    only_target = _require(obj.get("only_target", False), f"{path}.only_target", bool)
    collude_raw = _require(obj.get("collude_with", []), f"{path}.collude_with", list)
    collude = tuple(_require(n, f"{path}.collude_with[{i}]", str) for i, n in enumerate(collude_raw))
    if strategy == "producer-colluder" and not collude:
        raise ConfigError(f"{path}.collude_with: producer-colluder requires leaked producers")
    return MinerConfig(strategy, fraction, bit, desired, only_target, collude)


def _parse_producer(obj: dict, path: str) -> ProducerConfig:
    _check_keys(
        obj,
        path,
        {"name", "strategy", "chain_length", "interval_blocks", "bit", "desired",
         "delay_blocks", "clone_group"},
    )
    if "name" not in obj:
        raise ConfigError(f"{path}.name: required")
    name = _require(obj["name"], f"{path}.name", str)
    if not name or name == OWNER:
        raise ConfigError(f"{path}.name: must be non-empty and not {OWNER!r}")
    strategy = _require(obj.get("strategy", "honest"), f"{path}.strategy", str)
    if strategy not in PRODUCER_STRATEGIES:
        raise ConfigError(f"{path}.strategy: {strategy!r} not one of {PRODUCER_STRATEGIES}")
    chain_length = _require(obj.get("chain_length", 64), f"{path}.chain_length", int)
    if chain_length < 2:
        raise ConfigError(f"{path}.chain_length: must be at least 2")
    interval = _require(obj.get("interval_blocks", 2), f"{path}.interval_blocks", int)
    if interval < 2:
        raise ConfigError(f"{path}.interval_blocks: must be at least 2")
    delay = _require(obj.get("delay_blocks", 0), f"{path}.delay_blocks", int)
    if delay < 0:
        raise ConfigError(f"{path}.delay_blocks: must be >= 0")
    clone_group = obj.get("clone_group")
    if clone_group is not None:
        clone_group = _require(clone_group, f"{path}.clone_group", str)
    if strategy == "clone" and clone_group is None:
        raise ConfigError(f"{path}.clone_group: required for clone producers")
    return ProducerConfig(
        name=name,
        strategy=strategy,
        chain_length=chain_length,
        interval_blocks=interval,
        bit=_require(obj.get("bit", 0), f"{path}.bit", int),
        desired=_require(obj.get("desired", 1), f"{path}.desired", int),
        delay_blocks=delay,
        clone_group=clone_group,
    )


def _parse_contract(obj: dict, path: str) -> ContractConfig:
    _check_keys(obj, path, {"deregister_delay", "hash_variant", "timestamp_rule", "stall_after"})
    delay = _require(obj.get("deregister_delay", 10), f"{path}.deregister_delay", int)
    if delay < 1:
        raise ConfigError(f"{path}.deregister_delay: must be >= 1")
    variant = _require(obj.get("hash_variant", "sha3-256"), f"{path}.hash_variant", str)
    if variant not in HASH_VARIANTS:
        raise ConfigError(f"{path}.hash_variant: {variant!r} not one of {sorted(HASH_VARIANTS)}")
    rule = _require(obj.get("timestamp_rule", "printed"), f"{path}.timestamp_rule", str)
    if rule not in ("printed", "prose"):
        raise ConfigError(f"{path}.timestamp_rule: {rule!r} not 'printed' or 'prose'")
    stall_after = _require(obj.get("stall_after", 8), f"{path}.stall_after", int)
    if stall_after < 1:
        raise ConfigError(f"{path}.stall_after: must be >= 1")
    return ContractConfig(delay, variant, rule, stall_after)


def scenario_from_dict(obj: dict) -> ScenarioConfig:
    """Validate a raw JSON object into a ScenarioConfig (fail fast, by field)."""
    if not isinstance(obj, dict):
        raise ConfigError("scenario: expected a JSON object")
    _check_keys(
        obj,
        "scenario",
        {"master_seed", "blocks", "block_interval", "miner", "producers", "contract",
         "quiet_blocks", "customer_touch_blocks", "deregister_requests", "outputs"},
    )
    for key in ("master_seed", "blocks", "producers"):
        if key not in obj:
            raise ConfigError(f"scenario.{key}: required")
    master_seed = _require(obj["master_seed"], "scenario.master_seed", int)
    blocks = _require(obj["blocks"], "scenario.blocks", int)
    if blocks < 1:
        raise ConfigError("scenario.blocks: must be >= 1")
    block_interval = _require(obj.get("block_interval", 15.0), "scenario.block_interval", float)
    if block_interval < 0:
        raise ConfigError("scenario.block_interval: must be >= 0")

    producers_raw = _require(obj["producers"], "scenario.producers", list)
    if not producers_raw:
        raise ConfigError("scenario.producers: at least one producer required")
    producers = tuple(
        _parse_producer(_require(p, f"scenario.producers[{i}]", dict), f"scenario.producers[{i}]")
        for i, p in enumerate(producers_raw)
    )
    names = [p.name for p in producers]
    if len(set(names)) != len(names):
        raise ConfigError("scenario.producers: names must be unique")

    clone_counts: dict[str, int] = {}
    for p in producers:
        if p.strategy == "clone":
            clone_counts[p.clone_group] = clone_counts.get(p.clone_group, 0) + 1
    for group, count in clone_counts.items():
        if count < 2:
            raise ConfigError(
                f"scenario.producers: clone_group {group!r} needs >= 2 members, has {count}"
            )

    # Heuristic sizing: steady state consumes about one value per interval
    # (one per pulse), plus registration and churn around resets;
    # exhaustion at run time still raises, this just catches clearly
    # undersized chains.
    for i, p in enumerate(producers):
        need = blocks // max(2, p.interval_blocks + p.delay_blocks) + 8
        if p.chain_length < min(need, blocks + 2):
            raise ConfigError(
                f"scenario.producers[{i}].chain_length: {p.chain_length} likely too short "
                f"for {blocks} blocks at interval {p.interval_blocks} (want >= {min(need, blocks + 2)})"
            )

    miner = _parse_miner(_require(obj.get("miner", {}), "scenario.miner", dict), "scenario.miner")
    for i, cname in enumerate(miner.collude_with):
        if cname not in names:
            raise ConfigError(f"scenario.miner.collude_with[{i}]: unknown producer {cname!r}")

    contract = _parse_contract(
        _require(obj.get("contract", {}), "scenario.contract", dict), "scenario.contract"
    )

    quiet_raw = _require(obj.get("quiet_blocks", []), "scenario.quiet_blocks", list)
    quiet = []
    for i, pair in enumerate(quiet_raw):
        pair = _require(pair, f"scenario.quiet_blocks[{i}]", list)
        if len(pair) != 2:
            raise ConfigError(f"scenario.quiet_blocks[{i}]: expected [start, end]")
        start = _require(pair[0], f"scenario.quiet_blocks[{i}][0]", int)
        end = _require(pair[1], f"scenario.quiet_blocks[{i}][1]", int)
        if not 1 <= start <= end:
            raise ConfigError(f"scenario.quiet_blocks[{i}]: need 1 <= start <= end")
        quiet.append((start, end))

    touches_raw = _require(
        obj.get("customer_touch_blocks", []), "scenario.customer_touch_blocks", list
    )
    touches = tuple(
        _require(b, f"scenario.customer_touch_blocks[{i}]", int) for i, b in enumerate(touches_raw)
    )

    dereg_raw = _require(obj.get("deregister_requests", []), "scenario.deregister_requests", list)
    deregs = []
    for i, req in enumerate(dereg_raw):
        req = _require(req, f"scenario.deregister_requests[{i}]", dict)
        _check_keys(req, f"scenario.deregister_requests[{i}]", {"block", "producer"})
        if "block" not in req or "producer" not in req:
            raise ConfigError(f"scenario.deregister_requests[{i}]: needs block and producer")
        block = _require(req["block"], f"scenario.deregister_requests[{i}].block", int)
        target = _require(req["producer"], f"scenario.deregister_requests[{i}].producer", str)
        if target not in names:
            raise ConfigError(
                f"scenario.deregister_requests[{i}].producer: unknown producer {target!r}"
            )
        deregs.append((block, target))

    outputs_raw = _require(obj.get("outputs", {}), "scenario.outputs", dict)
    _check_keys(outputs_raw, "scenario.outputs", set(DEFAULT_OUTPUTS))
    outputs = {k: _require(v, f"scenario.outputs.{k}", str) for k, v in outputs_raw.items()}

    return ScenarioConfig(
        master_seed=master_seed,
        blocks=blocks,
        producers=producers,
        miner=miner,
        contract=contract,
        block_interval=block_interval,
        quiet_blocks=tuple(quiet),
        customer_touch_blocks=touches,
        deregister_requests=tuple(deregs),
        outputs=outputs,
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file {path}: invalid JSON ({exc})") from exc
    return scenario_from_dict(obj)


# -- engine ----------------------------------------------------------------


def _build_producer_strategy(cfg: ProducerConfig):
    if cfg.strategy in ("honest", "clone"):
        return adversary.HonestProducer(interval_blocks=cfg.interval_blocks)
    if cfg.strategy == "withholder":
        return adversary.Withholder(
            predicate=BitPredicate(cfg.bit, cfg.desired), interval_blocks=cfg.interval_blocks
        )
    if cfg.strategy == "delayer":
        return adversary.Delayer(
            delay_blocks=cfg.delay_blocks, interval_blocks=cfg.interval_blocks
        )
    raise ConfigError(f"unhandled producer strategy {cfg.strategy!r}")


def _build_miner_strategy(cfg: MinerConfig, hash_fn):
    if cfg.strategy == "honest":
        return adversary.HonestMining()
    if cfg.strategy == "bit-bias":
        return adversary.BitBias(BitPredicate(cfg.bit, cfg.desired), only_target=cfg.only_target)
    return adversary.ProducerColluder(BitPredicate(cfg.bit, cfg.desired), hash_fn=hash_fn)


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    pulse_lines: list[str]
    event_lines: list[str]
    block_lines: list[str]
    summary: dict
    contract: LighthouseContract
    ledger: Ledger
    chains: dict[str, MerlinChain]
    actions: list[tuple[int, dict]]

    def write_outputs(self, out_dir: str | Path) -> dict[str, Path]:
        """Write the four artifact files; returns name -> path."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        names = dict(DEFAULT_OUTPUTS)
        names.update(self.config.outputs)
        paths = {}
        for key, lines in (
            ("pulses", self.pulse_lines),
            ("events", self.event_lines),
            ("blocks", self.block_lines),
        ):
            path = out / names[key]
            path.write_text("".join(line + "\n" for line in lines))
            paths[key] = path
        summary_path = out / names["summary"]
        summary_path.write_text(_dump(self.summary) + "\n")
        paths["summary"] = summary_path
        return paths


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    """Simulate one scenario; deterministic in (config, master_seed)."""
    hash_fn = get_hash(config.contract.hash_variant)

    chains: dict[str, MerlinChain] = {}
    strategies = {}
    for pcfg in config.producers:
        chain_label = pcfg.clone_group if pcfg.strategy == "clone" else pcfg.name
        seed_digest = derive_digest(config.master_seed, "chain", chain_label)
        chains[pcfg.name] = MerlinChain(seed_digest, pcfg.chain_length, hash_fn=hash_fn)
        strategies[pcfg.name] = _build_producer_strategy(pcfg)

    pool = MinerPool(
        fraction=config.miner.fraction, strategy=_build_miner_strategy(config.miner, hash_fn)
    )
    ledger = Ledger(
        seed=derive_int(config.master_seed, "ledger"),
        pool=pool,
        block_interval=config.block_interval,
        hash_fn=hash_fn,
    )
    contract = LighthouseContract(
        owner=OWNER,
        deployed_block=0,
        deployed_timestamp=ledger.blocks[0].timestamp,
        deregister_delay=config.contract.deregister_delay,
        hash_fn=hash_fn,
        timestamp_rule=config.contract.timestamp_rule,
    )

    quiet = config.quiet_blocks
    touches = set(config.customer_touch_blocks)
    deregs: dict[int, list[str]] = {}
    for block, producer in config.deregister_requests:
        deregs.setdefault(block, []).append(producer)

    event_lines: list[str] = []
    actions_log: list[tuple[int, dict]] = []
    drained = 0
    last_stall_key = None
    stall_events = 0

    def is_quiet(block_number: int) -> bool:
        return any(start <= block_number <= end for start, end in quiet)

    for number in range(1, config.blocks + 1):
        outbox: list[dict] = []
        if number == 1:
            view = ledger.view()
            for pcfg in config.producers:
                index, value = chains[pcfg.name].next()
                outbox.append(
                    {
                        "kind": "register",
                        "producer": pcfg.name,
                        "V": to_hex(value),
                        "U": view.tip_timestamp,
                    }
                )
        else:
            for producer in deregs.get(number, ()):
                outbox.append({"kind": "deregister", "producer": producer})
            if number in touches:
                outbox.append({"kind": "touch"})
            if not is_quiet(number):
                view = ledger.view()
                for pcfg in config.producers:
                    message = strategies[pcfg.name].act(
                        pcfg.name, view, contract, chains[pcfg.name]
                    )
                    if message is not None:
                        value, claimed = message
                        outbox.append(
                            {
                                "kind": "message",
                                "producer": pcfg.name,
                                "V": to_hex(value),
                                "U": claimed,
                            }
                        )

        known_values: tuple[bytes, ...] = ()
        if config.miner.strategy == "producer-colluder":
            known_values = tuple(
                chains[name].peek()[1]
                for name in config.miner.collude_with
                if not chains[name].exhausted
            )
        mine_ctx = MineContext(
            number=number,
            is_target=(
                contract.target_block == number
                and contract.cached_target_hash is None
                and (config.miner.strategy != "producer-colluder" or bool(known_values))
            ),
            known_values=known_values,
        )
        ledger.advance(txs=tuple(_dump(a).encode() for a in outbox), context=mine_ctx)
        ctx = ledger.tx_context(number)

        for action in outbox:
            actions_log.append((number, action))
            if action["kind"] == "register":
                contract.register_producer(
                    ctx, OWNER, action["producer"], from_hex(action["V"]), action["U"]
                )
            elif action["kind"] == "message":
                contract.submit_message(
                    ctx, action["producer"], from_hex(action["V"]), action["U"]
                )
            elif action["kind"] == "deregister":
                contract.request_deregister(ctx, OWNER, action["producer"])
            else:
                contract.touch(ctx)

        while drained < len(contract.event_log):
            event_lines.append(_dump(event_to_dict(contract.event_log[drained])))
            drained += 1

        if contract.producers and number - contract.last_pulse_block >= config.contract.stall_after:
            waiting = sorted(
                name for name, rec in contract.producers.items() if not rec.pulsed_this_round
            )
            if waiting:
                key = (contract.round_index, contract.combine_attempts, tuple(waiting))
                if key != last_stall_key:
                    last_stall_key = key
                    stall_events += 1
                    event_lines.append(
                        _dump(
                            {
                                "block": number,
                                "event": STALL_DETECTED,
                                "detail": "waiting on producers: " + ", ".join(waiting),
                            }
                        )
                    )

    def count_events(kind: str) -> int:
        return sum(1 for e in contract.event_log if e.kind == kind)

    summary = {
        "blocks": config.blocks,
        "pulses": len(contract.pulse_history),
        "rounds_attempted": contract.combine_attempts,
        "zero_refusals": count_events(ZERO_COMBINED_REFUSED),
        "invalid_messages": count_events(MESSAGE_INVALID),
        "rejected_messages": count_events(MESSAGE_REJECTED),
        "hash_expired": count_events(HASH_EXPIRED),
        "pulse_events": count_events(PULSE_EMITTED),
        "stall_events": stall_events,
        "total_discards": ledger.total_discards,
    }

    return ScenarioResult(
        config=config,
        pulse_lines=[_dump(pulse_to_dict(p)) for p in contract.pulse_history],
        event_lines=event_lines,
        block_lines=[_dump(s) for s in ledger.iter_summaries()],
        summary=summary,
        contract=contract,
        ledger=ledger,
        chains=chains,
        actions=actions_log,
    )


def replay_single_producer(result: ScenarioResult) -> list[str]:
    """Replay a one-producer scenario's message trace through the standalone
    single-producer protocol; returns its pulse log lines for comparison."""
    producer_names = {a["producer"] for _, a in result.actions if "producer" in a}
    if len(producer_names) != 1:
        raise ValueError("single-producer replay needs exactly one producer")
    (name,) = producer_names
    beacon = SingleProducerBeacon(
        producer=name,
        deployed_block=0,
        deployed_timestamp=result.ledger.blocks[0].timestamp,
        hash_fn=get_hash(result.config.contract.hash_variant),
        timestamp_rule=result.config.contract.timestamp_rule,
    )
    for block_number, action in result.actions:
        ctx = result.ledger.tx_context(block_number)
        if action["kind"] == "register":
            beacon.register(ctx, from_hex(action["V"]), action["U"])
        elif action["kind"] == "message":
            beacon.submit(ctx, from_hex(action["V"]), action["U"])
    return [_dump(pulse_to_dict(p)) for p in beacon.history]
