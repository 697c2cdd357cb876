"""Strategy tests: every attack the protocol claims to absorb or expose."""

import json
import math
import random

import pytest

from lighthouse.adversary import (
    BitBias,
    BitPredicate,
    Delayer,
    HonestMining,
    HonestProducer,
    ProducerColluder,
    Withholder,
    build_clone_chains,
)
from lighthouse.hashcore import digest_bit, from_hex, sha3_256, xor_digests
from lighthouse.ledger import MineContext, MinerPool, ZERO_DIGEST, mine_competition
from lighthouse.scenario import run_scenario, scenario_from_dict


def pulse_bits(result, bit_index=0):
    return [
        digest_bit(from_hex(json.loads(line)["R_L"]), bit_index) for line in result.pulse_lines
    ]


class TestPredicates:
    def test_bit_predicate(self):
        digest = bytes([0b0000_0101]) + bytes(31)
        assert BitPredicate(0, 1)(digest)
        assert not BitPredicate(1, 1)(digest)
        assert BitPredicate(2, 1)(digest)
        with pytest.raises(ValueError):
            BitPredicate(256, 1)
        with pytest.raises(ValueError):
            BitPredicate(0, 2)


class TestMinerStrategies:
    def test_honest_always_publishes(self):
        strategy = HonestMining()
        ctx = MineContext(number=1)
        for seed in range(20):
            assert strategy.decide(sha3_256(bytes([seed])), ctx)

    def test_bit_bias_decides_on_the_bit(self):
        strategy = BitBias(BitPredicate(0, 1))
        ctx = MineContext(number=1)
        one = bytes([1]) + bytes(31)
        zero = bytes(32)
        assert strategy.decide(one, ctx)
        assert not strategy.decide(zero, ctx)

    def test_bit_bias_only_target_passes_other_blocks(self):
        strategy = BitBias(BitPredicate(0, 1), only_target=True)
        zero = bytes(32)
        assert strategy.decide(zero, MineContext(number=1, is_target=False))
        assert not strategy.decide(zero, MineContext(number=1, is_target=True))

    def test_colluder_recomputable_decision(self):
        strategy = ProducerColluder(BitPredicate(3, 1))
        values = (sha3_256(b"v1"), sha3_256(b"v2"))
        candidate = sha3_256(b"cand")
        expected = xor_digests(sha3_256(values[0] + candidate), sha3_256(values[1] + candidate))
        ctx = MineContext(number=5, is_target=True, known_values=values)
        assert strategy.decide(candidate, ctx) == (digest_bit(expected, 3) == 1)

    def test_colluder_needs_leaked_values_on_target(self):
        strategy = ProducerColluder(BitPredicate(0, 1))
        assert strategy.decide(sha3_256(b"x"), MineContext(number=1, is_target=False))
        with pytest.raises(ValueError, match="no leaked producer values"):
            strategy.decide(sha3_256(b"x"), MineContext(number=1, is_target=True))


class TestProducerStrategies:
    def test_honest_interval_validation(self):
        with pytest.raises(ValueError):
            HonestProducer(interval_blocks=1)

    def test_honest_cadence_all_valid(self):
        config = scenario_from_dict(
            {
                "master_seed": 21,
                "blocks": 60,
                "producers": [{"name": "a", "interval_blocks": 3, "chain_length": 40}],
            }
        )
        result = run_scenario(config)
        assert result.summary["invalid_messages"] == 0
        assert result.summary["rejected_messages"] == 0
        assert result.summary["pulses"] == 60 // 3

    def test_withholder_dislike_rate_is_half(self):
        # The withhold decision previews hash(value || target hash) and
        # checks one bit, so it should fire on about half of all rounds.
        predicate = BitPredicate(0, 1)
        rng = random.Random(17)
        trials = 10_000
        withheld = sum(
            1
            for _ in range(trials)
            if not predicate(sha3_256(rng.randbytes(32) + rng.randbytes(32)))
        )
        std_error = math.sqrt(0.25 / trials)
        assert abs(withheld / trials - 0.5) <= 3 * std_error

    def test_withholder_halts_lighthouse_and_is_named(self):
        config = scenario_from_dict(
            {
                "master_seed": 6,
                "blocks": 40,
                "producers": [
                    {"name": "h", "chain_length": 50},
                    {"name": "w", "strategy": "withholder", "bit": 0, "desired": 1,
                     "chain_length": 50},
                ],
            }
        )
        result = run_scenario(config)
        stalls = [json.loads(l) for l in result.event_lines if json.loads(l)["event"] == "StallDetected"]
        assert stalls, "the withholder never stalled the lighthouse"
        for stall in stalls:
            assert "w" in stall["detail"]
            assert "h" not in stall["detail"].split(": ")[1].split(", ")

    def test_delayer_keeps_the_fixed_target(self):
        config = scenario_from_dict(
            {
                "master_seed": 13,
                "blocks": 60,
                "producers": [
                    {"name": "d", "strategy": "delayer", "delay_blocks": 3, "chain_length": 40}
                ],
            }
        )
        result = run_scenario(config)
        assert result.summary["pulses"] >= 5
        prev_block = 0
        for line in result.pulse_lines:
            pulse = json.loads(line)
            # Delay never re-rolls the target: it stays the block right
            # after the previous pulse, even though the reveal came late.
            assert pulse["beacons"][0]["block_used"] == prev_block + 1
            assert pulse["block"] >= prev_block + 2 + 3
            prev_block = pulse["block"]

    def test_clone_chain_builder(self):
        chains = build_clone_chains(sha3_256(b"cc"), 3, 8)
        assert len({c.value(1) for c in chains}) == 1
        with pytest.raises(ValueError):
            build_clone_chains(sha3_256(b"cc"), 1, 8)


class TestBiasThroughFullMachinery:
    """Monte Carlo over the real mining loop, not the fast kernel."""

    def test_raw_blockhash_bias_published_row(self):
        # Coalition at 30% of the hash power: published table row is 0.09.
        fraction, trials = 0.3, 1_000_000
        rng = random.Random(30)
        pool = MinerPool(fraction=fraction, strategy=BitBias(BitPredicate(0, 1)))
        hits = 0
        for number in range(trials):
            block, _ = mine_competition(pool, rng, ZERO_DIGEST, number, number + 1)
            hits += digest_bit(block.hash, 0)
        assert abs((hits / trials - 0.5) - 0.09) <= 0.005

    def test_lighthouse_bit_unbiased_without_value_knowledge(self):
        # Miners bias the target block hash bit, never seeing the committed
        # value: the lighthouse output bit must stay clean.
        blocks = 60_000  # one pulse every 2 blocks
        config = scenario_from_dict(
            {
                "master_seed": 31,
                "blocks": blocks,
                "producers": [{"name": "a", "chain_length": blocks // 2 + 16}],
                "miner": {"strategy": "bit-bias", "fraction": 0.5, "bit": 0, "desired": 1,
                          "only_target": True},
            }
        )
        result = run_scenario(config)
        bits = pulse_bits(result)
        assert len(bits) >= 25_000
        std_error = math.sqrt(0.25 / len(bits))
        assert abs(sum(bits) / len(bits) - 0.5) <= 3 * std_error

    def test_collusion_restores_the_bias(self):
        blocks = 20_000
        fraction = 0.5
        config = scenario_from_dict(
            {
                "master_seed": 32,
                "blocks": blocks,
                "producers": [{"name": "a", "chain_length": blocks // 2 + 16}],
                "miner": {"strategy": "producer-colluder", "fraction": fraction,
                          "bit": 0, "desired": 1, "collude_with": ["a"]},
            }
        )
        result = run_scenario(config)
        bits = pulse_bits(result)
        expected = fraction / (2 * (2 - fraction))  # 1/6
        std_error = math.sqrt(0.25 / len(bits))
        assert abs(sum(bits) / len(bits) - 0.5 - expected) <= 3 * std_error + 0.005

    def test_one_honest_producer_contains_collusion(self):
        # Miners collude with one of two producers; the honest producer's
        # contribution decorrelates the combined bit entirely.
        blocks = 20_000
        config = scenario_from_dict(
            {
                "master_seed": 33,
                "blocks": blocks,
                "producers": [
                    {"name": "leak", "chain_length": blocks // 2 + 16},
                    {"name": "honest", "chain_length": blocks // 2 + 16},
                ],
                "miner": {"strategy": "producer-colluder", "fraction": 0.5,
                          "bit": 0, "desired": 1, "collude_with": ["leak"]},
            }
        )
        result = run_scenario(config)
        bits = pulse_bits(result)
        assert len(bits) >= 8_000
        std_error = math.sqrt(0.25 / len(bits))
        assert abs(sum(bits) / len(bits) - 0.5) <= 3 * std_error
