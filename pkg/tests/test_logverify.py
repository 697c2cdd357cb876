"""Verifier tests: recomputation catches every single-field lie."""

import json
import random

import pytest

from conftest import mutate_pulse_log
from lighthouse.logverify import LogFormatError, verify_log
from lighthouse.scenario import run_scenario, scenario_from_dict


def fixture_result(seed=7, blocks=60, producers=None):
    producers = producers or [
        {"name": "a", "interval_blocks": 3, "chain_length": 40},
        {"name": "b", "interval_blocks": 2, "chain_length": 50},
    ]
    return run_scenario(
        scenario_from_dict({"master_seed": seed, "blocks": blocks, "producers": producers})
    )


@pytest.fixture(scope="module")
def fixture():
    return fixture_result()


class TestHappyPath:
    def test_untampered_log_passes(self, fixture):
        verdict = verify_log(fixture.pulse_lines, fixture.block_lines, fixture.event_lines)
        assert verdict.ok, [str(v) for v in verdict.violations]
        assert verdict.rounds_checked == fixture.summary["pulses"] > 0

    def test_passes_without_event_log(self, fixture):
        assert verify_log(fixture.pulse_lines, fixture.block_lines).ok

    def test_expiry_scenario_log_passes(self):
        result = run_scenario(
            scenario_from_dict(
                {
                    "master_seed": 3,
                    "blocks": 320,
                    "producers": [{"name": "a", "chain_length": 180}],
                    "quiet_blocks": [[8, 307]],
                }
            )
        )
        verdict = verify_log(result.pulse_lines, result.block_lines, result.event_lines)
        assert verdict.ok, [str(v) for v in verdict.violations]


class TestTargetedTampering:
    def test_flipped_combined_output_names_the_round(self, fixture):
        rows = [json.loads(l) for l in fixture.pulse_lines]
        raw = bytearray(bytes.fromhex(rows[3]["R_L"]))
        raw[0] ^= 1
        rows[3]["R_L"] = raw.hex()
        verdict = verify_log(
            [json.dumps(r) for r in rows], fixture.block_lines, fixture.event_lines
        )
        assert not verdict.ok
        assert any(v.round == 3 and v.field == "R_L" for v in verdict.violations)

    def test_random_value_breaks_the_chain_link(self, fixture):
        rows = [json.loads(l) for l in fixture.pulse_lines]
        rows[2]["beacons"][0]["V"] = random.Random(0).randbytes(32).hex()
        verdict = verify_log([json.dumps(r) for r in rows], fixture.block_lines)
        assert not verdict.ok
        fields = {v.field for v in verdict.violations if v.round == 2}
        assert any(".V" in f or ".R" in f for f in fields)

    def test_renamed_contributor_detected(self, fixture):
        rows = [json.loads(l) for l in fixture.pulse_lines]
        rows[4]["beacons"][0]["producer"] = "impostor"
        verdict = verify_log([json.dumps(r) for r in rows], fixture.block_lines)
        assert not verdict.ok

    def test_spacing_violation_detected(self, fixture):
        rows = [json.loads(l) for l in fixture.pulse_lines]
        rows[1]["block"] = rows[0]["block"] + 1
        verdict = verify_log([json.dumps(r) for r in rows], fixture.block_lines)
        assert not verdict.ok
        assert any("spacing" in v.message for v in verdict.violations)

    def test_zero_combined_output_refused(self, fixture):
        rows = [json.loads(l) for l in fixture.pulse_lines]
        beacon = dict(rows[0]["beacons"][0])
        rows[0]["beacons"] = [rows[0]["beacons"][0], dict(beacon, producer="b")]
        rows[0]["R_L"] = "00" * 32
        verdict = verify_log([json.dumps(rows[0])], fixture.block_lines)
        assert any("zero" in v.message for v in verdict.violations)

    def test_missing_pulse_event_detected(self, fixture):
        events = [l for l in fixture.event_lines if "PulseEmitted" not in l]
        verdict = verify_log(fixture.pulse_lines, fixture.block_lines, events)
        assert not verdict.ok
        assert any(v.field == "events" for v in verdict.violations)

    def test_event_block_mismatch_detected(self, fixture):
        events = []
        bumped = False
        for line in fixture.event_lines:
            obj = json.loads(line)
            if obj["event"] == "PulseEmitted" and not bumped:
                obj["block"] += 1
                bumped = True
            events.append(json.dumps(obj))
        verdict = verify_log(fixture.pulse_lines, fixture.block_lines, events)
        assert not verdict.ok


class TestMutationSweep:
    def test_every_single_field_mutation_detected(self, fixture):
        rng = random.Random(2024)
        for trial in range(200):
            mutated, description = mutate_pulse_log(fixture.pulse_lines, rng)
            verdict = verify_log(mutated, fixture.block_lines, fixture.event_lines)
            assert not verdict.ok, f"undetected mutation #{trial}: {description}"

    def test_single_producer_log_mutations_detected(self):
        result = fixture_result(
            seed=11, blocks=40, producers=[{"name": "solo", "chain_length": 40}]
        )
        rng = random.Random(55)
        for trial in range(100):
            mutated, description = mutate_pulse_log(result.pulse_lines, rng)
            verdict = verify_log(mutated, result.block_lines, result.event_lines)
            assert not verdict.ok, f"undetected mutation #{trial}: {description}"


class TestParseFailures:
    def test_invalid_json_line(self, fixture):
        with pytest.raises(LogFormatError, match="invalid JSON"):
            verify_log(["{broken"], fixture.block_lines)

    def test_wrong_keys(self, fixture):
        with pytest.raises(LogFormatError, match="keys must be"):
            verify_log(['{"round": 0}'], fixture.block_lines)

    def test_bad_hex(self, fixture):
        row = json.loads(fixture.pulse_lines[0])
        row["R_L"] = "zz" * 32
        with pytest.raises(LogFormatError, match="hex"):
            verify_log([json.dumps(row)], fixture.block_lines)

    def test_bad_block_file(self, fixture):
        with pytest.raises(LogFormatError):
            verify_log(fixture.pulse_lines, ['{"number": 0}'])

    def test_non_consecutive_blocks_flagged(self, fixture):
        blocks = [l for i, l in enumerate(fixture.block_lines) if i != 5]
        verdict = verify_log(fixture.pulse_lines, blocks)
        assert any("consecutive" in v.message for v in verdict.violations)

    def test_missing_deployment_block(self, fixture):
        verdict = verify_log(fixture.pulse_lines, fixture.block_lines[1:])
        assert not verdict.ok
