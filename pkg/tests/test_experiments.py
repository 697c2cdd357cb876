"""Bias harness, closed form, and the naive-combine demonstration."""

import json
import math

import pytest

from lighthouse.experiments import (
    BiasReport,
    bias_experiment,
    closed_form_bias,
    naive_combine_demo,
)


class TestClosedForm:
    def test_endpoints(self):
        assert closed_form_bias(0.0) == 0.0
        assert closed_form_bias(1.0) == 0.5  # full coalition: publishes only wanted bits

    def test_half(self):
        assert closed_form_bias(0.5) == pytest.approx(1 / 6)

    def test_domain(self):
        with pytest.raises(ValueError):
            closed_form_bias(-0.01)
        with pytest.raises(ValueError):
            closed_form_bias(1.01)


class TestBiasExperiment:
    def test_validation(self):
        with pytest.raises(ValueError, match="non-empty"):
            bias_experiment([], 10_000, 1, "raw-blockhash")
        with pytest.raises(ValueError, match="mode"):
            bias_experiment([0.1], 10_000, 1, "sideways")
        with pytest.raises(ValueError, match="trials"):
            bias_experiment([0.1], 100, 1, "raw-blockhash")

    def test_raw_zero_fraction_unbiased(self):
        report = bias_experiment([0.0], 20_000, 11, "raw-blockhash")
        row = report.rows[0]
        assert row.closed_form_bias == 0.0
        assert abs(row.empirical_bias) <= 3 * math.sqrt(0.25 / row.trials)
        assert row.discards == 0

    def test_raw_published_row_ten_percent(self):
        report = bias_experiment([0.1], 100_000, 12, "raw-blockhash")
        assert abs(report.rows[0].empirical_bias - 0.03) <= 0.01

    def test_no_collusion_closed_form_is_zero(self):
        report = bias_experiment([0.4], 10_000, 13, "lighthouse-no-collusion")
        assert report.rows[0].closed_form_bias == 0.0

    def test_full_collusion_tracks_closed_form(self):
        report = bias_experiment([0.5], 50_000, 14, "lighthouse-full-collusion")
        row = report.rows[0]
        assert row.closed_form_bias == pytest.approx(1 / 6)
        assert abs(row.empirical_bias - row.closed_form_bias) <= 3 * row.std_error

    def test_deterministic_in_seed(self):
        a = bias_experiment([0.3], 10_000, 7, "raw-blockhash")
        b = bias_experiment([0.3], 10_000, 7, "raw-blockhash")
        assert a == b

    def test_text_and_csv_render(self):
        report = bias_experiment([0.05, 0.5], 10_000, 1, "raw-blockhash")
        text = report.to_text()
        assert "fraction" in text and len(text.splitlines()) == 4
        csv = report.to_csv()
        lines = csv.strip().splitlines()
        assert lines[0].startswith("fraction,trials,empirical_bias")
        assert len(lines) == 3
        float(lines[1].split(",")[2])  # parses
        assert json.dumps(report.to_dict())  # JSON-serializable


class TestNaiveCombine:
    def test_validation(self):
        with pytest.raises(ValueError):
            naive_combine_demo(0, 100, 1)
        with pytest.raises(ValueError):
            naive_combine_demo(1, 0, 1)

    def test_one_attempt_means_no_choice(self):
        report = naive_combine_demo(1, 50_000, 3)
        assert report.expected_bias == 0.0
        assert abs(report.empirical_bias) <= 3 * math.sqrt(0.25 / report.trials)

    def test_two_attempts_quarter_bias(self):
        # Best-of-two misses only when both candidates miss: P = 3/4.
        report = naive_combine_demo(2, 100_000, 4)
        assert report.expected_bias == pytest.approx(0.25)
        assert abs(report.empirical_bias - 0.25) <= 0.01

    def test_twenty_attempts_near_total_influence(self):
        report = naive_combine_demo(20, 20_000, 5)
        assert report.empirical_bias >= 0.49
        assert report.expected_bias == pytest.approx(0.5, abs=1e-5)

    def test_deterministic(self):
        assert naive_combine_demo(3, 10_000, 9) == naive_combine_demo(3, 10_000, 9)
