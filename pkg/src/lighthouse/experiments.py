"""Bias measurements: how far can a miner coalition push one output bit.

Three modes, one harness:

* ``raw-blockhash``: the coalition re-mines blocks whose hash has the
  wrong target bit.  The published-bit probability follows a geometric
  retry law: each sub-round publishes the wanted bit with probability
  1/2, the unwanted bit with probability (1-F)/2, and repeats with
  probability F/2, giving P(wanted) = 1/(2-F) and bias F/(2(2-F)).
* ``lighthouse-no-collusion``: the coalition biases the block-hash bit,
  but the measured bit is of hash(V || block hash) for a committed value
  it never sees.  The bias collapses to zero.
* ``lighthouse-full-collusion``: the producer leaks V, the coalition
  filters directly on the output bit, and the raw-blockhash law returns.

Also here: the closed form itself, and the naive-combine demonstration of
why the producer must commit before the block hash exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from hashlib import sha3_256 as _sha3

from lighthouse import kernels
from lighthouse.seeds import le64

MODES = ("raw-blockhash", "lighthouse-no-collusion", "lighthouse-full-collusion")
_MODE_IDS = {
    "raw-blockhash": kernels.MODE_RAW,
    "lighthouse-no-collusion": kernels.MODE_NO_COLLUSION,
    "lighthouse-full-collusion": kernels.MODE_FULL_COLLUSION,
}
MIN_TRIALS = 10_000


def closed_form_bias(fraction: float) -> float:
    """Expected bias of the targeted bit for coalition fraction F: F/(2(2-F))."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be in [0, 1]")
    return fraction / (2.0 * (2.0 - fraction))


@dataclass(frozen=True)
class BiasRow:
    fraction: float
    trials: int
    empirical_bias: float
    closed_form_bias: float
    std_error: float
    discards: int
    livelocks: int


@dataclass(frozen=True)
class BiasReport:
    mode: str
    seed: int
    bit_index: int
    desired: int
    rows: tuple[BiasRow, ...]

    def to_text(self) -> str:
        header = (
            f"{'fraction':>8}  {'trials':>9}  {'empirical':>10}  "
            f"{'closed':>8}  {'stderr':>8}  {'discards':>9}"
        )
        lines = [f"mode={self.mode} bit={self.bit_index} desired={self.desired} seed={self.seed}",
                 header]
        for row in self.rows:
            lines.append(
                f"{row.fraction:>8.3f}  {row.trials:>9d}  {row.empirical_bias:>10.6f}  "
                f"{row.closed_form_bias:>8.6f}  {row.std_error:>8.6f}  {row.discards:>9d}"
            )
        return "\n".join(lines)

    def to_csv(self) -> str:
        lines = ["fraction,trials,empirical_bias,closed_form_bias,std_error,discards,livelocks"]
        for row in self.rows:
            lines.append(
                f"{row.fraction:.6f},{row.trials},{row.empirical_bias:.6f},"
                f"{row.closed_form_bias:.6f},{row.std_error:.6f},{row.discards},{row.livelocks}"
            )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "bit_index": self.bit_index,
            "desired": self.desired,
            "rows": [
                {
                    "fraction": row.fraction,
                    "trials": row.trials,
                    "empirical_bias": row.empirical_bias,
                    "closed_form_bias": row.closed_form_bias,
                    "std_error": row.std_error,
                    "discards": row.discards,
                    "livelocks": row.livelocks,
                }
                for row in self.rows
            ],
        }


def bias_experiment(
    fractions: list[float],
    trials: int,
    seed: int,
    mode: str,
    bit_index: int = 0,
    desired: int = 1,
    discard_cap: int = kernels.DEFAULT_DISCARD_CAP,
) -> BiasReport:
    """Monte Carlo estimate of P(target bit = desired) - 1/2 per fraction."""
    if not fractions:
        raise ValueError("fractions must be non-empty")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be at least {MIN_TRIALS}")
    mode_id = _MODE_IDS[mode]
    rows = []
    for fraction in fractions:
        hits, discards, livelocks = kernels.bias_trials(
            mode_id, seed, trials, fraction, bit_index, desired, discard_cap
        )
        p_hat = hits / trials
        rows.append(
            BiasRow(
                fraction=fraction,
                trials=trials,
                empirical_bias=p_hat - 0.5,
                closed_form_bias=(
                    0.0 if mode == "lighthouse-no-collusion" else closed_form_bias(fraction)
                ),
                std_error=math.sqrt(p_hat * (1.0 - p_hat) / trials),
                discards=discards,
                livelocks=livelocks,
            )
        )
    return BiasReport(
        mode=mode, seed=seed, bit_index=bit_index, desired=desired, rows=tuple(rows)
    )


@dataclass(frozen=True)
class NaiveCombineReport:
    attempts: int
    trials: int
    empirical_bias: float
    expected_bias: float
    std_error: float

    def to_dict(self) -> dict:
        return {
            "attempts": self.attempts,
            "trials": self.trials,
            "empirical_bias": self.empirical_bias,
            "expected_bias": self.expected_bias,
            "std_error": self.std_error,
        }


def naive_combine_demo(
    k_attempts: int, trials: int, seed: int, bit_index: int = 0, desired: int = 1
) -> NaiveCombineReport:
    """Uncommitted producer picking the best of k values after seeing the
    block hash.

    Output = hash(block hash || value).  Trying candidate values until the
    target bit lands right succeeds unless all k candidates miss, so
    P(wanted) = 1 - 2^-k and the bias is 0.5 - 2^-k: one candidate means
    no choice at all, twenty means near-total control.
    """
    if k_attempts < 1:
        raise ValueError("k_attempts must be at least 1")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    byte_pos = bit_index >> 3
    shift = bit_index & 7
    seed_le = le64(seed)
    hits = 0
    for trial in range(trials):
        trial_le = le64(trial)
        block_hash = _sha3(b"lh-naive-h:" + seed_le + trial_le).digest()
        for attempt in range(k_attempts):
            value = _sha3(b"lh-naive-v:" + seed_le + trial_le + le64(attempt)).digest()
            out = _sha3(block_hash + value).digest()
            bit = (out[byte_pos] >> shift) & 1
            if bit == desired:
                break
        hits += bit == desired
    p_hat = hits / trials
    return NaiveCombineReport(
        attempts=k_attempts,
        trials=trials,
        empirical_bias=p_hat - 0.5,
        expected_bias=0.5 - 2.0 ** -k_attempts,
        std_error=math.sqrt(p_hat * (1.0 - p_hat) / trials) if 0 < p_hat < 1 else 0.0,
    )
