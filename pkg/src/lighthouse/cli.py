"""Command line interface.

Subcommands:

* ``run``         simulate a scenario config, write pulse/event/block logs
* ``bias``        Monte Carlo miner-bias table across coalition fractions
* ``naive-demo``  uncommitted-producer influence measurement
* ``verify``      recompute a pulse log and report every violation

Exit codes: 0 success / verification passed, 1 verification failure or
runtime livelock, 2 configuration errors.  Every command with a --seed is
byte-deterministic in it.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from lighthouse import kernels
from lighthouse.experiments import MODES, bias_experiment, naive_combine_demo
from lighthouse.ledger import LivelockError
from lighthouse.logverify import LogFormatError, verify_log
from lighthouse.scenario import ConfigError, load_scenario, run_scenario, scenario_from_dict

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_scenario(args.config)
    if args.seed is not None:
        raw = json.loads(Path(args.config).read_text())
        raw["master_seed"] = args.seed
        config = scenario_from_dict(raw)
    result = run_scenario(config)
    paths = result.write_outputs(args.out)
    for key in ("pulses", "events", "blocks", "summary"):
        print(f"wrote {paths[key]}")
    print(_dump(result.summary))
    return EXIT_OK


def _parse_fractions(text: str) -> list[float]:
    try:
        fractions = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"--fractions: could not parse {text!r}") from None
    if not fractions:
        raise ConfigError("--fractions: empty list")
    for fraction in fractions:
        if not 0.0 <= fraction <= 1.0:
            raise ConfigError(f"--fractions: {fraction} outside [0, 1]")
    return fractions


def _cmd_bias(args: argparse.Namespace) -> int:
    report = bias_experiment(
        fractions=_parse_fractions(args.fractions),
        trials=args.trials,
        seed=args.seed,
        mode=args.mode,
        bit_index=args.bit,
        desired=args.desired,
    )
    print(report.to_text())
    print(f"backend: {kernels.BACKEND}", file=sys.stderr)
    if args.csv:
        Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
        Path(args.csv).write_text(report.to_csv())
        print(f"wrote {args.csv}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bias.json").write_text(_dump(report.to_dict()) + "\n")
        (out / "bias.csv").write_text(report.to_csv())
        print(f"wrote {out / 'bias.json'}")
    return EXIT_OK


def _cmd_naive_demo(args: argparse.Namespace) -> int:
    report = naive_combine_demo(
        k_attempts=args.attempts, trials=args.trials, seed=args.seed,
        bit_index=args.bit, desired=args.desired,
    )
    print(
        f"attempts={report.attempts} trials={report.trials} "
        f"empirical_bias={report.empirical_bias:.6f} expected={report.expected_bias:.6f} "
        f"stderr={report.std_error:.6f}"
    )
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "naive.json").write_text(_dump(report.to_dict()) + "\n")
        print(f"wrote {out / 'naive.json'}")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    pulse_lines = Path(args.pulses).read_text().splitlines()
    block_lines = Path(args.blocks).read_text().splitlines()
    event_lines = Path(args.events).read_text().splitlines() if args.events else None
    verdict = verify_log(pulse_lines, block_lines, event_lines)
    outcome = {
        "ok": verdict.ok,
        "rounds_checked": verdict.rounds_checked,
        "violations": [
            {"round": v.round, "field": v.field, "message": v.message}
            for v in verdict.violations
        ],
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "verdict.json").write_text(_dump(outcome) + "\n")
    if verdict.ok:
        print(f"PASS: {verdict.rounds_checked} rounds verified")
        return EXIT_OK
    print(f"FAIL: {len(verdict.violations)} violation(s) over {verdict.rounds_checked} rounds")
    for violation in verdict.violations:
        print(f"  {violation}")
    return EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lighthouse",
        description="Distributed public-randomness beacon simulator and verifier.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario config")
    p_run.add_argument("--config", required=True, help="scenario JSON file")
    p_run.add_argument("--seed", type=int, default=None, help="override the master seed")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_bias = sub.add_parser("bias", help="miner bias table across coalition fractions")
    p_bias.add_argument(
        "--mode", choices=MODES, default="raw-blockhash", help="what the coalition attacks"
    )
    p_bias.add_argument(
        "--fractions", default="0.05,0.1,0.2,0.3,0.4,0.5", help="comma-separated fractions"
    )
    p_bias.add_argument("--trials", type=int, default=1_000_000, help="competitions per fraction")
    p_bias.add_argument("--seed", type=int, default=42)
    p_bias.add_argument("--bit", type=int, default=0, help="target bit index [0, 255]")
    p_bias.add_argument("--desired", type=int, choices=(0, 1), default=1)
    p_bias.add_argument("--csv", default=None, help="also write the table as CSV here")
    p_bias.add_argument("--out", default=None, help="directory for bias.json/bias.csv")
    p_bias.set_defaults(func=_cmd_bias)

    p_naive = sub.add_parser("naive-demo", help="uncommitted-producer influence demo")
    p_naive.add_argument("--attempts", type=int, default=10, help="candidate values per trial")
    p_naive.add_argument("--trials", type=int, default=100_000)
    p_naive.add_argument("--seed", type=int, default=42)
    p_naive.add_argument("--bit", type=int, default=0)
    p_naive.add_argument("--desired", type=int, choices=(0, 1), default=1)
    p_naive.add_argument("--out", default=None, help="directory for naive.json")
    p_naive.set_defaults(func=_cmd_naive_demo)

    p_verify = sub.add_parser("verify", help="recompute and check a pulse log")
    p_verify.add_argument("--pulses", required=True, help="pulse log (JSON lines)")
    p_verify.add_argument("--blocks", required=True, help="block summaries (JSON lines)")
    p_verify.add_argument("--events", default=None, help="event log for cross-checks")
    p_verify.add_argument("--seed", type=int, default=None, help="unused; verification is exact")
    p_verify.add_argument("--out", default=None, help="directory for verdict.json")
    p_verify.set_defaults(func=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LogFormatError as exc:
        print(f"log format error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except LivelockError as exc:
        print(f"livelock: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
