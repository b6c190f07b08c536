"""Command line front end: run scenarios, diff the schemes, report costs.

Exit codes: 0 when the observed outcome matches the scenario's expected
outcome (for attack scenarios the expected outcome is the documented
rejection), 1 on a mismatch, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .hashing import HashConfig
from .scenarios import (
    EXPECTED_VERDICTS,
    SCENARIOS,
    SCHEMES,
    ScenarioResult,
    matches_expected,
    measure_costs,
    run_scenario,
)

HASH_CHOICES = {"standard": "sha256", "toy8": "toy8", "toy16": "toy16"}

DIVERGING_SCENARIOS = ("wrong-password", "wrong-password-change")


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _seed_type(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    raw = os.environ.get("SMARTAUTH_SEED")
    if raw is None:
        return 0
    try:
        return _seed_type(raw)
    except (ValueError, argparse.ArgumentTypeError):
        print("error: SMARTAUTH_SEED must be a 64-bit unsigned integer", file=sys.stderr)
        raise SystemExit(2) from None


def _verdict_text(result: ScenarioResult) -> str:
    if result.reason is None:
        return result.verdict
    return f"{result.verdict}:{result.reason.value}"


def _text_report(trial: int, result: ScenarioResult, transcript) -> str:
    lines = [
        f"== trial {trial} scheme={result.scheme} scenario={result.scenario} seed={result.seed} ==",
        transcript.render().rstrip("\n"),
        f"verdict: {_verdict_text(result)}",
        f"messages sent: {result.messages_sent}",
        "hash calls: client={client} server={server}".format(**result.hash_counts),
    ]
    if result.client_key is not None:
        lines.append(f"client session key: {result.client_key.hex()}")
        lines.append(f"server session key: {result.server_key.hex()}")
    return "\n".join(lines) + "\n"


def _run_summary(args, results: list[ScenarioResult]) -> str:
    matched = sum(1 for r in results if matches_expected(r))
    verdict, _ = EXPECTED_VERDICTS[(args.scheme, args.scenario)]
    lines = [f"expected verdict: {verdict}; matched: {matched}/{len(results)}"]
    if args.scenario == "wrong-password-change":
        if args.scheme == "baseline":
            lines.append(f"card corrupted: subsequent logins rejected: {matched}/{len(results)}")
        else:
            lines.append(f"change rejected, card intact: logins accepted: {matched}/{len(results)}")
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    config = HashConfig(HASH_CHOICES[args.hash])
    seed = _resolve_seed(args.seed)
    chunks = []
    results = []
    for trial in range(args.trials):
        transcript, result = run_scenario(args.scheme, args.scenario, seed + trial, config)
        results.append(result)
        if args.format == "structured-lines":
            chunks.append(transcript.render())
        else:
            chunks.append(_text_report(trial, result, transcript))
    if args.format == "text":
        chunks.append(_run_summary(args, results))
    output = "".join(chunks)
    if args.out is not None:
        Path(args.out).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return 0 if all(matches_expected(r) for r in results) else 1


def cmd_diff(args) -> int:
    config = HashConfig(HASH_CHOICES[args.hash])
    base = _resolve_seed(args.seed)
    seeds = args.seeds if args.seeds else list(range(base, base + 10))
    all_ok = True
    for scenario in SCENARIOS:
        diverged = 0
        sample = None
        for seed in seeds:
            _, result_b = run_scenario("baseline", scenario, seed, config)
            _, result_i = run_scenario("improved", scenario, seed, config)
            if result_b.verdict != result_i.verdict:
                diverged += 1
            sample = (result_b, result_i)
        expect_diverge = scenario in DIVERGING_SCENARIOS
        ok = diverged == len(seeds) if expect_diverge else diverged == 0
        all_ok &= ok
        print(
            f"{scenario:<24} baseline={_verdict_text(sample[0]):<24} "
            f"improved={_verdict_text(sample[1]):<28} "
            f"{'diverge' if expect_diverge else 'agree':<8} "
            f"{len(seeds) - diverged if not expect_diverge else diverged}/{len(seeds)} "
            f"{'ok' if ok else 'FAIL'}"
        )
    print(
        "divergence expected exactly on: " + ", ".join(DIVERGING_SCENARIOS)
        + (" -- confirmed" if all_ok else " -- VIOLATED")
    )
    return 0 if all_ok else 1


def cmd_cost(args) -> int:
    config = HashConfig(HASH_CHOICES[args.hash])
    report = measure_costs(config, _resolve_seed(args.seed))
    print("hash invocations per honest run (registration and biometric gate excluded)")
    print()
    print(f"{'phase':<28} {'baseline':>8} {'improved':>8}")
    for phase in report.phases["baseline"]:
        print(
            f"{phase:<28} {report.phases['baseline'][phase]:>8} "
            f"{report.phases['improved'][phase]:>8}"
        )
    print(f"{'total':<28} {report.total('baseline'):>8} {report.total('improved'):>8}")
    print()
    print(f"hash delta (improved - baseline): {report.hash_delta}")
    print(
        f"card storage: baseline={report.card_digests['baseline']} digests + salt, "
        f"improved={report.card_digests['improved']} digests + salt"
    )
    print(
        f"storage delta: {report.storage_delta_digests} digest "
        f"({report.storage_delta_digests * report.digest_size} bytes)"
    )
    ok = report.hash_delta == 2 and report.storage_delta_digests == 1
    if not ok:
        print("cost contract violated: expected hash delta 2 and storage delta 1 digest")
    return 0 if ok else 1


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="smartauth",
        description="Run, compare, and cost two smart-card authentication schemes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario and print its transcript")
    run_p.add_argument("--scheme", choices=SCHEMES, default="improved")
    run_p.add_argument("--scenario", choices=SCENARIOS, default="honest")
    run_p.add_argument("--seed", type=_seed_type, default=None,
                       help="base seed (default: SMARTAUTH_SEED or 0)")
    run_p.add_argument("--trials", type=_positive, default=1,
                       help="repeat with seeds seed, seed+1, ...")
    run_p.add_argument("--hash", choices=sorted(HASH_CHOICES), default="standard")
    run_p.add_argument("--out", default=None, help="write output to this file instead of stdout")
    run_p.add_argument("--format", choices=("text", "structured-lines"), default="text")
    run_p.set_defaults(func=cmd_run)

    diff_p = sub.add_parser("diff", help="run every scenario under both schemes and compare")
    diff_p.add_argument("--seeds", type=_seed_type, nargs="+", default=None,
                        help="seeds to compare (default: 10 seeds from the base seed)")
    diff_p.add_argument("--seed", type=_seed_type, default=None)
    diff_p.add_argument("--hash", choices=sorted(HASH_CHOICES), default="standard")
    diff_p.set_defaults(func=cmd_diff)

    cost_p = sub.add_parser("cost", help="per-phase hash counts and card storage")
    cost_p.add_argument("--seed", type=_seed_type, default=None)
    cost_p.add_argument("--hash", choices=sorted(HASH_CHOICES), default="standard")
    cost_p.set_defaults(func=cmd_cost)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
