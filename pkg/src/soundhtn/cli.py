"""Command-line harness: ``plan``, ``validate``, ``experiment`` and ``cache``.

Exit codes: 0 success, 1 no plan / plan rejected, 2 load or usage error,
3 oracle transport failure, 4 soundness violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

from .domains import NAMES, DomainBundle, load_bundle, load_bundle_dir
from .experiment import (
    AblationSpec,
    ExperimentReport,
    OracleChoice,
    SoundnessViolation,
    ablation_matrix,
    run_domain,
    write_plan,
    write_trace,
)
from .loader import load_domain, load_problem, parse_task
from .model import Domain, HTNError, Problem
from .oracle import ExchangeCache, OracleFailure
from .oracle.base import TRANSPORT
from .planner import Limits, plan
from .validator import satisfies, satisfies_any_split

EXIT_OK = 0
EXIT_NO_PLAN = 1
EXIT_LOAD = 2
EXIT_TRANSPORT = 3
EXIT_UNSOUND = 4

log = logging.getLogger("soundhtn")


class UsageError(Exception):
    pass


def offline_transport(messages):
    """Transport for replay: any cache miss is a transport failure."""
    raise OracleFailure(TRANSPORT, "offline replay: exchange not in cache")


# -- resolution helpers ------------------------------------------------------

def _bundle_or_none(domain: str) -> Optional[DomainBundle]:
    if domain in NAMES:
        return load_bundle(domain)
    path = Path(domain)
    if path.is_dir():
        return load_bundle_dir(path)
    return None


def _resolve(args) -> tuple[Domain, Problem, Optional[DomainBundle]]:
    bundle = _bundle_or_none(args.domain)
    if bundle is not None:
        domain = bundle.domain
        if args.problem in (None, "prototypical"):
            return domain, bundle.problem, bundle
        if args.problem == "unsolvable":
            return domain, bundle.unsolvable, bundle
    else:
        domain = load_domain(args.domain)
        if args.problem is None:
            raise UsageError("--problem is required with a domain file")
    return domain, load_problem(args.problem, domain), bundle


def _limits(args) -> Limits:
    return Limits(depth_limit=args.depth_limit, oracle_budget=args.oracle_budget)


def _cache(args) -> Optional[ExchangeCache]:
    return ExchangeCache(args.cache) if args.cache else None


def _read_plan(path: str, domain: Domain, problem: Problem):
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    return [parse_task(ln, domain, problem.constants) for ln in lines if ln and not ln.startswith("#")]


def _read_splits(args) -> Optional[list[int]]:
    if args.splits:
        return [int(x) for x in args.splits.split(",") if x.strip()]
    if args.trace:
        for line in reversed(Path(args.trace).read_text().splitlines()):
            if line.strip():
                event = json.loads(line)
                if event.get("event") == "result" and event.get("found"):
                    return list(event["splits"])
        raise UsageError(f"{args.trace}: no successful result event with splits")
    return None


# -- subcommands -------------------------------------------------------------

def cmd_plan(args) -> int:
    domain, problem, bundle = _resolve(args)
    choice = OracleChoice.parse(args.oracle)
    spec = AblationSpec.parse(args.ablate) if args.ablate else None
    methods = spec.methods(bundle) if spec and bundle else None
    if spec and bundle is None:
        raise UsageError("--ablate needs a bundled domain")
    oracles = choice.factory(bundle, _cache(args))

    result = None
    calls = []
    for attempt in range(args.retries):
        oracle = oracles(attempt)
        result = plan(problem, oracle, _limits(args), methods)
        calls.append(result.stats.oracle_calls)
        if result.found or not getattr(oracle, "stochastic", False):
            break

    if args.trace:
        write_trace(Path(args.trace), result)
    summary = {"found": result.found, "reason": result.reason, "calls": calls, "stats": asdict(result.stats)}
    if result.found:
        verdict = satisfies(domain, problem.initial, problem.tasks, result.actions, result.splits)
        summary["validated"] = verdict.accepted
        summary["splits"] = list(result.splits)
        if args.plan_out:
            write_plan(Path(args.plan_out), result)
        else:
            for a in result.actions:
                print(a)
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
        return EXIT_OK if verdict.accepted else EXIT_UNSOUND
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    if result.stats.transport_failures:
        return EXIT_TRANSPORT
    return EXIT_NO_PLAN


def cmd_validate(args) -> int:
    domain, problem, _ = _resolve(args)
    actions = _read_plan(args.plan, domain, problem)
    splits = _read_splits(args)
    if splits is None:
        if len(problem.tasks) == 1:
            splits = [len(actions)]
        else:
            verdict = satisfies_any_split(domain, problem.initial, problem.tasks, actions)
            return _report_verdict(verdict)
    verdict = satisfies(domain, problem.initial, problem.tasks, actions, splits)
    return _report_verdict(verdict)


def _report_verdict(verdict) -> int:
    out = {"accepted": verdict.accepted}
    if verdict.failure is not None:
        out.update(position=verdict.failure.position, cause=verdict.failure.cause, detail=verdict.failure.detail)
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK if verdict.accepted else EXIT_NO_PLAN


def _experiment(args, transport=None) -> int:
    names = args.domain or list(NAMES)
    choice = OracleChoice.parse(args.oracle)
    jobs = args.jobs if args.jobs is not None else (1 if choice.kind == "live" else 4)
    cache = _cache(args)
    artifacts = Path(args.artifacts) if args.artifacts else None
    reports = []
    try:
        for name in names:
            bundle = _bundle_or_none(name)
            if bundle is None:
                raise UsageError(f"{name}: not a bundled domain or bundle directory")
            specs = (
                [AblationSpec.parse(a, args.retries) for a in args.ablate]
                if args.ablate else ablation_matrix(bundle, args.retries)
            )
            oracles = choice.factory(bundle, cache, transport)
            reports.append(run_domain(bundle, oracles, str(choice), specs, _limits(args), jobs, artifacts))
    except SoundnessViolation as exc:
        print(f"SOUNDNESS VIOLATION: {exc}", file=sys.stderr)
        return EXIT_UNSOUND
    report = ExperimentReport(reports)
    sys.stdout.write(report.to_text())
    if args.report:
        Path(args.report).write_text(report.to_json())
    return EXIT_OK


def cmd_experiment(args) -> int:
    return _experiment(args)


def cmd_cache_inspect(args) -> int:
    cache = ExchangeCache(args.cache)
    for ex in cache:
        print(f"{ex.fingerprint[:16]}  {ex.timestamp or '-':25}  {len(ex.tasks)} tasks  {' ; '.join(ex.tasks)}")
    print(f"{len(cache)} exchanges", file=sys.stderr)
    return EXIT_OK


def cmd_cache_replay(args) -> int:
    if not Path(args.cache).exists():
        raise UsageError(f"{args.cache}: no such cache file")
    args.oracle = "live"
    return _experiment(args, transport=offline_transport)


# -- parser ------------------------------------------------------------------

def _search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--depth-limit", type=int, default=Limits.depth_limit)
    p.add_argument("--oracle-budget", type=int, default=Limits.oracle_budget)
    p.add_argument("--cache", help="JSONL exchange cache for the live oracle")


def _experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--domain", action="append", help=f"bundle name ({', '.join(NAMES)}) or directory; repeatable")
    p.add_argument("--retries", type=int, default=5)
    p.add_argument("--jobs", type=int, default=None, help="parallel cells (default 4, or 1 for live)")
    p.add_argument("--ablate", action="append", help="run only these cells, e.g. method-removed:truckTransport:2")
    p.add_argument("--report", help="write the machine-readable report here")
    p.add_argument("--artifacts", help="directory for plan and trace files of solved cells")
    _search_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="soundhtn", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve one problem")
    p.add_argument("--domain", required=True, help=f"bundle name ({', '.join(NAMES)}), bundle directory or domain file")
    p.add_argument("--problem", help="problem file, or 'prototypical' / 'unsolvable' for a bundle")
    p.add_argument("--oracle", default="failing", help="failing | scripted[:file] | adversarial:<seed> | live | none")
    p.add_argument("--retries", type=int, default=1)
    p.add_argument("--ablate", help="full | no-model | no-methods:T | method-removed:T:i")
    p.add_argument("--trace", help="write the search trace (JSONL) here")
    p.add_argument("--plan-out", help="write the plan here instead of stdout")
    _search_flags(p)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("validate", help="check a plan against a problem's task list")
    p.add_argument("--domain", required=True)
    p.add_argument("--problem")
    p.add_argument("--plan", required=True, help="one action per line")
    p.add_argument("--trace", help="trace file whose result event gives the task splits")
    p.add_argument("--splits", help="comma-separated cumulative split offsets")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("experiment", help="run the ablation matrix")
    p.add_argument("--oracle", default="scripted")
    _experiment_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("cache", help="inspect or replay a recorded exchange cache")
    csub = p.add_subparsers(dest="cache_command", required=True)
    q = csub.add_parser("inspect")
    q.add_argument("--cache", required=True)
    q.set_defaults(func=cmd_cache_inspect)
    q = csub.add_parser("replay", help="rerun the experiment offline from recorded exchanges")
    _experiment_flags(q)
    q.set_defaults(func=cmd_cache_replay)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (HTNError, UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    except OracleFailure as exc:
        print(f"oracle failure: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT


if __name__ == "__main__":
    sys.exit(main())
