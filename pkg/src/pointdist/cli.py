"""Command-line front end: ``pointdist <task> --scenario FILE --out DIR``."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor

from .scenario import (
    TASKS,
    ScenarioError,
    load_scenarios,
    run_scenario,
    write_artifacts,
)

log = logging.getLogger("pointdist")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointdist",
        description="Checks, solvers and defect forces for point-singular fields in plane elasticity.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for task in TASKS + ("run",):
        help_text = "run the task named in each scenario" if task == "run" else f"run a {task} scenario"
        p = sub.add_parser(task, help=help_text)
        p.add_argument("--scenario", required=True, help="YAML scenario file")
        p.add_argument("--out", required=True, help="output directory for report.txt, result.json and grids")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for multi-scenario files (default 1)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    default_task = None if args.command == "run" else args.command
    try:
        scenarios = load_scenarios(args.scenario, default_task)
        for sc in scenarios:
            log.info("queued %s (%s)", sc.name, sc.task)
        if args.jobs > 1 and len(scenarios) > 1:
            # map keeps file order, so artifacts do not depend on scheduling
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(run_scenario, scenarios))
        else:
            results = [run_scenario(sc) for sc in scenarios]
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    record = write_artifacts(results, args.out)
    for r in results:
        status = r.verdict if r.verdict is not None else "done"
        print(f"{r.name}: {r.task}: {status}")
    return 0 if record["all_ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
