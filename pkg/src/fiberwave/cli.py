"""Command line front end.

    fiberwave run <file|builtin>... [--out DIR] [--steps N] [--oracle] [--jobs N]
    fiberwave validate <file>...
    fiberwave list

Exit codes: 0 all checks passed, 2 invalid input, 3 a numerical check
failed (report still written), 4 pole passage.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .errors import DegenerateTangentError, DomainError, PolePassageError, ValidationError
from .runner import EXIT_OK, EXIT_POLE, EXIT_VALIDATION, run_scenario
from .scenario import BUILTINS, ScenarioError, load_scenario

log = logging.getLogger("fiberwave")


def _load(ref):
    scenario, warnings = load_scenario(ref)
    for message in warnings:
        log.warning("%s: %s", ref, message)
    return scenario


def _run_one(ref, out_dir, steps, oracle):
    try:
        scenario = _load(ref)
        result = run_scenario(scenario, out_dir, steps=steps, oracle=oracle or None)
    except ScenarioError as exc:
        for problem in exc.problems:
            log.error("%s", problem)
        return EXIT_VALIDATION
    except (ValidationError, DomainError, DegenerateTangentError) as exc:
        log.error("%s: %s", ref, exc)
        return EXIT_VALIDATION
    except PolePassageError as exc:
        log.error("%s: %s", ref, exc)
        return EXIT_POLE
    for check in result.checks:
        if not check.passed:
            log.error("%s: check %s failed (measured %r %s %r)", scenario.name, check.name,
                      check.measured, "<" if check.comparison == ">=" else ">", check.threshold)
    verdict = "PASS" if result.passed else "FAIL"
    print(f"{scenario.name}: {verdict} ({sum(c.passed for c in result.checks)}/{len(result.checks)} checks) "
          f"-> {out_dir}")
    return result.exit_code


def cmd_run(args):
    out_dir = args.out or os.environ.get("FIBERWAVE_OUT") or "."
    if args.steps is not None and args.steps < 2:
        log.error("--steps: must be an integer >= 2, got %d", args.steps)
        return EXIT_VALIDATION
    jobs = max(1, args.jobs)
    if jobs == 1 or len(args.scenarios) == 1:
        codes = [_run_one(ref, out_dir, args.steps, args.oracle) for ref in args.scenarios]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_one, ref, out_dir, args.steps, args.oracle) for ref in args.scenarios]
            codes = [f.result() for f in futures]
    return max(codes)


def cmd_validate(args):
    code = EXIT_OK
    for ref in args.scenarios:
        try:
            scenario = _load(ref)
            scenario.build_path()
        except ScenarioError as exc:
            for problem in exc.problems:
                print(f"error: {problem}", file=sys.stderr)
            code = EXIT_VALIDATION
            continue
        print(f"{ref}: ok (scenario '{scenario.name}', j={scenario.j}, steps={scenario.steps})")
    return code


def cmd_list(args):
    width = max(len(name) for name in BUILTINS)
    for name, spec in BUILTINS.items():
        print(f"{name:<{width}}  {spec['description']}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="fiberwave", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run scenario files or built-ins")
    run.add_argument("scenarios", nargs="+", metavar="file")
    run.add_argument("--out", help="output directory (default: $FIBERWAVE_OUT or .)")
    run.add_argument("--steps", type=int, help="override the number of time steps")
    run.add_argument("--oracle", action="store_true", help="also run the RK4 reference integrator")
    run.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    run.set_defaults(func=cmd_run)

    validate = sub.add_parser("validate", help="check scenario files without running them")
    validate.add_argument("scenarios", nargs="+", metavar="file")
    validate.set_defaults(func=cmd_validate)

    lst = sub.add_parser("list", help="list built-in scenarios")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
