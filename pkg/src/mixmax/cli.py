"""Command line: ``mixmax run <config.json>`` and ``mixmax verify <suite>``."""

from __future__ import annotations

import argparse
import sys

from .experiments import load_config, run
from .suites import SUITES


def _run(args) -> int:
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    csv_path, manifest_path = run(cfg, args.out, args.workers)
    print(f"wrote {csv_path}")
    print(f"wrote {manifest_path}")
    return 0


def _verify(args) -> int:
    if args.suite not in SUITES:
        print(f"error: unknown suite {args.suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return 2
    result = SUITES[args.suite](seed=args.seed)
    for line in result.lines:
        print("  " + line)
    print(result.summary())
    return 0 if result.passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mixmax", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config or manifest")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.set_defaults(func=_run)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("suite")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=_verify)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
