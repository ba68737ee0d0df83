"""Command line entry point: ``mixlab list | run NAME [--key value]... | check``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import REGISTRY, ExperimentSpec, UsageError, run


def parse_overrides(tokens: list[str]) -> dict[str, str]:
    """Turn ``--key value`` / ``--key=value`` tokens into a dict."""
    out: dict[str, str] = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise UsageError(f"expected --key value, got {tok!r}")
        if "=" in tok:
            key, value = tok[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise UsageError(f"missing value for {tok}")
            key, value = tok[2:], tokens[i + 1]
            i += 2
        out[key.replace("-", "_")] = value
    return out


def read_config(path: Path) -> dict[str, str]:
    """Plain ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _report(bundle) -> str:
    flag = "PASS" if bundle.passed else "FAIL"
    return f"{flag} {bundle.claim:<6} {bundle.name:<22} {bundle.seconds:7.2f}s"


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="mixlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list registered experiments")
    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("name")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", type=Path, default=None)
    p_run.add_argument("--config", type=Path, default=None)
    p_check = sub.add_parser("check", help="run every experiment with defaults")
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--out", type=Path, default=None)

    args, rest = parser.parse_known_args(argv)
    try:
        if args.command == "list":
            if rest:
                raise UsageError(f"unexpected arguments {rest}")
            for name, exp in REGISTRY.items():
                print(f"{name:<22} {exp.claim:<6} {exp.doc}")
                print(f"{'':<29} {exp.schema()}")
            return 0
        if args.command == "run":
            params = read_config(args.config) if args.config else {}
            params.update(parse_overrides(rest))
            bundle = run(ExperimentSpec(args.name, params, args.seed, args.out))
            print(json.dumps(bundle.summary(), indent=2, default=float))
            return 0 if bundle.passed else 1
        if rest:
            raise UsageError(f"unexpected arguments {rest}")
        ok = True
        for name in REGISTRY:
            out = args.out / name if args.out else None
            bundle = run(ExperimentSpec(name, {}, args.seed, out))
            print(_report(bundle), flush=True)
            ok &= bundle.passed
        return 0 if ok else 1
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
