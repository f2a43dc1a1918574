"""Command-line entry point: validate configs and run scenarios."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError
from .runner import run_scenarios


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fwmkit",
        description="Cascaded four-wave-mixing frequency conversion toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run scenarios from a config file")
    p_run.add_argument("--config", required=True, help="path to the TOML config")
    p_run.add_argument("--scenario", default=None, help="run only the named scenario")
    p_run.add_argument("--out", default="out", help="output directory (default: ./out)")
    p_run.add_argument("--seed", type=int, default=None, help="override all scenario rng seeds")
    p_run.add_argument("-v", "--verbose", action="store_true")

    p_val = sub.add_parser("validate", help="parse and validate a config file")
    p_val.add_argument("--config", required=True, help="path to the TOML config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "validate":
        try:
            config = load_config(args.config)
        except (ConfigError, OSError) as exc:
            print(f"invalid: {exc}", file=sys.stderr)
            return 1
        print(
            f"ok: {len(config.fibers)} fiber(s), "
            f"{len(config.pulsed_sources) + len(config.cw_sources)} source(s), "
            f"{len(config.scenarios)} scenario(s)"
        )
        return 0

    try:
        config = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        manifest = run_scenarios(
            config,
            Path(args.out),
            scenario_filter=args.scenario,
            seed_override=args.seed,
            config_path=args.config,
        )
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    for entry in manifest["scenarios"]:
        status = entry["status"]
        line = f"{entry['name']} [{entry['kind']}]: {status}"
        if status != "ok":
            line += f" ({entry['error']['type']}: {entry['error']['message']})"
        print(line)
        if args.verbose and status == "ok":
            for key, value in sorted(entry.get("summary", {}).items()):
                print(f"    {key} = {value}")
    print(f"manifest: {Path(args.out) / 'manifest.json'}")
    return 0 if manifest["ok"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
