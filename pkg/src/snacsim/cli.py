"""Command-line entry point: ``snacsim run | list-scenarios | validate``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .experiments import ConfigError, builtin_scenarios, expand_points, load_config, merge_config, parse_config, run_scenario


def _resolve(name: str, config: str | None) -> dict:
    table = builtin_scenarios()
    if name in table:
        raw = table[name]
        if config:
            raw = merge_config(raw, load_config(config))
        return raw
    if Path(name).is_file():
        raw = load_config(name)
        return merge_config(raw, load_config(config)) if config else raw
    raise ConfigError("scenario", f"unknown scenario {name!r}; run `snacsim list-scenarios`")


def cmd_run(args) -> int:
    raw = _resolve(args.scenario, args.config)
    if args.seeds is not None:
        raw["seeds"] = args.seeds
    cfg = parse_config(raw)
    out = Path(args.out) / cfg.id
    rs = run_scenario(cfg, out_dir=out, threads=args.threads)
    print(f"{cfg.id}: {len(rs.rows)} rows -> {out}")
    for c in rs.checks:
        flag = "PASS" if c["passed"] else "FAIL"
        print(f"  [{flag}] {c.get('name', c['metric'])}: {c['metric']} = {c['value']}")
    return 1 if args.strict and not rs.passed else 0


def cmd_list(args) -> int:
    for sid, raw in builtin_scenarios().items():
        print(f"{sid:20s} {raw.get('description', '')}")
    return 0


def cmd_validate(args) -> int:
    cfg = parse_config(load_config(args.config))
    print(f"ok: {cfg.id} ({cfg.experiment}, {len(expand_points(cfg))} points)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="snacsim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a built-in scenario or a scenario file")
    r.add_argument("scenario", help="built-in scenario id or path to a YAML scenario")
    r.add_argument("--config", help="YAML file whose keys override the scenario")
    r.add_argument("--out", default="results", help="output directory (default: results)")
    r.add_argument("--seeds", type=int, help="number of seeds (0..n-1)")
    r.add_argument("--threads", type=int, default=1, help="worker processes")
    r.add_argument("--strict", action="store_true", help="exit 1 when any scenario check fails")
    r.set_defaults(func=cmd_run)

    ls = sub.add_parser("list-scenarios", help="list built-in scenarios")
    ls.set_defaults(func=cmd_list)

    v = sub.add_parser("validate", help="check a scenario file without running it")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
