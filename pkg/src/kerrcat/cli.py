"""Command-line entry point: list, validate, and run registered scenarios."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import KerrcatError, SchemaViolation
from .scenarios import get_scenario, list_scenarios, run_scenario, validate_overrides


def _parse_set(items):
    overrides = {}
    for item in items or []:
        if "=" not in item:
            raise SchemaViolation(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return overrides


def _cmd_list(_args):
    print(f"{'id':24} {'module':12} {'criteria':10} description")
    for sc in list_scenarios():
        crit = ",".join(map(str, sc.criteria)) or "-"
        print(f"{sc.id:24} {sc.module:12} {crit:10} {sc.description}")
    return 0


def _cmd_validate(args):
    try:
        with open(args.path) as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        print(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}")
        return 1
    except OSError as exc:
        print(f"cannot read {args.path}: {exc}")
        return 1
    scenario_id = payload.get("scenario")
    if scenario_id is None:
        print("missing required key 'scenario'")
        return 1
    try:
        scenario = get_scenario(scenario_id)
    except KerrcatError as exc:
        print(str(exc))
        return 1
    diags = validate_overrides(scenario, payload.get("overrides", {}))
    if diags:
        for d in diags:
            print(d)
        return 1
    print(f"valid configuration for scenario {scenario_id!r}")
    return 0


def _cmd_run(args):
    overrides = _parse_set(args.set)
    if args.config:
        with open(args.config) as fh:
            payload = json.load(fh)
        overrides = {**payload.get("overrides", {}), **overrides}
        if args.id is None:
            args.id = payload.get("scenario")
    record = run_scenario(
        args.id,
        overrides=overrides,
        out_dir=args.out_dir,
        tol_scale=args.tol_scale,
        threads=args.threads,
    )
    print(record.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerrcat",
        description="Stabilized Kerr-cat qubit simulation and fault-tolerance analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list registered scenarios").set_defaults(fn=_cmd_list)

    val = sub.add_parser("validate", help="validate a JSON scenario configuration")
    val.add_argument("path")
    val.set_defaults(fn=_cmd_validate)

    run = sub.add_parser("run", help="run a scenario")
    run.add_argument("id", nargs="?", help="scenario id (or use --config)")
    run.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override a parameter (JSON literal or string)")
    run.add_argument("--config", help="JSON file with {scenario, overrides}")
    run.add_argument("--out-dir", default=None,
                     help="artifact directory (default $KERRCAT_OUT_DIR or ./kerrcat-out)")
    run.add_argument("--threads", type=int, default=None, help="cap compute threads")
    run.add_argument("--tol-scale", type=float, default=1.0,
                     help="uniformly scale integrator tolerances")
    run.set_defaults(fn=_cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except KerrcatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
