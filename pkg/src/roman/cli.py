"""Command-line tool: headless simulation, profile validation and device
encoding, and the control server.

stdout carries machine-parseable output only (CSV, hex, JSON); diagnostics
go to stderr.  Exit codes: 0 success, 1 task incomplete, 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .errors import RomanError
from .device_codec import decode_profile, encode_profile
from .profile import profile_from_json, profile_to_json
from .registry import Registry, normalize_tag
from .server import DEFAULT_HOST, DEFAULT_PORT, create_app
from .testbed import VirtualObject, builtin_catalog, run_task, scenario_from_json

CSV_COLUMNS = ("t", "u", "motor_theta", "output_coord", "load", "completed")


def _load_json_file(path: str, what: str) -> object:
    try:
        with open(path, "r") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise RomanError(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise RomanError(f"{what} file {path} is not valid JSON: {exc}") from None


def _load_scenario(spec: str) -> list[VirtualObject]:
    if spec == "builtin":
        return builtin_catalog()
    return scenario_from_json(_load_json_file(spec, "scenario"))


def _find_object(objects: list[VirtualObject], tag_id: str) -> VirtualObject:
    tag = normalize_tag(tag_id)
    for obj in objects:
        if obj.tag_id == tag:
            return obj
    raise RomanError(f"object {tag!r} is not in the scenario")


def _fmt(value: float) -> str:
    return f"{value:.9g}"


def cmd_simulate(args: argparse.Namespace) -> int:
    objects = _load_scenario(args.scenario)
    obj = _find_object(objects, args.object)
    profile = profile_from_json(_load_json_file(args.profile, "profile"))
    outcome = run_task(obj, profile)
    lines = [",".join(CSV_COLUMNS)]
    for sample in outcome.trajectory:
        done = outcome.t_complete is not None and sample.t >= outcome.t_complete
        lines.append(
            ",".join(
                (
                    _fmt(sample.t),
                    _fmt(sample.u),
                    _fmt(sample.theta),
                    _fmt(sample.output),
                    _fmt(sample.load),
                    "1" if done else "0",
                )
            )
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if outcome.fault is not None:
        print(f"fault: {outcome.fault}", file=sys.stderr)
        return 2
    if outcome.completed:
        print(f"completed at t={outcome.t_complete:.3f} s", file=sys.stderr)
        return 0
    print("task did not complete", file=sys.stderr)
    return 0 if args.no_require_complete else 1


def cmd_validate(args: argparse.Namespace) -> int:
    profile = profile_from_json(_load_json_file(args.profile, "profile"))
    print(
        f"ok: {profile.name or 'unnamed'} "
        f"({len(profile.keypoints)} keypoints, {_fmt(profile.duration_s)} s, "
        f"continuous={'true' if profile.continuous else 'false'})"
    )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    objects = _load_scenario(args.scenario)
    registry = Registry(args.registry)
    app = create_app(objects, registry)
    print(f"http://{DEFAULT_HOST}:{args.port}", flush=True)
    uvicorn.run(app, host=DEFAULT_HOST, port=args.port, log_level="warning")
    return 0


def cmd_encode_device(args: argparse.Namespace) -> int:
    profile = profile_from_json(_load_json_file(args.profile, "profile"))
    print(encode_profile(profile).hex())
    return 0


def cmd_decode_device(args: argparse.Namespace) -> int:
    source = args.input
    if os.path.exists(source):
        source = Path(source).read_text()
    try:
        payload = bytes.fromhex(source.strip())
    except ValueError:
        raise RomanError(f"input is neither a file nor a hex string: {args.input!r}") from None
    profile = decode_profile(payload)
    print(json.dumps(profile_to_json(profile), indent=2))
    return 0


def _default_port() -> int:
    try:
        return int(os.environ.get("ROMAN_PORT", DEFAULT_PORT))
    except ValueError:
        return DEFAULT_PORT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roman", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a profile on a scenario object, write a CSV trajectory")
    p.add_argument("--scenario", default="builtin", help="scenario JSON path, or 'builtin' for the demo catalog")
    p.add_argument("--object", required=True, help="8-hex tag id of the object to drive")
    p.add_argument("--profile", required=True, help="motion profile JSON path")
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--no-require-complete", action="store_true", help="exit 0 even if the task does not complete")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="check a profile file against the schema and invariants")
    p.add_argument("profile", help="motion profile JSON path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("serve", help="run the control server")
    p.add_argument("--scenario", default="builtin", help="scenario JSON path, or 'builtin'")
    p.add_argument("--registry", default=os.environ.get("ROMAN_REGISTRY", "registry"), help="registry directory")
    p.add_argument("--port", type=int, default=_default_port(), help="TCP port (default 7070 / ROMAN_PORT)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("encode-device", help="print the compact device encoding of a profile as hex")
    p.add_argument("profile", help="motion profile JSON path")
    p.set_defaults(func=cmd_encode_device)

    p = sub.add_parser("decode-device", help="decode a hex device payload back to profile JSON")
    p.add_argument("input", help="hex string or path to a file containing hex")
    p.set_defaults(func=cmd_decode_device)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RomanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
