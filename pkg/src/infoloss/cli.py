"""Command-line front end.

Subcommands: analyze, suite, roundtrip, filter.  Exit status 0 when every
asserted identity holds, 1 when any check fails, 2 on usage, config or
resource errors.  INFOLOSS_PATH_CAP and INFOLOSS_STATE_CAP override the
default enumeration caps; explicit [caps] values in a config win over
both.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import load_config
from .errors import ValidationError
from .experiments import SUITE_NAMES, render_report, run_experiment, run_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def _env_cap(name: str) -> int | None:
    raw = os.environ.get(name)
    if raw is None:
        return None
    try:
        cap = int(raw, 10)
    except ValueError:
        raise ValidationError(f"{name} must be an integer, got {raw!r}")
    if cap < 1:
        raise ValidationError(f"{name} must be positive, got {cap}")
    return cap


def _emit(report: dict, fmt: str, out_path: str | None) -> None:
    text = render_report(report, fmt)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="infoloss",
        description="Information-loss analysis of finite-alphabet causal systems.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="run the analyses in a TOML config")
    pa.add_argument("config", help="path to the experiment config")
    pa.add_argument("--format", choices=("json", "text"), default=None,
                    help="override the config's output format")
    pa.add_argument("--out", default=None, help="write the report here instead of stdout")
    pa.add_argument("--timing", action="store_true",
                    help="include wall-clock times (breaks byte reproducibility)")

    ps = sub.add_parser("suite", help="run a named invariant suite on random instances")
    ps.add_argument("name", choices=SUITE_NAMES)
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--instances", type=int, default=100)
    ps.add_argument("--format", choices=("json", "text"), default="json")
    ps.add_argument("--out", default=None)
    ps.add_argument("--timing", action="store_true")

    pr = sub.add_parser("roundtrip",
                        help="reconstruct simulated inputs through the configured system")
    pr.add_argument("config")
    pr.add_argument("--length", type=int, default=None, help="override path length")
    pr.add_argument("--sequences", type=int, default=None)
    pr.add_argument("--seed", type=int, default=None)
    pr.add_argument("--format", choices=("json", "text"), default=None)

    pf = sub.add_parser("filter", help="entropy-rate change of a real linear filter")
    pf.add_argument("--b", type=float, nargs="+", required=True,
                    help="numerator coefficients b_0 b_1 ...")
    pf.add_argument("--a", type=float, nargs="*", default=[],
                    help="feedback coefficients a_1 a_2 ...")
    pf.add_argument("--format", choices=("json", "text"), default="text")
    return p


def _cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    report = run_experiment(cfg, path_cap=_env_cap("INFOLOSS_PATH_CAP"),
                            state_cap=_env_cap("INFOLOSS_STATE_CAP"),
                            timing=args.timing)
    _emit(report, args.format or cfg.out_format, args.out)
    return EXIT_OK if report["ok"] else EXIT_CHECK_FAILED


def _cmd_suite(args) -> int:
    report = run_suite(args.name, seed=args.seed, instances=args.instances,
                       path_cap=_env_cap("INFOLOSS_PATH_CAP"),
                       state_cap=_env_cap("INFOLOSS_STATE_CAP"),
                       timing=args.timing)
    _emit(report, args.format, args.out)
    return EXIT_OK if report["ok"] else EXIT_CHECK_FAILED


def _cmd_roundtrip(args) -> int:
    cfg = load_config(args.config)
    spec = next((a for a in cfg.analyses if a["kind"] == "round-trip"),
                {"kind": "round-trip", "length": 64, "sequences": 1, "seed": 0})
    spec = dict(spec)
    for key in ("length", "sequences", "seed"):
        override = getattr(args, key)
        if override is not None:
            spec[key] = override
    cfg.analyses = [spec]
    report = run_experiment(cfg, path_cap=_env_cap("INFOLOSS_PATH_CAP"),
                            state_cap=_env_cap("INFOLOSS_STATE_CAP"))
    row = report["analyses"][0]
    fmt = args.format or cfg.out_format
    if fmt == "json":
        _emit(report, "json", None)
    else:
        verdict = "PASS" if row["ok"] else "FAIL"
        where = "" if row["first_mismatch"] is None else \
            f"  first mismatch at index {row['first_mismatch']}"
        sys.stdout.write(f"roundtrip {verdict}: {row['sequences']} sequence(s) "
                         f"of length {row['length']}{where}\n")
    return EXIT_OK if row["ok"] else EXIT_CHECK_FAILED


def _cmd_filter(args) -> int:
    cfg_like = {"b": args.b, "a": args.a}
    from .experiments import _an_filter  # shares the report schema

    row = _an_filter(None, cfg_like, None)
    if args.format == "json":
        _emit({"analyses": [{"kind": "filter-analysis", **row}],
               "ok": row["ok"]}, "json", None)
    else:
        phase = {True: "minimum-phase", False: "not minimum-phase",
                 None: "indeterminate (zero within 1e-9 of the unit circle)"}
        sys.stdout.write(
            f"rate change (roots):    {row['rate_change_roots_nats']:.9f} nats\n"
            f"rate change (integral): {row['rate_change_integral_nats']:.9f} nats\n"
            f"phase: {phase[row['minimum_phase']]}\n"
            f"cross-check: {'PASS' if row['ok'] else 'FAIL'}\n")
    return EXIT_OK if row["ok"] else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"analyze": _cmd_analyze, "suite": _cmd_suite,
                "roundtrip": _cmd_roundtrip, "filter": _cmd_filter}
    try:
        return handlers[args.command](args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
