"""Command line front end for the vortex laboratory.

Three subcommands:

  run <experiment> [key=value ...]   solve and write artifacts
  validate [key=value ...]           parse + check config, echo canonical form
  oracle                             closed-form reference checks

Exit codes: 0 success, 1 oracle check failed, 2 configuration error
(problems itemized on stderr), 3 runtime failure (machine-readable
failure.json written next to the other artifacts).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from . import __version__
from .experiments import (ConfigError, ExperimentError, config_hash,
                          parse_config, render_config, run_experiment,
                          run_oracle_suite, validate_config, write_atomic)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", metavar="PATH", default=None,
                     help="key=value config file, [section] headers allowed")
    sub.add_argument("--out", metavar="DIR", default=None,
                     help="artifact directory (default out-<experiment>)")
    sub.add_argument("--seed", metavar="N", type=int, default=None)
    sub.add_argument("--threads", metavar="N", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pvortex",
        description="stationary circle-valued p-harmonic maps on 2D lattices")
    ap.add_argument("--version", action="version",
                    version=f"pvortex {__version__}")
    subs = ap.add_subparsers(dest="command", required=True)

    run = subs.add_parser("run", help="run one experiment")
    run.add_argument("experiment", help="disk-sweep | torus-hodge | "
                     "torus-diffuse | minmax-surface | oracle-suite")
    run.add_argument("overrides", nargs="*", metavar="key=value",
                     help="config overrides, applied after --config")
    _add_common(run)

    val = subs.add_parser("validate", help="check a config and echo the "
                          "canonical form")
    val.add_argument("overrides", nargs="*", metavar="key=value")
    _add_common(val)

    orc = subs.add_parser("oracle", help="run the closed-form oracle checks")
    _add_common(orc)
    return ap


def _read_config_text(path: str | None) -> str:
    if path is None:
        return ""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise ConfigError([f"config file {path!r}: {e.strerror}"])


def _collect_overrides(args: argparse.Namespace) -> dict:
    over: dict[str, str] = {}
    if getattr(args, "experiment", None) is not None:
        over["name"] = args.experiment
    problems = []
    for token in getattr(args, "overrides", []) or []:
        if "=" not in token:
            problems.append(f"override {token!r}: expected key=value")
            continue
        key, val = token.split("=", 1)
        over[key.strip()] = val
    if problems:
        raise ConfigError(problems)
    for flag in ("out", "seed", "threads"):
        v = getattr(args, flag, None)
        if v is not None:
            over[flag] = str(v)
    return over


def _load(args: argparse.Namespace):
    text = _read_config_text(args.config)
    return parse_config(text, _collect_overrides(args))


def _print_config_problems(err: ConfigError) -> None:
    print("configuration errors:", file=sys.stderr)
    for problem in err.problems:
        print(f"  - {problem}", file=sys.stderr)


def _out_dir(cfg) -> str:
    return cfg.out if cfg.out else f"out-{cfg.name}"


def cmd_run(args: argparse.Namespace) -> int:
    cfg = validate_config(_load(args))
    out = _out_dir(cfg)
    try:
        run_experiment(cfg, out)
    except ExperimentError as e:
        os.makedirs(out, exist_ok=True)
        report = {"experiment": cfg.name, "phase": e.phase,
                  "error": str(e.cause), "error_type": type(e.cause).__name__,
                  "config_hash": config_hash(cfg), "version": __version__}
        path = os.path.join(out, "failure.json")
        write_atomic(path, json.dumps(report, indent=2, sort_keys=True) + "\n")
        print(f"experiment failed during {e.phase}: {e.cause}",
              file=sys.stderr)
        print(f"failure report: {path}", file=sys.stderr)
        return 3
    for name in sorted(os.listdir(out)):
        print(os.path.join(out, name))
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = validate_config(_load(args))
    sys.stdout.write(render_config(cfg))
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    # the suite is experiment-independent: pin the name so a config file
    # written for another experiment still validates
    cfg = validate_config(replace(_load(args), name="oracle-suite",
                                  boundary=""))
    results = run_oracle_suite(cfg, None)
    width = max(len(c["name"]) for c in results["checks"])
    for c in results["checks"]:
        mark = "ok  " if c["pass"] else "FAIL"
        print(f"{mark} {c['name']:<{width}}  value={c['value']:.10g}  "
              f"target={c['target']:.10g}  rel={c['rel_error']:.3g}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "oracle.json")
        write_atomic(path, json.dumps(results, indent=2, sort_keys=True) + "\n")
        print(f"wrote {path}")
    return 0 if results["all_pass"] else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "validate": cmd_validate,
               "oracle": cmd_oracle}[args.command]
    try:
        return handler(args)
    except ConfigError as e:
        _print_config_problems(e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
