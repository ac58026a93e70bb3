"""Command line: ``g2kummer <suite> [options]``.  Writes a JSON report; exit 0 pass, 1 fail, 2 config error."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version
from typing import Optional, Sequence

import numpy as np

from .suites import FAIL, INDETERMINATE, PASS, SUITES, RunConfig, is_excluded_theta, run_named

log = logging.getLogger("g2kummer")
SCHEMA = 1


class ConfigError(ValueError):
    pass


def tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def parse_thetas(values: Optional[Sequence[str]]) -> list:
    """Angles in radians, complex numbers ("0.6+0.8j"), "exact:k/n", or "grid:n" (n angles in (0, 2 pi))."""
    out: list = []
    for v in values or []:
        for tok in str(v).split(","):
            tok = tok.strip()
            if not tok:
                continue
            if tok.startswith("grid:"):
                n = int(tok[5:])
                out += [float(x) for x in 2 * np.pi * (np.arange(n) + 0.5) / n]
            elif tok.startswith("exact:"):
                out.append(tok)
            elif "j" in tok:
                out.append(complex(tok))
            else:
                out.append(float(tok))
    return out


def parse_zeta(text: Optional[str]) -> Optional[list]:
    if text is None:
        return None
    vals = [Fraction(t) for t in text.replace(",", " ").split()]
    if len(vals) != 7:
        raise ConfigError("--zeta needs 7 rationals")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="g2kummer", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--theta", action="append", help="theta values (repeatable, comma separated)")
    common.add_argument("--modes", type=int, help="Fourier mode radius N")
    common.add_argument("--grid", type=int, help="grid density")
    common.add_argument("--tol", type=float, help="tolerance")
    common.add_argument("--json", dest="output", help="write the report here ('-' for stdout)")
    common.add_argument("--seed", type=int, help="RNG seed (default 0)")
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--jobs", type=int, help="worker processes for suite=all")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="suite", required=True)
    for name in ("group", "forms", "rep", "dolbeault", "contraction", "all"):
        sp_ = sub.add_parser(name, parents=[common])
        if name == "dolbeault":
            sp_.add_argument("--suite", dest="dsuite", action="store_true", help="run the identity suite")
        if name == "contraction":
            sp_.add_argument("--demo", action="store_true", help="run the example families")
    fam = sub.add_parser("family", parents=[common])
    fam.add_argument("--f", type=float, help="family parameter")
    fam.add_argument("--check", choices=["all", "flatness", "gluing", "tangency"])
    spc = sub.add_parser("spectral", parents=[common])
    spc.add_argument("--block", choices=["all", "ker", "coker", "sections"])
    qv = sub.add_parser("quiver", parents=[common])
    qv.add_argument("--zeta", help="7 rationals, e.g. '1/10 1/10 1/10 1/10 1/10 1/10 -3/5'")
    qv.add_argument("--solve", action="store_true")
    return p


def make_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(suite=args.suite)
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for k, v in data.items():
            setattr(cfg, k, v)
        if "thetas" in data:
            cfg.thetas = parse_thetas([str(t) for t in data["thetas"]])
        if "zeta" in data and data["zeta"] is not None:
            cfg.zeta = parse_zeta(" ".join(str(z) for z in data["zeta"]))
    for name in ("modes", "grid", "tol", "output", "seed", "f", "check", "block", "jobs"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    if args.theta:
        cfg.thetas = parse_thetas(args.theta)
    if getattr(args, "zeta", None):
        cfg.zeta = parse_zeta(args.zeta)
    if getattr(args, "solve", False) or cfg.suite == "all":
        cfg.solve = True
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def run_suite(cfg: RunConfig) -> dict:
    """Execute the selected suites and assemble the report."""
    warnings = []
    if cfg.suite in ("spectral", "all"):
        excluded = [t for t in cfg.thetas if is_excluded_theta(t)]
        if excluded:
            warnings.append(f"theta in {{+1, -1}} excluded from kernel claims: {excluded}")
    if cfg.suite == "rep" and any(is_excluded_theta(t) for t in cfg.thetas):
        warnings.append("theta in {+1, -1}: invariant dimensions recorded as baselines")
    for w in warnings:
        log.warning(w)
    names = list(SUITES) if cfg.suite == "all" else [cfg.suite]
    if cfg.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            results = list(pool.map(run_named, names, [cfg] * len(names)))
    else:
        results = [run_named(n, cfg) for n in names]
    checks = []
    timings = {}
    for name, cs, dt in results:
        checks += cs
        timings[name] = round(dt, 3)
    summary = {s: sum(c["status"] == s for c in checks) for s in (PASS, FAIL, INDETERMINATE)}
    return {"schema": SCHEMA, "tool_version": tool_version(), "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "config": cfg.as_dict(), "warnings": warnings, "checks": checks, "summary": summary,
            "timings": timings}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = make_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    report = run_suite(cfg)
    text = json.dumps(report, indent=2, sort_keys=False)
    if cfg.output and cfg.output != "-":
        with open(cfg.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for c in report["checks"]:
        if c["status"] != PASS:
            log.info("%s: %s", c["id"], c["status"])
    return 1 if report["summary"][FAIL] else 0


if __name__ == "__main__":
    sys.exit(main())
