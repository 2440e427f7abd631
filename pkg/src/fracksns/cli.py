"""Command-line entry point: run, verify, check-exponents, specfun-table."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import admissibility as adm
from . import grid as g
from . import solver, specfun, verify
from .config import ConfigError, default_config_text, parse_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_IO = 4
EXIT_VERIFY = 5


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write(path: Path, data: str | bytes) -> None:
    if isinstance(data, bytes):
        path.write_bytes(data)
    else:
        path.write_text(data)


def _summary(cfg, res, reports) -> str:
    d = res.diagnostics
    mn = d.column("mass_n")
    lines = [
        f"steps_completed = {res.steps_done}",
        f"final_time = {res.state.t!r}",
        f"final_norm_n_q = {float(d.column('norm_n_q')[-1])!r}",
        f"final_norm_gradv_r = {float(d.column('norm_gradv_r')[-1])!r}",
        f"final_norm_u_p = {float(d.column('norm_u_p')[-1])!r}",
        f"mass_n_relative_drift = {float(np.max(np.abs(mn - mn[0])) / max(abs(mn[0]), 1e-300))!r}",
        f"max_div_residual = {float(np.max(d.column('div_residual')))!r}",
        f"t_max = {res.t_max!r}",
    ]
    if res.t_max is not None:
        lines.append("blowup_table = t, norm_n_q, norm_gradv_r, norm_u_p")
        lines += [f"  {t!r}, {a!r}, {b!r}, {c!r}" for t, a, b, c in res.blowup_table[-10:]]
    for name, rep in reports.items():
        lines.append(f"admissibility.{name} = {rep.satisfied} {' '.join(rep.case_path)}".rstrip())
    return "\n".join(lines) + "\n"


def cmd_run(path: str) -> int:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _err(f"cannot read config: {exc}")
        return EXIT_IO
    try:
        rc = parse_config(text)
    except ConfigError as exc:
        for e in exc.errors:
            _err(f"config error: {e}")
        return EXIT_CONFIG
    out = Path(rc.output_dir)
    if not out.is_absolute():
        out = Path(path).resolve().parent / out
    try:
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "diagnostics.csv", "")
    except OSError as exc:
        _err(f"cannot write output directory: {exc}")
        return EXIT_IO

    reports = {}
    try:
        tup = adm.ExponentTuple(rc.grid.d, rc.params.alpha, rc.params.beta,
                                rc.exponent_mu, rc.exponents.p, rc.exponents.q, rc.exponents.r)
        reports = {"theorem1": adm.check_theorem_local(tup), "assumption1": adm.check_assumption1(tup)}
        if not any(r.satisfied for r in reports.values()):
            _err("warning: exponents fall outside the local and global existence ranges")
    except ValueError as exc:
        _err(f"warning: admissibility not checked: {exc}")

    cfg = rc.solver_config()
    s0 = rc.initial_state()
    if rc.picard.enabled:
        pr = solver.picard_solve(s0, cfg)
        try:
            _write(out / "picard.txt", pr.report() + "\n")
        except OSError as exc:
            _err(f"cannot write picard report: {exc}")
            return EXIT_IO
    res = solver.run(cfg, s0)
    diag = res.diagnostics
    keep = solver.Diagnostics(diag.columns, diag.rows[::rc.diagnostics_cadence])
    try:
        _write(out / "diagnostics.csv", keep.to_csv())
        for k, _, (n, v, u) in res.snapshots:
            for name, arr in (("n", n), ("v", v), ("u", u)):
                g.write_snapshot(out / f"snap_{k:06d}_{name}.fkss", cfg.grid, arr)
        if rc.write_history:
            _write(out / "history.fksh", res.history.to_bytes())
        _write(out / "summary.txt", _summary(cfg, res, reports))
    except OSError as exc:
        _err(f"I/O failure: {exc}")
        return EXIT_IO
    if res.blew_up:
        _err(f"blow-up stop at t = {res.t_max!r}")
        return EXIT_BLOWUP
    return EXIT_OK


def cmd_verify(suite: str) -> int:
    try:
        checks = verify.run_suite(suite)
    except KeyError:
        _err(f"unknown suite {suite!r}; choose from {', '.join(list(verify.SUITES) + ['all'])}")
        return EXIT_CONFIG
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY


def cmd_check_exponents(args) -> int:
    try:
        tup = adm.ExponentTuple(args.d, args.alpha, args.beta, args.mu, args.p, args.q, args.r)
    except ValueError as exc:
        _err(f"invalid exponent tuple: {exc}")
        return EXIT_CONFIG
    reports = adm.check_all(tup)
    if args.json:
        print(json.dumps({k: v.to_dict() for k, v in reports.items()}, indent=2))
    else:
        for rep in reports.values():
            print(rep.to_text())
            print()
    return EXIT_OK if reports[args.rule].satisfied else EXIT_VERIFY


def cmd_specfun_table(args) -> int:
    if args.zmax > 0 or args.zmin > args.zmax or args.count < 1:
        _err("need zmin <= zmax <= 0 and count >= 1")
        return EXIT_CONFIG
    try:
        z = np.linspace(args.zmin, args.zmax, args.count)
        vals, errs = specfun.ml_with_error(args.beta, args.gamma, z)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    print("beta,gamma,z,value,est_rel_err")
    for zi, v, e in zip(z.tolist(), vals.tolist(), errs.tolist()):
        print(f"{float(args.beta)!r},{float(args.gamma)!r},{zi!r},{v!r},{e!r}")
    return EXIT_OK


def _exponent(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracksns", description=__doc__)
    p.add_argument("--print-defaults", action="store_true", help="print every config key with its default")
    sub = p.add_subparsers(dest="command")
    r = sub.add_parser("run", help="run the solver from a config file")
    r.add_argument("config")
    v = sub.add_parser("verify", help="run a property suite")
    v.add_argument("suite", help="specfun, kernel, propagator, solver or all")
    c = sub.add_parser("check-exponents", help="check an exponent tuple against the hypotheses")
    c.add_argument("--d", type=int, required=True)
    c.add_argument("--alpha", type=float, required=True)
    c.add_argument("--beta", type=float, required=True)
    c.add_argument("--mu", type=float, default=0.0)
    c.add_argument("--p", type=_exponent, required=True)
    c.add_argument("--q", type=_exponent, required=True)
    c.add_argument("--r", type=_exponent, required=True)
    c.add_argument("--rule", choices=adm.RULES, default="theorem1")
    c.add_argument("--json", action="store_true", help="print a JSON structure instead of text")
    s = sub.add_parser("specfun-table", help="tabulate E_{beta,gamma}(z) as CSV")
    s.add_argument("--beta", type=float, required=True)
    s.add_argument("--gamma", type=float, required=True)
    s.add_argument("--zmin", type=float, required=True)
    s.add_argument("--zmax", type=float, required=True)
    s.add_argument("--count", type=int, required=True)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.print_defaults:
        print(default_config_text(), end="")
        return EXIT_OK
    if args.command == "run":
        return cmd_run(args.config)
    if args.command == "verify":
        return cmd_verify(args.suite)
    if args.command == "check-exponents":
        return cmd_check_exponents(args)
    if args.command == "specfun-table":
        return cmd_specfun_table(args)
    parser.print_usage(sys.stderr)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
