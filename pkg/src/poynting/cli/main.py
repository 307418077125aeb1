"""Command-line entry point.

Subcommands:
  run               integrate a configured scenario, emit CSV/JSON/figures
  verify            audit a saved trace file (weakform, steklov, gauss)
  steklov-selftest  run the mollifier property suite, no input needed

Exit code 0 iff every enabled check passes; 1 on a failing check; 2 on
configuration or usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from ..errors import PoyntingError
from ..mesh import set_deterministic
from ..steklov import selftest
from ..verify import (SolutionTrace, TestFunctionBank, gauss_check,
                      semidiscrete_residual, weakform_residual)
from . import report as report_mod
from .config import load_config
from .scenarios import (CHARGE_SANITY, GAUSS_DIVB_TOL, SEMIDISCRETE_SANITY,
                        WEAKFORM_SANITY, run_scenario)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--out-dir", default=None,
                     help="output directory (overrides the config)")
    sub.add_argument("--deterministic", action=argparse.BooleanOptionalAction,
                     default=None, help="force fixed-order reductions")
    sub.add_argument("--threads", type=int, default=None,
                     help="worker threads (falls back to POYNTING_THREADS; "
                          "reductions stay fixed-order in deterministic mode)")


def _resolve_threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("POYNTING_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise PoyntingError(
                f"POYNTING_THREADS must be an integer, got '{env}'")
    return 1


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.out_dir is not None:
        overrides["out_dir"] = args.out_dir
    if args.deterministic is not None:
        overrides["deterministic"] = args.deterministic
    overrides["threads"] = _resolve_threads(args) if (
        args.threads is not None or "POYNTING_THREADS" in os.environ) else cfg.threads
    cfg = replace(cfg, **overrides)

    result = run_scenario(cfg)
    out_dir = cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    report_mod.write_energy_csv(result.ledger,
                                os.path.join(out_dir, "energy_trace.csv"))
    report_mod.write_report_json(result.reports,
                                 os.path.join(out_dir, "verification_report.json"))
    report_mod.write_effective_config(cfg,
                                      os.path.join(out_dir, "effective_config.txt"))
    if cfg.save_trace and result.trace is not None:
        result.trace.save(os.path.join(out_dir, "trace.npz"))
    report_mod.render_run_figures(result.ledger, out_dir)
    report_mod.render_verify_figures(result.artifacts, out_dir)

    for key in sorted(result.reports):
        print(f"{key} = {result.reports[key]}")
    return 0 if result.all_ok else 1


def _cmd_verify(args) -> int:
    if args.deterministic is not None:
        set_deterministic(args.deterministic)
    tr = SolutionTrace.load(args.trace)
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = set(checks) - {"weakform", "steklov", "gauss"}
    if unknown:
        raise PoyntingError(f"unknown checks: {sorted(unknown)}")

    reports: dict = {}
    artifacts: dict = {}
    bank = None
    if "weakform" in checks or "steklov" in checks:
        bank = TestFunctionBank.build(tr.grid, tr.t_end, size=args.bank_size,
                                      seed=args.seed)
    if "weakform" in checks:
        residuals = weakform_residual(tr, bank)
        artifacts["weakform"] = residuals
        worst = max(abs(r.value) for r in residuals)
        reports["weakform_max_residual"] = worst
        reports["weakform_ok"] = worst <= WEAKFORM_SANITY
    if "steklov" in checks:
        lams = ([float(v) for v in args.lambdas.split(",")]
                if args.lambdas else [8.0 * tr.sample_dt])
        results = [semidiscrete_residual(tr, lam, bank.pairs[0].phi,
                                         bank.pairs[0].psi) for lam in lams]
        artifacts["semidiscrete"] = results
        reports["semidiscrete_r_e"] = max(r.r_e for r in results)
        reports["semidiscrete_r_h"] = max(r.r_h for r in results)
        reports["semidiscrete_r_energy"] = max(r.r_energy for r in results)
        reports["semidiscrete_ok"] = max(
            reports["semidiscrete_r_e"], reports["semidiscrete_r_h"],
            reports["semidiscrete_r_energy"]) <= SEMIDISCRETE_SANITY
    if "gauss" in checks:
        gr = gauss_check(tr)
        artifacts["gauss"] = gr
        reports["gauss_divb_rel"] = gr.divb_rel
        reports["gauss_divb_ok"] = gr.divb_rel <= GAUSS_DIVB_TOL
        reports["gauss_charge_rel"] = gr.charge_rel
        reports["gauss_charge_ok"] = gr.charge_rel <= CHARGE_SANITY

    out_dir = args.out_dir or "verify-out"
    os.makedirs(out_dir, exist_ok=True)
    report_mod.write_report_json(reports,
                                 os.path.join(out_dir, "verification_report.json"))
    report_mod.render_verify_figures(artifacts, out_dir)
    for key in sorted(reports):
        print(f"{key} = {reports[key]}")
    ok = all(v for k, v in reports.items() if k.endswith("_ok"))
    return 0 if ok else 1


def _cmd_selftest(args) -> int:
    if args.deterministic is not None:
        set_deterministic(args.deterministic)
    rep = selftest(trials=args.trials, seed=args.seed)
    out_dir = args.out_dir or "selftest-out"
    os.makedirs(out_dir, exist_ok=True)
    report_mod.write_report_json(rep,
                                 os.path.join(out_dir, "steklov_selftest.json"))
    report_mod.render_selftest_figure(rep["convergence_initial_norm"],
                                      rep["convergence_final_norm"], rep, out_dir)
    for key in sorted(rep):
        print(f"{key} = {rep[key]}")
    return 0 if rep["all_ok"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poynting",
        description="Staggered-grid Maxwell solver and energy-identity "
                    "verification harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a configured scenario")
    p_run.add_argument("--config", required=True, help="config file path")
    _add_common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_ver = sub.add_parser("verify", help="audit a saved trace file")
    p_ver.add_argument("--trace", required=True, help="trace .npz path")
    p_ver.add_argument("--checks", default="weakform,steklov,gauss",
                       help="comma list from {weakform,steklov,gauss}")
    p_ver.add_argument("--bank-size", type=int, default=5)
    p_ver.add_argument("--seed", type=int, default=1234)
    p_ver.add_argument("--lambdas", default=None,
                       help="comma list of mollification widths (seconds)")
    _add_common(p_ver)
    p_ver.set_defaults(func=_cmd_verify)

    p_st = sub.add_parser("steklov-selftest",
                          help="run the mollifier property suite")
    p_st.add_argument("--trials", type=int, default=200)
    p_st.add_argument("--seed", type=int, default=20250)
    _add_common(p_st)
    p_st.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PoyntingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
