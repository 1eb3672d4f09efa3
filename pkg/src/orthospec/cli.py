"""Experiment runner: predict / sweep / pcaep / spectrum / check subcommands.

Each run resolves its configuration (TOML file, then CLI flag overrides),
refuses to clobber a non-empty output directory unless forced, writes a
resolved config copy next to its outputs, and is bit-for-bit deterministic
under a fixed seed. Exit codes: 0 success, 2 config error, 3 numeric error,
4 tolerance failure in check mode.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import asymptotics as asy
from .config import (
    CheckConfig,
    CommonConfig,
    build_command_config,
    emit_toml,
    load_toml,
    resolved_dict,
)
from .errors import ConfigError, OrthospecError
from .pcaep import run_tracked, write_tracked_csv
from .preprocessing import make_function
from .sensing import SensingSpec
from .spectral import default_shift, run_trial, write_trials_csv
from .spectrum import analyze, write_report

__all__ = ["main"]


def _make_sensing_spec(kind: str, n: int, delta: float) -> SensingSpec:
    if kind == "cdp":
        return SensingSpec(kind="cdp", n=n, seed=0, blocks=int(round(delta)))
    return SensingSpec(kind=kind, n=n, seed=0, delta=delta)


def _prepare_out(out_dir: str, force: bool) -> None:
    if os.path.isdir(out_dir) and os.listdir(out_dir) and not force:
        raise ConfigError(f"output directory {out_dir!r} is not empty; pass --force to overwrite")
    os.makedirs(out_dir, exist_ok=True)


def _write_resolved(out_dir: str, command: str, common: CommonConfig, cfg) -> None:
    data = resolved_dict(command, common, cfg)
    data["out"] = out_dir
    with open(os.path.join(out_dir, "resolved.toml"), "w") as fh:
        fh.write(emit_toml(data))


# -- predict ----------------------------------------------------------------

def cmd_predict(common: CommonConfig, cfg, out_dir: str) -> int:
    funcs = cfg.functions()
    rows = []
    for func in funcs:
        for delta in cfg.deltas:
            p = asy.predict(func, delta, branch=cfg.branch)
            rows.append(p)
    with open(os.path.join(out_dir, "predictions.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["func", "delta", "branch", "positive_phase", "mu_bar", "mu_hat", "rho_sq", "theta_sq", "lambda1"])
        for p in rows:
            wr.writerow(
                [
                    p.label,
                    f"{p.delta:.12g}",
                    p.branch,
                    str(p.positive_phase).lower(),
                    f"{p.mu_bar:.12g}" if math.isfinite(p.mu_bar) else "",
                    f"{p.mu_hat:.12g}" if p.mu_hat is not None else "",
                    f"{p.rho_sq:.12g}",
                    f"{p.theta_sq:.12g}",
                    f"{p.lambda1:.12g}",
                ]
            )
    payload = {"predictions": [
        {
            "func": p.label,
            "delta": p.delta,
            "branch": p.branch,
            "positive_phase": p.positive_phase,
            "mu_bar": p.mu_bar if math.isfinite(p.mu_bar) else None,
            "mu_hat": p.mu_hat,
            "rho_sq": p.rho_sq,
            "theta_sq": p.theta_sq,
            "lambda1": p.lambda1,
        }
        for p in rows
    ]}
    if cfg.thresholds and cfg.branch == "max":
        thresholds = {}
        for func in funcs:
            dt = asy.delta_threshold(func)
            thresholds[func.label()] = {
                "delta_T": dt.delta_T if dt.found else None,
                "delta_T_fixed_point": dt.delta_T_fixed_point,
                "mu_diamond": dt.mu_diamond,
            }
        payload["thresholds"] = thresholds
    with open(os.path.join(out_dir, "predictions.json"), "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    # psi curves over a mu grid, one row per (func, mu)
    mus = np.linspace(0.02, 0.98, cfg.mu_points)
    ref_delta = 3.0 if not cfg.deltas else float(cfg.deltas[len(cfg.deltas) // 2])
    with open(os.path.join(out_dir, "psi_curves.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["func", "delta", "mu", "psi1", "psi2", "psi3"])
        for func in funcs:
            for mu in mus:
                p = asy.psi(func, float(mu), ref_delta)
                wr.writerow(
                    [func.label(), f"{ref_delta:.12g}", f"{mu:.12g}", f"{p.psi1:.12g}", f"{p.psi2:.12g}", f"{p.psi3:.12g}"]
                )
    return 0


# -- sweep ------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    delta_nominal: float
    delta_realized: float
    func: str
    ensemble: str
    p2_emp_mean: float
    p2_emp_std: float
    p2_pred: float
    trials: int


def _trial_task(args):
    spec, func_kind, func_params, seed, shift, max_iter, tol = args
    func = make_function(func_kind, **func_params)
    try:
        return run_trial(spec, func, seed, shift=shift, max_iter=max_iter, tol=tol)
    except OrthospecError as exc:
        return f"seed={seed} {spec.kind} n={spec.n} {func.label()}: {exc}"


def _sweep_compute(common: CommonConfig, cfg):
    tasks = []
    preds = {}
    skipped = []
    for ensemble in cfg.ensembles:
        for kind, params, shift, max_iter in cfg.funcs:
            func = make_function(kind, **params)
            for delta in cfg.deltas:
                if ensemble == "cdp" and abs(delta - round(delta)) > 1e-9:
                    skipped.append(f"cdp skips non-integer delta {delta:g}")
                    continue
                key = (func.label(), delta)
                if key not in preds:
                    preds[key] = asy.predict(func, delta).rho_sq
                spec = _make_sensing_spec(ensemble, cfg.n, delta)
                use_shift = default_shift(func) if shift is None else shift
                use_iters = cfg.max_iter if max_iter is None else max_iter
                for k in range(cfg.trials):
                    tasks.append((spec, kind, dict(params), common.seed + k, use_shift, use_iters, cfg.tol))

    if common.threads > 1:
        with ProcessPoolExecutor(max_workers=common.threads) as pool:
            outcomes = list(pool.map(_trial_task, tasks, chunksize=1))
    else:
        outcomes = [_trial_task(t) for t in tasks]

    trials = [o for o in outcomes if not isinstance(o, str)]
    errors = [o for o in outcomes if isinstance(o, str)] + skipped

    groups = {}
    for spec_args, outcome in zip(tasks, outcomes):
        spec, kind, params, *_ = spec_args
        func_label = make_function(kind, **params).label()
        delta = spec.delta if spec.kind != "cdp" else float(spec.blocks)
        key = (func_label, float(delta), spec.kind)
        groups.setdefault(key, []).append(outcome)

    rows = []
    for (func_label, delta, ensemble), outs in groups.items():
        good = [o for o in outs if not isinstance(o, str)]
        p2s = np.array([t.p2 for t in good]) if good else np.array([np.nan])
        rows.append(
            SweepRow(
                delta_nominal=delta,
                delta_realized=good[0].delta_realized if good else math.nan,
                func=func_label,
                ensemble=ensemble,
                p2_emp_mean=float(np.mean(p2s)),
                p2_emp_std=float(np.std(p2s, ddof=1)) if len(p2s) > 1 else 0.0,
                p2_pred=preds[(func_label, delta)],
                trials=len(good),
            )
        )
    rows.sort(key=lambda r: (r.func, r.delta_nominal, r.ensemble))
    return rows, trials, errors


def cmd_sweep(common: CommonConfig, cfg, out_dir: str) -> int:
    rows, trials, errors = _sweep_compute(common, cfg)
    with open(os.path.join(out_dir, "sweep.csv"), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["delta_nominal", "delta_realized", "func", "ensemble", "p2_emp_mean", "p2_emp_std", "p2_pred", "trials"])
        for r in rows:
            wr.writerow(
                [
                    f"{r.delta_nominal:.12g}",
                    f"{r.delta_realized:.12g}",
                    r.func,
                    r.ensemble,
                    f"{r.p2_emp_mean:.12g}",
                    f"{r.p2_emp_std:.12g}",
                    f"{r.p2_pred:.12g}",
                    r.trials,
                ]
            )
    # gnuplot-friendly: one indexed block per (ensemble, func) curve
    with open(os.path.join(out_dir, "sweep.dat"), "w") as fh:
        by_curve = {}
        for r in rows:
            by_curve.setdefault((r.ensemble, r.func), []).append(r)
        for (ensemble, func_label), rs in sorted(by_curve.items()):
            fh.write(f"# ensemble={ensemble} func={func_label}\n")
            fh.write("# delta p2_emp_mean p2_emp_std p2_pred\n")
            for r in sorted(rs, key=lambda x: x.delta_nominal):
                fh.write(f"{r.delta_nominal:g} {r.p2_emp_mean:.8f} {r.p2_emp_std:.8f} {r.p2_pred:.8f}\n")
            fh.write("\n\n")
    write_trials_csv(os.path.join(out_dir, "trials.csv"), trials)
    if errors:
        with open(os.path.join(out_dir, "errors.log"), "w") as fh:
            fh.write("\n".join(errors) + "\n")
        for e in errors:
            print(f"note: {e}", file=sys.stderr)
    return 0


# -- pcaep ------------------------------------------------------------------

def cmd_pcaep(common: CommonConfig, cfg, out_dir: str) -> int:
    spec = _make_sensing_spec(cfg.ensemble, cfg.n, cfg.delta)
    func = cfg.function()
    runs = []
    for seed in cfg.seeds:
        run = run_tracked(spec, func, cfg.delta, cfg.mu, cfg.alpha0, cfg.sigma0_sq, cfg.t_max, seed)
        write_tracked_csv(os.path.join(out_dir, f"tracked_seed{seed}.csv"), run)
        runs.append(run)
    p2_emp = np.mean([r.p2_emp for r in runs], axis=0)
    # wcorr rows are finite except the last (no successor step)
    wc_stack = np.array([r.wcorr_emp for r in runs])
    wc_emp = np.full(wc_stack.shape[1], np.nan)
    wc_emp[:-1] = np.mean(wc_stack[:, :-1], axis=0)
    r0 = runs[0]
    summary = {
        "mu": r0.mu,
        "delta": r0.delta,
        "delta_realized": r0.delta_realized,
        "func": r0.func,
        "seeds": list(cfg.seeds),
        "p2_emp_mean": p2_emp.tolist(),
        "p2_se": r0.p2_se.tolist(),
        "p2_gap_max": float(np.max(np.abs(p2_emp - r0.p2_se))),
        "wcorr_emp_mean": [None if math.isnan(v) else v for v in wc_emp],
        "wcorr_se": [None if math.isnan(v) else v for v in r0.wcorr_se],
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return 0


# -- spectrum ---------------------------------------------------------------

def cmd_spectrum(common: CommonConfig, cfg, out_dir: str) -> int:
    spec = _make_sensing_spec(cfg.ensemble, cfg.n, cfg.delta)
    report = analyze(spec, cfg.function(), cfg.delta, cfg.branch, common.seed)
    write_report(out_dir, report)
    if not report.applicable:
        print(f"note: {report.reason}", file=sys.stderr)
    return 0


# -- check ------------------------------------------------------------------

def cmd_check(common: CommonConfig, cfg: CheckConfig, out_dir: str) -> int:
    from .acceptance import run_criterion

    results = []
    any_fail = False
    for num in cfg.criteria:
        res = run_criterion(num)
        results.append(res)
        status = "PASS" if res.passed else "FAIL"
        print(f"criterion {res.number} ({res.name}): {status} [{res.elapsed:.1f}s]")
        if not res.passed:
            any_fail = True
            for line in res.failures:
                print(f"    {line}")
    payload = [
        {
            "number": r.number,
            "name": r.name,
            "passed": r.passed,
            "elapsed_s": r.elapsed,
            "details": r.details,
            "failures": r.failures,
        }
        for r in results
    ]
    with open(os.path.join(out_dir, "check_report.json"), "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return 4 if any_fail else 0


# -- driver -----------------------------------------------------------------

_COMMANDS = {
    "predict": cmd_predict,
    "sweep": cmd_sweep,
    "pcaep": cmd_pcaep,
    "spectrum": cmd_spectrum,
    "check": cmd_check,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orthospec",
        description="Spectral initializer experiments for column-orthogonal phase retrieval",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} command")
        p.add_argument("--config", metavar="PATH", help="TOML config file")
        p.add_argument("--seed", type=int, metavar="U64", help="override the base seed")
        p.add_argument("--out", metavar="DIR", help="output directory (default runs/<command>)")
        p.add_argument("--threads", type=int, metavar="N", help="worker processes for sweeps")
        p.add_argument("--force", action="store_true", help="allow writing into a non-empty directory")
        if name == "check":
            p.add_argument("--criteria", metavar="LIST", help="comma-separated subset, e.g. 1,2,7")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        data = load_toml(args.config) if args.config else {}
        if args.seed is not None:
            data["seed"] = args.seed
        if args.out is not None:
            data["out"] = args.out
        if args.threads is not None:
            data["threads"] = args.threads
        if args.force:
            data["force"] = True
        if args.command == "check" and getattr(args, "criteria", None):
            sec = dict(data.get("check", {}))
            try:
                sec["criteria"] = [int(c) for c in args.criteria.split(",") if c.strip()]
            except ValueError:
                raise ConfigError(f"--criteria must be comma-separated integers, got {args.criteria!r}")
            data["check"] = sec
        common, cfg = build_command_config(args.command, data)
        out_dir = common.out or os.path.join("runs", args.command)
        _prepare_out(out_dir, common.force)
        common = CommonConfig(seed=common.seed, out=out_dir, threads=common.threads, force=common.force)
        _write_resolved(out_dir, args.command, common, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](common, cfg, out_dir)
    except OrthospecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
