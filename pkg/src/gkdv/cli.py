"""Command-line entry point: solve, verify and sweep runs with manifests.

Output layout: <outdir>/<run-id>/{manifest.json, config.json, reports/*.json,
data/*.csv} with run-id the first 12 hex digits of the config hash.  The
GKDV_OUT environment variable overrides the output root.  Exit codes:
0 success, 1 computational failure, 2 usage error.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click

from . import __version__
from .errors import ConfigError, GkdvError
from .probes import gaussian_field
from .runconfig import RunConfig
from .solver import solve
from .verifier import (
    render_report_table,
    verify_contraction_scaling,
    verify_hausdorff_young,
    verify_multiplier_decay,
    verify_nonlinear_estimate,
    verify_smoothing,
    verify_threshold_conditions,
    verify_weighted_linear,
)

SUITES = ("all", "linear", "nonlinear", "smoothing")


def _out_root(cfg: RunConfig, override: str | None) -> Path:
    root = override or os.environ.get("GKDV_OUT") or cfg.raw.get("output_dir") or "gkdv-runs"
    return Path(root)


def _prepare_run_dir(cfg: RunConfig, out_root: Path) -> Path:
    run_dir = out_root / cfg.config_hash()[:12]
    (run_dir / "reports").mkdir(parents=True, exist_ok=True)
    (run_dir / "data").mkdir(parents=True, exist_ok=True)
    (run_dir / "config.json").write_text(cfg.canonical_json() + "\n")
    return run_dir


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(cfg: RunConfig, run_dir: Path, started: float) -> None:
    files = []
    for path in sorted(run_dir.rglob("*")):
        if path.is_file() and path.name != "manifest.json":
            files.append(
                {
                    "path": str(path.relative_to(run_dir)),
                    "sha256": _sha256(path),
                    "bytes": path.stat().st_size,
                }
            )
    manifest = {
        "config_hash": cfg.config_hash(),
        "artifact_version": __version__,
        "started_at": started,
        "finished_at": time.time(),
        "files": files,
    }
    (run_dir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def run_solve(config_path: str, out_override: str | None = None) -> int:
    started = time.time()
    try:
        cfg = RunConfig.from_file(config_path, "solve")
        prob = cfg.build_problem()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return 2
    run_dir = _prepare_run_dir(cfg, _out_root(cfg, out_override))
    solver_opts = cfg.raw.get("solver", {})
    try:
        solution, trace = solve(
            prob,
            max_iter=int(solver_opts.get("max_iter", 40)),
            tol=solver_opts.get("tol"),
            panels=int(solver_opts.get("panels", 16)),
            grading=float(solver_opts.get("grading", 2.0)),
        )
        output_times = cfg.raw.get("output_times") or [trace.t_final]
        for idx, t in enumerate(output_times):
            t = min(float(t), trace.t_final)
            fld = solution(t)
            lines = ["x,value"]
            lines += [f"{float(x)!r},{float(v)!r}" for x, v in zip(prob.grid.x, fld.phys)]
            (run_dir / "data" / f"trajectory_{idx:03d}.csv").write_text("\n".join(lines) + "\n")
        _write_json(run_dir / "reports" / "picard_trace.json", trace.to_json_dict())
    except GkdvError as exc:
        click.echo(f"solver failure: {exc}", err=True)
        _write_manifest(cfg, run_dir, started)
        return 1
    _write_manifest(cfg, run_dir, started)
    click.echo(
        f"solve: converged={trace.converged} r={trace.r:.6g} T={trace.t_final:.6g} "
        f"iterations={len(trace.iterates)} -> {run_dir}"
    )
    return 0


def _verify_reports(cfg: RunConfig, suite: str, p_override: float | None = None,
                    k_override: float | None = None, s_override: float | None = None) -> list:
    opts = cfg.raw.get("verify", {})
    grid = cfg.build_grid()
    symbol = cfg.build_symbol(p_override=p_override)
    k = k_override if k_override is not None else float(cfg.raw.get("k", 1.0))
    s = s_override if s_override is not None else float(cfg.raw.get("s", 0.0))
    mode = cfg.raw.get("mode", "conservative")
    seed = cfg.seed
    reports = []
    if suite in ("all", "linear"):
        for theta in opts.get("theta_values", [1.0]):
            window = opts.get("tau_window")
            reports.append(
                verify_multiplier_decay(
                    symbol,
                    float(theta),
                    tau_window=tuple(window) if window else None,
                    n_tau=int(opts.get("n_tau", 24)),
                )
            )
        reports.append(
            verify_weighted_linear(
                symbol, k, s=s, grid=grid, n_seeds=int(opts.get("n_seeds", 10)), base_seed=seed
            )
        )
        hy_fields = [
            gaussian_field(grid, amplitude=1.0 + 0.1 * i, width=grid.length / (20.0 + i))
            for i in range(4)
        ]
        for p1 in opts.get("hy_exponents", [2.0, 4.0]):
            reports.append(verify_hausdorff_young(hy_fields, float(p1)))
        reports.append(
            verify_threshold_conditions(symbol, xi_max=float(opts.get("xi_max", 64.0)))
        )
    if suite in ("all", "nonlinear"):
        prob = cfg.build_problem(p_override=p_override, k=k, s=s, mode=mode,
                                 initial_data=cfg.build_initial_data(grid))
        t_values = opts.get("t_values", [2.0 ** (-j) for j in range(10, 4, -1)])
        reports.append(
            verify_nonlinear_estimate(
                prob, t_values, seed=seed,
                panels=int(opts.get("panels", 12)),
                n_times=int(opts.get("n_times", 10)),
            )
        )
        reports.append(
            verify_contraction_scaling(
                prob,
                t_values=opts.get("t_values"),  # None -> deep default window
                n_pairs=int(opts.get("n_pairs", 2)), seed=seed,
                panels=int(opts.get("panels", 10)),
                n_times=int(opts.get("n_times", 8)),
            )
        )
    if suite in ("all", "smoothing"):
        prob = cfg.build_problem(p_override=p_override, k=k, s=s, mode=mode,
                                 initial_data=cfg.build_initial_data(grid))
        horizon = opts.get("t_horizon")
        reports.append(
            verify_smoothing(
                prob, seed=seed, panels=int(opts.get("panels", 16)),
                t_horizon=float(horizon) if horizon is not None else None,
                data_scale=float(opts.get("data_scale", 0.15)),
            )
        )
    return reports


def run_verify(config_path: str, suite: str | None = None, out_override: str | None = None) -> int:
    started = time.time()
    try:
        cfg = RunConfig.from_file(config_path, "verify")
        chosen = suite or cfg.suite
        if chosen not in SUITES:
            raise ConfigError(f"unknown suite {chosen!r}; choose from {SUITES}")
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return 2
    run_dir = _prepare_run_dir(cfg, _out_root(cfg, out_override))
    try:
        reports = _verify_reports(cfg, chosen)
    except GkdvError as exc:
        click.echo(f"verification failure: {exc}", err=True)
        _write_manifest(cfg, run_dir, started)
        return 1
    for rep in reports:
        _write_json(run_dir / "reports" / f"{rep.estimate_id}.json", rep.to_json_dict())
    table = render_report_table(reports)
    (run_dir / "reports" / "summary.txt").write_text(table + "\n")
    _write_manifest(cfg, run_dir, started)
    click.echo(table)
    failed = [r for r in reports if not r.passed]
    return 1 if failed else 0


def _sweep_job(args) -> list[dict]:
    raw, combo, suite = args
    cfg = RunConfig.from_dict(raw, "sweep")
    reports = _verify_reports(
        cfg, suite, p_override=combo["p"], k_override=combo["k"], s_override=combo["s"]
    )
    rows = []
    for rep in reports:
        rows.append(
            {
                "k": combo["k"],
                "p": combo["p"] if combo["p"] is not None else cfg.raw["symbol"].get("p"),
                "s": combo["s"],
                "estimate_id": rep.estimate_id,
                "theoretical": rep.theoretical_exponent,
                "fitted": rep.fitted_exponent,
                "verdict": rep.verdict,
            }
        )
    return rows


def run_sweep(config_path: str, jobs: int = 1, out_override: str | None = None) -> int:
    started = time.time()
    try:
        cfg = RunConfig.from_file(config_path, "sweep")
        combos = cfg.sweep_values()
        suite = cfg.suite
        if suite not in SUITES:
            raise ConfigError(f"unknown suite {suite!r}")
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return 2
    run_dir = _prepare_run_dir(cfg, _out_root(cfg, out_override))
    job_args = [(cfg.raw, combo, suite) for combo in combos]
    try:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_sweep_job, job_args))
        else:
            results = [_sweep_job(a) for a in job_args]
    except GkdvError as exc:
        click.echo(f"sweep failure: {exc}", err=True)
        _write_manifest(cfg, run_dir, started)
        return 1
    lines = ["k,p,s,estimate_id,theoretical,fitted,verdict"]
    any_fail = False
    for rows in results:
        for row in rows:
            any_fail = any_fail or row["verdict"] == "fail"
            theo = "" if row["theoretical"] is None else repr(float(row["theoretical"]))
            fit = "" if row["fitted"] is None else repr(float(row["fitted"]))
            kps = ",".join(repr(float(row[key])) for key in ("k", "p", "s"))
            lines.append(f"{kps},{row['estimate_id']},{theo},{fit},{row['verdict']}")
    (run_dir / "data" / "sweep.csv").write_text("\n".join(lines) + "\n")
    _write_manifest(cfg, run_dir, started)
    click.echo(f"sweep: {len(combos)} combinations -> {run_dir}")
    return 1 if any_fail else 0


@click.group()
@click.version_option(__version__)
def main():
    """Pseudo-spectral toolkit for dissipative generalized KdV equations."""


@main.command("solve")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_override", default=None, help="Output root (overrides GKDV_OUT)")
def solve_cmd(config_path, out_override):
    """Run the fixed-point solver for one configured problem."""
    sys.exit(run_solve(config_path, out_override))


@main.command("verify")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--suite", type=click.Choice(SUITES), default=None,
              help="Which estimate family to check (default: config or 'all')")
@click.option("--out", "out_override", default=None)
def verify_cmd(config_path, suite, out_override):
    """Run estimate checks and emit reports; exit 0 iff all pass."""
    sys.exit(run_verify(config_path, suite, out_override))


@main.command("sweep")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--out", "out_override", default=None)
def sweep_cmd(config_path, jobs, out_override):
    """Cartesian sweep over configured (k, p, s) values."""
    sys.exit(run_sweep(config_path, jobs, out_override))


if __name__ == "__main__":
    main()
