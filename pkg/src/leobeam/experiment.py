"""Sweep orchestration: run every (sweep value, seed, scheme) cell and write the outputs."""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import mrt_beamformers, s3_run, zf_beamformers
from .config import ConfigError, SystemConfig
from .isl import latency_total
from .rates import sum_rate
from .ring import run_ring
from .star import run_star
from .system import build_system
from .wmmse import run_central

log = logging.getLogger(__name__)

SCHEMES = ("central", "ring", "star", "mrt", "zf", "wmmse_s3", "mrt_s3", "zf_s3")
SWEEP_VARS = ("none", "power_dbm", "antennas", "rfc", "sats", "uts")
RESULT_COLUMNS = ("scheme", "sweep_var", "sweep_value", "seed", "sum_rate_bps", "objective", "iterations",
                  "latency_units", "overhead_dims", "wall_ms", "status")
SUMMARY_COLUMNS = ("scheme", "sweep_var", "sweep_value", "num_ok", "sum_rate_mean", "sum_rate_stderr",
                   "objective_mean", "objective_stderr", "iterations_mean", "latency_mean", "overhead_mean")


@dataclass(frozen=True)
class ExperimentSpec:
    base: SystemConfig = field(default_factory=SystemConfig)
    sweep_var: str = "none"
    sweep_values: tuple = ()
    schemes: tuple = SCHEMES
    num_seeds: int = 10
    k_eval: int | None = None
    out_dir: str = "results"
    jobs: int = 1
    timing: bool = True

    def __post_init__(self):
        if not self.schemes:
            raise ConfigError("schemes: at least one scheme is required")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ConfigError(f"schemes: unknown {unknown}; choose from {list(SCHEMES)}")
        if self.sweep_var not in SWEEP_VARS:
            raise ConfigError(f"sweep: unknown variable {self.sweep_var!r}; choose from {list(SWEEP_VARS)}")
        if self.sweep_var != "none":
            vals = list(self.sweep_values)
            if not vals:
                raise ConfigError("sweep: no values given")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigError("sweep: values must be strictly increasing")
        if self.num_seeds < 1:
            raise ConfigError("seeds: must be >= 1")
        if self.k_eval is not None and self.k_eval < 1:
            raise ConfigError("k_eval: must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs: must be >= 1")

    def points(self):
        return [None] if self.sweep_var == "none" else list(self.sweep_values)

    def config_at(self, value) -> SystemConfig:
        cfg = self.base
        if self.k_eval is not None:
            cfg = cfg.replace(num_eval_subcarriers=self.k_eval)
        return apply_sweep(cfg, self.sweep_var, value)


def apply_sweep(cfg: SystemConfig, var: str, value) -> SystemConfig:
    if var == "none":
        return cfg
    if var == "power_dbm":
        return cfg.replace(power_budget_dbm=float(value))
    if var == "antennas":
        side = math.isqrt(int(value))
        if side * side != int(value):
            raise ConfigError(f"sweep: antenna count {value} is not a square panel")
        return cfg.replace(panel_dims=(side, side))
    key = {"rfc": "num_rfc", "sats": "num_sats", "uts": "num_uts"}[var]
    return cfg.replace(**{key: int(value)})


@dataclass
class CellResult:
    row: dict
    trace: list = field(default_factory=list)
    ledger: object = None


def run_scheme(cfg: SystemConfig, scheme: str, seed: int):
    """Run one scheme on one seed; returns ``(report, iterations, trace, ledger)``."""
    sy = build_system(cfg, seed)
    sol = cfg.solver
    ledger, trace, iterations = None, [], 0
    stats = sy.stats
    if scheme in ("central", "ring", "star"):
        common = dict(tol=sol.wmmse_tol, max_iters=sol.wmmse_max_iters, bisect_tol=sol.bisect_tol)
        if scheme == "central":
            res = run_central(sy.stats, sy.schedule, sy.analog, sy.sigma2, sy.budget, sweeps=sol.bcd_sweeps, **common)
        elif scheme == "ring":
            res = run_ring(sy.stats, sy.schedule, sy.analog, sy.sigma2, sy.budget, **common)
        else:
            res = run_star(sy.stats, sy.schedule, sy.analog, sy.sigma2, sy.budget, pdd=cfg.pdd, **common)
        bf, trace, iterations, ledger = res.bf, res.trace, res.iterations, res.ledger
    elif scheme == "mrt":
        bf = mrt_beamformers(sy.stats, sy.schedule, sy.analog, sy.budget)
    elif scheme == "zf":
        bf = zf_beamformers(sy.stats, sy.schedule, sy.analog, sy.budget)
    else:
        bf, report, info = s3_run(sy.stats, sy.scenario.distances(), cfg.num_rfc, sy.sigma2, sy.budget,
                                  scheme.removesuffix("_s3"), cfg.num_subcarriers, cfg.subcarrier_spacing_hz,
                                  tol=sol.wmmse_tol, max_iters=sol.wmmse_max_iters, sweeps=sol.bcd_sweeps)
        return report, info["iterations"], trace, ledger
    report = sum_rate(stats, bf, sy.sigma2, cfg.num_subcarriers, cfg.subcarrier_spacing_hz)
    return report, iterations, trace, ledger


def run_cell(cfg: SystemConfig, scheme: str, seed: int, sweep_var: str, sweep_value, timing: bool = True) -> CellResult:
    row = {"scheme": scheme, "sweep_var": sweep_var, "sweep_value": "" if sweep_value is None else sweep_value,
           "seed": seed}
    start = time.perf_counter()
    try:
        report, iterations, trace, ledger = run_scheme(cfg, scheme, seed)
    except Exception as exc:    # a failing cell is recorded, the sweep continues
        log.error("cell %s seed=%s %s=%s failed: %s", scheme, seed, sweep_var, sweep_value, exc)
        row.update(sum_rate_bps=math.nan, objective=math.nan, iterations=0, latency_units=0, overhead_dims=0,
                   wall_ms=0, status=f"error: {type(exc).__name__}: {exc}")
        return CellResult(row)
    wall = (time.perf_counter() - start) * 1e3 if timing else 0
    row.update(
        sum_rate_bps=report.sum_rate_bps,
        objective=report.objective,
        iterations=iterations,
        latency_units=0 if ledger is None else latency_total(ledger),
        overhead_dims=0 if ledger is None else ledger.total_dims,
        wall_ms=round(wall, 3),
        status="ok",
    )
    return CellResult(row, trace, ledger)


def _cell_args(spec: ExperimentSpec):
    for value in spec.points():
        cfg = spec.config_at(value)
        for seed in range(cfg.rng_seed, cfg.rng_seed + spec.num_seeds):
            for scheme in spec.schemes:
                yield cfg, scheme, seed, spec.sweep_var, value, spec.timing


def run_experiment(spec: ExperimentSpec) -> list[CellResult]:
    """Every cell of the sweep grid, in grid order regardless of ``spec.jobs``."""
    args = list(_cell_args(spec))
    if spec.jobs == 1:
        return [run_cell(*a) for a in args]
    with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
        return list(pool.map(run_cell, *zip(*args)))


def summarize(results: list[CellResult]) -> list[dict]:
    """Mean and standard error over seeds for each (scheme, sweep value)."""
    groups: dict = {}
    for cell in results:
        r = cell.row
        groups.setdefault((r["scheme"], r["sweep_var"], r["sweep_value"]), []).append(r)
    out = []
    for (scheme, var, value), rows in groups.items():
        ok = [r for r in rows if r["status"] == "ok"]

        def stat(key):
            vals = np.array([float(r[key]) for r in ok])
            if vals.size == 0:
                return math.nan, math.nan
            se = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
            return float(vals.mean()), se

        rate_m, rate_se = stat("sum_rate_bps")
        obj_m, obj_se = stat("objective")
        out.append({
            "scheme": scheme, "sweep_var": var, "sweep_value": value, "num_ok": len(ok),
            "sum_rate_mean": rate_m, "sum_rate_stderr": rate_se, "objective_mean": obj_m,
            "objective_stderr": obj_se, "iterations_mean": stat("iterations")[0],
            "latency_mean": stat("latency_units")[0], "overhead_mean": stat("overhead_dims")[0],
        })
    return out


def _write_csv(path: Path, columns, rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def _tag(row) -> str:
    tag = f"{row['scheme']}"
    if row["sweep_var"] != "none":
        tag += f"_{row['sweep_var']}{row['sweep_value']}"
    return f"{tag}_{row['seed']}"


def emit_outputs(results: list[CellResult], out_dir, plots: bool = True) -> list[Path]:
    """Write ``results.csv``, ``summary.csv``, per-run traces and ledgers, and SVG plots."""
    if not results:
        raise ValueError("no results to write")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "results.csv", out / "summary.csv"]
    _write_csv(written[0], RESULT_COLUMNS, [c.row for c in results])
    summary = summarize(results)
    _write_csv(written[1], SUMMARY_COLUMNS, summary)
    for cell in results:
        if cell.trace:
            path = out / f"convergence_{_tag(cell.row)}.csv"
            _write_csv(path, ("iteration", "objective"),
                       [{"iteration": i, "objective": v} for i, v in enumerate(cell.trace)])
            written.append(path)
        if cell.ledger is not None:
            path = out / f"ledger_{_tag(cell.row)}.csv"
            cell.ledger.to_csv(path)
            written.append(path)
    if plots:
        written.extend(_plot(results, summary, out))
    return written


def _plot(results, summary, out: Path) -> list[Path]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "leobeam"
    files = []
    var = summary[0]["sweep_var"]
    if var != "none":
        fig, ax = plt.subplots(figsize=(6, 4))
        for scheme in dict.fromkeys(r["scheme"] for r in summary):
            pts = [(float(r["sweep_value"]), r["sum_rate_mean"]) for r in summary if r["scheme"] == scheme]
            ax.plot(*zip(*pts), marker="o", label=scheme)
        ax.set_xlabel(var)
        ax.set_ylabel("sum rate [bit/s]")
        ax.legend()
        ax.grid(alpha=0.3)
        path = out / f"sum_rate_vs_{var}.svg"
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        files.append(path)
    traces = [c for c in results if c.trace]
    if traces:
        first_seed = min(c.row["seed"] for c in traces)
        first_value = traces[0].row["sweep_value"]
        fig, ax = plt.subplots(figsize=(6, 4))
        for c in traces:
            if c.row["seed"] == first_seed and c.row["sweep_value"] == first_value:
                ax.plot(range(len(c.trace)), c.trace, marker=".", label=c.row["scheme"])
        ax.set_xlabel("iteration")
        ax.set_ylabel("objective [bit/s/Hz]")
        ax.legend()
        ax.grid(alpha=0.3)
        path = out / "convergence.svg"
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        files.append(path)
    return files
