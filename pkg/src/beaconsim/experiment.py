"""Experiment matrix driver, benchmark harness and plot-data emission.

A run sweeps (density, application count, controller, seed) cells, each
cell being one independent snapshot simulation.  Scenario generation is
seeded independently of the controller, so rows with different
controllers share identical vehicle layouts and application draws and
can be compared pairwise.  All emitted CSVs are byte-stable across
repeated runs: fixed float formatting, canonical row order and no
wall-clock columns.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .bounds import WilsonParams
from .channel import CollisionParams, PdrTable, PhyParams, build_pdr_table
from .controllers import (ControllerGrid, InfeasibleError, Models, SolverError,
                          default_models, merlin, mh, presto)
from . import sim as simulation
from .table_io import import_pdr_table


@dataclass
class ExperimentConfig:
    """Flat bundle of every knob a run can turn.

    Parsed from dotted-key files; every field has a working default, so
    an empty config runs the standard matrix.
    """

    densities: list = field(default_factory=lambda: [10.0, 20.0, 30.0])
    n_a_values: list = field(default_factory=lambda: [1, 3, 5])
    controllers: list = field(default_factory=lambda: ["mh", "presto", "merlin"])
    seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    windows: int = 100
    window_s: float = 1.0
    output_dir: str = "out"
    road_length_m: float = 5000.0
    lanes: int = 4
    stats_fraction: float = 0.6
    beta: float = 0.5
    tol: float = 1e-3
    max_iter: int = 50
    retrigger: float = 0.05
    carrier_freq_hz: float = 5.9e9
    tx_power_min_dbm: float = 0.0
    tx_power_max_dbm: float = 25.0
    carrier_sense_threshold_dbm: float = -85.0
    receiver_sensitivity_dbm: float = -96.0
    shadowing_sigma_db: float = 3.0
    extra_loss_db: float = 10.0
    breakpoint_m: float = 150.0
    pathloss_exp_near: float = 2.27
    pathloss_exp_far: float = 4.0
    data_rate_bps: float = 6e6
    message_size_bytes: int = 250
    phy_mac_overhead_s: float = 40e-6
    gamma: float = 0.35
    kappa: float = 1.2
    delta_t_hz: float = 0.1
    delta_p_db: float = 0.5
    t_max_hz: float = 20.0
    alpha: float = 0.05
    # lean solver profile for the many-vehicle fixed point; the benchmark
    # and optimality checks use the solver's own heavier defaults
    merlin_starts: int = 2
    merlin_maxiter: int = 25
    merlin_ftol: float = 1e-5
    merlin_n_entries: int = 0  # 0 = twice the application count
    merlin_warm_start: bool = True
    mh_fixed_power_dbm: float = 25.0
    table_path: str = ""


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_list(item_parser):
    def parse(text: str):
        return [item_parser(part.strip()) for part in text.split(",") if part.strip()]
    return parse


# dotted config key -> (ExperimentConfig field, value parser)
KEY_SPEC = {
    "experiment.densities": ("densities", _parse_list(float)),
    "experiment.n_a_values": ("n_a_values", _parse_list(int)),
    "experiment.controllers": ("controllers", _parse_list(str)),
    "experiment.seeds": ("seeds", _parse_list(int)),
    "experiment.windows": ("windows", int),
    "experiment.window_s": ("window_s", float),
    "experiment.output_dir": ("output_dir", str),
    "scenario.road_length_m": ("road_length_m", float),
    "scenario.lanes": ("lanes", int),
    "scenario.stats_fraction": ("stats_fraction", float),
    "sim.beta": ("beta", float),
    "sim.tol": ("tol", float),
    "sim.max_iter": ("max_iter", int),
    "sim.retrigger": ("retrigger", float),
    "phy.carrier_freq_hz": ("carrier_freq_hz", float),
    "phy.tx_power_min_dbm": ("tx_power_min_dbm", float),
    "phy.tx_power_max_dbm": ("tx_power_max_dbm", float),
    "phy.carrier_sense_threshold_dbm": ("carrier_sense_threshold_dbm", float),
    "phy.receiver_sensitivity_dbm": ("receiver_sensitivity_dbm", float),
    "phy.shadowing_sigma_db": ("shadowing_sigma_db", float),
    "phy.extra_loss_db": ("extra_loss_db", float),
    "phy.breakpoint_m": ("breakpoint_m", float),
    "phy.pathloss_exp_near": ("pathloss_exp_near", float),
    "phy.pathloss_exp_far": ("pathloss_exp_far", float),
    "phy.data_rate_bps": ("data_rate_bps", float),
    "phy.message_size_bytes": ("message_size_bytes", int),
    "phy.phy_mac_overhead_s": ("phy_mac_overhead_s", float),
    "collision.gamma": ("gamma", float),
    "collision.kappa": ("kappa", float),
    "grid.delta_t_hz": ("delta_t_hz", float),
    "grid.delta_p_db": ("delta_p_db", float),
    "grid.t_max_hz": ("t_max_hz", float),
    "wilson.alpha": ("alpha", float),
    "merlin.starts": ("merlin_starts", int),
    "merlin.maxiter": ("merlin_maxiter", int),
    "merlin.ftol": ("merlin_ftol", float),
    "merlin.n_entries": ("merlin_n_entries", int),
    "merlin.warm_start": ("merlin_warm_start", _parse_bool),
    "mh.fixed_power_dbm": ("mh_fixed_power_dbm", float),
    "table.path": ("table_path", str),
}

KNOWN_CONTROLLERS = ("mh", "presto", "merlin")


def parse_config(path) -> ExperimentConfig:
    """Read `key = value` lines; # starts a comment.  Unknown keys and
    unparsable values are hard errors that name every offender."""
    cfg = ExperimentConfig()
    unknown: list[str] = []
    errors: list[str] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                errors.append(f"line {lineno}: expected 'key = value'")
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            spec = KEY_SPEC.get(key)
            if spec is None:
                unknown.append(f"{key} (line {lineno})")
                continue
            name, parser = spec
            try:
                setattr(cfg, name, parser(value.strip()))
            except (ValueError, TypeError) as exc:
                errors.append(f"line {lineno}: bad value for {key}: {exc}")
    if unknown:
        errors.append("unknown config keys: " + ", ".join(unknown))
    if errors:
        raise ValueError("; ".join(errors))
    for ctrl in cfg.controllers:
        if ctrl not in KNOWN_CONTROLLERS:
            raise ValueError(f"unknown controller {ctrl!r}; "
                             f"choose from {KNOWN_CONTROLLERS}")
    return cfg


def build_runtime(cfg: ExperimentConfig):
    """Models and controller grid for a config; table optionally loaded
    from disk."""
    phy = PhyParams(
        carrier_freq_hz=cfg.carrier_freq_hz,
        tx_power_min_dbm=cfg.tx_power_min_dbm,
        tx_power_max_dbm=cfg.tx_power_max_dbm,
        carrier_sense_threshold_dbm=cfg.carrier_sense_threshold_dbm,
        receiver_sensitivity_dbm=cfg.receiver_sensitivity_dbm,
        shadowing_sigma_db=cfg.shadowing_sigma_db,
        extra_loss_db=cfg.extra_loss_db,
        breakpoint_m=cfg.breakpoint_m,
        pathloss_exp_near=cfg.pathloss_exp_near,
        pathloss_exp_far=cfg.pathloss_exp_far,
        data_rate_bps=cfg.data_rate_bps,
        message_size_bytes=cfg.message_size_bytes,
        phy_mac_overhead_s=cfg.phy_mac_overhead_s)
    collision = CollisionParams(gamma=cfg.gamma, kappa=cfg.kappa)
    if cfg.table_path:
        table = import_pdr_table(cfg.table_path)
    else:
        table = build_pdr_table(phy, collision)
    wilson = WilsonParams(alpha=cfg.alpha)
    models = default_models(phy, collision, table, wilson)
    grid = ControllerGrid(delta_t_hz=cfg.delta_t_hz, delta_p_db=cfg.delta_p_db,
                          t_max_hz=cfg.t_max_hz,
                          p_min_dbm=cfg.tx_power_min_dbm,
                          p_max_dbm=cfg.tx_power_max_dbm)
    return models, grid


class _MerlinRunner:
    """merlin bound to run options, re-solving vehicles from their last fix.

    The first call per application list runs the configured multi-start;
    later calls (load drifted, same vehicle) continue from that vehicle's
    previous solution with a single run, which tracks the optimum across
    small load changes at a fraction of the cost.  Keyed on list identity,
    valid because the scenario keeps every vehicle's list alive for the
    runner's whole lifetime.
    """

    def __init__(self, cfg: ExperimentConfig, models: Models,
                 grid: ControllerGrid) -> None:
        self._models = models
        self._grid = grid
        self._base = {"starts": cfg.merlin_starts, "maxiter": cfg.merlin_maxiter,
                      "ftol": cfg.merlin_ftol, "warm_start": cfg.merlin_warm_start}
        if cfg.merlin_n_entries > 0:
            self._base["n_entries"] = cfg.merlin_n_entries
        self._hints: dict[int, np.ndarray] = {}

    def __call__(self, apps, cbr):
        opts = dict(self._base)
        hint = self._hints.get(id(apps))
        if hint is not None:
            opts.update(starts=1, x0=hint, warm_start=False)
        out = merlin(apps, cbr, self._models, self._grid, solver_opts=opts)
        self._hints[id(apps)] = np.array(
            [p for p, _ in out.entries] + [t for _, t in out.entries])
        return out


def make_controller(name: str, cfg: ExperimentConfig, models: Models,
                    grid: ControllerGrid):
    """Bind a controller name to a (apps, cbr) -> TxConfig callable."""
    if name == "mh":
        return lambda apps, cbr: mh(apps, cfg.mh_fixed_power_dbm)
    if name == "presto":
        return lambda apps, cbr: presto(apps, cbr, models, grid)
    if name == "merlin":
        return _MerlinRunner(cfg, models, grid)
    raise ValueError(f"unknown controller {name!r}")


@dataclass
class CellResult:
    """Everything one matrix cell reports; plain data, safe to pickle."""

    controller: str
    density: float
    n_a: int
    seed: int
    status: str  # ok | non_converged | infeasible | solver_error
    converged: bool
    iterations: int
    controller_calls: int
    mean_cbr: float
    sar_pct: float
    mean_total_rate_hz: float
    mean_power_dbm: float
    dp_bins: list
    power_pdf: list
    rate_pdf: list
    runtime_stats: dict
    error: str = ""


_RUNTIME_CACHE: dict = {}


def _cached_runtime(cfg: ExperimentConfig):
    key = tuple(getattr(cfg, f.name) for f in fields(cfg)
                if not isinstance(getattr(cfg, f.name), list))
    hit = _RUNTIME_CACHE.get(key)
    if hit is None:
        hit = build_runtime(cfg)
        _RUNTIME_CACHE.clear()  # one config per process is the common case
        _RUNTIME_CACHE[key] = hit
    return hit


def _failed_cell(cell, status: str, error: str) -> CellResult:
    controller, density, n_a, seed = cell
    nan = float("nan")
    return CellResult(controller=controller, density=density, n_a=n_a,
                      seed=seed, status=status, converged=False, iterations=0,
                      controller_calls=0, mean_cbr=nan, sar_pct=nan,
                      mean_total_rate_hz=nan, mean_power_dbm=nan, dp_bins=[],
                      power_pdf=[], rate_pdf=[], runtime_stats={},
                      error=error)


def run_cell(cfg: ExperimentConfig, cell) -> CellResult:
    """One snapshot simulation: scenario, fixed point, sampling, metrics.

    The scenario and application seeds do not involve the controller
    name, so different controllers see identical worlds.
    """
    controller, density, n_a, seed = cell
    models, grid = _cached_runtime(cfg)
    dkey = int(round(density * 1000))
    scenario = simulation.generate_scenario(
        density, cfg.road_length_m, cfg.lanes, seed=(seed, dkey, n_a, 11),
        stats_fraction=cfg.stats_fraction)
    simulation.assign_applications(scenario, n_a, seed=(seed, dkey, n_a, 13))
    controller_fn = make_controller(controller, cfg, models, grid)
    try:
        fp = simulation.fixed_point_run(
            scenario, controller_fn, models.psr_model, models.t_pkt,
            beta=cfg.beta, tol=cfg.tol, max_iter=cfg.max_iter,
            retrigger=cfg.retrigger,
            bootstrap_fn=lambda apps: mh(apps, cfg.mh_fixed_power_dbm))
    except InfeasibleError as exc:
        return _failed_cell(cell, "infeasible", str(exc))
    except SolverError as exc:
        return _failed_cell(cell, "solver_error", str(exc))
    samples = simulation.sample_receptions(
        scenario, models.table, window_s=cfg.window_s, n_windows=cfg.windows,
        seed=(seed, dkey, n_a, 19))
    report = simulation.compute_metrics(
        scenario, fp, samples, t_max_hz=grid.t_max_hz,
        p_min_dbm=grid.p_min_dbm, p_max_dbm=grid.p_max_dbm)
    in_stats = scenario.stats_mask()
    totals, p_num, p_den = [], 0.0, 0.0
    for veh, inside in zip(scenario.vehicles, in_stats):
        if not inside or veh.tx_config is None:
            continue
        totals.append(veh.tx_config.total_rate)
        for p, t in veh.tx_config.entries:
            if t > 0:
                p_num += p * t
                p_den += t
    return CellResult(
        controller=controller, density=density, n_a=n_a, seed=seed,
        status="ok" if fp.converged else "non_converged",
        converged=fp.converged, iterations=fp.iterations,
        controller_calls=fp.controller_calls, mean_cbr=report.mean_cbr,
        sar_pct=report.sar_pct,
        mean_total_rate_hz=float(np.mean(totals)) if totals else float("nan"),
        mean_power_dbm=p_num / p_den if p_den > 0 else float("nan"),
        dp_bins=report.dp_bins, power_pdf=report.power_pdf,
        rate_pdf=report.rate_pdf, runtime_stats=report.runtime_stats)


class MatrixError(RuntimeError):
    """Raised when cells failed and partial results were not requested."""

    def __init__(self, failures, results):
        self.failures = failures
        self.results = results
        names = ", ".join(
            f"{r.controller}/d{r.density:g}/na{r.n_a}/s{r.seed}[{r.status}]"
            for r in failures[:8])
        more = "" if len(failures) <= 8 else f" and {len(failures) - 8} more"
        super().__init__(f"{len(failures)} cell(s) failed: {names}{more}")


def matrix_cells(cfg: ExperimentConfig) -> list:
    """Canonical cell order: controller, then density, n_a, seed."""
    return [(ctrl, float(d), int(n_a), int(seed))
            for ctrl in cfg.controllers
            for d in sorted(cfg.densities)
            for n_a in sorted(cfg.n_a_values)
            for seed in sorted(cfg.seeds)]


def _worker_count(n_cells: int) -> int:
    env = os.environ.get("SIMCTL_THREADS", "").strip()
    workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(workers, n_cells))


def run_matrix(cfg: ExperimentConfig, out_dir=None,
               allow_partial: bool = False,
               progress=None) -> list[CellResult]:
    """Run every cell, write CSV outputs, return results in canonical order.

    Cells run in parallel when SIMCTL_THREADS (default: CPU count)
    allows; outputs do not depend on the worker count.  Failed or
    non-converged cells raise MatrixError after the outputs are written
    unless allow_partial is set.
    """
    cells = matrix_cells(cfg)
    workers = _worker_count(len(cells))
    results: list[CellResult] = []
    if workers == 1:
        for cell in cells:
            results.append(run_cell(cfg, cell))
            if progress:
                progress(results[-1])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(run_cell, [cfg] * len(cells), cells):
                results.append(result)
                if progress:
                    progress(result)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_results_csv(results, os.path.join(out_dir, "results.csv"))
        models, _ = _cached_runtime(cfg)
        emit_plot_data(results, models.table, out_dir)
    failures = [r for r in results if r.status != "ok"]
    if failures and not allow_partial:
        raise MatrixError(failures, results)
    return results


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else f"{float(x):.10g}"
    return str(x)


RESULTS_HEADER = ["controller", "density", "n_a", "seed", "status",
                  "converged", "iterations", "controller_calls", "mean_cbr",
                  "sar_pct", "mean_total_rate_hz", "mean_power_dbm", "error"]


def write_results_csv(results: list[CellResult], path) -> None:
    """One row per cell; no timing columns, so reruns are byte-identical."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for r in results:
            writer.writerow([r.controller, _fmt(r.density), r.n_a, r.seed,
                             r.status, _fmt(r.converged), r.iterations,
                             r.controller_calls, _fmt(r.mean_cbr),
                             _fmt(r.sar_pct), _fmt(r.mean_total_rate_hz),
                             _fmt(r.mean_power_dbm), r.error])


PLOT_POWERS_DBM = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)


def emit_plot_data(results: list[CellResult], table: PdrTable, out_dir) -> None:
    """Write the per-figure CSVs next to results.csv."""
    os.makedirs(out_dir, exist_ok=True)

    with open(os.path.join(out_dir, "pdr_curves.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["power_dbm", "cbr", "distance_m", "pdr"])
        for p in PLOT_POWERS_DBM:
            j = int(np.argmin(np.abs(table.powers - p)))
            for k, c in enumerate(table.cbr_levels):
                for i, d in enumerate(table.distances):
                    writer.writerow([_fmt(float(table.powers[j])), _fmt(float(c)),
                                     _fmt(float(d)),
                                     _fmt(float(table.values[i, j, k]))])

    groups: dict[tuple, list[CellResult]] = {}
    for r in results:
        if r.status in ("ok", "non_converged"):
            groups.setdefault((r.controller, r.density, r.n_a), []).append(r)
    keys = sorted(groups, key=lambda k: (k[0], k[1], k[2]))

    with open(os.path.join(out_dir, "cbr_vs_density.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["controller", "density", "n_a", "mean_cbr", "n_seeds"])
        for key in keys:
            rs = groups[key]
            writer.writerow([key[0], _fmt(key[1]), key[2],
                             _fmt(float(np.mean([r.mean_cbr for r in rs]))),
                             len(rs)])

    with open(os.path.join(out_dir, "sar_vs_density.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["controller", "density", "n_a", "sar_pct", "n_seeds"])
        for key in keys:
            rs = groups[key]
            writer.writerow([key[0], _fmt(key[1]), key[2],
                             _fmt(float(np.mean([r.sar_pct for r in rs]))),
                             len(rs)])

    with open(os.path.join(out_dir, "param_pdfs.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["controller", "density", "n_a", "kind", "bin_lo",
                         "probability"])
        for key in keys:
            rs = groups[key]
            for kind, attr in (("power_dbm", "power_pdf"), ("rate_hz", "rate_pdf")):
                pdfs = [getattr(r, attr) for r in rs if getattr(r, attr)]
                if not pdfs:
                    continue
                bins = [b for b, _ in pdfs[0]]
                probs = np.mean([[p for _, p in pdf] for pdf in pdfs], axis=0)
                for b, p in zip(bins, probs):
                    writer.writerow([key[0], _fmt(key[1]), key[2], kind,
                                     _fmt(b), _fmt(float(p))])

    with open(os.path.join(out_dir, "dp_vs_distance.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["controller", "density", "n_a", "bin_m", "mean",
                         "p5", "p95"])
        for key in keys:
            rs = groups[key]
            by_bin: dict[float, list] = {}
            for r in rs:
                for b in r.dp_bins:
                    by_bin.setdefault(b.bin_lo_m, []).append(b)
            for lo in sorted(by_bin):
                bs = by_bin[lo]
                writer.writerow([key[0], _fmt(key[1]), key[2], _fmt(lo),
                                 _fmt(float(np.mean([b.mean for b in bs]))),
                                 _fmt(float(np.mean([b.p5 for b in bs]))),
                                 _fmt(float(np.mean([b.p95 for b in bs])))])


# ---------------------------------------------------------------------------
# Controller runtime benchmark


@dataclass
class BenchRow:
    controller: str
    n_a: int
    reps: int
    failures: int
    p5_ms: float
    p25_ms: float
    p50_ms: float
    p75_ms: float
    p95_ms: float
    mean_ms: float


def benchmark(models: Models, grid: ControllerGrid, n_a_values=(1, 2, 3, 4, 5),
              reps: int = 30, seed: int = 0, merlin_opts: dict | None = None,
              mh_power_dbm: float = 25.0):
    """Time each controller on random inputs; same draws for every
    controller within a rep, caches warmed before the clock starts.

    Returns (rows, ratios) where ratios maps n_a to the MERLIN / PRESTO
    median runtime ratio.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    controllers = {
        "mh": lambda apps, cbr: mh(apps, mh_power_dbm),
        "presto": lambda apps, cbr: presto(apps, cbr, models, grid),
        "merlin": lambda apps, cbr: merlin(apps, cbr, models, grid,
                                           solver_opts=dict(merlin_opts or {})),
    }
    rows: list[BenchRow] = []
    ratios: dict[int, float] = {}
    for n_a in n_a_values:
        draws = []
        for rep in range(reps):
            rng = np.random.default_rng(
                np.random.SeedSequence((seed, 23, int(n_a), rep)))
            apps = simulation.draw_apps(rng, int(n_a))
            draws.append((apps, float(rng.uniform(0.1, 0.8))))
        medians: dict[str, float] = {}
        for name, fn in controllers.items():
            try:  # warm every cache outside the timed region
                fn(*draws[0])
            except (InfeasibleError, SolverError):
                pass
            times = []
            failures = 0
            for apps, cbr in draws:
                t0 = time.perf_counter()
                try:
                    fn(apps, cbr)
                except (InfeasibleError, SolverError):
                    failures += 1
                    continue
                times.append((time.perf_counter() - t0) * 1000.0)
            arr = np.array(times) if times else np.array([float("nan")])
            p5, p25, p50, p75, p95 = np.percentile(arr, [5, 25, 50, 75, 95])
            rows.append(BenchRow(controller=name, n_a=int(n_a), reps=reps,
                                 failures=failures, p5_ms=float(p5),
                                 p25_ms=float(p25), p50_ms=float(p50),
                                 p75_ms=float(p75), p95_ms=float(p95),
                                 mean_ms=float(arr.mean())))
            medians[name] = float(p50)
        if medians.get("presto", 0.0) > 0.0 and "merlin" in medians:
            ratios[int(n_a)] = medians["merlin"] / medians["presto"]
    return rows, ratios


def write_bench_csv(rows: list[BenchRow], ratios: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["controller", "n_a", "reps", "failures", "p5_ms",
                         "p25_ms", "p50_ms", "p75_ms", "p95_ms", "mean_ms"])
        for r in rows:
            writer.writerow([r.controller, r.n_a, r.reps, r.failures,
                             _fmt(r.p5_ms), _fmt(r.p25_ms), _fmt(r.p50_ms),
                             _fmt(r.p75_ms), _fmt(r.p95_ms), _fmt(r.mean_ms)])
        writer.writerow([])
        writer.writerow(["n_a", "merlin_over_presto_median"])
        for n_a in sorted(ratios):
            writer.writerow([n_a, _fmt(ratios[n_a])])
