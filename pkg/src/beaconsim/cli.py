"""Command line front end.

    simctl run [--config FILE] [--out DIR] [--allow-partial]
    simctl bench [--na 1..5] [--reps N] [--seed N] [--out FILE]
    simctl table export FILE [--config FILE]
    simctl table import FILE
    simctl oracle [--na K] [--cases N] [--grid DT:DP] [--seed N]

Exit status: 0 success, 1 failed cells / mismatches / invalid data,
2 usage or configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import experiment, sim as simulation
from .controllers import (ControllerGrid, InfeasibleError, SolverError,
                          brute_force_oracle, merlin, presto_per_app)
from .footprint import TxConfig, footprint
from .table_io import export_pdr_table, import_pdr_table


def _parse_na_spec(spec: str) -> list[int]:
    """'1..5' or '1,3,5' or '2' -> list of ints."""
    spec = spec.strip()
    if ".." in spec:
        lo, _, hi = spec.partition("..")
        values = list(range(int(lo), int(hi) + 1))
    else:
        values = [int(part) for part in spec.split(",") if part.strip()]
    if not values or any(not 1 <= v <= 5 for v in values):
        raise ValueError(f"application counts must lie in 1..5: {spec!r}")
    return values


def _load_config(path) -> experiment.ExperimentConfig:
    if path is None:
        return experiment.ExperimentConfig()
    return experiment.parse_config(path)


def _cmd_run(args) -> int:
    cfg = _load_config(args.config)
    out_dir = args.out or cfg.output_dir

    def progress(result):
        print(f"  {result.controller:7s} d={result.density:<5g} "
              f"na={result.n_a} seed={result.seed}: {result.status} "
              f"cbr={result.mean_cbr:.4f} sar={result.sar_pct:.2f} "
              f"iters={result.iterations}")

    cells = experiment.matrix_cells(cfg)
    print(f"running {len(cells)} cells -> {out_dir}")
    try:
        experiment.run_matrix(cfg, out_dir=out_dir,
                              allow_partial=args.allow_partial,
                              progress=progress)
    except experiment.MatrixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {os.path.join(out_dir, 'results.csv')} and plot data")
    return 0


def _cmd_bench(args) -> int:
    cfg = _load_config(args.config)
    models, grid = experiment.build_runtime(cfg)
    n_a_values = _parse_na_spec(args.na)
    rows, ratios = experiment.benchmark(models, grid, n_a_values=n_a_values,
                                        reps=args.reps, seed=args.seed,
                                        mh_power_dbm=cfg.mh_fixed_power_dbm)
    header = (f"{'controller':10s} {'n_a':>3s} {'p5':>9s} {'p50':>9s} "
              f"{'p95':>9s} {'mean':>9s} {'fail':>4s}")
    print(header)
    for r in rows:
        print(f"{r.controller:10s} {r.n_a:3d} {r.p5_ms:9.3f} {r.p50_ms:9.3f} "
              f"{r.p95_ms:9.3f} {r.mean_ms:9.3f} {r.failures:4d}")
    for n_a in sorted(ratios):
        print(f"merlin/presto median ratio, n_a={n_a}: {ratios[n_a]:.1f}x")
    if args.out:
        experiment.write_bench_csv(rows, ratios, args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_table(args) -> int:
    if args.table_action == "export":
        cfg = _load_config(args.config)
        models, _ = experiment.build_runtime(cfg)
        export_pdr_table(models.table, args.path)
        t = models.table
        print(f"wrote {args.path}: {t.distances.size} distances x "
              f"{t.powers.size} powers x {t.cbr_levels.size} load levels")
        return 0
    try:
        table = import_pdr_table(args.path)
    except ValueError as exc:
        print(f"invalid table: {exc}", file=sys.stderr)
        return 1
    print(f"valid table: {table.distances.size} distances x "
          f"{table.powers.size} powers x {table.cbr_levels.size} load levels, "
          f"pdr in [{table.values.min():.4g}, {table.values.max():.4g}]")
    return 0


def _cmd_oracle(args) -> int:
    """Cross-check the controllers against exhaustive search on a coarse
    grid: the per-application scan must match exactly, the continuous
    solution must not be worse."""
    cfg = _load_config(args.config)
    models, fine_grid = experiment.build_runtime(cfg)
    try:
        dt, _, dp = args.grid.partition(":")
        coarse = ControllerGrid(delta_t_hz=float(dt), delta_p_db=float(dp),
                                t_max_hz=fine_grid.t_max_hz,
                                p_min_dbm=fine_grid.p_min_dbm,
                                p_max_dbm=fine_grid.p_max_dbm)
    except (ValueError, TypeError):
        print(f"error: bad --grid {args.grid!r}, expected DT:DP",
              file=sys.stderr)
        return 2
    failures = 0
    for case in range(args.cases):
        rng = np.random.default_rng(
            np.random.SeedSequence((args.seed, 31, args.na, case)))
        apps = simulation.draw_apps(rng, args.na)
        cbr = float(rng.uniform(0.1, 0.8))
        print(f"case {case}: cbr={cbr:.3f}, "
              + "; ".join(f"cr={a.cr_m:.0f}m rate={a.rate_hz:.2f}Hz"
                          for a in apps))
        for i, app in enumerate(apps):
            scan = presto_per_app(app, cbr, models, coarse)
            scan_fp = footprint(TxConfig((scan,)), models.psr_model,
                                models.t_pkt)
            _, oracle_fp = brute_force_oracle([app], cbr, models, coarse,
                                              n_v=1)
            match = scan_fp == oracle_fp
            failures += 0 if match else 1
            print(f"  app {i}: scan P={scan[0]:.1f} T={scan[1]:.1f} "
                  f"fp={scan_fp:.6e} oracle fp={oracle_fp:.6e} "
                  f"{'ok' if match else 'MISMATCH'}")
        n_v = min(args.na, 2)
        try:
            _, joint_fp = brute_force_oracle(apps, cbr, models, coarse,
                                             n_v=n_v)
            cfg_m = merlin(apps, cbr, models, fine_grid)
            merlin_fp = footprint(cfg_m, models.psr_model, models.t_pkt)
            ok = merlin_fp <= joint_fp * (1.0 + 1e-6) + 1e-12
            failures += 0 if ok else 1
            print(f"  joint: merlin fp={merlin_fp:.6e} "
                  f"oracle({n_v} entries) fp={joint_fp:.6e} "
                  f"{'ok' if ok else 'WORSE THAN ORACLE'}")
        except (InfeasibleError, SolverError) as exc:
            print(f"  joint: skipped ({exc})")
    if failures:
        print(f"{failures} check(s) failed", file=sys.stderr)
        return 1
    print("all checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simctl",
        description="Beacon power/rate controller simulation driver")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment matrix")
    p_run.add_argument("--config", help="config file (dotted key = value)")
    p_run.add_argument("--out", help="output directory (default from config)")
    p_run.add_argument("--allow-partial", action="store_true",
                       help="keep going and exit 0 despite failed cells")

    p_bench = sub.add_parser("bench", help="time the controllers")
    p_bench.add_argument("--na", default="1..5",
                         help="application counts, e.g. 1..5 or 1,3,5")
    p_bench.add_argument("--reps", type=int, default=30)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--config", help="config file for model parameters")
    p_bench.add_argument("--out", help="also write a CSV here")

    p_table = sub.add_parser("table", help="export or validate a PDR table")
    p_table.add_argument("table_action", choices=("export", "import"))
    p_table.add_argument("path")
    p_table.add_argument("--config", help="config file for model parameters")

    p_oracle = sub.add_parser(
        "oracle", help="cross-check controllers against exhaustive search")
    p_oracle.add_argument("--na", type=int, default=1,
                          help="applications per case (1..5)")
    p_oracle.add_argument("--cases", type=int, default=3)
    p_oracle.add_argument("--grid", default="1.0:2.5",
                          help="coarse grid steps DT:DP")
    p_oracle.add_argument("--seed", type=int, default=0)
    p_oracle.add_argument("--config", help="config file for model parameters")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "oracle" and not 1 <= args.na <= 5:
        print("error: --na must lie in 1..5", file=sys.stderr)
        return 2
    handlers = {"run": _cmd_run, "bench": _cmd_bench, "table": _cmd_table,
                "oracle": _cmd_oracle}
    try:
        return handlers[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
