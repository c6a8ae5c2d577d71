"""Static highway snapshot simulator.

A multi-lane road is populated at a given density, every vehicle gets a
set of application requirements and a controller assigns each vehicle a
transmit configuration.  Channel load couples vehicles, so load and
configurations are iterated to a fixed point.  Reception is then sampled
per 1 s window from the tabulated delivery probabilities, and the
awareness metrics (channel busy ratio, satisfaction ratio, packets
difference profile) are computed over the central statistics region.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from .bounds import CLASS_BOXES, AppRequirement
from .channel import PdrTable, PsrModel, pdr_lookup
from .footprint import TxConfig, load_at


@dataclass
class Vehicle:
    vid: int
    position_m: float
    lane: int
    apps: list = field(default_factory=list)
    tx_config: TxConfig | None = None
    local_cbr: float = 0.0


@dataclass
class Scenario:
    road_length_m: float
    lanes: int
    density_per_km_lane: float
    vehicles: list[Vehicle]
    stats_lo_m: float
    stats_hi_m: float

    def positions(self) -> np.ndarray:
        return np.array([v.position_m for v in self.vehicles])

    def stats_mask(self) -> np.ndarray:
        pos = self.positions()
        return (pos >= self.stats_lo_m) & (pos <= self.stats_hi_m)


def generate_scenario(density_per_km_lane: float, road_length_m: float = 5000.0,
                      lanes: int = 4, seed=0,
                      stats_fraction: float = 0.6) -> Scenario:
    """Uniform random placement, per-lane positions strictly ascending.

    Vehicle count per lane is density * length / 1000, rounded.  The
    statistics region is the central `stats_fraction` of the road.
    """
    per_lane = int(round(density_per_km_lane * road_length_m / 1000.0))
    if per_lane * lanes == 0:
        raise ValueError("scenario would contain no vehicles")
    rng = np.random.default_rng(np.random.SeedSequence(_entropy(seed)))
    vehicles = []
    vid = 0
    for lane in range(lanes):
        positions = np.sort(rng.uniform(0.0, road_length_m, per_lane))
        for pos in positions:
            vehicles.append(Vehicle(vid=vid, position_m=float(pos), lane=lane))
            vid += 1
    margin = 0.5 * (1.0 - stats_fraction) * road_length_m
    return Scenario(road_length_m=road_length_m, lanes=lanes,
                    density_per_km_lane=density_per_km_lane,
                    vehicles=vehicles, stats_lo_m=margin,
                    stats_hi_m=road_length_m - margin)


def _entropy(seed):
    if isinstance(seed, (tuple, list)):
        return tuple(int(s) for s in seed)
    return (int(seed),)


def draw_apps(rng: np.random.Generator, n_a: int) -> list:
    """n_a application requirements, class uniform, parameters uniform in
    the class box."""
    classes = sorted(CLASS_BOXES)
    apps = []
    for _ in range(n_a):
        cls = classes[rng.integers(len(classes))]
        (cr_lo, cr_hi), (r_lo, r_hi) = CLASS_BOXES[cls]
        cr = float(rng.uniform(cr_lo, cr_hi))
        if cr <= cr_lo:  # open lower edge of the range box
            cr = cr_lo + 1e-6
        rate = float(rng.uniform(r_lo, r_hi))
        apps.append(AppRequirement(cr_m=cr, rate_hz=rate, app_class=cls))
    return apps


def assign_applications(scenario: Scenario, n_a: int, seed=0) -> Scenario:
    """Draw n_a applications per vehicle, uniform over the class boxes.

    Per-vehicle substreams keyed by vehicle id keep assignments stable
    regardless of iteration order.
    """
    if not 1 <= n_a <= 5:
        raise ValueError("n_a must lie in 1..5")
    base = _entropy(seed)
    for veh in scenario.vehicles:
        rng = np.random.default_rng(np.random.SeedSequence(base + (17, veh.vid)))
        veh.apps = draw_apps(rng, n_a)
    return scenario


def compute_cbr(scenario: Scenario, psr_model: PsrModel, t_pkt: float) -> np.ndarray:
    """Channel busy ratio seen by every vehicle.

    Sum over all other vehicles of the per-transmitter busy fraction at
    this position, clamped to 1.  Own transmissions are excluded.
    """
    pos = scenario.positions()
    n = pos.size
    cbr = np.zeros(n)
    for u, veh in enumerate(scenario.vehicles):
        cfg = veh.tx_config
        if cfg is None or not cfg.entries:
            continue
        contribution = load_at(np.abs(pos - pos[u]), cfg, psr_model, t_pkt)
        contribution[u] = 0.0
        cbr += contribution
    return np.minimum(cbr, 1.0)


@dataclass
class FixedPointResult:
    converged: bool
    iterations: int
    controller_calls: int
    controller_seconds: list[float]
    final_delta: float


def fixed_point_run(scenario: Scenario, controller_fn, psr_model: PsrModel,
                    t_pkt: float, beta: float = 0.5, tol: float = 1e-3,
                    max_iter: int = 50, retrigger: float = 5e-3,
                    bootstrap_fn=None) -> FixedPointResult:
    """Iterate controllers against the load they collectively produce.

    Each round re-runs the controller for vehicles whose load moved by at
    least `retrigger` since their last solve (all vehicles on the first
    round), recomputes the load, and damps it into the per-vehicle state:
    cbr <- (1 - beta) * old + beta * new.  Converged when the raw load
    change drops below tol everywhere.  Non-convergence is reported, not
    raised; the last state is kept.

    `bootstrap_fn(apps) -> TxConfig`, when given, seeds the first round's
    configs without invoking the controller, so the controller first runs
    against a load estimate instead of an idle channel.  The equilibrium
    is the same either way; expensive controllers just skip one solve per
    vehicle at a load level no real channel would show.
    """
    if not 0.0 < beta <= 1.0:
        raise ValueError("beta must lie in (0, 1]")
    vehicles = scenario.vehicles
    last_solved = np.full(len(vehicles), np.nan)
    calls = 0
    times: list[float] = []
    converged = False
    delta = np.inf
    iterations = 0
    if bootstrap_fn is not None:
        for veh in vehicles:
            veh.tx_config = bootstrap_fn(veh.apps)
        new = compute_cbr(scenario, psr_model, t_pkt)
        for i, veh in enumerate(vehicles):
            veh.local_cbr = float(beta * new[i])
    for iterations in range(1, max_iter + 1):
        for i, veh in enumerate(vehicles):
            stale = (np.isnan(last_solved[i])
                     or abs(veh.local_cbr - last_solved[i]) >= retrigger)
            if veh.tx_config is None or stale:
                t0 = time.perf_counter()
                veh.tx_config = controller_fn(veh.apps, veh.local_cbr)
                times.append(time.perf_counter() - t0)
                calls += 1
                last_solved[i] = veh.local_cbr
        new = compute_cbr(scenario, psr_model, t_pkt)
        old = np.array([v.local_cbr for v in vehicles])
        delta = float(np.max(np.abs(new - old)))
        for i, veh in enumerate(vehicles):
            veh.local_cbr = float((1.0 - beta) * old[i] + beta * new[i])
        if delta < tol:
            converged = True
            break
    return FixedPointResult(converged=converged, iterations=iterations,
                            controller_calls=calls, controller_seconds=times,
                            final_delta=delta)


@dataclass
class ReceptionSamples:
    """Per (transmitter, receiver) reception counts over repeated windows.

    Pairs are limited to receivers inside the statistics region and within
    the transmitter's largest communication range; beyond that no
    application states a requirement.
    """

    tx_idx: np.ndarray
    rx_idx: np.ndarray
    distance_m: np.ndarray
    counts: np.ndarray  # shape (n_pairs, n_windows)


def sample_receptions(scenario: Scenario, table: PdrTable, window_s: float = 1.0,
                      n_windows: int = 100, seed=0) -> ReceptionSamples:
    """Draw per-window received packet counts for every relevant pair.

    Per entry, the number of packets in a window is round(rate * window)
    and each is received independently with the delivery probability at
    the pair distance, the entry power and the receiver's local load.
    Each transmitter draws from its own substream, so results do not
    depend on scheduling order.
    """
    pos = scenario.positions()
    local = np.array([v.local_cbr for v in scenario.vehicles])
    in_stats = scenario.stats_mask()
    base = _entropy(seed)
    tx_all, rx_all, d_all, c_all = [], [], [], []
    for u, veh in enumerate(scenario.vehicles):
        if veh.tx_config is None or not veh.apps:
            continue
        max_cr = max(a.cr_m for a in veh.apps)
        d = np.abs(pos - pos[u])
        rx = np.nonzero((d <= max_cr) & in_stats)[0]
        rx = rx[rx != u]
        if rx.size == 0:
            continue
        rng = np.random.default_rng(np.random.SeedSequence(base + (29, veh.vid)))
        totals = np.zeros((rx.size, n_windows), dtype=np.int32)
        for p_dbm, rate in veh.tx_config.entries:
            trials = int(round(rate * window_s))
            if trials <= 0:
                continue
            prob = pdr_lookup(table, d[rx], p_dbm, local[rx])
            totals += rng.binomial(trials, np.asarray(prob)[:, None],
                                   size=(rx.size, n_windows)).astype(np.int32)
        tx_all.append(np.full(rx.size, u))
        rx_all.append(rx)
        d_all.append(d[rx])
        c_all.append(totals)
    if not tx_all:
        empty = np.zeros(0)
        return ReceptionSamples(empty.astype(int), empty.astype(int), empty,
                                np.zeros((0, n_windows), dtype=np.int32))
    return ReceptionSamples(np.concatenate(tx_all), np.concatenate(rx_all),
                            np.concatenate(d_all), np.vstack(c_all))


def sar(samples: ReceptionSamples, scenario: Scenario) -> float:
    """Satisfied applications ratio, percent.

    One trial per (transmitter application, in-range receiver, window);
    satisfied when the window's received count reaches the required rate.
    """
    satisfied = 0
    total = 0
    n_windows = samples.counts.shape[1]
    for u in np.unique(samples.tx_idx):
        mask = samples.tx_idx == u
        d = samples.distance_m[mask]
        counts = samples.counts[mask]
        for app in scenario.vehicles[int(u)].apps:
            in_range = d <= app.cr_m
            if not in_range.any():
                continue
            satisfied += int((counts[in_range] >= app.rate_hz).sum())
            total += int(in_range.sum()) * n_windows
    if total == 0:
        return float("nan")
    return 100.0 * satisfied / total


@dataclass
class DpBin:
    bin_lo_m: float
    mean: float
    p5: float
    p95: float
    n_samples: int


def dp_profile(samples: ReceptionSamples, scenario: Scenario,
               bin_m: float = 10.0) -> list[DpBin]:
    """Received-minus-required packet difference vs distance.

    For each pair the requirement is the largest rate among the
    transmitter's applications whose range covers the pair distance;
    pairs covered by no application are skipped.  Samples pool every
    window; percentiles use the nearest-rank definition.
    """
    required = np.zeros(samples.tx_idx.size)
    keep = np.zeros(samples.tx_idx.size, dtype=bool)
    for u in np.unique(samples.tx_idx):
        mask = samples.tx_idx == u
        d = samples.distance_m[mask]
        req = np.zeros(d.size)
        for app in scenario.vehicles[int(u)].apps:
            covered = d <= app.cr_m
            req[covered] = np.maximum(req[covered], app.rate_hz)
        required[mask] = req
        keep[mask] = req > 0
    bins: list[DpBin] = []
    if not keep.any():
        return bins
    d = samples.distance_m[keep]
    dp = samples.counts[keep].astype(float) - required[keep, None]
    idx = np.floor(d / bin_m).astype(int)
    for b in np.unique(idx):
        vals = dp[idx == b].ravel()
        bins.append(DpBin(
            bin_lo_m=float(b * bin_m),
            mean=float(vals.mean()),
            p5=float(np.percentile(vals, 5, method="inverted_cdf")),
            p95=float(np.percentile(vals, 95, method="inverted_cdf")),
            n_samples=int(vals.size)))
    return bins


@dataclass
class MetricsReport:
    mean_cbr: float
    sar_pct: float
    dp_bins: list[DpBin]
    power_pdf: list[tuple[float, float]]  # (bin_lo_dbm, probability)
    rate_pdf: list[tuple[float, float]]   # (bin_lo_hz, probability)
    converged: bool
    iterations: int
    controller_calls: int
    runtime_stats: dict
    n_vehicles: int


def _pdf(values, weights, lo, hi, width) -> list[tuple[float, float]]:
    edges = np.arange(lo, hi + width * 0.5, width)
    hist, _ = np.histogram(values, bins=edges, weights=weights)
    total = hist.sum()
    if total > 0:
        hist = hist / total
    return [(float(edges[i]), float(hist[i])) for i in range(hist.size)]


def compute_metrics(scenario: Scenario, fp_result: FixedPointResult,
                    samples: ReceptionSamples, t_max_hz: float = 20.0,
                    p_min_dbm: float = 0.0,
                    p_max_dbm: float = 25.0) -> MetricsReport:
    """Aggregate the per-run awareness metrics over the statistics region."""
    in_stats = scenario.stats_mask()
    cbr_vals = np.array([v.local_cbr for v in scenario.vehicles])[in_stats]
    powers, p_weights, totals = [], [], []
    for veh, inside in zip(scenario.vehicles, in_stats):
        if not inside or veh.tx_config is None:
            continue
        totals.append(veh.tx_config.total_rate)
        for p, t in veh.tx_config.entries:
            if t > 0:
                powers.append(p)
                p_weights.append(t)
    times = np.array(fp_result.controller_seconds) if fp_result.controller_seconds else np.zeros(1)
    runtime = {"calls": fp_result.controller_calls,
               "total_s": float(times.sum()),
               "median_s": float(np.median(times)),
               "p95_s": float(np.percentile(times, 95))}
    return MetricsReport(
        mean_cbr=float(cbr_vals.mean()) if cbr_vals.size else float("nan"),
        sar_pct=sar(samples, scenario),
        dp_bins=dp_profile(samples, scenario),
        power_pdf=_pdf(powers, p_weights, p_min_dbm, p_max_dbm + 0.5, 0.5),
        rate_pdf=_pdf(totals, None, 0.0, t_max_hz + 0.5, 0.5),
        converged=fp_result.converged,
        iterations=fp_result.iterations,
        controller_calls=fp_result.controller_calls,
        runtime_stats=runtime,
        n_vehicles=len(scenario.vehicles))


# ---------------------------------------------------------------------------
# Scenario round trip


SCENARIO_HEADER = ["id", "position_m", "lane", "app_class", "cr_m", "rate_hz"]


def scenario_to_csv(scenario: Scenario, path) -> None:
    """One row per vehicle application."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCENARIO_HEADER)
        for veh in scenario.vehicles:
            for app in veh.apps:
                writer.writerow([veh.vid, f"{veh.position_m:.10g}", veh.lane,
                                 app.app_class or "", f"{app.cr_m:.10g}",
                                 f"{app.rate_hz:.10g}"])


def scenario_from_csv(path, road_length_m: float = 5000.0, lanes: int = 4,
                      density_per_km_lane: float = 0.0,
                      stats_fraction: float = 0.6) -> Scenario:
    vehicles: dict[int, Vehicle] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != SCENARIO_HEADER:
            raise ValueError(f"unexpected scenario header: {header}")
        for row in reader:
            if not row:
                continue
            vid, pos, lane = int(row[0]), float(row[1]), int(row[2])
            veh = vehicles.get(vid)
            if veh is None:
                veh = Vehicle(vid=vid, position_m=pos, lane=lane)
                vehicles[vid] = veh
            veh.apps.append(AppRequirement(
                cr_m=float(row[4]), rate_hz=float(row[5]),
                app_class=row[3] or None))
    if not vehicles:
        raise ValueError("scenario file contains no vehicles")
    margin = 0.5 * (1.0 - stats_fraction) * road_length_m
    return Scenario(road_length_m=road_length_m, lanes=lanes,
                    density_per_km_lane=density_per_km_lane,
                    vehicles=[vehicles[k] for k in sorted(vehicles)],
                    stats_lo_m=margin, stats_hi_m=road_length_m - margin)
