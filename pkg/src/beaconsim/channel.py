"""Radio channel models for 1-hop broadcast beacons on a highway.

Propagation is a dual-slope log-distance model with log-normal shadowing.
Packet sensing (PSR) and packet delivery (PDR) are closed-form curves from
that model; PDR additionally carries a channel-load dependent collision
term so that delivery degrades as the channel gets busier.  Controllers
consume PDR through a precomputed distance x power x load table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.special import ndtr

# Sensing probabilities below this are treated as zero when integrating
# the sensing footprint over distance.
PSR_TRUNCATION = 1e-4


@dataclass(frozen=True)
class PhyParams:
    """Radio and channel constants.

    The propagation constants (breakpoint, exponents, sigma, sensitivity)
    are synthetic desk-scale defaults: they produce plausible urban-highway
    PDR/PSR curves but are not calibrated against any specific measurement
    campaign.
    """

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

    def __post_init__(self) -> None:
        if self.shadowing_sigma_db <= 0:
            raise ValueError("shadowing_sigma_db must be positive")
        if self.breakpoint_m < 1.0:
            raise ValueError("breakpoint_m must be at least the 1 m reference")
        if self.tx_power_max_dbm <= self.tx_power_min_dbm:
            raise ValueError("tx power range is empty")
        if self.data_rate_bps <= 0 or self.message_size_bytes <= 0:
            raise ValueError("data rate and message size must be positive")


@dataclass(frozen=True)
class CollisionParams:
    """Load-dependent loss term g(C) = gamma * C**kappa, g(0) = 0."""

    gamma: float = 0.35
    kappa: float = 1.2

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must lie in [0, 1)")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")

    def loss(self, cbr):
        return self.gamma * np.asarray(cbr, dtype=float) ** self.kappa


def reference_loss_db(phy: PhyParams) -> float:
    """Path loss at the 1 m reference distance: free space plus extra loss."""
    fspl = 20.0 * math.log10(4.0 * math.pi * phy.carrier_freq_hz / SPEED_OF_LIGHT)
    return fspl + phy.extra_loss_db


def pathloss_db(distance_m, phy: PhyParams):
    """Dual-slope log-distance path loss, continuous at the breakpoint.

    Distances below 1 m (including 0) are clamped to the 1 m reference.
    """
    d = np.maximum(np.asarray(distance_m, dtype=float), 1.0)
    pl_ref = reference_loss_db(phy)
    near = pl_ref + 10.0 * phy.pathloss_exp_near * np.log10(d)
    pl_bp = pl_ref + 10.0 * phy.pathloss_exp_near * math.log10(phy.breakpoint_m)
    far = pl_bp + 10.0 * phy.pathloss_exp_far * np.log10(d / phy.breakpoint_m)
    return np.where(d <= phy.breakpoint_m, near, far)


def received_power(distance_m, power_dbm, phy: PhyParams):
    """Mean received power in dBm at a given distance."""
    return np.asarray(power_dbm, dtype=float) - pathloss_db(distance_m, phy)


@dataclass
class PsrModel:
    """Packet sensing probability vs distance and power.

    PSR(d, P) is the probability that the received power exceeds the
    carrier sense threshold under log-normal shadowing.  Spatial integrals
    of PSR are memoised per power level; the cache is append-only and safe
    for concurrent reads.
    """

    phy: PhyParams = field(default_factory=PhyParams)
    integral_step_m: float = 1.0
    _integral_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not 0 < self.integral_step_m <= 1.0:
            raise ValueError("integral step must be in (0, 1] m")


def psr(distance_m, power_dbm, model: PsrModel):
    """Probability of sensing a transmission at the given distance."""
    phy = model.phy
    margin = received_power(distance_m, power_dbm, phy) - phy.carrier_sense_threshold_dbm
    return ndtr(margin / phy.shadowing_sigma_db)


def psr_spatial_integral(power_dbm: float, model: PsrModel) -> float:
    """Integral of PSR over the whole road, metres of `fully sensed` channel.

    Computed as 2 * integral from 0 to infinity (the road is symmetric
    around the transmitter), trapezoid rule at the model step, truncated
    once PSR drops below PSR_TRUNCATION.  Results are cached per power.
    """
    key = float(power_dbm)
    cached = model._integral_cache.get(key)
    if cached is not None:
        return cached

    phy = model.phy
    sigma = phy.shadowing_sigma_db
    # Distance at which the mean power is far enough below the sense
    # threshold that PSR < truncation; solve the far slope for it.
    margin_db = sigma * 3.8  # ndtr(-3.8) < 1e-4
    pl_limit = key - phy.carrier_sense_threshold_dbm + margin_db
    pl_bp = reference_loss_db(phy) + 10.0 * phy.pathloss_exp_near * math.log10(phy.breakpoint_m)
    if pl_limit <= pl_bp:
        d_max = phy.breakpoint_m
    else:
        d_max = phy.breakpoint_m * 10.0 ** ((pl_limit - pl_bp) / (10.0 * phy.pathloss_exp_far))
    step = model.integral_step_m
    n = max(2, int(math.ceil(d_max / step)) + 1)
    d = np.arange(n, dtype=float) * step
    vals = psr(d, key, model)
    vals = np.where(vals < PSR_TRUNCATION, 0.0, vals)
    total = 2.0 * float(np.trapezoid(vals, dx=step))
    model._integral_cache[key] = total
    return total


@dataclass
class PdrModel:
    """Closed-form packet delivery probability vs distance, power and load."""

    phy: PhyParams = field(default_factory=PhyParams)
    collision: CollisionParams = field(default_factory=CollisionParams)


def pdr(distance_m, power_dbm, cbr, model: PdrModel):
    """Delivery probability: propagation success times (1 - collision loss)."""
    phy = model.phy
    margin = received_power(distance_m, power_dbm, phy) - phy.receiver_sensitivity_dbm
    prop = ndtr(margin / phy.shadowing_sigma_db)
    return prop * (1.0 - model.collision.loss(cbr))


def default_distance_grid() -> np.ndarray:
    """10 m resolution out to 600 m, where delivery is negligible."""
    return np.arange(1, 61, dtype=float) * 10.0


def default_power_grid(phy: PhyParams, delta_p_db: float = 0.5) -> np.ndarray:
    n = int(round((phy.tx_power_max_dbm - phy.tx_power_min_dbm) / delta_p_db)) + 1
    return phy.tx_power_min_dbm + np.arange(n, dtype=float) * delta_p_db


def default_cbr_levels() -> np.ndarray:
    return np.array([k / 10 for k in range(1, 9)])


def monotonicity_violations(distances, powers, cbr_levels, values) -> list:
    """Return (axis, index-tuple) pairs where the PDR grid breaks monotonicity.

    Expected shape: values[len(distances), len(powers), len(cbr_levels)],
    non-increasing in distance, non-decreasing in power, non-increasing in
    load.  The index names the cell that is too large (or too small) w.r.t.
    its predecessor along the axis.
    """
    v = np.asarray(values, dtype=float)
    out = []
    bad = np.argwhere(v[1:, :, :] > v[:-1, :, :])
    out += [("distance", (i + 1, j, k)) for i, j, k in bad]
    bad = np.argwhere(v[:, 1:, :] < v[:, :-1, :])
    out += [("power", (i, j + 1, k)) for i, j, k in bad]
    bad = np.argwhere(v[:, :, 1:] > v[:, :, :-1])
    out += [("cbr", (i, j, k + 1)) for i, j, k in bad]
    return out


@dataclass
class PdrTable:
    """Tabulated PDR on a (distance, power, load) grid.

    Immutable after construction; lookups interpolate trilinearly and are
    exact at grid nodes.  Queries outside the hull clamp to the boundary.
    """

    distances: np.ndarray
    powers: np.ndarray
    cbr_levels: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        self.distances = np.asarray(self.distances, dtype=float)
        self.powers = np.asarray(self.powers, dtype=float)
        self.cbr_levels = np.asarray(self.cbr_levels, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        expected = (self.distances.size, self.powers.size, self.cbr_levels.size)
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != grid {expected}")
        for name, axis in (("distances", self.distances),
                           ("powers", self.powers),
                           ("cbr_levels", self.cbr_levels)):
            if axis.size < 2:
                raise ValueError(f"{name} needs at least two grid points")
            if not np.all(np.diff(axis) > 0):
                raise ValueError(f"{name} must be strictly ascending")
        if np.any(self.values < 0.0) or np.any(self.values > 1.0):
            raise ValueError("PDR values must lie in [0, 1]")
        bad = monotonicity_violations(self.distances, self.powers,
                                      self.cbr_levels, self.values)
        if bad:
            axis, idx = bad[0]
            raise ValueError(
                f"PDR grid not monotone along {axis} at cell {idx} "
                f"({len(bad)} violation(s) total)")


def build_pdr_table(phy: PhyParams | None = None,
                    collision: CollisionParams | None = None,
                    distances: np.ndarray | None = None,
                    powers: np.ndarray | None = None,
                    cbr_levels: np.ndarray | None = None) -> PdrTable:
    """Tabulate the closed-form PDR model on the default or given grid."""
    phy = phy or PhyParams()
    collision = collision or CollisionParams()
    model = PdrModel(phy=phy, collision=collision)
    d = default_distance_grid() if distances is None else np.asarray(distances, dtype=float)
    p = default_power_grid(phy) if powers is None else np.asarray(powers, dtype=float)
    c = default_cbr_levels() if cbr_levels is None else np.asarray(cbr_levels, dtype=float)
    values = pdr(d[:, None, None], p[None, :, None], c[None, None, :], model)
    return PdrTable(distances=d, powers=p, cbr_levels=c, values=values)


def _axis_index(grid: np.ndarray, q: np.ndarray):
    qc = np.clip(q, grid[0], grid[-1])
    idx = np.searchsorted(grid, qc, side="right") - 1
    idx = np.clip(idx, 0, grid.size - 2)
    frac = (qc - grid[idx]) / (grid[idx + 1] - grid[idx])
    return idx, frac


def pdr_lookup(table: PdrTable, distance_m, power_dbm, cbr):
    """Trilinear interpolation of the PDR table; broadcasts its arguments."""
    d, p, c = np.broadcast_arrays(np.asarray(distance_m, dtype=float),
                                  np.asarray(power_dbm, dtype=float),
                                  np.asarray(cbr, dtype=float))
    di, df = _axis_index(table.distances, d)
    pi, pf = _axis_index(table.powers, p)
    ci, cf = _axis_index(table.cbr_levels, c)
    v = table.values
    out = np.zeros(d.shape, dtype=float)
    for dd in (0, 1):
        wd = (1.0 - df) if dd == 0 else df
        for pp in (0, 1):
            wp = (1.0 - pf) if pp == 0 else pf
            for cc in (0, 1):
                wc = (1.0 - cf) if cc == 0 else cf
                out += wd * wp * wc * v[di + dd, pi + pp, ci + cc]
    if out.ndim == 0:
        return float(out)
    return out
