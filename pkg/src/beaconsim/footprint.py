"""Transmit configurations and their channel occupancy footprint.

A vehicle's transmit configuration is a list of (power, rate) entries.
Its footprint is the channel time it claims per metre of road, integrated
over distance: t_pkt * sum_i T_i * integral PSR(d, P_i) dd.  The footprint
is what the controllers minimise; the per-location load (clamped at 1) is
what the channel-busy metric sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import PhyParams, PsrModel, psr, psr_spatial_integral


@dataclass(frozen=True)
class TxConfig:
    """Immutable transmit configuration: ((power_dbm, rate_hz), ...)."""

    entries: tuple[tuple[float, float], ...]

    def __init__(self, entries) -> None:
        object.__setattr__(
            self, "entries",
            tuple((float(p), float(t)) for p, t in entries))

    @property
    def total_rate(self) -> float:
        return float(sum(t for _, t in self.entries))

    def validate(self, phy: PhyParams, t_max_hz: float,
                 cap_total_rate: bool = True) -> None:
        """Raise if any entry leaves the allowed power/rate box.

        The cap on the summed rate can be switched off to allow configs
        where only each entry individually respects t_max.
        """
        for p, t in self.entries:
            if not phy.tx_power_min_dbm <= p <= phy.tx_power_max_dbm:
                raise ValueError(
                    f"power {p} dBm outside "
                    f"[{phy.tx_power_min_dbm}, {phy.tx_power_max_dbm}]")
            if not 0.0 <= t <= t_max_hz:
                raise ValueError(f"rate {t} Hz outside [0, {t_max_hz}]")
        if cap_total_rate and self.total_rate > t_max_hz + 1e-9:
            raise ValueError(
                f"total rate {self.total_rate} Hz exceeds cap {t_max_hz}")


def packet_duration(phy: PhyParams) -> float:
    """Air time of one beacon in seconds, payload plus fixed overhead."""
    return phy.message_size_bytes * 8.0 / phy.data_rate_bps + phy.phy_mac_overhead_s


def load_at(distance_m, cfg: TxConfig, model: PsrModel, t_pkt: float):
    """Channel busy fraction this transmitter induces at a road position.

    Sum over entries of rate * PSR at that distance, times the packet
    duration, clamped to 1.
    """
    d = np.asarray(distance_m, dtype=float)
    total = np.zeros(d.shape, dtype=float)
    for p, t in cfg.entries:
        if t > 0.0:
            total = total + t * psr(d, p, model)
    out = np.minimum(1.0, t_pkt * total)
    if out.ndim == 0:
        return float(out)
    return out


def footprint(cfg: TxConfig, model: PsrModel, t_pkt: float) -> float:
    """Unclamped occupancy integral of a config over the whole road.

    This is the controllers' objective.  It equals the integral of the
    per-location load only while no location saturates; the optimisers
    work in that regime.
    """
    total = 0.0
    for p, t in cfg.entries:
        total += (t_pkt * t) * psr_spatial_integral(p, model)
    return total
