"""Reliability bounds and application requirement checks.

An application asks for at least R packets per second inside its
communication range.  Deliveries are Bernoulli per packet, so with T
packets sent and delivery probability rho the received count is
Binomial(T, rho).  Controllers size T against a Wilson score lower
bound on that count rather than its mean, which buys a reliability
margin at the cost of extra packets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .channel import PdrTable, pdr_lookup
from .footprint import TxConfig

# Requirement boxes per application class: communication range (m) and
# packet rate (Hz).  Class A is short range / high rate, C the opposite.
CLASS_BOXES = {
    "A": ((0.0, 80.0), (7.0, 10.0)),
    "B": ((80.0, 160.0), (4.0, 7.0)),
    "C": ((160.0, 240.0), (1.0, 4.0)),
}


@dataclass(frozen=True)
class WilsonParams:
    """Confidence setting for the lower count bound; z is derived."""

    alpha: float = 0.05
    z: float = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        object.__setattr__(self, "z", float(norm.ppf(1.0 - self.alpha / 2.0)))


@dataclass(frozen=True)
class AppRequirement:
    """One application: reach cr_m metres with rate_hz packets per second."""

    cr_m: float
    rate_hz: float
    app_class: str | None = None

    def __post_init__(self) -> None:
        if self.cr_m <= 0:
            raise ValueError("communication range must be positive")
        if self.rate_hz <= 0:
            raise ValueError("required rate must be positive")
        if self.app_class is not None:
            if self.app_class not in CLASS_BOXES:
                raise ValueError(f"unknown application class {self.app_class!r}")
            (cr_lo, cr_hi), (r_lo, r_hi) = CLASS_BOXES[self.app_class]
            if not (cr_lo < self.cr_m <= cr_hi):
                raise ValueError(
                    f"class {self.app_class} range box is ({cr_lo}, {cr_hi}] m, "
                    f"got {self.cr_m}")
            if not (r_lo <= self.rate_hz <= r_hi):
                raise ValueError(
                    f"class {self.app_class} rate box is [{r_lo}, {r_hi}] Hz, "
                    f"got {self.rate_hz}")


def mean_received(rate_hz, rho):
    """Expected packets received per second: T * rho."""
    return np.asarray(rate_hz, dtype=float) * np.asarray(rho, dtype=float)


def wilson_lower_count(rate_hz, rho, w: WilsonParams | None = None):
    """Wilson score lower bound on packets received per second.

    T * L, with L the Wilson lower confidence bound for a proportion
    evaluated at the model delivery probability.  Vectorised; clamped to
    [0, T * rho]; 0 whenever T = 0.  Note the advertised alpha/2 lower
    tail is only approximate: it is conservative for high rho and can be
    optimistic when T * rho is small.
    """
    w = w or WilsonParams()
    t = np.asarray(rate_hz, dtype=float)
    r = np.asarray(rho, dtype=float)
    z = w.z
    with np.errstate(divide="ignore", invalid="ignore"):
        bracket = r + z * z / (2.0 * t) - z * np.sqrt(
            r * (1.0 - r) / t + z * z / (4.0 * t * t))
        count = t * (bracket * t / (t + z * z))
        count = np.clip(count, 0.0, t * r)
    count = np.where(t > 0.0, count, 0.0)
    if count.ndim == 0:
        return float(count)
    return count


def aggregate_lower_count(cfg: TxConfig, distance_m: float, cbr: float,
                          table: PdrTable, w: WilsonParams | None = None) -> float:
    """Summed lower count bound over all entries of a transmit config.

    Each (power, rate) entry contributes its own Wilson bound at the
    delivery probability for its power; summing per-entry lower bounds is
    conservative relative to bounding the pooled count directly.
    """
    w = w or WilsonParams()
    if not cfg.entries:
        return 0.0
    powers = np.array([p for p, _ in cfg.entries], dtype=float)
    rates = np.array([t for _, t in cfg.entries], dtype=float)
    rho = pdr_lookup(table, distance_m, powers, cbr)
    return float(np.sum(wilson_lower_count(rates, rho, w)))


def requirements_satisfied(cfg: TxConfig, apps, cbr: float, table: PdrTable,
                           w: WilsonParams | None = None) -> list[bool]:
    """Whether the config's guaranteed count meets each app's rate (>=)."""
    w = w or WilsonParams()
    return [aggregate_lower_count(cfg, app.cr_m, cbr, table, w) >= app.rate_hz
            for app in apps]
