"""Occupancy footprint and config arithmetic."""

import numpy as np
import pytest

from beaconsim.channel import PhyParams, PsrModel, psr, psr_spatial_integral
from beaconsim.footprint import TxConfig, footprint, load_at, packet_duration


@pytest.fixture(scope="module")
def psr_model():
    return PsrModel(phy=PhyParams())


def test_config_normalises_entries():
    cfg = TxConfig([(15, 3), (10.0, 5)])
    assert cfg.entries == ((15.0, 3.0), (10.0, 5.0))
    assert cfg.total_rate == 8.0


def test_config_validation():
    phy = PhyParams()
    TxConfig(((25.0, 10.0),)).validate(phy, 20.0)
    with pytest.raises(ValueError):
        TxConfig(((25.0, -1.0),)).validate(phy, 20.0)
    with pytest.raises(ValueError):
        TxConfig(((30.0, 1.0),)).validate(phy, 20.0)
    with pytest.raises(ValueError):
        TxConfig(((25.0, 12.0), (20.0, 9.0))).validate(phy, 20.0)


def test_footprint_is_rate_weighted_area(psr_model):
    t_pkt = packet_duration(psr_model.phy)
    cfg = TxConfig(((18.0, 4.0), (7.5, 6.0)))
    expected = sum(t_pkt * t * psr_spatial_integral(p, psr_model)
                   for p, t in cfg.entries)
    assert footprint(cfg, psr_model, t_pkt) == pytest.approx(expected, rel=1e-12)


def test_footprint_integrates_the_load_field(psr_model):
    # the closed form and the spatial integral of per-distance load agree
    t_pkt = packet_duration(psr_model.phy)
    cfg = TxConfig(((20.0, 5.0), (12.0, 3.0)))
    d = np.linspace(-4000.0, 4000.0, 160001)
    numeric = float(np.trapezoid(load_at(np.abs(d), cfg, psr_model, t_pkt), d))
    assert numeric == pytest.approx(footprint(cfg, psr_model, t_pkt), rel=5e-3)


def test_equal_footprint_rate_rescaling(psr_model):
    # moving an entry to another power keeps the footprint if the rate is
    # scaled by the ratio of sensed areas
    t_pkt = packet_duration(psr_model.phy)
    p1, t1, p2 = 22.0, 6.0, 13.0
    t2 = t1 * (psr_spatial_integral(p1, psr_model)
               / psr_spatial_integral(p2, psr_model))
    f1 = footprint(TxConfig(((p1, t1),)), psr_model, t_pkt)
    f2 = footprint(TxConfig(((p2, t2),)), psr_model, t_pkt)
    assert f2 == pytest.approx(f1, rel=1e-9)


def test_load_zero_when_silent(psr_model):
    t_pkt = packet_duration(psr_model.phy)
    cfg = TxConfig(((20.0, 0.0),))
    assert footprint(cfg, psr_model, t_pkt) == 0.0
    assert float(load_at(50.0, cfg, psr_model, t_pkt)) == 0.0


def test_load_decreases_with_distance(psr_model):
    t_pkt = packet_duration(psr_model.phy)
    cfg = TxConfig(((20.0, 10.0),))
    d = np.array([10.0, 100.0, 300.0, 600.0])
    vals = load_at(d, cfg, psr_model, t_pkt)
    assert np.all(np.diff(vals) < 0)
    assert float(vals[0]) == pytest.approx(10.0 * t_pkt * psr(10.0, 20.0, psr_model),
                                           rel=1e-12)
