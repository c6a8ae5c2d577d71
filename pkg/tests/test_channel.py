"""Propagation, delivery model and table tests."""

import dataclasses

import numpy as np
import pytest

from beaconsim.channel import (CollisionParams, PdrModel, PhyParams, PsrModel,
                               build_pdr_table, default_cbr_levels,
                               default_distance_grid, default_power_grid,
                               monotonicity_violations, pathloss_db, pdr,
                               pdr_lookup, psr, psr_spatial_integral,
                               received_power, reference_loss_db)


@pytest.fixture(scope="module")
def phy():
    return PhyParams()


def test_received_power_frozen_reference(phy):
    assert received_power(1.0, 25.0, phy) == pytest.approx(
        -32.86482345472626, rel=1e-12)


def test_pathloss_slopes(phy):
    # 22.7 dB per decade up to the breakpoint, 40 beyond it
    assert pathloss_db(100.0, phy) - pathloss_db(10.0, phy) == pytest.approx(22.7)
    assert pathloss_db(1500.0, phy) - pathloss_db(150.0, phy) == pytest.approx(40.0)


def test_pathloss_continuous_at_breakpoint(phy):
    eps = 1e-9
    below = pathloss_db(phy.breakpoint_m - eps, phy)
    above = pathloss_db(phy.breakpoint_m + eps, phy)
    assert above == pytest.approx(below, abs=1e-6)


def test_pathloss_vectorised(phy):
    d = np.array([10.0, 150.0, 400.0])
    out = pathloss_db(d, phy)
    assert out.shape == (3,)
    for i, di in enumerate(d):
        assert out[i] == pytest.approx(float(pathloss_db(float(di), phy)))


def test_reference_loss_anchors_the_curve(phy):
    assert pathloss_db(1.0, phy) == pytest.approx(reference_loss_db(phy))


def test_phy_validation():
    with pytest.raises(ValueError):
        PhyParams(shadowing_sigma_db=0.0)
    with pytest.raises(ValueError):
        PhyParams(tx_power_max_dbm=0.0, tx_power_min_dbm=0.0)
    with pytest.raises(ValueError):
        PhyParams(breakpoint_m=0.5)


def test_sensing_probability_shape(phy):
    model = PsrModel(phy=phy)
    d = np.linspace(5.0, 800.0, 200)
    vals = psr(d, 20.0, model)
    assert np.all((vals >= 0.0) & (vals <= 1.0))
    assert np.all(np.diff(vals) <= 1e-12)  # farther is never easier to sense
    # more power is never harder to sense
    lo, hi = psr(300.0, 10.0, model), psr(300.0, 20.0, model)
    assert hi > lo


def test_sensing_probability_half_at_threshold_distance(phy):
    model = PsrModel(phy=phy)
    # solve received_power(d) == carrier sense threshold on the far slope
    target = phy.carrier_sense_threshold_dbm
    power = 25.0
    pl_bp = pathloss_db(phy.breakpoint_m, phy)
    assert power - target > pl_bp  # crossover lies beyond the breakpoint
    d = phy.breakpoint_m * 10 ** (
        (power - target - pl_bp) / (10.0 * phy.pathloss_exp_far))
    assert psr(d, power, model) == pytest.approx(0.5, abs=1e-9)


def test_spatial_integral_matches_fine_quadrature(phy):
    model = PsrModel(phy=phy)
    for power in (5.0, 15.0, 25.0):
        ref = psr_spatial_integral(power, model)
        d = np.linspace(0.0, 5000.0, 400001)
        fine = 2.0 * float(np.trapezoid(psr(d, power, model), d))
        assert ref == pytest.approx(fine, rel=1e-3)


def test_spatial_integral_grows_with_power(phy):
    model = PsrModel(phy=phy)
    vals = [psr_spatial_integral(p, model) for p in (0.0, 10.0, 20.0, 25.0)]
    assert np.all(np.diff(vals) > 0)


def test_delivery_probability_parts(phy):
    collision = CollisionParams()
    model = PdrModel(phy=phy, collision=collision)
    # no load-dependent loss at zero load
    clean = pdr(120.0, 15.0, 0.0, model)
    loaded = pdr(120.0, 15.0, 0.6, model)
    assert loaded == pytest.approx(clean * (1.0 - collision.loss(0.6)), rel=1e-12)
    assert 0.0 < loaded < clean <= 1.0


def test_collision_params_validation():
    with pytest.raises(ValueError):
        CollisionParams(gamma=1.0)
    with pytest.raises(ValueError):
        CollisionParams(kappa=0.0)
    assert CollisionParams().loss(0.0) == 0.0


def test_table_axes_and_shape(models):
    table = models.table
    assert table.values.shape == (60, 51, 8)
    assert np.allclose(table.distances, np.arange(10.0, 601.0, 10.0))
    assert np.allclose(table.powers, np.arange(0.0, 25.01, 0.5))
    assert np.allclose(table.cbr_levels, np.arange(1, 9) / 10.0)
    assert np.allclose(default_distance_grid(), table.distances)
    assert np.allclose(default_power_grid(PhyParams()), table.powers)
    assert np.allclose(default_cbr_levels(), table.cbr_levels)


def test_table_nodes_match_direct_model(models, phy):
    table = models.table
    model = PdrModel(phy=phy, collision=CollisionParams())
    rng = np.random.default_rng(3)
    for _ in range(200):
        i = rng.integers(0, table.distances.size)
        j = rng.integers(0, table.powers.size)
        k = rng.integers(0, table.cbr_levels.size)
        direct = pdr(table.distances[i], table.powers[j],
                     table.cbr_levels[k], model)
        assert table.values[i, j, k] == pytest.approx(float(direct), rel=1e-12)


def test_built_table_is_monotone(models):
    table = models.table
    assert monotonicity_violations(table.distances, table.powers,
                                   table.cbr_levels, table.values) == []


def test_monotonicity_violations_locate_the_bad_cell(models):
    table = models.table
    bad = table.values.copy()
    bad[5, 10, 2] = bad[4, 10, 2] + 0.05  # closer should never be worse
    found = monotonicity_violations(table.distances, table.powers,
                                    table.cbr_levels, bad)
    assert found
    axes = {axis for axis, _ in found}
    assert "distance" in axes
    cells = [cell for axis, cell in found if axis == "distance"]
    assert (5, 10, 2) in cells


def test_lookup_exact_on_nodes(models):
    table = models.table
    rng = np.random.default_rng(11)
    i = rng.integers(0, table.distances.size, size=300)
    j = rng.integers(0, table.powers.size, size=300)
    k = rng.integers(0, table.cbr_levels.size, size=300)
    got = pdr_lookup(table, table.distances[i], table.powers[j],
                     table.cbr_levels[k])
    assert np.allclose(got, table.values[i, j, k], rtol=1e-12, atol=0.0)


def test_lookup_clamps_to_the_table_hull(models):
    table = models.table
    inside = pdr_lookup(table, 10.0, 25.0, 0.1)
    assert pdr_lookup(table, 2.0, 30.0, 0.05) == pytest.approx(inside)
    far = pdr_lookup(table, 600.0, 0.0, 0.8)
    assert pdr_lookup(table, 900.0, -5.0, 0.95) == pytest.approx(far)


def test_lookup_interpolates_between_neighbours(models):
    table = models.table
    rng = np.random.default_rng(23)
    for _ in range(100):
        d = rng.uniform(10.0, 600.0)
        p = rng.uniform(0.0, 25.0)
        c = rng.uniform(0.1, 0.8)
        val = float(pdr_lookup(table, d, p, c))
        i = np.searchsorted(table.distances, d) - 1
        j = np.searchsorted(table.powers, p) - 1
        k = np.searchsorted(table.cbr_levels, c) - 1
        i, j, k = max(i, 0), max(j, 0), max(k, 0)
        block = table.values[i:i + 2, j:j + 2, k:k + 2]
        assert block.min() - 1e-12 <= val <= block.max() + 1e-12


def test_lookup_broadcasts(models):
    table = models.table
    d = np.array([50.0, 100.0, 150.0])
    p = np.array([[5.0], [15.0]])
    out = pdr_lookup(table, d[None, :], p, 0.3)
    assert out.shape == (2, 3)


def test_table_respects_custom_phy():
    phy = PhyParams(receiver_sensitivity_dbm=-90.0)
    table = build_pdr_table(phy, CollisionParams())
    baseline = build_pdr_table(PhyParams(), CollisionParams())
    # a deafer receiver can never deliver more
    assert np.all(table.values <= baseline.values + 1e-12)
    assert table.values.sum() < baseline.values.sum()


def test_duration_excludes_propagation(phy):
    # airtime + fixed overhead only
    from beaconsim.footprint import packet_duration
    assert packet_duration(phy) == pytest.approx(0.0003733333333333333, rel=1e-12)
    bare = dataclasses.replace(phy, phy_mac_overhead_s=0.0)
    assert packet_duration(bare) == pytest.approx(0.0003333333333333333, rel=1e-12)
