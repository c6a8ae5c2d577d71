"""Controller behaviour: fixed baseline, grid scan, continuous solver."""

import numpy as np
import pytest

from beaconsim.bounds import AppRequirement, requirements_satisfied, wilson_lower_count
from beaconsim.channel import pdr_lookup
from beaconsim.controllers import (ControllerGrid, InfeasibleError,
                                   brute_force_oracle, merlin, mh, presto,
                                   presto_combine, presto_per_app)
from beaconsim.footprint import footprint


def _random_app(rng):
    return AppRequirement(cr_m=float(rng.uniform(20.0, 240.0)),
                          rate_hz=float(rng.uniform(1.0, 10.0)))


def test_fixed_baseline_uses_most_demanding_rate():
    apps = [AppRequirement(cr_m=80.0, rate_hz=7.0),
            AppRequirement(cr_m=160.0, rate_hz=4.0),
            AppRequirement(cr_m=240.0, rate_hz=2.0)]
    cfg = mh(apps)
    assert cfg.entries == ((25.0, 7.0),)
    with pytest.raises(ValueError):
        mh([])


def test_grid_scan_matches_local_exhaustive_reference(models, grid):
    rng = np.random.default_rng(42)
    w = models.wilson
    checked = 0
    while checked < 10:
        app = _random_app(rng)
        cbr = float(rng.choice(np.arange(1, 9) / 10.0))
        try:
            p_hat, t_hat = presto_per_app(app, cbr, models, grid)
        except InfeasibleError:
            continue
        checked += 1
        powers = grid.power_value(np.arange(1, grid.n_p))
        rates = grid.rate_value(np.arange(1, grid.n_t))
        rho = pdr_lookup(models.table, app.cr_m, powers, cbr)
        counts = wilson_lower_count(rates[None, :], np.asarray(rho)[:, None], w)
        fps = np.array([models.t_pkt * models.spatial_integral(p)
                        for p in powers])[:, None] * rates[None, :]
        masked = np.where(counts >= app.rate_hz, fps, np.inf)
        k = int(np.argmin(masked))
        i, j = divmod(k, masked.shape[1])
        assert (p_hat, t_hat) == (float(powers[i]), float(rates[j]))


def test_grid_scan_output_lies_on_the_grid(models, grid):
    app = AppRequirement(cr_m=150.0, rate_hz=6.0)
    p_hat, t_hat = presto_per_app(app, 0.4, models, grid)
    assert p_hat in grid.power_value(np.arange(1, grid.n_p))
    assert t_hat in grid.rate_value(np.arange(1, grid.n_t))
    rho = pdr_lookup(models.table, app.cr_m, p_hat, 0.4)
    assert wilson_lower_count(t_hat, rho, models.wilson) >= app.rate_hz


def test_grid_scan_unreachable_app_errors(models, grid):
    app = AppRequirement(cr_m=600.0, rate_hz=10.0)
    with pytest.raises(InfeasibleError):
        presto_per_app(app, 0.8, models, grid)


def test_combine_subtracts_higher_power_traffic():
    cfg = presto_combine([(15.0, 3.0), (10.0, 5.0)])
    assert cfg.entries == ((15.0, 3.0), (10.0, 2.0))
    cfg = presto_combine([(20.0, 6.0), (15.0, 4.0), (10.0, 9.0)])
    assert cfg.entries == ((20.0, 6.0), (15.0, 0.0), (10.0, 3.0))


def test_combine_total_equals_largest_request():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(1, 6))
        pairs = [(float(rng.uniform(0.0, 25.0)), float(rng.uniform(0.5, 20.0)))
                 for _ in range(n)]
        cfg = presto_combine(pairs)
        assert cfg.total_rate == pytest.approx(max(t for _, t in pairs), rel=1e-12)
        # order: strictly non-increasing power
        powers = [p for p, _ in cfg.entries]
        assert powers == sorted(powers, reverse=True)


def test_combine_keeps_equal_powers_stable():
    cfg = presto_combine([(10.0, 2.0), (10.0, 5.0)])
    assert cfg.entries == ((10.0, 2.0), (10.0, 3.0))


def test_combined_config_can_fall_short_of_a_member_requirement(models, grid):
    # splitting one application's packets across power levels weakens its
    # certified count: the summed per-entry bounds of the combined config
    # can land below a requirement every per-app pair met on its own
    rng = np.random.default_rng(9)
    found = None
    for _ in range(40):
        apps = [_random_app(rng) for _ in range(3)]
        cbr = float(rng.choice(np.arange(1, 9) / 10.0))
        try:
            cfg = presto(apps, cbr, models, grid)
        except InfeasibleError:
            continue
        if not all(requirements_satisfied(cfg, apps, cbr, models.table,
                                          models.wilson)):
            found = (apps, cbr, cfg)
            break
    assert found is not None


def test_continuous_solver_beats_coarse_exhaustive_reference(models, coarse_grid, grid):
    rng = np.random.default_rng(17)
    checked = 0
    while checked < 5:
        app = _random_app(rng)
        cbr = float(rng.choice(np.arange(1, 9) / 10.0))
        try:
            _, ref_fp = brute_force_oracle([app], cbr, models, coarse_grid, n_v=1)
        except InfeasibleError:
            with pytest.raises(InfeasibleError):
                merlin([app], cbr, models, grid)
            continue
        cfg = merlin([app], cbr, models, grid)
        fp = footprint(cfg, models.psr_model, models.t_pkt)
        assert fp <= ref_fp * 1.01 + 1e-12
        checked += 1


def test_continuous_solver_output_is_exactly_feasible(models, grid):
    rng = np.random.default_rng(29)
    for n_a in (1, 3):
        checked = 0
        while checked < 3:
            apps = [_random_app(rng) for _ in range(n_a)]
            cbr = float(rng.choice(np.arange(1, 9) / 10.0))
            try:
                cfg = merlin(apps, cbr, models, grid)
            except InfeasibleError:
                continue
            assert all(requirements_satisfied(cfg, apps, cbr, models.table,
                                              models.wilson))
            assert cfg.total_rate <= grid.t_max_hz + 1e-9
            for p, t in cfg.entries:
                assert grid.p_min_dbm <= p <= grid.p_max_dbm
                assert 0.0 <= t <= grid.t_max_hz
            checked += 1


def test_continuous_solver_never_loses_to_single_app_scan(models, grid):
    # with one application the scan result is itself a feasible candidate,
    # so the solver can only improve on it
    rng = np.random.default_rng(31)
    checked = 0
    while checked < 5:
        app = _random_app(rng)
        cbr = float(rng.choice(np.arange(1, 9) / 10.0))
        try:
            scan_fp = footprint(presto([app], cbr, models, grid),
                                models.psr_model, models.t_pkt)
        except InfeasibleError:
            continue
        fp = footprint(merlin([app], cbr, models, grid),
                       models.psr_model, models.t_pkt)
        assert fp <= scan_fp + 1e-12
        checked += 1


def test_continuous_solver_entry_count_override(models, grid):
    app = AppRequirement(cr_m=100.0, rate_hz=5.0)
    cfg = merlin([app], 0.3, models, grid, solver_opts={"n_entries": 3})
    assert len(cfg.entries) == 3


def test_continuous_solver_start_hint(models, grid):
    app = AppRequirement(cr_m=120.0, rate_hz=6.0)
    first = merlin([app], 0.3, models, grid)
    hint = np.array([p for p, _ in first.entries] + [t for _, t in first.entries])
    again = merlin([app], 0.35, models, grid,
                   solver_opts={"starts": 1, "x0": hint, "warm_start": False})
    assert all(requirements_satisfied(again, [app], 0.35, models.table,
                                      models.wilson))
    with pytest.raises(ValueError):
        merlin([app], 0.3, models, grid, solver_opts={"x0": np.zeros(3)})


def test_continuous_solver_unreachable_app_errors(models, grid):
    app = AppRequirement(cr_m=600.0, rate_hz=10.0)
    with pytest.raises(InfeasibleError):
        merlin([app], 0.8, models, grid)
    with pytest.raises(ValueError):
        merlin([], 0.3, models, grid)
    with pytest.raises(ValueError):
        merlin([app], 0.3, models, grid, solver_opts={"bogus": 1})


def test_grid_parameters():
    g = ControllerGrid()
    assert (g.n_p, g.n_t) == (51, 201)
    assert g.rate_value(1) == pytest.approx(0.1)
    assert g.power_value(1) == pytest.approx(0.5)
    assert g.power_value(50) == pytest.approx(25.0)
    with pytest.raises(ValueError):
        ControllerGrid(delta_t_hz=0.3)
    with pytest.raises(ValueError):
        ControllerGrid(delta_p_db=-0.5)


def test_exhaustive_reference_guard(models):
    wide = ControllerGrid()
    app = AppRequirement(cr_m=100.0, rate_hz=5.0)
    with pytest.raises(ValueError):
        brute_force_oracle([app], 0.3, models, wide, n_v=3)
