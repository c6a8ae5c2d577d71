"""Transmit power and rate control for periodic vehicular broadcasts.

Per-vehicle controllers pick beacon transmit parameters so every
on-board application's packet requirement is met with statistical
confidence while the channel occupancy footprint stays minimal, plus a
snapshot highway simulator and metrics to compare them.
"""

from .bounds import (CLASS_BOXES, AppRequirement, WilsonParams,
                     aggregate_lower_count, mean_received,
                     requirements_satisfied, wilson_lower_count)
from .channel import (CollisionParams, PdrModel, PdrTable, PhyParams,
                      PsrModel, build_pdr_table, default_cbr_levels,
                      default_distance_grid, default_power_grid, pathloss_db,
                      pdr, pdr_lookup, psr, psr_spatial_integral,
                      received_power)
from .controllers import (ControllerGrid, InfeasibleError, Models,
                          SolverError, brute_force_oracle, default_models,
                          merlin, mh, presto, presto_combine, presto_per_app)
from .footprint import TxConfig, footprint, load_at, packet_duration
from .sim import (MetricsReport, Scenario, Vehicle, assign_applications,
                  compute_cbr, compute_metrics, dp_profile, draw_apps,
                  fixed_point_run, generate_scenario, sample_receptions, sar,
                  scenario_from_csv, scenario_to_csv)
from .table_io import export_pdr_table, import_pdr_table

__version__ = "0.1.0"

__all__ = [
    "AppRequirement", "CLASS_BOXES", "CollisionParams", "ControllerGrid",
    "InfeasibleError", "MetricsReport", "Models", "PdrModel", "PdrTable",
    "PhyParams", "PsrModel", "Scenario", "SolverError", "TxConfig", "Vehicle",
    "aggregate_lower_count", "assign_applications", "brute_force_oracle",
    "build_pdr_table", "compute_cbr", "compute_metrics", "default_cbr_levels",
    "default_distance_grid", "default_models", "default_power_grid",
    "dp_profile", "draw_apps", "export_pdr_table", "fixed_point_run",
    "footprint", "generate_scenario", "import_pdr_table", "load_at",
    "mean_received", "merlin", "mh", "packet_duration", "pathloss_db", "pdr",
    "pdr_lookup", "presto", "presto_combine", "presto_per_app", "psr",
    "psr_spatial_integral", "received_power", "requirements_satisfied",
    "sample_receptions", "sar", "scenario_from_csv", "scenario_to_csv",
    "wilson_lower_count", "__version__",
]
