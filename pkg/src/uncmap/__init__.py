"""Uncertainty-aware occupancy mapping from learned obstacle-distance estimates."""

from .errors import ConfigError, DataError, NumericError, UncmapError
from .grid import GridGeometry, first_hit_distance, raycast_cells
from .world import (GridWorld, Obstacle, Pose2D, ScanPair, WorldConfig, build_world,
                    load_scenario, save_scenario, simulate_scan, true_distance_profile)
from .sensor_models import (SplineModel, U_MIN, UncertaintyVector, derive_spline,
                            fit_constant_scale, gaussian_loglik, laplace_loglik,
                            occupancy_h, spline_cdf, spline_pdf)
from .estimators import (DropoutNet, ErrorModel, EstimatorOutput, HeadEstimator,
                         MCDropoutEstimator, OracleEstimator, RawScanEstimator,
                         UncertaintyHead, mc_dropout_estimate, oracle_estimate,
                         predict_uncertainty, train_dropout_net, train_uncertainty_head)
from .mapper import (LogOddsMap, build_uncertainty_map, cell_occupancy, integrate_scan,
                     to_probability, write_pgm, write_probability_csv)
from .planner import (Costmap, PathResult, evaluate_collisions, make_costmap,
                      nav_experiment, plan, sample_goals)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DataError", "NumericError", "UncmapError",
    "GridGeometry", "first_hit_distance", "raycast_cells",
    "GridWorld", "Obstacle", "Pose2D", "ScanPair", "WorldConfig", "build_world",
    "load_scenario", "save_scenario", "simulate_scan", "true_distance_profile",
    "SplineModel", "U_MIN", "UncertaintyVector", "derive_spline", "fit_constant_scale",
    "gaussian_loglik", "laplace_loglik", "occupancy_h", "spline_cdf", "spline_pdf",
    "DropoutNet", "ErrorModel", "EstimatorOutput", "HeadEstimator", "MCDropoutEstimator",
    "OracleEstimator", "RawScanEstimator", "UncertaintyHead", "mc_dropout_estimate",
    "oracle_estimate", "predict_uncertainty", "train_dropout_net",
    "train_uncertainty_head",
    "LogOddsMap", "build_uncertainty_map", "cell_occupancy", "integrate_scan",
    "to_probability", "write_pgm", "write_probability_csv",
    "Costmap", "PathResult", "evaluate_collisions", "make_costmap", "nav_experiment",
    "plan", "sample_goals",
]
