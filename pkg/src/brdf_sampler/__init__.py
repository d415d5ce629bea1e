"""Simulated BRDF measurement experiments: models, sampling strategies,
estimators and empirical efficiency comparisons."""

__version__ = "0.1.0"

from .brdf import Brdf, BrdfClass, CookTorrance, Lambertian, Phong, directional_hemispherical_reflectance, make_brdf
from .efficiency import (
    ExperimentPlan,
    InadmissibleError,
    StrategyComparisonReport,
    compare_strategies,
    error_curve,
    expected_error_curve,
    select_best_strategy,
)
from .estimation import Estimator, fit
from .geometry import NORMAL, Direction, angular_distance, mirror_reflect
from .measurement import MeasurementSet, Measurer, NoiseModel, simulate_measurements
from .objectives import CostSpec, DistSpec, Majorant, QuadratureSpec, check_admissible, cost, dist
from .sampling import MeasurementConfiguration, SamplingStrategy, list_strategies, strategy_sequence

__all__ = [
    "Brdf", "BrdfClass", "CookTorrance", "Lambertian", "Phong", "directional_hemispherical_reflectance", "make_brdf",
    "ExperimentPlan", "InadmissibleError", "StrategyComparisonReport", "compare_strategies", "error_curve",
    "expected_error_curve", "select_best_strategy", "Estimator", "fit", "NORMAL", "Direction", "angular_distance",
    "mirror_reflect", "MeasurementSet", "Measurer", "NoiseModel", "simulate_measurements", "CostSpec", "DistSpec", "Majorant",
    "QuadratureSpec", "check_admissible", "cost", "dist", "MeasurementConfiguration", "SamplingStrategy",
    "list_strategies", "strategy_sequence",
]
