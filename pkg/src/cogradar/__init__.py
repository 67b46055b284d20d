"""Threat-aware dwell-time allocation for a network of monostatic radars.

The package tracks one target with an extended Kalman filter and, each frame,
chooses how long every radar should dwell so that the predicted position
bound meets an accuracy threshold at minimum total dwell time.
"""

from .allocation import Allocation, AllocationProblem, knn_allocate, solve, verify
from .core import ContractError, DecompositionError, make_rng
from .dynamics import MotionConfig, target_state
from .fim import InfoMode, PriorInfo, crlb_extremes, expected_info, per_unit_info
from .harness import Report, compare, monte_carlo, run_episode
from .scenario import Scenario, ScenarioError, load_scenario, shipped_scenario
from .sensing import Measurement, RadarNode
from .threat import Asset, LinearThreat, threat, threat_mse_bound
from .tracking import FilterDivergence, GaussianBelief

__version__ = "0.1.0"

__all__ = [
    "Allocation", "AllocationProblem", "Asset", "ContractError", "DecompositionError",
    "FilterDivergence", "GaussianBelief", "InfoMode", "LinearThreat", "Measurement",
    "MotionConfig", "PriorInfo", "RadarNode", "Report", "Scenario", "ScenarioError",
    "compare", "crlb_extremes", "expected_info", "knn_allocate", "load_scenario", "make_rng",
    "monte_carlo", "per_unit_info", "run_episode", "shipped_scenario", "solve", "target_state",
    "threat", "threat_mse_bound", "verify",
]
