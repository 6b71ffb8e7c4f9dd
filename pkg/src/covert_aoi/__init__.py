"""Covert communication under an average age-of-information constraint."""

from .analysis import (
    DetectionReport,
    average_aoi,
    decode_success_prob,
    det_error_given_threshold,
    detection_report,
    expected_det_error,
    expected_det_error_slope,
    interval_moments,
    min_det_error,
    optimal_threshold,
    rho0,
    theta1,
    varphi,
)
from .model import ChannelDraw, ParameterError, SystemParams, TransmitPolicy, params_from_db, validate
from .optimizer import NoRootError, OptimizationResult, find_rho, solve_p_star, sweep
from .simulator import (
    AoiStats,
    DetectionStats,
    sample_gain,
    simulate_aoi,
    simulate_detection,
    threshold_sweep_oracle,
)

__version__ = "0.1.0"
