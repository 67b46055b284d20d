"""Extended Kalman filter with sequential per-radar updates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import wrap_angle
from .dynamics import MotionConfig, cv_jacobian, cv_transition, process_noise_cov
from .sensing import Measurement, RadarNode, h_true, measurement_jacobian, noise_sigmas


class FilterDivergence(ArithmeticError):
    """Posterior covariance lost positive semi-definiteness."""

    def __init__(self, message: str, frame: Optional[int] = None):
        where = f" (frame {frame})" if frame is not None else ""
        super().__init__(message + where)
        self.frame = frame


@dataclass(frozen=True)
class GaussianBelief:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "cov", np.asarray(self.cov, dtype=float))


def initial_cov(dt: float, pos_sigma: float = 250.0) -> np.ndarray:
    """Two-point-differencing style initial covariance in [x, vx, y, vy] order."""
    return pos_sigma**2 * np.diag([1.0, 2.0 / dt**2, 1.0, 2.0 / dt**2])


def predict(
    belief: GaussianBelief,
    motion: MotionConfig,
    transition: Callable = cv_transition,
    jacobian: Callable = cv_jacobian,
) -> GaussianBelief:
    A = jacobian(belief.mean, motion)
    cov = A @ belief.cov @ A.T + process_noise_cov(motion)
    return GaussianBelief(transition(belief.mean, motion), 0.5 * (cov + cov.T))


def _check_psd(cov: np.ndarray, frame: Optional[int]):
    scale = max(float(np.max(np.abs(np.diag(cov)))), 1e-300)
    lam_min = float(np.linalg.eigvalsh(cov)[0])
    if not np.all(np.isfinite(cov)) or lam_min < -1e-9 * scale:
        raise FilterDivergence(f"covariance not PSD, min eigenvalue {lam_min:.3g}", frame)


def update_one(belief: GaussianBelief, meas: Measurement, radar: RadarNode,
               frame: Optional[int] = None) -> GaussianBelief:
    """Single EKF update, linearized at the current mean."""
    x, P = belief.mean, belief.cov
    r_pred, phi_pred = h_true(x, radar)
    H = measurement_jacobian(x, radar)
    R = noise_sigmas(radar, meas.dwell, r_pred).cov
    innovation = np.array([meas.range - r_pred, wrap_angle(meas.bearing - phi_pred)])
    S = H @ P @ H.T + R
    K = np.linalg.solve(S, H @ P).T
    mean = x + K @ innovation
    cov = P - K @ H @ P
    cov = 0.5 * (cov + cov.T)
    _check_psd(cov, frame)
    return GaussianBelief(mean, cov)


def sequential_update(belief: GaussianBelief, measurements: Sequence[Measurement],
                      radars: Sequence[RadarNode], frame: Optional[int] = None) -> GaussianBelief:
    """Apply one EKF update per measurement in ascending radar-id order.

    The measurement noise is evaluated at the predicted range, so the filter
    never uses the true target position.
    """
    by_id = {r.id: r for r in radars}
    for meas in sorted(measurements, key=lambda m: m.radar_id):
        if meas.radar_id not in by_id:
            raise KeyError(f"unknown radar id {meas.radar_id}")
        belief = update_one(belief, meas, by_id[meas.radar_id], frame)
    return belief


def nees(belief: GaussianBelief, truth) -> float:
    err = np.asarray(truth, dtype=float) - belief.mean
    return float(err @ np.linalg.solve(belief.cov, err))
