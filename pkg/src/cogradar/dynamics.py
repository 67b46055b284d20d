"""Nearly-constant-velocity target motion.

State vectors are ``numpy`` arrays ordered ``[x, vx, y, vy]`` (meters and
meters/second). Position lives at indices ``POS`` and velocity at ``VEL``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContractError, cholesky4, sample_gaussian

POS = np.array([0, 2])
VEL = np.array([1, 3])


@dataclass(frozen=True)
class MotionConfig:
    """Frame interval ``dt`` (s) and white-acceleration intensity ``kappa`` (m^2/s^3)."""

    dt: float = 0.025
    kappa: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt >= 0):
            raise ContractError(f"dt must be non-negative, got {self.dt}")
        if not (np.isfinite(self.kappa) and self.kappa >= 0):
            raise ContractError(f"kappa must be non-negative, got {self.kappa}")


def target_state(x: float, vx: float, y: float, vy: float) -> np.ndarray:
    return np.array([x, vx, y, vy], dtype=float)


def position(state) -> np.ndarray:
    return np.asarray(state, dtype=float)[POS]


def _per_axis(block: np.ndarray) -> np.ndarray:
    """Place a 2x2 (position, velocity) block on both axes of the 4-state."""
    return np.kron(np.eye(2), block)


def cv_transition_matrix(cfg: MotionConfig) -> np.ndarray:
    return _per_axis(np.array([[1.0, cfg.dt], [0.0, 1.0]]))


def process_noise_cov(cfg: MotionConfig) -> np.ndarray:
    dt = cfg.dt
    block = np.array([[dt**3 / 3.0, dt**2 / 2.0], [dt**2 / 2.0, dt]])
    return cfg.kappa * _per_axis(block)


def cv_transition(state, cfg: MotionConfig) -> np.ndarray:
    return cv_transition_matrix(cfg) @ np.asarray(state, dtype=float)


def cv_jacobian(state, cfg: MotionConfig) -> np.ndarray:
    return cv_transition_matrix(cfg)


def propagate_truth(state, cfg: MotionConfig, rng: np.random.Generator) -> np.ndarray:
    """Advance the true state one frame with process noise drawn from N(0, Q)."""
    noise_factor = cholesky4(process_noise_cov(cfg))
    return sample_gaussian(cv_transition(state, cfg), noise_factor, rng)
