"""Monostatic range/bearing measurements with dwell-dependent accuracy."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ContractError, wrap_angle
from .dynamics import POS

SPEED_OF_LIGHT = 299_792_458.0
BEARING_FACTOR = 0.628

# SNR of 20 dB at 1 ms dwell, 10 km range and 1 m^2 RCS.
DEFAULT_SNR_CAL = 100.0 * 1e4**4 / 1e-3


class DegenerateGeometry(ValueError):
    """Target and radar positions coincide."""


@dataclass(frozen=True)
class RadarNode:
    id: int
    position: tuple[float, float]
    beta: float = 1e6 / 3.0
    theta3db: float = 0.01
    rcs_avg: float = 1.0
    snr_cal: float = DEFAULT_SNR_CAL
    t_dwell_max: float = 0.025

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(p) for p in self.position))
        if len(self.position) != 2 or not all(map(math.isfinite, self.position)):
            raise ContractError(f"radar {self.id}: position must be two finite numbers")
        for name in ("beta", "theta3db", "rcs_avg", "snr_cal", "t_dwell_max"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ContractError(f"radar {self.id}: {name} must be positive, got {value}")

    @property
    def pos(self) -> np.ndarray:
        return np.array(self.position)


@dataclass(frozen=True)
class Measurement:
    range: float
    bearing: float
    radar_id: int
    dwell: float

    @property
    def z(self) -> np.ndarray:
        return np.array([self.range, self.bearing])


@dataclass(frozen=True)
class NoisePair:
    sigma_r: float
    sigma_phi: float

    @property
    def cov(self) -> np.ndarray:
        """Per-radar measurement covariance diag(sigma_r^2, sigma_phi^2)."""
        return np.diag([self.sigma_r**2, self.sigma_phi**2])


def _offset(state, radar: RadarNode) -> tuple[float, float, float]:
    dx, dy = np.asarray(state, dtype=float)[POS] - radar.pos
    r = math.hypot(dx, dy)
    if r == 0.0:
        raise DegenerateGeometry(f"target coincides with radar {radar.id}")
    return dx, dy, r


def h_true(state, radar: RadarNode) -> tuple[float, float]:
    dx, dy, r = _offset(state, radar)
    return r, wrap_angle(math.atan2(dy, dx))


def snr(radar: RadarNode, dwell: float, range_: float) -> float:
    if not dwell > 0:
        raise ContractError(f"dwell must be positive, got {dwell}")
    if not range_ > 0:
        raise ContractError(f"range must be positive, got {range_}")
    return radar.snr_cal * dwell * radar.rcs_avg / range_**4


def noise_sigmas(radar: RadarNode, dwell: float, range_: float) -> NoisePair:
    root_snr = math.sqrt(snr(radar, dwell, range_))
    return NoisePair(
        sigma_r=SPEED_OF_LIGHT / (2.0 * radar.beta * root_snr),
        sigma_phi=BEARING_FACTOR * radar.theta3db / root_snr,
    )


def measurement_from_noise(state, radar: RadarNode, dwell: float, unit_noise) -> Measurement:
    """Build a measurement from a pre-drawn standard-normal pair.

    Lets a caller draw noise for every radar each frame (common random
    numbers) and consume it only for radars that actually dwell.
    """
    r, phi = h_true(state, radar)
    sig = noise_sigmas(radar, dwell, r)
    e_r, e_phi = unit_noise
    return Measurement(
        range=r + sig.sigma_r * e_r,
        bearing=wrap_angle(phi + sig.sigma_phi * e_phi),
        radar_id=radar.id,
        dwell=dwell,
    )


def sample_measurement(state, radar: RadarNode, dwell: float, rng: np.random.Generator) -> Measurement:
    return measurement_from_noise(state, radar, dwell, rng.standard_normal(2))


def measurement_jacobian(state, radar: RadarNode) -> np.ndarray:
    """2x4 Jacobian of (range, bearing) with respect to [x, vx, y, vy]."""
    dx, dy, r = _offset(state, radar)
    r2 = r * r
    return np.array([
        [dx / r, 0.0, dy / r, 0.0],
        [-dy / r2, 0.0, dx / r2, 0.0],
    ])


def network_noise_cov(pairs: list[NoisePair]) -> np.ndarray:
    """Block-diagonal covariance of the stacked network measurement."""
    n = len(pairs)
    out = np.zeros((2 * n, 2 * n))
    for i, p in enumerate(pairs):
        out[2 * i:2 * i + 2, 2 * i:2 * i + 2] = p.cov
    return out
