"""Position information for a candidate dwell allocation and its bound.

Every 2x2 symmetric information matrix ``J = U(theta) diag(mu1, mu2) U(theta)^T``
is summarized by its trace ``mu1 + mu2`` and the anisotropy vector
``(mu1 - mu2) * [cos 2theta, sin 2theta]``. Both are linear in ``J``, so the
information of a weighted sum of radars is a weighted sum of these summaries
and its eigenvalues are ``(s +/- |v|) / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ContractError, eig2x2_sym, rotation, sample_gaussian, cholesky4
from .dynamics import POS, VEL
from .sensing import RadarNode, measurement_jacobian, noise_sigmas, h_true
from .tracking import GaussianBelief


class InformationSingular(ArithmeticError):
    """The assembled position information has a zero eigenvalue."""


@dataclass(frozen=True)
class InfoMode:
    """Per-unit-dwell position information in eigen form (mu1 >= mu2)."""

    mu1: float
    mu2: float
    theta: float

    @classmethod
    def from_matrix(cls, m) -> "InfoMode":
        lam_max, lam_min, angle = eig2x2_sym(m)
        return cls(lam_max, max(lam_min, 0.0), angle)

    @property
    def trace(self) -> float:
        return self.mu1 + self.mu2

    @property
    def anisotropy(self) -> np.ndarray:
        d = self.mu1 - self.mu2
        return d * np.array([math.cos(2 * self.theta), math.sin(2 * self.theta)])

    def matrix(self) -> np.ndarray:
        U = rotation(self.theta)
        return U @ np.diag([self.mu1, self.mu2]) @ U.T


@dataclass(frozen=True)
class PriorInfo:
    mat: np.ndarray
    s0: float
    v0: np.ndarray

    @classmethod
    def from_matrix(cls, m) -> "PriorInfo":
        m = np.asarray(m, dtype=float)
        m = 0.5 * (m + m.T)
        return cls(m, float(m[0, 0] + m[1, 1]),
                   np.array([m[0, 0] - m[1, 1], 2.0 * m[0, 1]]))

    @classmethod
    def zero(cls) -> "PriorInfo":
        return cls.from_matrix(np.zeros((2, 2)))


def per_unit_info(radar: RadarNode, pos) -> InfoMode:
    """Fisher information about target position from one second of dwell.

    Range accuracy constrains the radial direction and bearing accuracy the
    cross-range direction, giving eigenvalues ``1/sigma_r^2`` and
    ``1/(R sigma_phi)^2``. They are reordered so ``mu1 >= mu2``.
    """
    state = np.zeros(4)
    state[POS] = pos
    r, phi = h_true(state, radar)
    sig = noise_sigmas(radar, 1.0, r)
    radial = 1.0 / sig.sigma_r**2
    cross = 1.0 / (r * sig.sigma_phi) ** 2
    if radial >= cross:
        theta = phi
        mu1, mu2 = radial, cross
    else:
        theta = phi + math.pi / 2
        mu1, mu2 = cross, radial
    # wrap to (-pi/2, pi/2]
    theta = math.pi / 2 - (math.pi / 2 - theta) % math.pi
    return InfoMode(mu1, mu2, theta)


def per_unit_info_matrix(radar: RadarNode, pos) -> np.ndarray:
    """Same information assembled as ``Hp^T Gamma^-1 Hp`` from the Jacobian."""
    state = np.zeros(4)
    state[POS] = pos
    r, _ = h_true(state, radar)
    Hp = measurement_jacobian(state, radar)[:, POS]
    gamma = noise_sigmas(radar, 1.0, r).cov
    return Hp.T @ np.linalg.solve(gamma, Hp)


def prior_position_info(belief: GaussianBelief) -> PriorInfo:
    """Schur complement of the predicted information onto position."""
    J = np.linalg.inv(belief.cov)
    A = J[np.ix_(POS, POS)]
    B = J[np.ix_(POS, VEL)]
    C = J[np.ix_(VEL, VEL)]
    return PriorInfo.from_matrix(A - B @ np.linalg.solve(C, B.T))


def _check_dwell(u, infos):
    u = np.asarray(u, dtype=float)
    if u.shape != (len(infos),):
        raise ContractError(f"dwell vector has shape {u.shape}, expected ({len(infos)},)")
    if np.any(u < 0):
        raise ContractError("dwell times must be non-negative")
    return u


def assemble_jb(u, infos: Sequence[InfoMode], prior: PriorInfo) -> np.ndarray:
    u = _check_dwell(u, infos)
    J = np.array(prior.mat, dtype=float)
    for ui, info in zip(u, infos):
        if ui:
            J = J + ui * info.matrix()
    return 0.5 * (J + J.T)


def trace_and_anisotropy(u, infos: Sequence[InfoMode], prior: PriorInfo) -> tuple[float, np.ndarray]:
    u = _check_dwell(u, infos)
    s = prior.s0 + sum(ui * info.trace for ui, info in zip(u, infos))
    v = np.array(prior.v0, dtype=float)
    for ui, info in zip(u, infos):
        v = v + ui * info.anisotropy
    return float(s), v


def info_extremes(u, infos, prior) -> tuple[float, float]:
    """Largest and smallest eigenvalue of the assembled information."""
    s, v = trace_and_anisotropy(u, infos, prior)
    nv = float(np.hypot(*v))
    return 0.5 * (s + nv), 0.5 * (s - nv)


def crlb_extremes(u, infos, prior) -> tuple[float, float]:
    """Largest and smallest eigenvalue of the position bound, in m^2."""
    big, small = info_extremes(u, infos, prior)
    if not small > 0:
        raise InformationSingular(f"position information is singular (min eigenvalue {small:.3g})")
    return 1.0 / small, 1.0 / big


def expected_info(radar: RadarNode, belief: GaussianBelief, mode: str = "mean",
                  n: int = 1000, rng: Optional[np.random.Generator] = None) -> InfoMode:
    """Per-unit information averaged over the predicted target position."""
    if mode == "mean":
        return per_unit_info(radar, belief.mean[POS])
    if mode != "monte_carlo":
        raise ContractError(f"unknown expectation mode {mode!r}")
    if rng is None:
        raise ContractError("monte_carlo mode needs an rng")
    chol = cholesky4(belief.cov)
    acc = np.zeros((2, 2))
    for _ in range(n):
        acc += per_unit_info(radar, sample_gaussian(belief.mean, chol, rng)[POS]).matrix()
    return InfoMode.from_matrix(acc / n)
