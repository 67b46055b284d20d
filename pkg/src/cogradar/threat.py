"""Range-to-asset threat scoring and its accuracy bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import ContractError
from .dynamics import POS


@dataclass(frozen=True)
class Asset:
    position: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(p) for p in self.position))
        if len(self.position) != 2 or not all(map(math.isfinite, self.position)):
            raise ContractError("asset position must be two finite numbers")


@dataclass(frozen=True)
class LinearThreat:
    """``theta = a * (R / unit) + b`` with ``R`` in meters.

    ``unit`` is the number of meters per distance unit the coefficients are
    written in (1000 for a threat defined over kilometers).
    """

    a: float = -100.0
    b: float = 100.0
    unit: float = 1.0

    def __post_init__(self):
        if not self.a < 0:
            raise ContractError(f"threat slope a must be negative, got {self.a}")
        if not self.b > 0:
            raise ContractError(f"threat intercept b must be positive, got {self.b}")
        if not self.unit > 0:
            raise ContractError(f"threat unit must be positive, got {self.unit}")

    def __call__(self, r_units):
        return self.a * r_units + self.b


def range_to_asset(state, asset: Asset) -> float:
    dx, dy = np.asarray(state, dtype=float)[POS] - np.asarray(asset.position)
    return math.hypot(dx, dy)


def threat(state, asset: Asset, fn: LinearThreat) -> float:
    return float(fn(range_to_asset(state, asset) / fn.unit))


def threat_display(value: float, scale: float = 100.0) -> float:
    """Threat rescaled to [0, 1] for presentation only."""
    return min(max(value / scale, 0.0), 1.0)


def threat_mse_bound(lambda_max_crlb: float, fn: LinearThreat) -> float:
    """Upper bound ``a^2 * lambda_max^2`` on the threat mean-square error.

    ``lambda_max_crlb`` must already be expressed in the threat's distance
    unit.
    """
    if lambda_max_crlb < 0:
        raise ContractError("lambda_max_crlb must be non-negative")
    return fn.a**2 * lambda_max_crlb**2


def crlb_cap_for_threat_mse(mse_cap: float, fn: LinearThreat) -> float:
    """Invert :func:`threat_mse_bound`: the largest admissible lambda_max."""
    if not mse_cap > 0:
        raise ContractError("threat MSE cap must be positive")
    return math.sqrt(mse_cap) / abs(fn.a)


def empirical_threat_mse(truth_states: Sequence, estimate_states: Sequence, asset: Asset,
                         fn: LinearThreat) -> float:
    if len(truth_states) != len(estimate_states):
        raise ContractError(f"length mismatch: {len(truth_states)} truths vs {len(estimate_states)} estimates")
    if not truth_states:
        raise ContractError("no states given")
    errs = [(threat(t, asset, fn) - threat(e, asset, fn)) ** 2
            for t, e in zip(truth_states, estimate_states)]
    return math.fsum(errs) / len(errs)


def empirical_range_mse(truth_states: Sequence, estimate_states: Sequence, asset: Asset,
                        unit: float = 1.0) -> float:
    if len(truth_states) != len(estimate_states):
        raise ContractError("length mismatch")
    errs = [((range_to_asset(t, asset) - range_to_asset(e, asset)) / unit) ** 2
            for t, e in zip(truth_states, estimate_states)]
    return math.fsum(errs) / len(errs)


@dataclass(frozen=True)
class ThreatFnContract:
    """An arbitrary threat law ``g`` over non-negative distances."""

    g: Callable[[float], float]
    name: str = "g"


@dataclass
class RestrictionReport:
    monotone: bool
    positive: bool
    max_residual: float
    residuals: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    tol: float = 1e-9

    @property
    def additive(self) -> bool:
        return self.max_residual <= self.tol

    @property
    def passed(self) -> bool:
        return self.monotone and self.positive and self.additive


def check_restriction(fn: ThreatFnContract, samples: Sequence[tuple[float, float]],
                      tol: float = 1e-9) -> RestrictionReport:
    """Check monotonicity, positivity and ``g(a-b) - g(a) + g(b) - g(0) = 0``.

    Each sample is a pair ``(alpha, beta)`` with ``alpha >= beta >= 0``.
    Monotonicity is checked on every ordered pair of sampled points.
    """
    g = fn.g
    points = sorted({0.0, *(float(x) for pair in samples for x in pair)})
    values = [g(x) for x in points]
    violations = []
    positive = all(v > 0 for v in values)
    if not positive:
        violations.append("positivity")
    monotone = all(values[j] <= values[i] for i in range(len(points)) for j in range(i + 1, len(points)))
    if not monotone:
        violations.append("monotonicity")
    residuals = []
    for alpha, beta in samples:
        if not alpha >= beta >= 0:
            raise ContractError(f"sample ({alpha}, {beta}) needs alpha >= beta >= 0")
        residuals.append(g(alpha - beta) - g(alpha) + g(beta) - g(0.0))
    max_res = max((abs(r) for r in residuals), default=0.0)
    if max_res > tol:
        violations.append("additivity")
    return RestrictionReport(monotone, positive, max_res, residuals, violations, tol)
