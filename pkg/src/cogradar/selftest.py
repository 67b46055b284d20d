"""Oracle suites shared by the ``selftest`` command and the test-suite.

Every oracle here works from the assembled 2x2 matrices with generic linear
algebra, never from the trace/anisotropy cone form used by the solver, so a
match is evidence that both routes agree.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .allocation import AllocationProblem, build_socp, solve
from .core import make_rng
from .fim import InfoMode, PriorInfo, assemble_jb, crlb_extremes
from .sensing import RadarNode, noise_sigmas
from .threat import LinearThreat, ThreatFnContract, check_restriction


def random_info(rng: np.random.Generator, scale: float = 1.0) -> InfoMode:
    mu2 = scale * rng.uniform(0.05, 1.0)
    return InfoMode(mu2 * rng.uniform(1.0, 20.0), mu2, rng.uniform(-math.pi / 2, math.pi / 2))


def random_prior(rng: np.random.Generator, scale: float = 1.0) -> PriorInfo:
    a = rng.normal(size=(2, 2))
    return PriorInfo.from_matrix(scale * rng.uniform(0, 1) * (a @ a.T) / 2.0)


def random_problem(rng: np.random.Generator, n: int, p_threshold: float = 100.0,
                   t_max: float = 0.025, min_fraction: float = 0.1) -> AllocationProblem:
    """A problem where full dwell meets the threshold but ``min_fraction * t_max`` does not.

    The lower bound keeps the optimum well above the grid step of
    :func:`grid_oracle`, whose own discretization error is roughly
    ``step / objective``.
    """
    while True:
        infos = [random_info(rng, 2.0 / (p_threshold * t_max)) for _ in range(n)]
        prior = random_prior(rng, 0.5 / p_threshold)
        t = np.full(n, t_max) * rng.uniform(0.5, 1.0, size=n)
        problem = AllocationProblem(infos, prior, t, p_threshold)
        cp = build_socp(problem)
        if cp.slack(min_fraction * t) < 0 and cp.slack(np.zeros(n)) < 0 and cp.slack(t) > 0:
            return problem


def _min_dwell_single(base: np.ndarray, info: np.ndarray, p_threshold: float) -> np.ndarray:
    """Smallest ``u >= 0`` with ``lambda_min(base + u * info) >= 1/P``, vectorized over base.

    ``M(u) = base - I/P + u * info`` turns PSD exactly at the largest root of
    ``det M(u) = 0`` because ``info`` is PSD, so no cone algebra is involved.
    """
    m = base - np.eye(2) / p_threshold
    m00, m01, m11 = m[..., 0, 0], m[..., 0, 1], m[..., 1, 1]
    i00, i01, i11 = info[0, 0], info[0, 1], info[1, 1]
    c2 = i00 * i11 - i01 * i01
    c1 = m00 * i11 + m11 * i00 - 2.0 * m01 * i01
    c0 = m00 * m11 - m01 * m01
    already = (c0 >= 0) & (m00 + m11 >= 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        if c2 > 1e-300:
            disc = np.maximum(c1 * c1 - 4.0 * c2 * c0, 0.0)
            root = (-c1 + np.sqrt(disc)) / (2.0 * c2)
        else:
            root = np.where(c1 > 0, -c0 / c1, np.inf)
    return np.where(already, 0.0, np.maximum(root, 0.0))


def grid_oracle(problem: AllocationProblem, divisions: int = 2000) -> float:
    """Brute-force minimum total dwell.

    Each coordinate in turn is solved exactly while the others run over a
    grid of step ``t_max / divisions``; the best feasible total is returned
    (``inf`` if none).
    """
    n = problem.n
    mats = [info.matrix() for info in problem.infos]
    best = math.inf
    for j in range(n):
        others = [i for i in range(n) if i != j]
        axes = [np.linspace(0.0, problem.t_max[i], divisions + 1) for i in others]
        grids = np.meshgrid(*axes, indexing="ij") if axes else []
        base = problem.prior.mat.copy()
        total = 0.0
        for i, g in zip(others, grids):
            base = base + g[..., None, None] * mats[i]
            total = total + g
        uj = _min_dwell_single(base, mats[j], problem.p_threshold)
        total = total + np.where(uj <= problem.t_max[j], uj, np.inf)
        best = min(best, float(np.min(total)))
    return best


def single_radar_closed_form(info: InfoMode, p_threshold: float) -> float:
    """Optimal dwell for one radar and no prior: ``1 / (P * mu2)``."""
    return 1.0 / (p_threshold * info.mu2)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def check_eigen_identity(n_instances: int = 1000, seed: int = 0) -> CheckResult:
    """Closed-form bound eigenvalues against a generic eigendecomposition."""
    rng = make_rng(seed, 1)
    worst = 0.0
    for _ in range(n_instances):
        n = int(rng.integers(1, 6))
        infos = [random_info(rng) for _ in range(n)]
        prior = random_prior(rng)
        u = rng.uniform(0.0, 1.0, size=n)
        big, small = crlb_extremes(u, infos, prior)
        ref = np.linalg.eigvalsh(np.linalg.inv(assemble_jb(u, infos, prior)))
        worst = max(worst, abs(big - ref[1]) / ref[1], abs(small - ref[0]) / ref[0])
    return CheckResult("eigenvalue identity", bool(worst <= 1e-9), f"worst relative error {worst:.3g}", 0.0)


def check_socp_optimality(n_problems: int = 100, seed: int = 0) -> CheckResult:
    """Solver objective against the grid oracle, plus the single-radar closed form."""
    rng = make_rng(seed, 2)
    worst_gap = 0.0
    worst_res = 0.0
    for i in range(n_problems):
        n = (1, 2, 2, 3)[i % 4]
        problem = random_problem(rng, n)
        alloc = solve(problem)
        ref = grid_oracle(problem)
        worst_gap = max(worst_gap, abs(alloc.objective - ref) / ref)
        worst_res = max(worst_res, build_socp(problem).residual(alloc.u))
    worst_single = 0.0
    for _ in range(20):
        info = random_info(rng, 1.0)
        p = 1.0
        expected = single_radar_closed_form(info, p)
        alloc = solve(AllocationProblem([info], PriorInfo.zero(), 2.0 * expected, p))
        worst_single = max(worst_single, abs(alloc.u[0] - expected) / expected)
    ok = worst_gap <= 1e-3 and worst_res <= 1e-6 and worst_single <= 1e-6
    return CheckResult("allocation optimality", bool(ok),
                       f"grid gap {worst_gap:.3g}, cone residual {worst_res:.3g}, "
                       f"single-radar error {worst_single:.3g}", 0.0)


def check_scaling_laws() -> CheckResult:
    """Range sigma scales with dwell^-1/2 and range^2."""
    worst = 0.0
    for beta, theta, dwell, rng_m in itertools.product((1e5, 1e6 / 3), (0.005, 0.01),
                                                       (1e-4, 1e-3, 1e-2), (1e3, 1e4, 5e4)):
        radar = RadarNode(0, (0.0, 0.0), beta=beta, theta3db=theta)
        base = noise_sigmas(radar, dwell, rng_m)
        for f in (2.0, 4.0, 9.0):
            by_dwell = noise_sigmas(radar, dwell * f, rng_m)
            by_range = noise_sigmas(radar, dwell, rng_m * f)
            for s0, s1, s2 in ((base.sigma_r, by_dwell.sigma_r, by_range.sigma_r),
                               (base.sigma_phi, by_dwell.sigma_phi, by_range.sigma_phi)):
                worst = max(worst, abs(s1 / (s0 / math.sqrt(f)) - 1), abs(s2 / (s0 * f * f) - 1))
    return CheckResult("measurement scaling", bool(worst <= 1e-12), f"worst relative error {worst:.3g}", 0.0)


def check_restriction_laws() -> CheckResult:
    linear = LinearThreat(-100.0, 100.0)
    samples = [(0.8, 0.4), (0.5, 0.25), (0.9, 0.0), (0.6, 0.6)]
    lin = check_restriction(ThreatFnContract(linear, "linear"), samples)
    exp = check_restriction(ThreatFnContract(lambda x: math.exp(-x), "exp"), [(2.0, 1.0)])
    expected = abs(math.exp(-1) - math.exp(-2) + math.exp(-1) - 1.0)
    ok = (lin.passed and lin.max_residual == 0.0 and exp.monotone and not exp.additive
          and abs(exp.max_residual - expected) <= 1e-12)
    return CheckResult("threat restriction", ok,
                       f"linear residual {lin.max_residual:.3g}, exp residual {exp.max_residual:.6f}", 0.0)


SUITES: dict[str, Callable[[], CheckResult]] = {
    "eigen": check_eigen_identity,
    "socp": check_socp_optimality,
    "scaling": check_scaling_laws,
    "restriction": check_restriction_laws,
}


def run(names=None) -> list[CheckResult]:
    out = []
    for name in names or SUITES:
        start = time.perf_counter()
        result = SUITES[name]()
        result.seconds = time.perf_counter() - start
        out.append(result)
    return out
