"""Per-frame dwell-time allocation.

The accuracy requirement ``lambda_max(CRLB(u)) <= P`` is equivalent to
``lambda_min(J(u)) >= 1/P``. With the trace/anisotropy summary of ``J(u)``
this becomes one second-order cone constraint

    || v0 + G u || <= s0 + a^T u - 2/P

so the allocation is a linear objective over a box intersected with a single
cone. :func:`solve` handles it with a log-barrier interior-point method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ContractError, eig2x2_sym
from .fim import PriorInfo, assemble_jb

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
PRIOR_SUFFICIENT = "degenerate_prior_sufficient"

SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class AllocationProblem:
    infos: tuple
    prior: PriorInfo
    t_max: np.ndarray
    p_threshold: float

    def __post_init__(self):
        object.__setattr__(self, "infos", tuple(self.infos))
        t = np.broadcast_to(np.asarray(self.t_max, dtype=float), (len(self.infos),)).copy()
        object.__setattr__(self, "t_max", t)
        if not self.infos:
            raise ContractError("allocation problem needs at least one radar")
        if np.any(~(t > 0)):
            raise ContractError("t_max must be positive")
        if not self.p_threshold > 0:
            raise ContractError(f"p_threshold must be positive, got {self.p_threshold}")

    @property
    def n(self) -> int:
        return len(self.infos)


@dataclass
class Allocation:
    u: np.ndarray
    objective: float
    achieved_lambda_max: float
    status: str
    message: str = ""


@dataclass(frozen=True)
class ConeProgram:
    """minimize c^T u  s.t.  lower <= u <= upper,  ||h + G u|| <= b + a^T u."""

    c: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    G: np.ndarray
    h: np.ndarray
    a: np.ndarray
    b: float

    def slack(self, u) -> float:
        u = np.asarray(u, dtype=float)
        return float(self.b + self.a @ u - np.hypot(*(self.h + self.G @ u)))

    def residual(self, u) -> float:
        return max(0.0, -self.slack(u))


def build_socp(problem: AllocationProblem) -> ConeProgram:
    n = problem.n
    return ConeProgram(
        c=np.ones(n),
        lower=np.zeros(n),
        upper=problem.t_max.copy(),
        G=np.column_stack([info.anisotropy for info in problem.infos]),
        h=np.array(problem.prior.v0, dtype=float),
        a=np.array([info.trace for info in problem.infos]),
        b=problem.prior.s0 - 2.0 / problem.p_threshold,
    )


def achieved_lambda_max(problem: AllocationProblem, u) -> float:
    """Largest CRLB eigenvalue for allocation ``u`` from the assembled matrix."""
    lam_max, lam_min, _ = eig2x2_sym(assemble_jb(u, problem.infos, problem.prior))
    # information below rounding level of the largest eigenvalue counts as singular
    return 1.0 / lam_min if lam_min > SINGULAR_RTOL * lam_max else math.inf


class _Barrier:
    """Log barrier for the box [0, 1]^n and the cone, in scaled variables."""

    def __init__(self, G, h, a, b):
        self.G, self.h, self.a, self.b = G, h, a, b
        self.nu = 2 * G.shape[1] + 2

    def value(self, x):
        if np.any(x <= 0) or np.any(x >= 1):
            return math.inf
        y = self.b + self.a @ x
        z = self.h + self.G @ x
        f = y * y - z @ z
        if y <= 0 or f <= 0:
            return math.inf
        return -np.sum(np.log(x)) - np.sum(np.log1p(-x)) - math.log(f)

    def derivatives(self, x):
        y = self.b + self.a @ x
        z = self.h + self.G @ x
        f = y * y - z @ z
        df = 2.0 * (y * self.a - self.G.T @ z)
        d2f = 2.0 * (np.outer(self.a, self.a) - self.G.T @ self.G)
        grad = -1.0 / x + 1.0 / (1.0 - x) - df / f
        hess = np.diag(1.0 / x**2 + 1.0 / (1.0 - x) ** 2) + np.outer(df, df) / f**2 - d2f / f
        return grad, hess


def _barrier_solve(c, barrier: _Barrier, x0, gap_tol=1e-13, max_newton=100):
    # Damped Newton with step 1/(1 + lambda) stays inside the domain of a
    # self-concordant barrier, so no function values are needed; those lose
    # precision once t * c^T x dwarfs the barrier term.
    x = x0.copy()
    t = barrier.nu / max(c @ x, 1e-12)
    mu = 50.0
    while True:
        for _ in range(max_newton):
            grad, hess = barrier.derivatives(x)
            grad = t * c + grad
            step = -np.linalg.solve(hess, grad)
            lam = math.sqrt(max(-grad @ step, 0.0))
            alpha = 1.0 if lam < 0.25 else 1.0 / (1.0 + lam)
            cand = x + alpha * step
            while not math.isfinite(barrier.value(cand)):
                alpha *= 0.5
                cand = x + alpha * step
                if alpha < 1e-12:
                    break
            else:
                x = cand
            if lam < 1e-4 or alpha < 1e-12:
                break
        if barrier.nu / t <= gap_tol * max(1.0, c @ x):
            return x
        t *= mu


def solve(problem: AllocationProblem) -> Allocation:
    """Minimum total dwell meeting the accuracy threshold."""
    cp = build_socp(problem)
    n = problem.n
    t = problem.t_max
    if cp.slack(np.zeros(n)) >= 0:
        u = np.zeros(n)
        return Allocation(u, 0.0, achieved_lambda_max(problem, u), PRIOR_SUFFICIENT)
    if cp.slack(t) < 0:
        lam = achieved_lambda_max(problem, t)
        msg = ("position information stays singular at full dwell" if math.isinf(lam)
               else f"best achievable lambda_max {lam:.6g} exceeds threshold {problem.p_threshold:.6g}")
        return Allocation(t.copy(), float(t.sum()), lam, INFEASIBLE, msg)

    # scaled variables x = u / t_max, cone divided by 2/P
    gamma = 2.0 / problem.p_threshold
    G = cp.G * t / gamma
    h = cp.h / gamma
    a = cp.a * t / gamma
    b = cp.b / gamma
    c = t / t.mean()
    barrier = _Barrier(G, h, a, b)

    x0 = None
    delta = 0.5
    while delta > 1e-15:
        cand = np.full(n, 1.0 - delta)
        if math.isfinite(barrier.value(cand)):
            x0 = cand
            break
        delta *= 0.5
    if x0 is None:
        # the cone is only satisfied on the upper corner of the box
        return Allocation(t.copy(), float(t.sum()), achieved_lambda_max(problem, t), OPTIMAL,
                          "feasible set reduces to full dwell")

    x = _barrier_solve(c, barrier, x0)
    u = t * x
    snapped = np.where(x < 1e-9, 0.0, np.where(x > 1.0 - 1e-9, t, u))
    if cp.slack(snapped) >= 0:
        u = snapped
    u = np.clip(u, 0.0, t)
    return Allocation(u, float(u.sum()), achieved_lambda_max(problem, u), OPTIMAL)


@dataclass
class VerifyReport:
    box_ok: bool
    objective_ok: bool
    status_ok: bool
    lambda_max: float
    cone_residual: float
    lambda_excess: float
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.box_ok and self.objective_ok and self.status_ok


def verify(problem: AllocationProblem, alloc: Allocation, rel_tol: float = 1e-6) -> VerifyReport:
    """Audit an allocation against the assembled information matrix."""
    u = np.asarray(alloc.u, dtype=float)
    notes = []
    box_ok = u.shape == (problem.n,) and bool(np.all(u >= 0) and np.all(u <= problem.t_max))
    if not box_ok:
        notes.append("dwell outside [0, t_max]")
    objective_ok = math.isclose(alloc.objective, float(u.sum()), rel_tol=1e-12, abs_tol=1e-15)
    if not objective_ok:
        notes.append("objective differs from total dwell")
    _, lam_min_info, _ = eig2x2_sym(assemble_jb(u if box_ok else np.clip(u, 0, None),
                                                problem.infos, problem.prior))
    lam_max = 1.0 / lam_min_info if lam_min_info > 0 else math.inf
    cone_residual = max(0.0, 1.0 / problem.p_threshold - lam_min_info)
    excess = max(0.0, lam_max - problem.p_threshold)
    meets = lam_max <= problem.p_threshold * (1.0 + rel_tol)
    if alloc.status == OPTIMAL:
        status_ok = meets
    elif alloc.status == PRIOR_SUFFICIENT:
        status_ok = meets and not np.any(u)
    elif alloc.status == INFEASIBLE:
        status_ok = not meets
    else:
        status_ok = False
        notes.append(f"unknown status {alloc.status!r}")
    if not status_ok:
        notes.append(f"status {alloc.status} inconsistent with lambda_max {lam_max:.6g}")
    return VerifyReport(box_ok, objective_ok, status_ok, lam_max, cone_residual, excess, notes)


def nearest_radars(positions: np.ndarray, ids: Sequence[int], point, k: int) -> list[int]:
    """Indices of the ``k`` positions nearest ``point``; ties go to lower id."""
    d = np.hypot(*(np.asarray(positions, dtype=float) - np.asarray(point, dtype=float)).T)
    order = sorted(range(len(ids)), key=lambda i: (d[i], ids[i]))
    return order[:k]


def knn_allocate(radars, predicted_pos, k: int, problem: AllocationProblem,
                 rel_tol: float = 1e-9) -> Allocation:
    """Equal dwell on the ``k`` radars nearest the predicted position.

    The common dwell is the smallest value meeting the accuracy threshold,
    found by bisection.
    """
    n = problem.n
    if len(radars) != n:
        raise ContractError(f"{len(radars)} radars but problem has {n} info modes")
    if not 1 <= k <= n:
        raise ContractError(f"k must be in [1, {n}], got {k}")
    chosen = nearest_radars(np.array([r.position for r in radars]), [r.id for r in radars],
                            predicted_pos, k)
    mask = np.zeros(n)
    mask[chosen] = 1.0
    cp = build_socp(problem)
    if cp.slack(np.zeros(n)) >= 0:
        u = np.zeros(n)
        return Allocation(u, 0.0, achieved_lambda_max(problem, u), PRIOR_SUFFICIENT)
    hi = float(problem.t_max[chosen].min())
    if cp.slack(hi * mask) < 0:
        u = hi * mask
        lam = achieved_lambda_max(problem, u)
        return Allocation(u, float(u.sum()), lam, INFEASIBLE,
                          f"{k} nearest radars at full dwell reach lambda_max {lam:.6g}")
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if cp.slack(mid * mask) >= 0:
            hi = mid
        else:
            lo = mid
    u = hi * mask
    return Allocation(u, float(u.sum()), achieved_lambda_max(problem, u), OPTIMAL)
