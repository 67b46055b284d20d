"""Closed-loop tracking episodes, Monte Carlo runs and allocator comparison.

Each trial draws from three PCG64 streams keyed by ``(seed, trial, k)``:

* ``k = 0`` initial estimate error and process noise,
* ``k = 1`` one standard-normal pair per radar per frame, consumed only by
  radars that dwell,
* ``k = 2`` samples for Monte Carlo expected information.

Every allocator therefore sees the same target trajectory and noise draws.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .allocation import INFEASIBLE, Allocation, AllocationProblem, knn_allocate, solve
from .core import cholesky4, make_rng, sample_gaussian
from .dynamics import POS, propagate_truth
from .fim import expected_info, prior_position_info
from .scenario import Scenario
from .sensing import measurement_from_noise
from .threat import threat, threat_mse_bound
from .tracking import GaussianBelief, nees, predict, sequential_update

log = logging.getLogger(__name__)

ALLOCATORS = ("socp", "knn")
METRICS = ("total_time", "threat_sq_err", "bound", "product")


class AllocationInfeasible(RuntimeError):
    def __init__(self, frame: int, alloc: Allocation):
        super().__init__(f"frame {frame}: allocation infeasible ({alloc.message})")
        self.frame = frame
        self.allocation = alloc


@dataclass(frozen=True)
class FrameMetrics:
    frame: int
    allocator: str
    trial: int
    u: tuple
    total_time: float
    threat_sq_err: float
    bound: float
    product: float
    status: str
    nees: float


@dataclass(frozen=True)
class FrameTrace:
    """Per-frame internals kept for diagnostics; not exported."""

    truth: np.ndarray
    predicted: GaussianBelief
    posterior: GaussianBelief
    allocation: Allocation


def _allocate(scenario: Scenario, allocator: str, problem: AllocationProblem, predicted_pos) -> Allocation:
    if allocator == "socp":
        return solve(problem)
    if allocator == "knn":
        return knn_allocate(scenario.radars, predicted_pos, scenario.knn_k, problem)
    raise ValueError(f"unknown allocator {allocator!r}")


def run_episode(scenario: Scenario, allocator: str, trial: int = 0, seed: Optional[int] = None,
                history: Optional[list] = None) -> list[FrameMetrics]:
    """Track the target for ``scenario.frames`` frames with one allocator.

    Pass a list as ``history`` to receive a :class:`FrameTrace` per frame.
    """
    seed = scenario.seed if seed is None else seed
    truth_rng = make_rng(seed, trial, 0)
    meas_rng = make_rng(seed, trial, 1)
    info_rng = make_rng(seed, trial, 2)
    radars = scenario.radars
    t_max = scenario.t_max
    fn = scenario.threat

    truth = scenario.target_init.copy()
    belief = GaussianBelief(sample_gaussian(truth, cholesky4(scenario.initial_cov), truth_rng),
                            scenario.initial_cov)
    out = []
    for k in range(1, scenario.frames + 1):
        truth = propagate_truth(truth, scenario.motion, truth_rng)
        predicted = predict(belief, scenario.motion)
        infos = [expected_info(r, predicted, scenario.info_mode, scenario.mc_samples, info_rng)
                 for r in radars]
        problem = AllocationProblem(infos, prior_position_info(predicted), t_max, scenario.p_threshold)
        alloc = _allocate(scenario, allocator, problem, predicted.mean[POS])
        if alloc.status == INFEASIBLE:
            if scenario.on_infeasible == "abort":
                raise AllocationInfeasible(k, alloc)
            log.debug("frame %d: %s infeasible, saturating (%s)", k, allocator, alloc.message)
        unit_noise = meas_rng.standard_normal((len(radars), 2))
        measurements = [measurement_from_noise(truth, r, ui, unit_noise[i])
                        for i, (r, ui) in enumerate(zip(radars, alloc.u)) if ui > 0]
        posterior = sequential_update(predicted, measurements, radars, frame=k)

        err = (threat(truth, scenario.asset, fn) - threat(posterior.mean, scenario.asset, fn)) ** 2
        lam = alloc.achieved_lambda_max
        bound = threat_mse_bound(lam / fn.unit**2, fn) if math.isfinite(lam) else math.inf
        total = float(np.sum(alloc.u))
        out.append(FrameMetrics(
            frame=k, allocator=allocator, trial=trial, u=tuple(float(x) for x in alloc.u),
            total_time=total, threat_sq_err=float(err), bound=float(bound), product=total * float(err),
            status=alloc.status, nees=nees(posterior, truth),
        ))
        if history is not None:
            history.append(FrameTrace(truth.copy(), predicted, posterior, alloc))
        belief = posterior
    return out


@dataclass
class Report:
    scenario: str
    seed: int
    trials: int
    allocators: tuple
    n_radars: int
    rows: list = field(default_factory=list)

    def select(self, allocator: str) -> list:
        return [r for r in self.rows if r.allocator == allocator]

    def frames(self) -> list:
        return sorted({r.frame for r in self.rows})


def _episode_job(args):
    scenario, allocator, trial, seed = args
    return run_episode(scenario, allocator, trial, seed)


def _run_trials(scenario, allocators, trials, seed, workers):
    jobs = [(scenario, a, t, seed) for t in range(trials) for a in allocators]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_episode_job, jobs))
    else:
        results = [_episode_job(j) for j in jobs]
    return [row for rows in results for row in rows]


def monte_carlo(scenario: Scenario, allocator: str, trials: int, seed: Optional[int] = None,
                workers: int = 1) -> Report:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seed = scenario.seed if seed is None else seed
    rows = _run_trials(scenario, (allocator,), trials, seed, workers)
    return Report(scenario.name, seed, trials, (allocator,), len(scenario.radars), rows)


def compare(scenario: Scenario, trials: int, seed: Optional[int] = None, workers: int = 1) -> Report:
    """Run both allocators on identical per-trial random streams."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    seed = scenario.seed if seed is None else seed
    rows = _run_trials(scenario, ALLOCATORS, trials, seed, workers)
    return Report(scenario.name, seed, trials, ALLOCATORS, len(scenario.radars), rows)


# ---------------------------------------------------------------------------
# aggregation

def _ordered(rows):
    return sorted(rows, key=lambda r: (r.allocator, r.trial, r.frame))


def series(report: Report, allocator: str) -> dict:
    """Per-frame mean and standard deviation of every metric and dwell.

    Rows are sorted before reduction so the result does not depend on the
    order trials finished in.
    """
    rows = _ordered(report.select(allocator))
    frames = sorted({r.frame for r in rows})
    out = {"frame": frames}
    by_frame = {f: [r for r in rows if r.frame == f] for f in frames}
    for metric in METRICS:
        values = [np.array([getattr(r, metric) for r in by_frame[f]]) for f in frames]
        # singular frames carry an infinite bound; let it propagate as inf/nan quietly
        with np.errstate(invalid="ignore"):
            out[f"{metric}_mean"] = [float(np.mean(v)) for v in values]
            out[f"{metric}_std"] = [float(np.std(v)) for v in values]
    out["u_mean"] = [np.mean([r.u for r in by_frame[f]], axis=0).tolist() for f in frames]
    out["infeasible_frames"] = [sum(r.status == INFEASIBLE for r in by_frame[f]) for f in frames]
    return out


def cumulative(report: Report, allocator: str, metric: str) -> dict:
    """Per-trial sum of ``metric`` over frames."""
    sums: dict = {}
    for r in _ordered(report.select(allocator)):
        sums.setdefault(r.trial, []).append(getattr(r, metric))
    return {t: math.fsum(v) for t, v in sums.items()}


def product_wins(report: Report, ours: str = "socp", theirs: str = "knn") -> dict:
    """Per frame, the number of trials where ``ours`` has the lower product."""
    a = {(r.trial, r.frame): r.product for r in report.select(ours)}
    b = {(r.trial, r.frame): r.product for r in report.select(theirs)}
    wins: dict = {}
    for key in sorted(a.keys() & b.keys()):
        trial, frame = key
        wins.setdefault(frame, [0, 0])
        wins[frame][0 if a[key] < b[key] else 1] += 1
    frames = sorted(wins)
    return {"frame": frames, "wins": [wins[f][0] for f in frames], "losses": [wins[f][1] for f in frames]}


def summarize(report: Report) -> dict:
    out = {"series": {a: series(report, a) for a in report.allocators}}
    if set(ALLOCATORS) <= set(report.allocators):
        out["product_wins"] = product_wins(report)
    return out
