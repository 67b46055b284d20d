import math
from dataclasses import replace

import numpy as np
import pytest

from cogradar.dynamics import MotionConfig
from cogradar.scenario import Scenario, shipped_scenario
from cogradar.sensing import RadarNode
from cogradar.threat import Asset, LinearThreat
from cogradar.tracking import initial_cov


def small_scenario(frames=5, n_radars=4, p_threshold=50.0, pos_sigma=20.0, kappa=1.0, **kw):
    """A quick scenario: a ring of radars around a slow target near the asset."""
    radars = tuple(
        RadarNode(i + 1, (8000.0 * math.cos(2 * math.pi * i / n_radars + 0.3),
                          8000.0 * math.sin(2 * math.pi * i / n_radars + 0.3)))
        for i in range(n_radars))
    base = dict(
        name="small", radars=radars, asset=Asset((0.0, 0.0)),
        motion=MotionConfig(0.025, kappa), threat=LinearThreat(-100.0, 100.0, 1000.0),
        target_init=np.array([-500.0, 142.4, 100.0, 0.0]), frames=frames,
        initial_cov=initial_cov(0.025, pos_sigma), p_threshold=p_threshold, knn_k=2, seed=3,
    )
    base.update(kw)
    return Scenario(**base)


@pytest.fixture
def small():
    return small_scenario()


@pytest.fixture(scope="session")
def scenario1():
    return shipped_scenario("scenario1")


@pytest.fixture(scope="session")
def scenario2():
    return shipped_scenario("scenario2")


def with_changes(scenario, **kw):
    return replace(scenario, **kw)


ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record an acceptance verdict; the terminal summary prints one line per criterion."""
    results = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(number, name, passed, detail):
        results[number] = (name, bool(passed), detail)
        print(f"criterion {number} {'PASS' if passed else 'FAIL'}: {name} ({detail})")
        return passed
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        name, passed, detail = results[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {name}: {detail}")
