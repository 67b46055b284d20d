import numpy as np
import pytest

from cogradar.core import ContractError, make_rng
from cogradar.dynamics import (MotionConfig, cv_transition, cv_transition_matrix, position,
                               process_noise_cov, propagate_truth, target_state)


def test_zero_dt_is_identity():
    assert np.array_equal(cv_transition_matrix(MotionConfig(dt=0.0)), np.eye(4))


def test_unit_step():
    s = cv_transition(target_state(0, 2, 0, -1), MotionConfig(dt=1.0))
    assert np.array_equal(position(s), [2.0, -1.0])


def test_frame_step_hand_evaluated():
    s = cv_transition(target_state(100, 100, 100, 100), MotionConfig(dt=0.025))
    assert position(s) == pytest.approx([102.5, 102.5], abs=1e-12)
    assert s[1] == s[3] == 100.0


def test_transition_structure():
    F = cv_transition_matrix(MotionConfig(dt=0.3))
    expected = np.array([[1, 0.3, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0.3], [0, 0, 0, 1]])
    assert np.array_equal(F, expected)


def test_process_noise_unit_interval():
    # per-axis block for dt = 1, kappa = 1
    Q = process_noise_cov(MotionConfig(dt=1.0, kappa=1.0))
    block = np.array([[1 / 3, 1 / 2], [1 / 2, 1.0]])
    assert np.allclose(Q[np.ix_([0, 1], [0, 1])], block, atol=1e-15)
    assert np.allclose(Q[np.ix_([2, 3], [2, 3])], block, atol=1e-15)
    assert np.all(Q[np.ix_([0, 1], [2, 3])] == 0)


def test_process_noise_zero_kappa():
    assert not np.any(process_noise_cov(MotionConfig(dt=0.025, kappa=0.0)))


def test_process_noise_frame_interval_entries():
    dt = 0.025
    Q = process_noise_cov(MotionConfig(dt=dt, kappa=1.0))
    assert Q[0, 0] == pytest.approx(1.5625e-5 / 3, rel=1e-14)   # dt^3 / 3
    assert Q[0, 1] == pytest.approx(3.125e-4, rel=1e-14)        # dt^2 / 2
    assert Q[1, 1] == pytest.approx(0.025, rel=1e-14)
    assert np.array_equal(Q, Q.T)
    assert np.linalg.eigvalsh(Q).min() > 0


def test_propagate_without_noise_is_deterministic_transition():
    cfg = MotionConfig(dt=0.025, kappa=0.0)
    s = target_state(1.0, 2.0, 3.0, 4.0)
    assert np.array_equal(propagate_truth(s, cfg, make_rng(0)), cv_transition(s, cfg))


def test_propagate_noise_covariance():
    cfg = MotionConfig(dt=0.5, kappa=2.0)
    s0 = target_state(10.0, 1.0, -5.0, 0.0)
    rng = make_rng(5)
    mean = cv_transition(s0, cfg)
    d = np.array([propagate_truth(s0, cfg, rng) - mean for _ in range(100_000)])
    Q = process_noise_cov(cfg)
    emp = d.T @ d / len(d)
    diag = np.sqrt(np.diag(Q))
    # 5% of the scale of each entry
    assert np.all(np.abs(emp - Q) <= 0.05 * np.outer(diag, diag))


def test_propagate_reproducible():
    cfg = MotionConfig()
    s = target_state(0, 1, 0, 1)

    def trajectory():
        rng = make_rng(3)
        out = [s]
        for _ in range(10):
            out.append(propagate_truth(out[-1], cfg, rng))
        return np.array(out)

    assert np.array_equal(trajectory(), trajectory())


@pytest.mark.parametrize("kw", [{"dt": -1.0}, {"kappa": -0.1}, {"dt": float("nan")}])
def test_config_validation(kw):
    with pytest.raises(ContractError):
        MotionConfig(**kw)
