import numpy as np
import pytest

from cogradar.core import make_rng
from cogradar.dynamics import MotionConfig, cv_transition_matrix, process_noise_cov, target_state
from cogradar.sensing import Measurement, RadarNode, h_true, sample_measurement
from cogradar.tracking import (FilterDivergence, GaussianBelief, initial_cov, nees, predict,
                               sequential_update, update_one)


def random_belief(rng):
    a = rng.normal(size=(4, 4))
    return GaussianBelief(rng.normal(scale=100.0, size=4), a @ a.T + 0.1 * np.eye(4))


def test_predict_identity_when_frozen():
    b = random_belief(np.random.default_rng(0))
    out = predict(b, MotionConfig(dt=0.0, kappa=0.0))
    assert np.array_equal(out.mean, b.mean)
    assert np.allclose(out.cov, b.cov, rtol=0, atol=1e-15)


def test_predict_zero_cov_stays_zero():
    b = GaussianBelief(target_state(0, 10, 0, -5), np.zeros((4, 4)))
    out = predict(b, MotionConfig(dt=0.5, kappa=0.0))
    assert not np.any(out.cov)
    assert np.array_equal(out.mean, [5.0, 10.0, -2.5, -5.0])


def test_predict_matches_direct_algebra():
    rng = np.random.default_rng(1)
    cfg = MotionConfig(dt=0.025, kappa=3.0)
    # the transition written out by hand
    dt = cfg.dt
    F = np.array([[1, dt, 0, 0], [0, 1, 0, 0], [0, 0, 1, dt], [0, 0, 0, 1]])
    q = np.array([[dt**3 / 3, dt**2 / 2], [dt**2 / 2, dt]]) * cfg.kappa
    Q = np.zeros((4, 4))
    Q[:2, :2] = q
    Q[2:, 2:] = q
    for _ in range(50):
        b = random_belief(rng)
        out = predict(b, cfg)
        assert np.allclose(out.mean, F @ b.mean, rtol=1e-12, atol=1e-10)
        assert np.allclose(out.cov, F @ b.cov @ F.T + Q, rtol=1e-10, atol=1e-10)
        assert np.linalg.eigvalsh(out.cov).min() > 0


def test_empty_update_is_identity():
    b = random_belief(np.random.default_rng(2))
    out = sequential_update(b, [], [RadarNode(1, (0, 0))])
    assert out is b


def test_noiseless_measurement_pins_position():
    radar = RadarNode(1, (0.0, 0.0), snr_cal=1e40)
    truth = target_state(7000.0, 0.0, 2000.0, 0.0)
    prior = GaussianBelief(truth + np.array([60.0, 5.0, -80.0, 3.0]), initial_cov(0.025, 100.0))
    meas = sample_measurement(truth, radar, 1e-3, make_rng(0))
    post = sequential_update(prior, [meas], [radar])
    r, _ = h_true(truth, radar)
    assert np.linalg.norm(post.mean[[0, 2]] - truth[[0, 2]]) < 1e-3 * r


def test_two_measurements_shrink_covariance():
    radar = RadarNode(1, (0.0, 0.0))
    truth = target_state(9000.0, 0.0, 1000.0, 0.0)
    prior = GaussianBelief(truth, initial_cov(0.025, 50.0))
    m = Measurement(*h_true(truth, radar), radar_id=1, dwell=1e-3)
    one = sequential_update(prior, [m], [radar])
    radar2 = RadarNode(2, (0.0, 0.0))
    m2 = Measurement(*h_true(truth, radar2), radar_id=2, dwell=1e-3)
    two = sequential_update(prior, [m, m2], [radar, radar2])
    # Loewner order: one - two must be PSD
    assert np.linalg.eigvalsh(one.cov - two.cov).min() >= -1e-9 * np.abs(one.cov).max()
    assert np.trace(two.cov) < np.trace(one.cov)


def test_update_order_follows_radar_id():
    radars = [RadarNode(2, (0.0, 5000.0)), RadarNode(1, (6000.0, 0.0))]
    truth = target_state(0.0, 0.0, 0.0, 0.0)
    prior = GaussianBelief(truth + np.array([30.0, 0, -20.0, 0]), initial_cov(0.025, 100.0))
    rng = make_rng(4)
    meas = [sample_measurement(truth, r, 1e-3, rng) for r in radars]
    a = sequential_update(prior, meas, radars)
    b = sequential_update(prior, meas[::-1], radars[::-1])
    manual = update_one(update_one(prior, meas[1], radars[1]), meas[0], radars[0])
    assert np.array_equal(a.mean, b.mean)
    assert np.array_equal(a.mean, manual.mean)


def test_update_is_symmetric_psd():
    radar = RadarNode(1, (0.0, 0.0))
    truth = target_state(4000.0, 100.0, -3000.0, 0.0)
    b = GaussianBelief(truth, initial_cov(0.025))
    rng = make_rng(5)
    for _ in range(20):
        b = update_one(b, sample_measurement(truth, radar, 1e-3, rng), radar)
        assert np.array_equal(b.cov, b.cov.T)
        assert np.linalg.eigvalsh(b.cov).min() > -1e-9 * np.abs(b.cov).max()


def test_divergence_carries_frame():
    radar = RadarNode(1, (0.0, 0.0))
    bad = GaussianBelief(target_state(1000.0, 0, 0, 0), -np.eye(4))
    m = Measurement(1000.0, 0.0, 1, 1e-3)
    with pytest.raises(FilterDivergence) as err:
        sequential_update(bad, [m], [radar], frame=12)
    assert err.value.frame == 12
    assert "frame 12" in str(err.value)


def test_nees_trivial():
    assert nees(GaussianBelief(np.ones(4), np.eye(4)), np.ones(4)) == 0.0
    assert nees(GaussianBelief(np.zeros(4), np.eye(4)), np.array([1.0, 0, 0, 0])) == 1.0


def test_nees_singular_covariance():
    with pytest.raises(np.linalg.LinAlgError):
        nees(GaussianBelief(np.zeros(4), np.zeros((4, 4))), np.ones(4))


def test_nees_linear_gaussian_consistency():
    # linear-Gaussian case: position observed directly, so the filter is exact
    rng = make_rng(6)
    cfg = MotionConfig(dt=0.1, kappa=2.0)
    F = cv_transition_matrix(cfg)
    Q = process_noise_cov(cfg)
    H = np.array([[1.0, 0, 0, 0], [0, 0, 1.0, 0]])
    R = np.eye(2) * 4.0
    values = []
    for _ in range(200):
        b = GaussianBelief(np.zeros(4), np.diag([25.0, 4.0, 25.0, 4.0]))
        x = rng.multivariate_normal(np.zeros(4), b.cov)
        for _ in range(10):
            x = F @ x + rng.multivariate_normal(np.zeros(4), Q)
            b = predict(b, cfg)
            z = H @ x + rng.multivariate_normal(np.zeros(2), R)
            K = b.cov @ H.T @ np.linalg.inv(H @ b.cov @ H.T + R)
            b = GaussianBelief(b.mean + K @ (z - H @ b.mean), b.cov - K @ H @ b.cov)
        values.append(nees(b, x))
    assert 3.0 <= np.mean(values) <= 5.0
