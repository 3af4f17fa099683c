"""Kalman filter, fixed-interval smoother, and Gaussian MI identities."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from sstkalman import kalman


def psd_min_eig(mat):
    return np.linalg.eigvalsh(0.5 * (mat + mat.T)).min()


def test_identity_report_passes_across_models():
    for seed, states, steps in [(3, 3, 8), (0, 1, 6), (11, 4, 10), (42, 2, 7)]:
        report = kalman.identity_report(seed=seed, states=states, steps=steps)
        assert all(chk.passed for chk in report), [
            (chk.name, chk.max_dev) for chk in report if not chk.passed
        ]


def test_scalar_covariance_recursion_by_hand():
    model = kalman.state_space_model(
        np.array([[0.9]]), np.array([[2.0]]), np.array([[0.5]]),
        np.array([[1.5]]), x0_mean=np.array([0.0]), X0=np.array([[1.0]]))
    trace = kalman.covariance_recursion(model, 3)
    m_cov = 1.0
    for step in trace:
        r_cov = 4 * m_cov + 1.5
        gain = 2 * m_cov / r_cov
        p_cov = m_cov - gain * r_cov * gain
        assert_allclose(step.M_k[0, 0], m_cov, atol=1e-14)
        assert_allclose(step.R_k[0, 0], r_cov, atol=1e-14)
        assert_allclose(step.K_k[0, 0], gain, atol=1e-14)
        assert_allclose(step.P_k[0, 0], p_cov, atol=1e-14)
        m_cov = 0.81 * p_cov + 0.5


def test_filter_covariances_are_data_free():
    model = kalman.random_model(4, 3)
    obs_a = kalman.simulate_observations(model, 7, seed=1)
    obs_b = kalman.simulate_observations(model, 7, seed=2)
    trace_a = kalman.run_filter(model, obs_a)
    trace_b = kalman.run_filter(model, obs_b)
    recursion = kalman.covariance_recursion(model, 7)
    for sa, sb, sr in zip(trace_a, trace_b, recursion):
        assert_allclose(sa.P_k, sb.P_k, atol=1e-14)
        assert_allclose(sa.M_k, sr.M_k, atol=1e-14)
        assert_allclose(sa.R_k, sr.R_k, atol=1e-14)
        assert not np.allclose(sa.xhat_filt, sb.xhat_filt)


def test_kf_step_chain_matches_run_filter():
    model = kalman.random_model(9, 2)
    obs = kalman.simulate_observations(model, 5, seed=4)
    trace = kalman.run_filter(model, obs)
    state = None
    for k, z in enumerate(obs):
        state = kalman.kf_step(state, model, z)
        assert state.k == k
        assert_allclose(state.xhat_filt, trace[k].xhat_filt, atol=1e-13)
        assert_allclose(state.P_k, trace[k].P_k, atol=1e-13)


def test_information_form_inverse():
    rng = np.random.default_rng(17)
    for _ in range(20):
        n, m = rng.integers(1, 5), rng.integers(1, 5)
        a = rng.normal(size=(n, n))
        a = a @ a.T + np.eye(n)
        b = rng.normal(size=(m, m))
        b = b @ b.T + np.eye(m)
        c = rng.normal(size=(m, n))
        lhs = kalman.information_form_inverse(a, b, c)
        rhs = np.linalg.inv(np.linalg.inv(a) + c.T @ np.linalg.inv(b) @ c)
        assert_allclose(lhs, rhs, atol=1e-10)


def test_gaussian_mi_three_forms_agree():
    for seed in (1, 5, 9):
        model = kalman.random_model(seed, 1 + seed % 4)
        k = 5
        mi = kalman.gaussian_mi(model, k)
        assert_allclose(mi, kalman.gaussian_mi_prediction_form(model, k),
                        atol=1e-10)
        joint = kalman.joint_observation_covariance(model, k)
        noise = sum(np.linalg.slogdet(np.atleast_2d(model.W_k(j)))[1]
                    for j in range(k + 1))
        assert_allclose(mi, 0.5 * (np.linalg.slogdet(joint)[1] - noise),
                        atol=1e-10)
        assert mi > 0


def test_gaussian_mi_monotone_in_k():
    model = kalman.random_model(2, 3)
    values = [kalman.gaussian_mi(model, k) for k in range(6)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_smoother_reduces_to_filter_at_b_equals_k():
    model = kalman.random_model(6, 3)
    trace = kalman.run_filter(model, kalman.simulate_observations(model, 8, seed=0))
    for k in (0, 3, 7):
        assert_allclose(kalman.smoother_cov(model, trace, k, k),
                        trace[k].P_k, atol=1e-13)


def test_smoother_matches_projection_oracle():
    model = kalman.random_model(8, 2)
    obs = kalman.simulate_observations(model, 9, seed=5)
    trace = kalman.run_filter(model, obs)
    for k, b in [(0, 8), (2, 5), (4, 8), (6, 7)]:
        assert_allclose(kalman.smoother_cov(model, trace, k, b),
                        kalman.projection_smoother_cov(model, k, b), atol=1e-10)
        assert_allclose(kalman.smoothed_estimate(model, trace, k, b),
                        kalman.projection_smoothed_estimate(model, obs, k, b),
                        atol=1e-10)


def test_filter_estimate_is_projection_onto_past():
    model = kalman.random_model(12, 3)
    obs = kalman.simulate_observations(model, 6, seed=8)
    trace = kalman.run_filter(model, obs)
    for k in range(6):
        assert_allclose(trace[k].xhat_filt,
                        kalman.projection_smoothed_estimate(model, obs, k, k),
                        atol=1e-10)


def test_psd_ordering_chain():
    # more conditioning never increases the error covariance
    model = kalman.random_model(13, 4)
    trace = kalman.run_filter(model, kalman.simulate_observations(model, 8, seed=3))
    k = 3
    prev = trace[k].M_k
    assert psd_min_eig(prev - trace[k].P_k) >= -1e-10
    prev = trace[k].P_k
    for b in range(k + 1, 8):
        cur = kalman.smoother_cov(model, trace, k, b)
        assert psd_min_eig(prev - cur) >= -1e-10
        prev = cur


def test_smoother_rejects_k_beyond_b():
    model = kalman.random_model(1, 2)
    trace = kalman.run_filter(model, kalman.simulate_observations(model, 4, seed=0))
    with pytest.raises(ValueError):
        kalman.smoother_cov(model, trace, 3, 1)


def test_simulate_observations_deterministic():
    model = kalman.random_model(4, 2)
    a = kalman.simulate_observations(model, 5, seed=7)
    b = kalman.simulate_observations(model, 5, seed=7)
    c = kalman.simulate_observations(model, 5, seed=8)
    assert_allclose(np.asarray(a), np.asarray(b))
    assert not np.allclose(np.asarray(a), np.asarray(c))
