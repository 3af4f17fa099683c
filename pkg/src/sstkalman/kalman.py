"""Reference Kalman filter, fixed-interval smoother, and identity checks.

Model: x_{k+1} = F_k x_k + u_k,  z_k = H_k x_k + w_k, with u_k ~ N(0, U_k),
w_k ~ N(0, W_k), x_0 ~ N(x0_mean, X0), all independent.  Conventions:

    M_k  prediction covariance  Cov(x_k | z^{k-1})
    P_k  filtering covariance   Cov(x_k | z^k)
    R_k  innovation covariance  W_k + H_k M_k H_k^T
    K_k  gain                   M_k H_k^T R_k^{-1}  (= P_k H_k^T W_k^{-1})

The Gaussian mutual information between the state path and z^k is
(1/2) sum_j log(det R_j / det W_j), which only needs the covariance
recursion, never data.  The smoother uses the filter-to-future
cross-covariances P(k, l+1) = P(k, l) (I - K_l H_l)^T F_l^T seeded by
P(k, k) = P_k; everything here is checked against direct joint-Gaussian
conditioning (the projection forms below).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _as_vector(v, n, name):
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape != (n,):
        raise ValueError(f"{name} must have length {n}")
    return v


def _check_psd(mat, name):
    mat = np.asarray(mat, dtype=np.float64)
    if not np.allclose(mat, mat.T, atol=1e-10):
        raise ValueError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(mat).min() < -1e-10:
        raise ValueError(f"{name} must be positive semidefinite")
    return 0.5 * (mat + mat.T)


def _check_pd(mat, name):
    mat = _check_psd(mat, name)
    try:
        np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        raise ValueError(f"{name} must be positive definite") from None
    return mat


def _wrap(value):
    if callable(value):
        return value
    const = np.asarray(value, dtype=np.float64)
    return lambda k: const


@dataclass(frozen=True)
class StateSpaceModel:
    """Time-varying linear-Gaussian state-space model; F/H/U/W are k -> array."""

    n: int
    m: int
    F_k: object
    H_k: object
    U_k: object
    W_k: object
    x0_mean: np.ndarray
    X0: np.ndarray

    def F(self, k):
        f = np.asarray(self.F_k(k), dtype=np.float64)
        if f.shape != (self.n, self.n):
            raise ValueError(f"F_{k} must be {self.n}x{self.n}")
        if np.linalg.matrix_rank(f) < self.n:
            raise ValueError(f"F_{k} is singular; the smoother recursion needs F invertible")
        return f

    def H(self, k):
        h = np.asarray(self.H_k(k), dtype=np.float64)
        if h.shape != (self.m, self.n):
            raise ValueError(f"H_{k} must be {self.m}x{self.n}")
        return h

    def U(self, k):
        return _check_psd(self.U_k(k), f"U_{k}")

    def W(self, k):
        return _check_pd(self.W_k(k), f"W_{k}")


def state_space_model(F, H, U, W, x0_mean=None, X0=None):
    """Build a model from constants or k -> matrix callables."""
    h0 = np.asarray(_wrap(H)(0), dtype=np.float64)
    if h0.ndim != 2:
        raise ValueError("H must be a matrix (or a callable returning one)")
    m, n = h0.shape
    if x0_mean is None:
        x0_mean = np.zeros(n)
    if X0 is None:
        X0 = np.zeros((n, n))
    return StateSpaceModel(
        n=n, m=m,
        F_k=_wrap(F), H_k=_wrap(H), U_k=_wrap(U), W_k=_wrap(W),
        x0_mean=_as_vector(x0_mean, n, "x0_mean"),
        X0=_check_psd(X0, "X0"),
    )


@dataclass(frozen=True)
class FilterState:
    k: int
    xhat_pred: np.ndarray
    xhat_filt: np.ndarray
    M_k: np.ndarray
    P_k: np.ndarray
    R_k: np.ndarray
    K_k: np.ndarray
    innovation: np.ndarray


def kf_step(state, model, z_k):
    """One measurement update; pass state=None to start at k = 0."""
    if state is None:
        k = 0
        x_pred = model.x0_mean.copy()
        m_cov = model.X0.copy()
    else:
        k = state.k + 1
        f_prev = model.F(state.k)
        x_pred = f_prev @ state.xhat_filt
        m_cov = f_prev @ state.P_k @ f_prev.T + model.U(state.k)
        m_cov = 0.5 * (m_cov + m_cov.T)
    h = model.H(k)
    w = model.W(k)
    z_k = _as_vector(z_k, model.m, "z_k")
    r_cov = w + h @ m_cov @ h.T
    gain = np.linalg.solve(r_cov, h @ m_cov).T
    innovation = z_k - h @ x_pred
    x_filt = x_pred + gain @ innovation
    p_cov = m_cov - gain @ r_cov @ gain.T
    p_cov = 0.5 * (p_cov + p_cov.T)
    return FilterState(k=k, xhat_pred=x_pred, xhat_filt=x_filt,
                       M_k=m_cov, P_k=p_cov, R_k=r_cov, K_k=gain,
                       innovation=innovation)


def run_filter(model, observations):
    states = []
    state = None
    for z in observations:
        state = kf_step(state, model, z)
        states.append(state)
    return states


@dataclass(frozen=True)
class CovStep:
    k: int
    M_k: np.ndarray
    P_k: np.ndarray
    R_k: np.ndarray
    K_k: np.ndarray


def covariance_recursion(model, steps):
    """Data-free covariance trace for k = 0 .. steps-1."""
    if steps < 1:
        raise ValueError("steps must be positive")
    out = []
    m_cov = model.X0.copy()
    for k in range(steps):
        h = model.H(k)
        r_cov = model.W(k) + h @ m_cov @ h.T
        gain = np.linalg.solve(r_cov, h @ m_cov).T
        p_cov = m_cov - gain @ r_cov @ gain.T
        p_cov = 0.5 * (p_cov + p_cov.T)
        out.append(CovStep(k=k, M_k=m_cov, P_k=p_cov, R_k=r_cov, K_k=gain))
        f = model.F(k)
        m_cov = f @ p_cov @ f.T + model.U(k)
        m_cov = 0.5 * (m_cov + m_cov.T)
    return out


def _logdet(mat):
    sign, val = np.linalg.slogdet(mat)
    if sign <= 0:
        raise ValueError("matrix must be positive definite")
    return float(val)


def gaussian_mi(model, k, trace=None):
    """I(x^k; z^k) in nats: (1/2) sum_{j<=k} log(det R_j / det W_j)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if trace is None:
        trace = covariance_recursion(model, k + 1)
    if len(trace) <= k:
        raise ValueError("trace too short")
    return 0.5 * sum(_logdet(trace[j].R_k) - _logdet(model.W(j)) for j in range(k + 1))


def gaussian_mi_prediction_form(model, k, trace=None):
    """Same quantity as (1/2) sum log(det M_j / det P_j); needs M_j nonsingular."""
    if trace is None:
        trace = covariance_recursion(model, k + 1)
    return 0.5 * sum(_logdet(trace[j].M_k) - _logdet(trace[j].P_k) for j in range(k + 1))


def information_form_inverse(a, b, c):
    """(A^-1 + C^T B^-1 C)^-1 evaluated as A - A C^T (C A C^T + B)^-1 C A."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    inner = c @ a @ c.T + b
    return a - a @ c.T @ np.linalg.solve(inner, c @ a)


# ----------------------------------------------------------------- smoothing

def _cross_step(p_kl, model, step_l):
    # P(k, l+1) = P(k, l) (I - K_l H_l)^T F_l^T
    h = model.H(step_l.k)
    closed = np.eye(model.n) - step_l.K_k @ h
    return p_kl @ closed.T @ model.F(step_l.k).T


def smoother_cov(model, trace, k, b):
    """Fixed-interval smoothing covariance Cov(x_k | z^b), k <= b."""
    if k < 0 or b < k:
        raise ValueError("need 0 <= k <= b")
    if len(trace) <= b:
        raise ValueError("trace must cover steps 0..b")
    sigma = trace[k].P_k.copy()
    if b == k:
        return sigma
    p_kl = trace[k].P_k @ model.F(k).T
    for l in range(k + 1, b + 1):
        h = model.H(l)
        g = p_kl @ h.T
        sigma = sigma - g @ np.linalg.solve(trace[l].R_k, g.T)
        if l < b:
            p_kl = _cross_step(p_kl, model, trace[l])
    return 0.5 * (sigma + sigma.T)


def smoothed_estimate(model, states, k, b=None):
    """Fixed-interval smoothed mean xhat_{k|b} from stored filter states."""
    if b is None:
        b = len(states) - 1
    if k < 0 or b < k:
        raise ValueError("need 0 <= k <= b")
    if len(states) <= b:
        raise ValueError("filter states must cover steps 0..b")
    xhat = states[k].xhat_filt.copy()
    if b == k:
        return xhat
    p_kl = states[k].P_k @ model.F(k).T
    for l in range(k + 1, b + 1):
        h = model.H(l)
        xhat = xhat + p_kl @ h.T @ np.linalg.solve(states[l].R_k, states[l].innovation)
        if l < b:
            p_kl = _cross_step(p_kl, model, states[l])
    return xhat


# ----------------------------------------------- direct joint-Gaussian oracle

def _joint_moments(model, k, b):
    """Means and covariances of (x_k, z_0..z_b) by direct propagation."""
    steps = b + 1
    means = [model.x0_mean.copy()]
    covs = [model.X0.copy()]
    top = max(k, b)
    for j in range(top):
        f = model.F(j)
        means.append(f @ means[j])
        covs.append(f @ covs[j] @ f.T + model.U(j))
    # cross[i][j] = Cov(x_i, x_j) for j <= i, built row by row
    cross = {}
    for i in range(top + 1):
        cross[(i, i)] = covs[i]
        for j in range(i):
            prev = cross[(i - 1, j)] if i - 1 >= j else covs[j]
            cross[(i, j)] = model.F(i - 1) @ prev
    def cov_x(i, j):
        if j <= i:
            return cross[(i, j)]
        return cross[(j, i)].T
    m = model.m
    z_mean = np.concatenate([model.H(j) @ means[j] for j in range(steps)])
    z_cov = np.zeros((steps * m, steps * m))
    for i in range(steps):
        hi = model.H(i)
        for j in range(steps):
            block = hi @ cov_x(i, j) @ model.H(j).T
            if i == j:
                block = block + model.W(i)
            z_cov[i * m:(i + 1) * m, j * m:(j + 1) * m] = block
    xz = np.hstack([cov_x(k, j) @ model.H(j).T for j in range(steps)])
    return means[k], covs[k], z_mean, z_cov, xz


def joint_observation_covariance(model, k):
    """Covariance of the stacked observations z_0..z_k."""
    return _joint_moments(model, 0, k)[3]


def projection_smoother_cov(model, k, b):
    """Cov(x_k | z^b) by conditioning the full joint Gaussian (reference form)."""
    _, x_cov, _, z_cov, xz = _joint_moments(model, k, b)
    sigma = x_cov - xz @ np.linalg.solve(z_cov, xz.T)
    return 0.5 * (sigma + sigma.T)


def projection_smoothed_estimate(model, observations, k, b=None):
    """E[x_k | z^b] by conditioning the full joint Gaussian (reference form)."""
    if b is None:
        b = len(observations) - 1
    x_mean, _, z_mean, z_cov, xz = _joint_moments(model, k, b)
    z = np.concatenate([_as_vector(v, model.m, "z") for v in observations[:b + 1]])
    return x_mean + xz @ np.linalg.solve(z_cov, z - z_mean)


# -------------------------------------------------------------- sanity report

def random_model(seed, n, m=None):
    """A well-conditioned time-varying model, deterministic in (seed, k)."""
    if m is None:
        m = n

    def mat(k, tag, shape):
        g = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, k, tag))))
        return g.standard_normal(shape)

    def F(k):
        q, _ = np.linalg.qr(mat(k, 1, (n, n)))
        return 0.95 * q

    def H(k):
        return mat(k, 2, (m, n))

    def U(k):
        a = mat(k, 3, (n, n))
        return a @ a.T / n + 0.1 * np.eye(n)

    def W(k):
        a = mat(k, 4, (m, m))
        return a @ a.T / m + 0.5 * np.eye(m)

    a0 = mat(0, 5, (n, n))
    x0 = a0 @ a0.T / n + 0.5 * np.eye(n)
    return state_space_model(F, H, U, W, x0_mean=np.zeros(n), X0=x0)


def simulate_observations(model, steps, seed):
    """Draw one state/observation path from the model."""
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, 999))))
    x = model.x0_mean + np.linalg.cholesky(model.X0 + 1e-12 * np.eye(model.n)) @ gen.standard_normal(model.n)
    zs = []
    for k in range(steps):
        w = np.linalg.cholesky(model.W(k)) @ gen.standard_normal(model.m)
        zs.append(model.H(k) @ x + w)
        if k < steps - 1:
            u_cov = model.U(k)
            u = np.linalg.cholesky(u_cov + 1e-12 * np.eye(model.n)) @ gen.standard_normal(model.n)
            x = model.F(k) @ x + u
    return zs


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    max_dev: float
    tol: float
    passed: bool


def _neg_eig(mat):
    return max(0.0, -float(np.linalg.eigvalsh(0.5 * (mat + mat.T)).min()))


def identity_report(seed=3, states=3, steps=8, obs=None):
    """Run every filter/smoother identity on a random model; returns checks."""
    if steps < 4:
        raise ValueError("need at least 4 steps")
    model = random_model(seed, states, obs)
    zs = simulate_observations(model, steps, seed)
    fs = run_filter(model, zs)
    trace = covariance_recursion(model, steps)
    b = steps - 1
    tol = 1e-7
    checks = []

    def add(name, dev, tolerance=tol):
        checks.append(IdentityCheck(name=name, max_dev=float(dev), tol=tolerance,
                                    passed=bool(dev <= tolerance)))

    dev = max(np.abs(s.K_k - s.P_k @ model.H(s.k).T @ np.linalg.inv(model.W(s.k))).max()
              for s in fs)
    add("gain-forms-agree", dev)

    dev = 0.0
    for s_prev, s_next in zip(fs, fs[1:]):
        f = model.F(s_prev.k)
        combined = f @ (s_prev.M_k - s_prev.K_k @ s_prev.R_k @ s_prev.K_k.T) @ f.T + model.U(s_prev.k)
        dev = max(dev, np.abs(s_next.M_k - combined).max())
    add("combined-prediction-recursion", dev)

    dev = max(np.abs(fs[j].M_k - trace[j].M_k).max() for j in range(steps))
    add("data-free-covariances-match-filter", dev)

    mi_innov = gaussian_mi(model, b, trace)
    add("mi-forms-agree", abs(mi_innov - gaussian_mi_prediction_form(model, b, trace)))

    z_cov = joint_observation_covariance(model, b)
    stacked = 0.5 * (_logdet(z_cov) - sum(_logdet(model.W(j)) for j in range(steps)))
    add("mi-matches-stacked-determinant", abs(mi_innov - stacked))

    dev = 0.0
    for s in fs:
        h = model.H(s.k)
        lhs = information_form_inverse(s.M_k, model.W(s.k), h)
        dev = max(dev, np.abs(lhs - s.P_k).max())
    add("information-form-matches-filtering", dev)

    add("filtering-below-prediction", max(_neg_eig(s.M_k - s.P_k) for s in fs))

    dev = 0.0
    for k in (0, steps // 2, b):
        dev = max(dev, np.abs(smoother_cov(model, trace, k, b)
                              - projection_smoother_cov(model, k, b)).max())
    add("smoother-matches-projection", dev)

    dev = 0.0
    for k in (0, steps // 2, b):
        dev = max(dev, np.abs(smoothed_estimate(model, fs, k, b)
                              - projection_smoothed_estimate(model, zs, k, b)).max())
    add("smoothed-estimate-matches-projection", dev)

    add("smoothing-never-hurts",
        max(_neg_eig(trace[k].P_k - smoother_cov(model, trace, k, b))
            for k in range(steps)))

    k_mid = steps // 2
    lag1 = smoother_cov(model, trace, k_mid, k_mid + 1)
    lag2 = smoother_cov(model, trace, k_mid, k_mid + 2)
    add("more-data-never-hurts", _neg_eig(lag1 - lag2))

    return checks
