"""Innovation covariances and per-branch mutual information bounds.

The main-decoder input is modeled per branch as r = c*xt + w with
xt = 1 - 2v, Cov(xt) = Sigma_x built from the parity probabilities
(diagonal 4 a_l (1 - a_l), off-diagonal 4 theta), and white w.  Then

    Sigma_r = I + rho Sigma_x          (innovation covariance, rho = c^2)
    Sigma_c = Sigma_x - rho Sigma_x (I + rho Sigma_x)^-1 Sigma_x

Sigma_c is the one-step filtering covariance of xt and (1/2) tr(Sigma_c)
lower-bounds the per-branch Gaussian mutual information
(1/(2 rho)) log det(I + rho Sigma_x), which in turn is below
(1/2) tr(Sigma_x).  Channel-side outer bounds log(1+rho)/rho and
1/(1+rho) plus the binary-input AWGN curve complete the chain.  All
information quantities are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss

from . import channel, convcode, parity_prob


# ---------------------------------------------------------------- covariances

def sigma_x_from_probs(alpha1, alpha2, theta12):
    """Covariance of xt = 1 - 2v from the two marginals and theta."""
    return np.array([
        [4.0 * alpha1 * (1.0 - alpha1), 4.0 * theta12],
        [4.0 * theta12, 4.0 * alpha2 * (1.0 - alpha2)],
    ])


def code_supports(code, mode="general"):
    """Error supports of the two main-encoded components."""
    m = convcode.main_encoded_block_map(code, mode)
    return parity_prob.support_of(m, 0), parity_prob.support_of(m, 1)


def code_sigma_x(code, eps, mode="general"):
    s1, s2 = code_supports(code, mode)
    a1 = parity_prob.parity_one_prob(s1, eps)
    a2 = parity_prob.parity_one_prob(s2, eps)
    th = parity_prob.theta(s1, s2, eps)
    return sigma_x_from_probs(a1, a2, th)


def sigma_x_prime(code, eps):
    """QLI pre-decoder input covariance (both error streams through (g1, g2))."""
    return code_sigma_x(code, eps, mode="qli")


def _check_square(m):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("expected a square matrix")
    return m


def sigma_r(sigma_x, rho):
    """Innovation covariance I + rho Sigma_x."""
    sigma_x = _check_square(sigma_x)
    return np.eye(sigma_x.shape[0]) + rho * sigma_x


def sigma_x_from_sigma_r(sig_r, rho):
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    sig_r = _check_square(sig_r)
    return (sig_r - np.eye(sig_r.shape[0])) / rho


def sigma_c_general(sigma_x, rho):
    """Filtering covariance Sigma_x - rho Sigma_x (I + rho Sigma_x)^-1 Sigma_x."""
    sigma_x = _check_square(sigma_x)
    n = sigma_x.shape[0]
    core = np.linalg.solve(np.eye(n) + rho * sigma_x, sigma_x)
    out = sigma_x - rho * sigma_x @ core
    return 0.5 * (out + out.T)


def sigma_c_closed_2x2(sigma_x, rho):
    """Closed 2x2 form; returns (Sigma_c, delta_x, delta_r).

    delta_x = det Sigma_x and delta_r = det(I + rho Sigma_x)
            = 1 + rho (s1 + s2 + rho delta_x).
    """
    sigma_x = _check_square(sigma_x)
    if sigma_x.shape != (2, 2):
        raise ValueError("closed form is for 2x2 matrices")
    s1, s2 = sigma_x[0, 0], sigma_x[1, 1]
    s12 = sigma_x[0, 1]
    delta_x = s1 * s2 - s12 * s12
    delta_r = 1.0 + rho * (s1 + s2 + rho * delta_x)
    mat = np.array([
        [s1 + rho * delta_x, s12],
        [s12, s2 + rho * delta_x],
    ]) / delta_r
    return mat, delta_x, delta_r


@dataclass(frozen=True)
class CovPair:
    rho: float
    sigma_x: np.ndarray
    sigma_r: np.ndarray
    sigma_c: np.ndarray
    delta_x: float
    delta_r: float


def cov_pair(sigma_x, rho):
    sigma_x = _check_square(sigma_x)
    if sigma_x.shape == (2, 2):
        sig_c, dx, dr = sigma_c_closed_2x2(sigma_x, rho)
    else:
        sig_c = sigma_c_general(sigma_x, rho)
        dx = float(np.linalg.det(sigma_x))
        dr = float(np.linalg.det(sigma_r(sigma_x, rho)))
    return CovPair(rho=float(rho), sigma_x=sigma_x, sigma_r=sigma_r(sigma_x, rho),
                   sigma_c=sig_c, delta_x=float(dx), delta_r=float(dr))


# ------------------------------------------------------------- eigen tracking

@dataclass(frozen=True)
class EigenTrack:
    """Sigma_c eigenvalues at one rho, their trace-form approximations, and
    the derivative of rho*lambda_l along rho (central difference)."""

    rho: float
    lambdas: tuple
    lambda_tilde_1: float
    lambda_tilde_2: float
    d_rho_lambda: tuple


def _as_provider(provider):
    if callable(provider):
        return provider
    const = _check_square(provider)
    return lambda rho: const


def eigen_track(provider, rho, h=1e-4):
    """Track Sigma_c eigenvalues for Sigma_x = provider(rho).

    provider is a callable rho -> Sigma_x (a constant matrix is accepted
    and wrapped); h is the relative step of the central difference on
    rho * lambda_l(rho).
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if not 0.0 < h < 0.5:
        raise ValueError("h must be a small positive relative step")
    prov = _as_provider(provider)

    def rho_lambdas(r):
        lam = np.linalg.eigvalsh(sigma_c_general(prov(r), r))
        return r * lam

    sig_x = prov(rho)
    lam = tuple(float(v) for v in np.linalg.eigvalsh(sigma_c_general(sig_x, rho)))
    mat, _, dr = sigma_c_closed_2x2(sig_x, rho) if sig_x.shape == (2, 2) else (None, None, None)
    if mat is not None:
        half_tr = 0.5 * (mat[0, 0] + mat[1, 1])
        off = sig_x[0, 1] / dr
        lt1, lt2 = half_tr - off, half_tr + off
    else:
        lt1 = lt2 = float("nan")
    delta = h * rho
    d = (rho_lambdas(rho + delta) - rho_lambdas(rho - delta)) / (2.0 * delta)
    return EigenTrack(rho=float(rho), lambdas=lam,
                      lambda_tilde_1=float(lt1), lambda_tilde_2=float(lt2),
                      d_rho_lambda=tuple(float(v) for v in d))


def fixed_eps_provider(code, eps, mode="general"):
    """Provider that holds the crossover probability fixed as rho varies."""
    const = code_sigma_x(code, eps, mode)
    return lambda rho: const


def coupled_provider(code, mode="general"):
    """Provider that couples eps = Q(sqrt(rho)) to rho, as on the Eb/N0 grid."""
    def prov(rho):
        return code_sigma_x(code, channel.q_function(math.sqrt(rho)), mode)
    return prov


# ------------------------------------------------------------------ MI bounds

def mi_gauss_bound(sigma_x, rho):
    """(1/2) log det(I + rho Sigma_x), nats per branch (Gaussian input)."""
    sign, logdet = np.linalg.slogdet(sigma_r(sigma_x, rho))
    if sign <= 0:
        raise ValueError("I + rho Sigma_x must be positive definite")
    return 0.5 * float(logdet)


def mi_gauss_bound_per_rho(sigma_x, rho):
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    return mi_gauss_bound(sigma_x, rho) / rho


class BoundChain(tuple):
    """Ordered per-branch bound chain (all in nats per unit rho):

    half_tr_sigma_c <= gauss_per_rho <= half_tr_sigma_x, with the
    channel-side ceilings inv_one_plus_rho (on half_tr_sigma_c) and
    log1p_rho_over_rho (on gauss_per_rho).
    """

    __slots__ = ()

    def __new__(cls, half_tr_sigma_c, gauss_per_rho, half_tr_sigma_x,
                inv_one_plus_rho, log1p_rho_over_rho):
        return super().__new__(cls, (half_tr_sigma_c, gauss_per_rho, half_tr_sigma_x,
                                     inv_one_plus_rho, log1p_rho_over_rho))

    half_tr_sigma_c = property(lambda self: self[0])
    gauss_per_rho = property(lambda self: self[1])
    half_tr_sigma_x = property(lambda self: self[2])
    inv_one_plus_rho = property(lambda self: self[3])
    log1p_rho_over_rho = property(lambda self: self[4])


def bound_chain(sigma_x, rho):
    pair = cov_pair(sigma_x, rho)
    return BoundChain(
        half_tr_sigma_c=0.5 * float(np.trace(pair.sigma_c)),
        gauss_per_rho=mi_gauss_bound_per_rho(sigma_x, rho),
        half_tr_sigma_x=0.5 * float(np.trace(pair.sigma_x)),
        inv_one_plus_rho=1.0 / (1.0 + rho),
        log1p_rho_over_rho=math.log1p(rho) / rho,
    )


@lru_cache(maxsize=8)
def _gh_nodes(nodes):
    t, w = hermgauss(nodes)
    return t, w


def _log_cosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


def binary_input_mi(rho, nodes=128):
    """Mutual information of BPSK over AWGN at rho = c^2, in nats.

    I(rho) = rho - E[log cosh(rho - sqrt(rho) Y)], Y standard normal,
    evaluated by Gauss-Hermite quadrature (nodes >= 96 keeps the absolute
    error well under 1e-6 across the grid).
    """
    if rho < 0.0:
        raise ValueError("rho must be non-negative")
    if nodes < 96:
        raise ValueError("use at least 96 quadrature nodes")
    if rho == 0.0:
        return 0.0
    t, w = _gh_nodes(nodes)
    vals = _log_cosh(rho - math.sqrt(rho) * math.sqrt(2.0) * t)
    expect = float(np.dot(w, vals)) / math.sqrt(math.pi)
    return max(rho - expect, 0.0)


def mi_per_branch_bound(sigma_x, rho):
    """min of the Gaussian-input bound and the binary-input ceiling, per unit rho."""
    return min(mi_gauss_bound_per_rho(sigma_x, rho),
               2.0 * binary_input_mi(rho) / rho)


# ------------------------------------------------------------------ MC oracle

def monte_carlo_sigma_r(code, point, trials, seed, mode="general"):
    """Empirical Sigma_r from the branch model r = c(1-2v) + w.

    Draws an independent error window per trial, so entries come with
    honest empirical standard errors; returns (Sigma_r_hat, se)."""
    if trials < 2:
        raise ValueError("need at least two trials")
    s1, s2 = code_supports(code, mode)
    depth = max(s1.max_delay, s2.max_delay) + 1
    gen = channel.make_rng(seed)
    errors = (gen.random((trials, depth, 2)) < point.epsilon).astype(np.uint8)
    v = np.zeros((trials, 2), dtype=np.uint8)
    for col, support in enumerate((s1, s2)):
        for comp, delay in support.vars:
            v[:, col] ^= errors[:, delay, comp - 1]
    r = point.c * (1.0 - 2.0 * v.astype(np.float64))
    r += channel.standard_normals(gen, r.shape)
    centered = r - r.mean(axis=0)
    sigma_hat = (centered.T @ centered) / (trials - 1)
    se = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            prod = centered[:, i] * centered[:, j]
            se[i, j] = prod.std(ddof=1) / math.sqrt(trials)
    return sigma_hat, se


# ---------------------------------------------------------------------- sweep

@dataclass(frozen=True)
class SweepRow:
    """Everything the tables and curves need at one SNR point.

    The alpha-side fields always refer to the general SST map; beta-side
    fields are None for codes without the quick-look-in property.  Bound
    and eigenvalue fields follow the sweep mode (general uses Sigma_x,
    qli uses Sigma_x')."""

    ebn0_db: float
    rho: float
    epsilon: float
    alpha1: float
    alpha2: float
    alpha11: float
    theta12: float
    sigma1_sq: float
    sigma2_sq: float
    half_tr_sigma_x: float
    beta1: object
    beta2: object
    beta11: object
    theta12_prime: object
    sigma1_sq_prime: object
    sigma2_sq_prime: object
    half_tr_sigma_x_prime: object
    half_tr_sigma_c: float
    half_rho_tr_sigma_c: float
    gauss_per_rho: float
    inv_one_plus_rho: float
    log1p_rho_over_rho: float
    two_i_over_rho: float
    lambda1: float
    lambda2: float
    lambda_tilde_1: float
    lambda_tilde_2: float
    rho_lambda_tilde_1: float
    rho_lambda_tilde_max: float


def sweep_row(code, point, mode="general"):
    if mode not in ("general", "qli"):
        raise ValueError(f"unknown mode {mode!r}")
    eps = point.epsilon
    rho = point.rho
    s1, s2 = code_supports(code, "general")
    a1 = parity_prob.parity_one_prob(s1, eps)
    a2 = parity_prob.parity_one_prob(s2, eps)
    a11 = parity_prob.joint_parity_prob(s1, s2, eps)
    th = a11 - a1 * a2
    sig_x = sigma_x_from_probs(a1, a2, th)

    beta1 = beta2 = beta11 = th_p = None
    s1p_sq = s2p_sq = half_tr_xp = None
    sig_xp = None
    try:
        qli = convcode.as_qli(code)
    except ValueError:
        qli = None
    if qli is not None:
        t1, t2 = code_supports(code, "qli")
        beta1 = parity_prob.parity_one_prob(t1, eps)
        beta2 = parity_prob.parity_one_prob(t2, eps)
        beta11 = parity_prob.joint_parity_prob(t1, t2, eps)
        th_p = beta11 - beta1 * beta2
        sig_xp = sigma_x_from_probs(beta1, beta2, th_p)
        s1p_sq = sig_xp[0, 0]
        s2p_sq = sig_xp[1, 1]
        half_tr_xp = 0.5 * (s1p_sq + s2p_sq)

    if mode == "qli":
        if sig_xp is None:
            raise ValueError(f"{code.name!r} is not quick-look-in; qli mode unavailable")
        sig_main = sig_xp
    else:
        sig_main = sig_x
    chain = bound_chain(sig_main, rho)
    track = eigen_track(lambda _r: sig_main, rho)
    return SweepRow(
        ebn0_db=point.ebn0_db,
        rho=rho,
        epsilon=eps,
        alpha1=a1,
        alpha2=a2,
        alpha11=a11,
        theta12=th,
        sigma1_sq=sig_x[0, 0],
        sigma2_sq=sig_x[1, 1],
        half_tr_sigma_x=0.5 * (sig_x[0, 0] + sig_x[1, 1]),
        beta1=beta1,
        beta2=beta2,
        beta11=beta11,
        theta12_prime=th_p,
        sigma1_sq_prime=s1p_sq,
        sigma2_sq_prime=s2p_sq,
        half_tr_sigma_x_prime=half_tr_xp,
        half_tr_sigma_c=chain.half_tr_sigma_c,
        half_rho_tr_sigma_c=rho * chain.half_tr_sigma_c,
        gauss_per_rho=chain.gauss_per_rho,
        inv_one_plus_rho=chain.inv_one_plus_rho,
        log1p_rho_over_rho=chain.log1p_rho_over_rho,
        two_i_over_rho=2.0 * binary_input_mi(rho) / rho,
        lambda1=track.lambdas[0],
        lambda2=track.lambdas[1],
        lambda_tilde_1=track.lambda_tilde_1,
        lambda_tilde_2=track.lambda_tilde_2,
        rho_lambda_tilde_1=rho * track.lambda_tilde_1,
        rho_lambda_tilde_max=rho * track.lambda_tilde_2,
    )


def sweep(code, db_values=channel.DB_GRID, rate=0.5, mode="general"):
    return [sweep_row(code, channel.snr_point(db, rate), mode) for db in db_values]
