"""Exact parity probabilities for linear images of i.i.d. channel errors.

The hard-decision error pair e is i.i.d. Bernoulli(eps) per component.
A main-encoded bit is a parity v = sum of e over a support set of
(component, delay) variables, so with q = 1 - 2 eps:

    P(v = 1)          = (1 - q^n) / 2                       (n support vars)
    P(v1 = 1, v2 = 1) = (1 + q^(a+b) - q^(a+c) - q^(b+c)) / 4

where a and b count variables exclusive to each support and c counts the
shared ones.  Everything here is a polynomial in eps with integer
coefficients; the polynomial forms are exposed exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from . import channel, convcode
from .gf2 import BinaryPolyMatrix


@dataclass(frozen=True)
class ErrorSupport:
    """A set of (component, delay) error variables; components are 1-based."""

    vars: frozenset

    def __post_init__(self):
        pairs = frozenset((int(c), int(d)) for c, d in self.vars)
        if any(c < 1 or d < 0 for c, d in pairs):
            raise ValueError("variables are (component >= 1, delay >= 0) pairs")
        object.__setattr__(self, "vars", pairs)

    @classmethod
    def from_pairs(cls, pairs):
        return cls(vars=frozenset(pairs))

    def __len__(self):
        return len(self.vars)

    def __iter__(self):
        return iter(sorted(self.vars))

    @property
    def max_delay(self):
        return max((d for _, d in self.vars), default=0)


def support_of(m, col):
    """Error support of one column of a main-encoded block map."""
    if not isinstance(m, BinaryPolyMatrix):
        raise TypeError("expected BinaryPolyMatrix")
    nrows, ncols = m.shape
    if not 0 <= col < ncols:
        raise ValueError(f"column {col} out of range for shape {m.shape}")
    pairs = set()
    for i in range(nrows):
        for j in m[i, col].support():
            pairs.add((i + 1, j))
    return ErrorSupport.from_pairs(pairs)


def _check_eps(eps):
    eps = float(eps)
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    return eps


def _size(s):
    return len(s) if isinstance(s, ErrorSupport) else int(s)


def parity_one_prob(n, eps):
    """P(parity of n i.i.d. Bernoulli(eps) variables is 1); n may be an ErrorSupport."""
    n = _size(n)
    if n < 0:
        raise ValueError("n must be non-negative")
    eps = _check_eps(eps)
    return 0.5 * (1.0 - (1.0 - 2.0 * eps) ** n)


def _split_sizes(s1, s2):
    a = len(s1.vars - s2.vars)
    b = len(s2.vars - s1.vars)
    c = len(s1.vars & s2.vars)
    return a, b, c


def joint_parity_prob(s1, s2, eps):
    """P(both parities are 1) for two supports over the same error field."""
    eps = _check_eps(eps)
    a, b, c = _split_sizes(s1, s2)
    q = 1.0 - 2.0 * eps
    return 0.25 * (1.0 + q ** (a + b) - q ** (a + c) - q ** (b + c))


def joint_value_prob(supports, values, eps):
    """P(v_j = values[j] for all j), by inclusion-exclusion over subsets.

    Exponential in len(supports); meant for the handful of parities a code
    analysis needs, not for large systems.
    """
    eps = _check_eps(eps)
    supports = list(supports)
    values = list(values)
    if len(supports) != len(values):
        raise ValueError("supports and values must have equal length")
    if any(v not in (0, 1) for v in values):
        raise ValueError("values must be 0/1")
    m = len(supports)
    q = 1.0 - 2.0 * eps
    total = 0.0
    for r in range(m + 1):
        for subset in combinations(range(m), r):
            sym = frozenset()
            for j in subset:
                sym = sym ^ supports[j].vars
            sign = -1.0 if sum(values[j] for j in subset) % 2 else 1.0
            total += sign * q ** len(sym)
    return total / 2.0 ** m


def brute_force_joint(s1, s2, eps):
    """Literal enumeration oracle for joint_parity_prob; |union| <= 24."""
    eps = _check_eps(eps)
    union = sorted(s1.vars | s2.vars)
    nu = len(union)
    if nu > 24:
        raise ValueError("union larger than 24 variables; enumeration refused")
    index = {v: i for i, v in enumerate(union)}
    m1 = sum(1 << index[v] for v in s1.vars)
    m2 = sum(1 << index[v] for v in s2.vars)
    weight_counts = np.zeros(nu + 1, dtype=np.int64)
    chunk = 1 << 20
    for start in range(0, 1 << nu, chunk):
        k = np.arange(start, min(start + chunk, 1 << nu), dtype=np.uint64)
        both = (np.bitwise_count(k & np.uint64(m1)) & 1) & (np.bitwise_count(k & np.uint64(m2)) & 1)
        if both.any():
            w = np.bitwise_count(k[both.astype(bool)])
            weight_counts += np.bincount(w, minlength=nu + 1).astype(np.int64)
    weights = np.arange(nu + 1, dtype=np.float64)
    return float(np.sum(weight_counts * eps ** weights * (1.0 - eps) ** (nu - weights)))


@dataclass(frozen=True)
class EpsPolynomial:
    """Polynomial in eps with integer coefficients, ascending order."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("need at least one coefficient")
        object.__setattr__(self, "coefficients", coeffs)

    def __call__(self, eps):
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * eps + c
        return acc

    @property
    def degree(self):
        nz = [k for k, c in enumerate(self.coefficients) if c]
        return nz[-1] if nz else 0

    def _binary(self, other, op):
        a, b = self.coefficients, EpsPolynomial._coeffs(other)
        width = max(len(a), len(b))
        out = [op(a[k] if k < len(a) else 0, b[k] if k < len(b) else 0) for k in range(width)]
        return EpsPolynomial(tuple(out))

    @staticmethod
    def _coeffs(other):
        if isinstance(other, EpsPolynomial):
            return other.coefficients
        return (int(other),)

    def __add__(self, other):
        return self._binary(other, lambda x, y: x + y)

    def __sub__(self, other):
        return self._binary(other, lambda x, y: x - y)

    def __mul__(self, other):
        b = EpsPolynomial._coeffs(other)
        a = self.coefficients
        out = [0] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
        return EpsPolynomial(tuple(out))

    def trimmed(self):
        coeffs = list(self.coefficients)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        return EpsPolynomial(tuple(coeffs))

    def __str__(self):
        return " + ".join(f"{c}*eps^{k}" for k, c in enumerate(self.coefficients) if c) or "0"


def marginal_polynomial(n):
    """parity_one_prob(n, eps) expanded exactly in eps."""
    n = _size(n)
    if not 0 <= n <= 30:
        raise ValueError("n must lie in [0, 30]")
    coeffs = [0] + [comb(n, k) * (-1) ** (k + 1) * 2 ** (k - 1) for k in range(1, n + 1)]
    return EpsPolynomial(tuple(coeffs) if n else (0,))


def _q_power_coeff(n, k):
    # coefficient of eps^k in (1 - 2 eps)^n
    if k > n:
        return 0
    return comb(n, k) * (-2) ** k


def joint_polynomial(s1, s2):
    """joint_parity_prob expanded exactly in eps."""
    a, b, c = _split_sizes(s1, s2)
    coeffs = []
    for k in range(a + b + c + 1):
        val = Fraction(
            (1 if k == 0 else 0)
            + _q_power_coeff(a + b, k)
            - _q_power_coeff(a + c, k)
            - _q_power_coeff(b + c, k),
            4,
        )
        if val.denominator != 1:
            raise AssertionError("joint expansion must have integer coefficients")
        coeffs.append(int(val))
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return EpsPolynomial(tuple(coeffs))


def theta(s1, s2, eps):
    """Covariance-style term: P(v1=1, v2=1) - P(v1=1) P(v2=1)."""
    return joint_parity_prob(s1, s2, eps) - parity_one_prob(s1, eps) * parity_one_prob(s2, eps)


def theta_four_ways(s1, s2, eps):
    """The four equivalent expressions for theta, from the 2x2 value table."""
    p1 = parity_one_prob(s1, eps)
    p2 = parity_one_prob(s2, eps)
    p00 = joint_value_prob([s1, s2], [0, 0], eps)
    p01 = joint_value_prob([s1, s2], [0, 1], eps)
    p10 = joint_value_prob([s1, s2], [1, 0], eps)
    p11 = joint_value_prob([s1, s2], [1, 1], eps)
    return (
        p00 - (1.0 - p1) * (1.0 - p2),
        (1.0 - p1) * p2 - p01,
        p1 * (1.0 - p2) - p10,
        p11 - p1 * p2,
    )


def alpha_tilde_family(alpha_i, alpha_j, u):
    """Joint 2x2 tables with the given marginals, parameterized by u = P(1,1).

    Valid for 0 <= u <= min(alpha_i, alpha_j) as long as the (0,0) cell
    stays non-negative.  The i.i.d.-error model picks u = alpha_11.
    """
    if not 0.0 <= u <= min(alpha_i, alpha_j):
        raise ValueError("u must lie in [0, min(alpha_i, alpha_j)]")
    table = {
        (0, 0): 1.0 - alpha_i - alpha_j + u,
        (0, 1): alpha_j - u,
        (1, 0): alpha_i - u,
        (1, 1): u,
    }
    if table[(0, 0)] < 0.0:
        raise ValueError("u too small for these marginals: P(0,0) would be negative")
    return table


@dataclass(frozen=True)
class MonteCarloProbs:
    alpha1: float
    alpha2: float
    alpha11: float
    se_alpha1: float
    se_alpha2: float
    se_alpha11: float
    trials: int


def monte_carlo_probs(code, eps, trials, seed, mode="general"):
    """Estimate alpha1, alpha2, alpha11 by pushing i.i.d. errors through the block map.

    Each trial draws a fresh error window, so the estimators are i.i.d.
    and the reported standard errors are exact binomial ones.
    """
    eps = _check_eps(eps)
    if trials < 1:
        raise ValueError("trials must be positive")
    m = convcode.main_encoded_block_map(code, mode)
    s1 = support_of(m, 0)
    s2 = support_of(m, 1)
    depth = max(s1.max_delay, s2.max_delay) + 1
    gen = channel.make_rng(seed)
    errors = (gen.random((trials, depth, 2)) < eps).astype(np.uint8)
    v = [np.zeros(trials, dtype=np.uint8), np.zeros(trials, dtype=np.uint8)]
    for out, support in ((v[0], s1), (v[1], s2)):
        for comp, delay in support.vars:
            out ^= errors[:, delay, comp - 1]
    both = v[0] & v[1]
    est = [float(np.mean(x)) for x in (v[0], v[1], both)]
    ses = [float(np.sqrt(p * (1.0 - p) / trials)) for p in est]
    return MonteCarloProbs(alpha1=est[0], alpha2=est[1], alpha11=est[2],
                           se_alpha1=ses[0], se_alpha2=ses[1], se_alpha11=ses[2],
                           trials=trials)
