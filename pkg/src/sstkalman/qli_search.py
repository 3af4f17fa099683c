"""Exhaustive search over the QLI family: when does the QLI arrangement lose?

For g' = c_1 D + ... + c_{nu-2} D^{nu-2} + D^{nu-1} the family code has
m_l^alpha terms in column l of Ginv G (general SST) and m_l^beta = twice
the terms of g_l (QLI SST).  Since a parity over more i.i.d. variables
is strictly more random, tr(Sigma_x) and tr(Sigma_x') order by the term
counts: if some pairing puts every m^alpha at or below its m^beta
partner (one strictly), the general arrangement strictly wins at every
finite SNR, which contradicts the usual reading that QLI pre-decoding is
the safer choice.  Rows where neither pairing works are flagged
indeterminate and deserve the exact trace comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from . import channel, convcode, parity_prob
from .gf2 import BinaryPoly, column_term_count


@dataclass(frozen=True)
class QliSearchRow:
    c_bits: tuple
    m1_alpha: int
    m2_alpha: int
    m1_beta: int
    m2_beta: int
    heuristic_counterexample: bool
    indeterminate: bool
    gprime: BinaryPoly


def _pairing_le(small, big, strict):
    for perm in ((0, 1), (1, 0)):
        ok = all(small[i] <= big[perm[i]] for i in (0, 1))
        if ok and (not strict or any(small[i] < big[perm[i]] for i in (0, 1))):
            return True
    return False


def classify_counts(m_alpha, m_beta):
    """(counterexample, indeterminate) from the two term-count pairs."""
    counterexample = _pairing_le(m_alpha, m_beta, strict=True)
    expected = _pairing_le(m_beta, m_alpha, strict=False)
    return counterexample, (not counterexample and not expected)


def family_counts(code):
    """Term counts (m1_alpha, m2_alpha, m1_beta, m2_beta) for one code."""
    m = convcode.main_encoded_block_map(code, "general")
    m1a = column_term_count(m, 0)
    m2a = column_term_count(m, 1)
    conv = convcode.as_conv(code)
    return m1a, m2a, 2 * conv.g[0].term_count, 2 * conv.g[1].term_count


def enumerate_qli(nu):
    """All 2^(nu-2) family codes of memory nu, in ascending c_1..c_{nu-2} order."""
    if not 3 <= nu <= 12:
        raise ValueError("nu must lie in [3, 12]")
    rows = []
    for bits in product((0, 1), repeat=nu - 2):
        mask = 1 << (nu - 1)
        for pos, c in enumerate(bits, start=1):
            if c:
                mask |= 1 << pos
        gprime = BinaryPoly(mask)
        code = convcode.make_qli(gprime)
        m1a, m2a, m1b, m2b = family_counts(code)
        counter, indet = classify_counts((m1a, m2a), (m1b, m2b))
        rows.append(QliSearchRow(c_bits=bits, m1_alpha=m1a, m2_alpha=m2a,
                                 m1_beta=m1b, m2_beta=m2b,
                                 heuristic_counterexample=counter,
                                 indeterminate=indet, gprime=gprime))
    return rows


@dataclass(frozen=True)
class TracePoint:
    ebn0_db: float
    epsilon: float
    half_tr_sigma_x: float
    half_tr_sigma_x_prime: float
    reversed_order: bool


def trace_compare(code, db_values=channel.DB_GRID, rate=0.5):
    """Exact (1/2) tr Sigma_x versus (1/2) tr Sigma_x' over an SNR grid.

    reversed_order marks points where the general arrangement is strictly
    better (tr Sigma_x < tr Sigma_x')."""
    sa1, sa2 = (parity_prob.support_of(convcode.main_encoded_block_map(code, "general"), c)
                for c in (0, 1))
    sb1, sb2 = (parity_prob.support_of(convcode.main_encoded_block_map(code, "qli"), c)
                for c in (0, 1))
    out = []
    for db in db_values:
        point = channel.snr_point(db, rate)
        eps = point.epsilon

        def half_tr(s1, s2):
            a1 = parity_prob.parity_one_prob(s1, eps)
            a2 = parity_prob.parity_one_prob(s2, eps)
            return 2.0 * (a1 * (1.0 - a1) + a2 * (1.0 - a2))

        tx = half_tr(sa1, sa2)
        txp = half_tr(sb1, sb2)
        out.append(TracePoint(ebn0_db=float(db), epsilon=eps,
                              half_tr_sigma_x=tx, half_tr_sigma_x_prime=txp,
                              reversed_order=bool(tx < txp)))
    return out


def exact_counterexample_snrs(code, db_values=channel.DB_GRID, rate=0.5):
    """Grid points (dB) where tr Sigma_x < tr Sigma_x' exactly."""
    return [p.ebn0_db for p in trace_compare(code, db_values, rate) if p.reversed_order]
