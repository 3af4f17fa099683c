"""Scarce-state-transition (SST) Viterbi decoding.

The pre-decoder applies the polynomial right inverse to the hard
decisions (QLI codes just add the two streams), re-encodes the result,
and hands the main Viterbi decoder a re-signed soft stream whose hard
part is v + e: the main-encoded stream v = e (Ginv G) buried in the
original channel errors e.  At useful SNR v is mostly zero, which is
the whole point of the construction.  The final output is the
pre-decoder stream corrected by the main decoder's estimate.

The main decoder is a conventional max-correlation Viterbi over the
2^nu-state trellis with per-step truncated traceback.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channel, convcode, parity_prob
from .convcode import as_conv, as_qli


@dataclass(frozen=True)
class SoftInputBlock:
    """Main-decoder input for one branch: soft pair and its hard decisions."""

    r: tuple
    r_hard: tuple


class SoftInput:
    """Main-decoder input sequence: soft values (n, 2) and hard parts (n, 2)."""

    __slots__ = ("r", "r_hard")

    def __init__(self, r, r_hard=None):
        r = np.asarray(r, dtype=np.float64)
        if r.ndim != 2 or r.shape[1] != 2:
            raise ValueError("r must have shape (n, 2)")
        self.r = r
        if r_hard is None:
            r_hard = (r < 0.0).astype(np.uint8)
        else:
            r_hard = np.asarray(r_hard, dtype=np.uint8)
            if r_hard.shape != r.shape:
                raise ValueError("r_hard shape must match r")
        self.r_hard = r_hard

    def __len__(self):
        return self.r.shape[0]

    def block(self, k):
        return SoftInputBlock(r=(float(self.r[k, 0]), float(self.r[k, 1])),
                              r_hard=(int(self.r_hard[k, 0]), int(self.r_hard[k, 1])))


def predecode(z_hard, code, mode="general"):
    """Instantaneous information estimate from hard decisions.

    general: ihat = z_hard Ginv (exact inverse, zero delay on clean input).
    qli:     adds the two streams; estimates i delayed by L.
    """
    z_hard = np.asarray(z_hard, dtype=np.uint8)
    if z_hard.ndim != 2 or z_hard.shape[1] != 2:
        raise ValueError("z_hard must have shape (n, 2)")
    if mode == "general":
        conv = as_conv(code)
        out = convcode._tap_xor(z_hard[:, 0], conv.ginv[0])
        convcode._tap_xor(z_hard[:, 1], conv.ginv[1], out=out)
        return out
    if mode == "qli":
        as_qli(code)
        return z_hard[:, 0] ^ z_hard[:, 1]
    raise ValueError(f"unknown mode {mode!r}")


def main_input_general(z, code):
    """Re-signed main-decoder input: hard part = re-encoded pre-decode XOR z_hard."""
    conv = as_conv(code)
    ihat = predecode(z.z_hard, conv, "general")
    reenc = convcode.encode(conv, ihat)
    r_hard = reenc ^ z.z_hard
    r = np.abs(z.z) * (1.0 - 2.0 * r_hard)
    return SoftInput(r=r, r_hard=r_hard)


def main_input_qli(z, code):
    """QLI main-decoder input, length n - L (the look-in delay is consumed)."""
    qli = as_qli(code)
    n = len(z)
    L = qli.L
    if n <= L:
        raise ValueError("block shorter than the look-in delay")
    itilde = predecode(z.z_hard, qli, "qli")
    reenc = convcode.encode(qli, itilde)
    r_hard = reenc[L:, :] ^ z.z_hard[: n - L, :]
    r = np.abs(z.z[: n - L, :]) * (1.0 - 2.0 * r_hard)
    return SoftInput(r=r, r_hard=r_hard)


# -------------------------------------------------------------------- trellis

@dataclass(frozen=True)
class TrellisState:
    """Snapshot of one state: register value, path metric, survivor back-pointer."""

    register: int
    metric: float
    survivor: object


class Trellis:
    """Tabulated 2^nu-state trellis of a rate-1/2 code.

    State bit j holds the input from j+1 steps ago; the branch register
    for (state, input u) is (state << 1) | u, so output l is the parity
    of g_l AND register.
    """

    def __init__(self, code):
        conv = as_conv(code)
        nu = conv.nu
        nstates = 1 << nu
        regs = ((np.arange(nstates, dtype=np.uint64)[:, None] << np.uint64(1))
                | np.arange(2, dtype=np.uint64)[None, :])
        self.nu = nu
        self.nstates = nstates
        self.next_state = ((regs & np.uint64(nstates - 1))).astype(np.int64)
        self.out_bits = np.empty((nstates, 2, 2), dtype=np.uint8)
        for l in (0, 1):
            mask = np.uint64(conv.g[l].mask)
            self.out_bits[:, :, l] = (np.bitwise_count(regs & mask) & 1).astype(np.uint8)
        self.branch_sign = 1.0 - 2.0 * self.out_bits.astype(np.float64)
        # predecessor indexing for the add-compare-select step
        ns = np.arange(nstates, dtype=np.int64)
        self.pred0 = ns >> 1
        self.pred1 = (ns >> 1) | (1 << (nu - 1))
        self.in_bit = (ns & 1).astype(np.int64)

    def initial_states(self):
        return [TrellisState(register=s, metric=0.0 if s == 0 else -np.inf, survivor=None)
                for s in range(self.nstates)]


def default_truncation(code):
    conv = as_conv(code)
    try:
        ell = as_qli(code).L
    except ValueError:
        ell = 0
    return 5 * conv.nu + ell


def viterbi_main(r, code, truncation=None):
    """Max-correlation Viterbi; decodes the information sequence of the code.

    The encoder is assumed to start in the zero state.  Decisions are
    emitted per step from the best-metric survivor at depth `truncation`
    (default 5 nu + L); ties prefer the input-0 branch and the
    lowest-index state.
    """
    conv = as_conv(code)
    if isinstance(r, SoftInput):
        soft = r
    else:
        soft = SoftInput(np.asarray(r, dtype=np.float64))
    if truncation is None:
        truncation = default_truncation(code)
    if truncation < 5 * conv.nu:
        raise ValueError(f"truncation must be at least 5*nu = {5 * conv.nu}")
    trellis = Trellis(conv)
    n = len(soft)
    out = np.zeros(n, dtype=np.uint8)
    if n == 0:
        return out
    nstates = trellis.nstates
    top = trellis.nu - 1
    metrics = np.full(nstates, -1e30)
    metrics[0] = 0.0
    choices = np.zeros((n, nstates), dtype=np.uint8)
    pred0, pred1, in_bit = trellis.pred0, trellis.pred1, trellis.in_bit
    sign0 = trellis.branch_sign[pred0, in_bit, 0]
    sign1 = trellis.branch_sign[pred0, in_bit, 1]
    sign0b = trellis.branch_sign[pred1, in_bit, 0]
    sign1b = trellis.branch_sign[pred1, in_bit, 1]
    r0 = np.ascontiguousarray(soft.r[:, 0])
    r1 = np.ascontiguousarray(soft.r[:, 1])

    def walk_back(state, level, stop_level):
        # choices[t] maps a level-(t+1) state to its level-t predecessor
        for t in range(level - 1, stop_level - 1, -1):
            state = (state >> 1) | (int(choices[t, state]) << top)
        return state

    for k in range(n):
        cand0 = metrics[pred0] + r0[k] * sign0 + r1[k] * sign1
        cand1 = metrics[pred1] + r0[k] * sign0b + r1[k] * sign1b
        take1 = cand1 > cand0
        metrics = np.where(take1, cand1, cand0)
        choices[k] = take1
        if k >= truncation:
            tau = k - truncation
            state = walk_back(int(np.argmax(metrics)), k + 1, tau + 1)
            out[tau] = state & 1
    state = int(np.argmax(metrics))
    first_unstreamed = max(n - truncation, 0)
    for t in range(n - 1, first_unstreamed - 1, -1):
        out[t] = state & 1
        state = (state >> 1) | (int(choices[t, state]) << top)
    return out


def classical_viterbi(z, code, truncation=None):
    """Plain Viterbi on the received stream itself (the SST-free reference)."""
    return viterbi_main(SoftInput(z.z), code, truncation)


def sst_decode(z, code, mode="general", truncation=None):
    """Full SST decode: pre-decode, main decode, recombine.

    general mode returns n bits; qli mode returns n - L bits (estimates
    of i_0 .. i_{n-L-1}).
    """
    if mode == "general":
        conv = as_conv(code)
        ihat = predecode(z.z_hard, conv, "general")
        soft = main_input_general(z, conv)
        return ihat ^ viterbi_main(soft, conv, truncation)
    if mode == "qli":
        qli = as_qli(code)
        itilde = predecode(z.z_hard, qli, "qli")
        soft = main_input_qli(z, qli)
        what = viterbi_main(soft, qli, truncation)
        return itilde[qli.L:] ^ what
    raise ValueError(f"unknown mode {mode!r}")


# ----------------------------------------------------------------- simulation

@dataclass(frozen=True)
class SimulationResult:
    ebn0_db: float
    branches: int
    pre_ber: float
    post_ber: float
    emp_alpha1: float
    emp_alpha2: float
    emp_alpha11: float
    se_alpha1: float
    se_alpha2: float
    se_alpha11: float
    stride: int
    n_eff: int


def simulate(code, point, branches, seed, mode="general", truncation=None):
    """End-to-end Monte Carlo run at one SNR point.

    pre_ber is the pre-decoder's raw error rate, post_ber the full SST
    error rate.  emp_alpha* are frequencies of the main-encoded stream v
    (recovered exactly as hard-part XOR e), subsampled at a stride wider
    than the support depth so the estimates are independent and the
    binomial standard errors honest.
    """
    if branches < 100:
        raise ValueError("need at least 100 branches")
    conv = as_conv(code)
    info = (channel.make_rng((seed, 1)).random(branches) < 0.5).astype(np.uint8)
    y = convcode.encode(conv, info)
    z = channel.transmit(y, point, seed)
    e = z.z_hard ^ y

    s1, s2 = (parity_prob.support_of(convcode.main_encoded_block_map(code, mode), col)
              for col in (0, 1))
    stride = max(s1.max_delay, s2.max_delay) + 1

    if mode == "general":
        ihat = predecode(z.z_hard, conv, "general")
        soft = main_input_general(z, conv)
        decoded = ihat ^ viterbi_main(soft, conv, truncation)
        pre_stream, post_stream, truth = ihat, decoded, info
        v = soft.r_hard ^ e
    elif mode == "qli":
        qli = as_qli(code)
        L = qli.L
        itilde = predecode(z.z_hard, qli, "qli")
        soft = main_input_qli(z, qli)
        decoded = itilde[L:] ^ viterbi_main(soft, qli, truncation)
        pre_stream, post_stream, truth = itilde[L:], decoded, info[:branches - L]
        v = soft.r_hard ^ e[: branches - L, :]
    else:
        raise ValueError(f"unknown mode {mode!r}")

    # drop the warmup window where v's support sticks out of the block
    vs = v[stride::stride]
    n_eff = vs.shape[0]
    a1 = float(vs[:, 0].mean())
    a2 = float(vs[:, 1].mean())
    a11 = float((vs[:, 0] & vs[:, 1]).mean())
    ses = [float(np.sqrt(p * (1.0 - p) / n_eff)) for p in (a1, a2, a11)]
    return SimulationResult(
        ebn0_db=point.ebn0_db,
        branches=branches,
        pre_ber=float(np.mean(pre_stream != truth)),
        post_ber=float(np.mean(post_stream != truth)),
        emp_alpha1=a1, emp_alpha2=a2, emp_alpha11=a11,
        se_alpha1=ses[0], se_alpha2=ses[1], se_alpha11=ses[2],
        stride=stride, n_eff=n_eff,
    )
