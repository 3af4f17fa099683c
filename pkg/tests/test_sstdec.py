"""Scarce-state-transition decoder: pre-decode, main Viterbi, recombination."""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from sstkalman import channel, parity_prob, sstdec
from sstkalman.convcode import encode, get_code, main_encoded_block_map
from sstkalman.gf2 import BinaryPoly


def poly_from_stream(bits):
    mask = 0
    for j, bit in enumerate(bits):
        mask |= int(bit) << j
    return BinaryPoly(mask)


def test_default_truncation_is_five_nu_plus_l():
    assert sstdec.default_truncation(get_code("c1")) == 11
    assert sstdec.default_truncation(get_code("c2")) == 31


def test_noiseless_round_trip_general_and_qli():
    for name in ("c1", "c2"):
        code = get_code(name)
        info = np.random.default_rng(0).integers(0, 2, 60)
        z = channel.ReceivedSequence(channel.bpsk_map(encode(code, info)))
        out = sstdec.sst_decode(z, code, mode="general")
        assert np.array_equal(out, info)
        out_q = sstdec.sst_decode(z, code, mode="qli")
        assert len(out_q) == 60 - code.L
        assert np.array_equal(out_q, info[: 60 - code.L])


def test_predecode_noiseless():
    code = get_code("c1")
    info = np.random.default_rng(1).integers(0, 2, 40)
    z_hard = encode(code, info)
    assert np.array_equal(sstdec.predecode(z_hard, code, "general"), info)
    delayed = sstdec.predecode(z_hard, code, "qli")
    assert np.array_equal(delayed[code.L:], info[: 40 - code.L])


def test_main_input_hard_part_depends_only_on_errors():
    code = get_code("c2")
    rng = np.random.default_rng(2)
    n = 30
    e = rng.integers(0, 2, (n, 2)).astype(np.uint8)
    hard_parts = []
    for _ in range(3):
        v = encode(code, rng.integers(0, 2, n))
        z = channel.ReceivedSequence(channel.bpsk_map(v ^ e))
        hard_parts.append(sstdec.main_input_general(z, code).r_hard)
    assert np.array_equal(hard_parts[0], hard_parts[1])
    assert np.array_equal(hard_parts[0], hard_parts[2])


def test_main_input_hard_part_is_mapped_errors_xor_errors():
    # r_hard = v + e with v the error streams pushed through Ginv G
    code = get_code("c1")
    rng = np.random.default_rng(3)
    n = 25
    e = rng.integers(0, 2, (n, 2)).astype(np.uint8)
    z = channel.ReceivedSequence(channel.bpsk_map(encode(code, np.zeros(n, int)) ^ e))
    r_hard = sstdec.main_input_general(z, code).r_hard
    m = main_encoded_block_map(code).rows
    e1, e2 = poly_from_stream(e[:, 0]), poly_from_stream(e[:, 1])
    keep = (1 << n) - 1
    for stream in (0, 1):
        v_poly = e1 * m[0][stream] + e2 * m[1][stream]
        got = poly_from_stream(r_hard[:, stream] ^ e[:, stream])
        assert (v_poly.mask & keep) == got.mask


def test_main_input_soft_magnitudes_preserved():
    code = get_code("c1")
    v = encode(code, np.random.default_rng(4).integers(0, 2, 20))
    recv = channel.transmit(v, channel.snr_point(1.0), seed=5)
    soft = sstdec.main_input_general(recv, code)
    assert_allclose(np.abs(soft.r), np.abs(recv.z), atol=1e-15)
    assert np.array_equal((soft.r < 0).astype(np.uint8), soft.r_hard)


def test_sst_equals_classical_viterbi():
    for name, db in [("c1", 0.0), ("c1", 3.0), ("c2", 1.0), ("c2", 4.0)]:
        code = get_code(name)
        info = np.random.default_rng(7).integers(0, 2, 300)
        recv = channel.transmit(encode(code, info), channel.snr_point(db), seed=11)
        assert np.array_equal(sstdec.sst_decode(recv, code, mode="general"),
                              sstdec.classical_viterbi(recv, code))


def test_viterbi_is_maximum_correlation():
    code = get_code("c1")
    rng = np.random.default_rng(21)
    for seed in range(4):
        info = rng.integers(0, 2, 10)
        recv = channel.transmit(encode(code, info),
                                channel.snr_point(0.0), seed=seed)
        decoded = sstdec.classical_viterbi(recv, code)
        decoded_metric = float(
            np.sum(recv.z * (1 - 2 * encode(code, decoded).astype(float))))
        best = max(
            float(np.sum(recv.z * (1 - 2 * encode(code, np.array(cand)).astype(float))))
            for cand in itertools.product((0, 1), repeat=10))
        assert_allclose(decoded_metric, best, atol=1e-12)


def test_simulate_rejects_tiny_runs():
    with pytest.raises(ValueError):
        sstdec.simulate(get_code("c1"), channel.snr_point(0.0), branches=99, seed=0)


def test_simulate_matches_parity_statistics():
    pt = channel.snr_point(2.0)
    res = sstdec.simulate(get_code("c1"), pt, branches=60_000, seed=5)
    eps = pt.epsilon
    assert abs(res.emp_alpha1 - parity_prob.parity_one_prob(5, eps)) < 4 * res.se_alpha1
    assert abs(res.emp_alpha2 - parity_prob.parity_one_prob(6, eps)) < 4 * res.se_alpha2
    # raw pre-decoder stream flips with the parity of three channel errors
    se_pre = np.sqrt(res.pre_ber * (1 - res.pre_ber) / res.branches)
    assert abs(res.pre_ber - parity_prob.parity_one_prob(3, eps)) < 5 * se_pre
    assert res.stride == 4
    assert res.n_eff == pytest.approx(res.branches / res.stride, rel=0.01)


def test_simulate_qli_predecoder_rate():
    pt = channel.snr_point(4.0)
    res = sstdec.simulate(get_code("c1"), pt, branches=40_000, seed=9, mode="qli")
    expect = parity_prob.parity_one_prob(2, pt.epsilon)
    se = np.sqrt(expect * (1 - expect) / res.branches)
    assert abs(res.pre_ber - expect) < 5 * se


def test_decoding_beats_the_predecoder():
    res = sstdec.simulate(get_code("c1"), channel.snr_point(4.0),
                          branches=30_000, seed=9)
    assert res.post_ber < res.pre_ber / 10


def test_soft_input_validates_shape():
    with pytest.raises(ValueError):
        sstdec.SoftInput(np.zeros((4, 3)))
    with pytest.raises(ValueError):
        sstdec.SoftInput(np.zeros((4, 2)), r_hard=np.zeros((3, 2)))
