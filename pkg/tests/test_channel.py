import math

import numpy as np
import pytest

from sogrand.channel import (QPSK_DELTA, AwgnSpec, FadingSpec, awgn_bpsk_llr, es_n0_from_eb_n0,
                             interleaver, qpsk_llr, rician_gains, rician_qpsk_llr)


def test_awgn_noise_variance():
    assert AwgnSpec(0.0, 0.5).noise_var == pytest.approx(1.0)
    assert AwgnSpec(3.0, 1.0).noise_var == pytest.approx(1 / (2 * 10**0.3))


def test_awgn_llr_moments(rng):
    spec = AwgnSpec(1.0, 0.5)
    s2 = spec.noise_var
    llr = awgn_bpsk_llr(np.zeros(10**6, dtype=np.uint8), spec, rng)
    # L = 2r/s2 with r ~ N(1, s2): mean 2/s2, std 2/sqrt(s2)
    se = (2 / math.sqrt(s2)) / math.sqrt(llr.size)
    assert abs(llr.mean() - 2 / s2) < 3 * se
    assert llr.std() == pytest.approx(2 / math.sqrt(s2), rel=0.01)


def test_awgn_noiseless_signs(rng):
    c = rng.integers(0, 2, (4, 16), dtype=np.uint8)
    llr = awgn_bpsk_llr(c, AwgnSpec(80.0, 0.5), rng)
    assert llr.shape == c.shape
    assert np.array_equal((llr < 0).astype(np.uint8), c)


def test_qpsk_llr_example():
    out = qpsk_llr(np.array([1 + 1j]), np.array([1.0]), 1.0, QPSK_DELTA)
    assert np.allclose(out, [math.sqrt(2), math.sqrt(2)])
    assert np.allclose(qpsk_llr(np.array([0j]), np.array([1.0]), 1.0), [0.0, 0.0])


def test_es_n0_examples():
    assert es_n0_from_eb_n0(0.0, 1.0, 1) == pytest.approx(0.0)
    assert es_n0_from_eb_n0(3.0103, 0.5, 2) == pytest.approx(3.0103)
    assert es_n0_from_eb_n0(2.0, 121 / 256, 1) - 2.0 == pytest.approx(-3.254, abs=1e-3)
    with pytest.raises(ValueError):
        es_n0_from_eb_n0(0.0, 0.5, 3)


@pytest.mark.parametrize("K", [0.0, 1.0, 5.0, 1e6])
def test_rician_unit_power(K, rng):
    h = rician_gains(10**6, K, rng)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.01)


def test_rayleigh_and_inf_limits(rng):
    h = rician_gains(10**5, 0.0, rng)
    assert abs(h.mean()) < 0.01  # no line-of-sight component
    assert np.allclose(rician_gains(3, math.inf, rng), 1.0)


def test_interleaver_round_trip():
    x = np.arange(1024)
    for seed, f in [(0, 0), (1, 7), (99, 123456)]:
        perm = interleaver(1024, seed, f)
        y = x[perm]
        back = np.empty_like(y)
        back[perm] = y
        assert np.array_equal(back, x)
    assert not np.array_equal(interleaver(64, 1, 0), interleaver(64, 1, 1))
    assert np.array_equal(interleaver(64, 1, 5), interleaver(64, 1, 5))


def test_fading_noiseless_signs(rng):
    spec = FadingSpec(nc=8, t=2, k_factor=5.0, ebn0_db=90.0, rate=0.5, seed=3)
    c = rng.integers(0, 2, 32, dtype=np.uint8)
    llr = rician_qpsk_llr(c, spec, rng, frame_index=4)
    assert np.array_equal((llr < 0).astype(np.uint8), c)


def test_fading_length_check(rng):
    with pytest.raises(ValueError):
        rician_qpsk_llr(np.zeros(30), FadingSpec(8, 2, 5.0, 3.0, 0.5), rng)


def test_fading_awgn_limit_moments(rng):
    # K = inf is QPSK over AWGN: per-bit LLR ~ N(2 d^2 / s2, 4 d^2 / s2)
    spec = FadingSpec(nc=512, t=4, k_factor=math.inf, ebn0_db=2.0, rate=0.5)
    llr = np.concatenate([rician_qpsk_llr(np.zeros(4096), spec, rng, i) for i in range(50)])
    s2 = spec.noise_var
    assert llr.mean() == pytest.approx(2 * QPSK_DELTA**2 / s2, rel=0.01)
    assert llr.var() == pytest.approx(4 * QPSK_DELTA**2 / s2, rel=0.02)
