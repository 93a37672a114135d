import itertools
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import spearmanr

from conftest import all_codewords
from sogrand import codes
from sogrand.grand import DecodeList, LlrFrame, decode_list
from sogrand.softout import (BlockApp, UnsupportedScaleError, approx_block_app, bitwise_llr,
                             exact_block_app, forney_app, order_statistic_pmf,
                             order_statistic_tail, pyndiah_llr, sogrand_siso)

E84 = codes.build_ebch(3, 1)
E1611 = codes.build_ebch(4, 1)


def make_list(n, k, words, qs, probs, cum, filtered=False, parity_mass=1.0):
    return DecodeList(n, k, [np.asarray(w, dtype=np.uint8) for w in words], list(qs), list(probs),
                      cum, parity_mass, qs[-1] if qs else 0, False, filtered)


def test_missing_mass_example():
    dl = make_list(16, 11, [np.zeros(16)], [1], [0.9], 0.95)
    app = approx_block_app(dl)
    assert app.phi == pytest.approx(2047 / 65535)
    assert app.not_in_list == pytest.approx(0.05 * 2047 / 65535 / (0.9 + 0.05 * 2047 / 65535), rel=1e-12)
    assert app.not_in_list == pytest.approx(0.001732, abs=5e-7)


def test_no_residual_mass():
    dl = make_list(8, 4, [np.zeros(8), np.ones(8)], [1, 5], [0.3, 0.1], 1.0)
    app = approx_block_app(dl)
    assert app.not_in_list == 0.0
    assert np.allclose(app.per_entry, [0.75, 0.25])


def test_filtered_space_uses_parity_mass():
    dl = make_list(8, 4, [np.zeros(8)], [1], [0.6], 0.6, filtered=True, parity_mass=0.7)
    app = approx_block_app(dl)
    phi = 15 / 127
    assert app.phi == pytest.approx(phi)
    assert app.not_in_list == pytest.approx(0.1 * phi / (0.6 + 0.1 * phi), rel=1e-12)


def test_empty_list_app():
    dl = make_list(8, 4, [], [], [], 0.2)
    app = approx_block_app(dl)
    assert app.not_in_list == 1.0 and len(app.per_entry) == 0


def test_partition_of_unity(rng):
    for _ in range(500):
        llr = rng.normal(1.5, 2, 16)
        L = int(rng.integers(1, 6))
        dl = decode_list(E1611, LlrFrame(llr), L, parity_skip=bool(rng.integers(2)))
        for app in (approx_block_app(dl), exact_block_app(dl)):
            assert abs(app.total - 1.0) < 1e-12
            assert (app.per_entry >= 0).all() and 0 <= app.not_in_list <= 1


def subset_law(T, M):
    """All M-subsets of {1..T} as sorted tuples (uniform law)."""
    return list(itertools.combinations(range(1, T + 1), M))


@pytest.mark.parametrize("n,k,filtered", [(4, 2, False), (5, 2, False), (4, 2, True), (5, 2, True)])
def test_order_statistic_pmf_matches_enumeration(n, k, filtered):
    T = 2 ** (n - 1) - 1 if filtered else 2**n - 1
    M = 2**k - 1
    subsets = subset_law(T, M)
    total = len(subsets)
    for L in range(1, M + 1):
        counts = {}
        for s in subsets:
            counts[s[:L]] = counts.get(s[:L], 0) + 1
        for qs in itertools.combinations(range(1, T + 1), L):
            assert order_statistic_pmf(list(qs), n, k, filtered) == Fraction(counts.get(qs, 0), total)


@pytest.mark.parametrize("n,k", [(4, 2), (5, 2)])
def test_order_statistic_tail_matches_enumeration(n, k):
    T, M = 2**n - 1, 2**k - 1
    subsets = subset_law(T, M)
    for L in (1, 2, 3):
        for prefix in itertools.combinations(range(1, T + 1), L - 1):
            for q in range(1, T + 1):
                hits = sum(1 for s in subsets if s[:L - 1] == prefix and s[L - 1] >= q)
                got = order_statistic_tail(list(prefix), q, n, k)
                assert got == Fraction(hits, len(subsets))


def test_pmf_rejects_bad_configs():
    assert order_statistic_pmf([3, 3], 4, 2) == 0
    assert order_statistic_pmf([0], 4, 2) == 0
    assert order_statistic_pmf([1, 2, 3, 4], 4, 2) == 0


def test_exact_and_approx_agree_on_small_code(rng):
    for skip in (True, False):
        for _ in range(300):
            llr = 2 * (1 + rng.normal(0, 0.8, 8)) / 0.64
            for L in (1, 2, 4):
                dl = decode_list(E84, LlrFrame(llr), L, parity_skip=skip)
                a, e = approx_block_app(dl), exact_block_app(dl)
                assert np.all(np.abs(a.per_entry - e.per_entry) <= 0.10 * e.per_entry)
                assert abs(a.not_in_list - e.not_in_list) <= 0.05


def test_exact_scale_limit():
    code = codes.build_ebch(5, 1)
    dl = decode_list(code, LlrFrame(np.ones(32)), 1)
    with pytest.raises(UnsupportedScaleError):
        exact_block_app(dl)


def test_monotone_in_first_probability():
    prev = -1.0
    for p1 in (0.1, 0.2, 0.4, 0.8):
        dl = make_list(16, 11, [np.zeros(16), np.ones(16)], [1, 9], [p1, 0.05], 0.9)
        cur = approx_block_app(dl).per_entry[0]
        assert cur > prev
        prev = cur


def test_bitwise_empty_list_is_identity(rng):
    for _ in range(50):
        frame = LlrFrame(rng.normal(0, 5, 16), rng.normal(0, 1, 16))
        dl = make_list(16, 11, [], [], [], 0.3)
        out = bitwise_llr(dl, approx_block_app(dl), frame)
        assert np.array_equal(out.app_llr, frame.total)
        assert not out.extrinsic.any()


def test_bitwise_certain_single_codeword():
    frame = LlrFrame(np.array([1.0, -2.0, 0.5, 3.0]))
    dl = make_list(4, 1, [[0, 1, 0, 0]], [1], [0.5], 1.0)
    out = bitwise_llr(dl, BlockApp(np.array([1.0]), 0.0, 0.0), frame)
    assert np.array_equal(out.app_llr, [40.0, -40.0, 40.0, 40.0])


def test_bitwise_formula_by_hand():
    x = np.array([0.8, -0.3, 1.7])
    frame = LlrFrame(x)
    w = [[0, 1, 0], [1, 1, 0]]
    app = BlockApp(np.array([0.6, 0.3]), 0.1, 0.0)
    out = bitwise_llr(make_list(3, 1, w, [1, 2], [0.5, 0.25], 0.9), app, frame)
    sig = lambda v: 1 / (1 + np.exp(-v))
    expect = [
        np.log(0.6 + 0.1 * sig(0.8)) - np.log(0.3 + 0.1 * sig(-0.8)),
        np.log(0.1 * sig(-0.3)) - np.log(0.9 + 0.1 * sig(0.3)),
        np.log(0.9 + 0.1 * sig(1.7)) - np.log(0.1 * sig(-1.7)),
    ]
    assert np.allclose(out.app_llr, expect, rtol=1e-12)
    assert np.allclose(out.extrinsic, out.app_llr - x)


def test_unanimous_bits_get_confident_sign(rng):
    llr = 2 * (1 + rng.normal(0, 0.4, 16)) / 0.16
    dl, app, so = sogrand_siso(E1611, LlrFrame(llr), 4)
    W = np.array(dl.codewords)
    unanimous = (W == W[0]).all(axis=0)
    assert app.not_in_list < 1e-3
    assert (np.sign(so.app_llr[unanimous]) == 1 - 2.0 * W[0][unanimous]).all()
    assert (np.abs(so.app_llr[unanimous]) > 5).all()


def test_forney_two_equal_entries():
    dl = make_list(8, 4, [np.zeros(8), np.ones(8)], [1, 2], [0.2, 0.2], 0.4)
    app = forney_app(dl)
    assert np.allclose(app.per_entry, [0.5, 0.5]) and app.not_in_list == 0.0


def test_forney_needs_two_entries():
    with pytest.raises(ValueError):
        forney_app(make_list(8, 4, [np.zeros(8)], [1], [0.2], 0.2))


def test_forney_max_entry_at_least_one_over_L(rng):
    for _ in range(100):
        dl = decode_list(E1611, LlrFrame(rng.normal(0, 2, 16)), 5)
        assert forney_app(dl).per_entry.max() >= 1 / len(dl) - 1e-15


def test_pyndiah_cases():
    frame = LlrFrame(np.array([1.0, 1.0, 1.0]))
    dl = make_list(3, 1, [[0, 0, 0], [1, 0, 1]], [1, 3], [0.3, 0.3], 0.6)
    out = pyndiah_llr(dl, frame, beta=0.8)
    assert out.app_llr[0] == pytest.approx(0.0) and out.app_llr[2] == pytest.approx(0.0)
    assert out.app_llr[1] == pytest.approx(0.8)
    dl = make_list(3, 1, [[0, 1, 0], [1, 1, 0]], [1, 3], [0.4, 0.1], 0.6)
    out = pyndiah_llr(dl, frame, beta=0.5)
    assert out.app_llr[0] == pytest.approx(np.log(4.0))
    assert out.app_llr[1] == pytest.approx(-0.5) and out.app_llr[2] == pytest.approx(0.5)


def test_sogrand_ranks_correctness_better_than_forney(rng):
    # exact codeword posteriors over the whole (16,11) codebook
    words = all_codewords(E1611.G).astype(np.float64)
    sg, fy, truth = [], [], []
    sigma = 0.8
    for _ in range(1500):
        c = words[rng.integers(len(words))]
        llr = 2 * ((1 - 2 * c) + rng.normal(0, sigma, 16)) / sigma**2
        logl = ((1 - 2 * words) * llr / 2).sum(axis=1)
        post = np.exp(logl - logl.max())
        post /= post.sum()
        dl = decode_list(E1611, LlrFrame(llr), 2)
        first = (words == dl.codewords[0]).all(axis=1)
        truth.append(post[first][0])
        sg.append(approx_block_app(dl).per_entry[0])
        fy.append(forney_app(dl).per_entry[0])
    rho_sg = spearmanr(sg, truth).statistic
    rho_fy = spearmanr(fy, truth).statistic
    assert rho_sg > rho_fy
    assert rho_sg > 0.9
