"""Block and bit soft output from a GRAND decoding list.

Pattern probabilities stand in for channel likelihoods ``f(r|c)``; the two
differ by a factor common to every codeword, which cancels in every ratio
computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .grand import LLR_CLIP, DecodeList, LlrFrame

EXACT_MAX_N = 20


class UnsupportedScaleError(ValueError):
    pass


@dataclass
class BlockApp:
    per_entry: np.ndarray
    not_in_list: float
    phi: float

    @property
    def total(self) -> float:
        return float(self.per_entry.sum() + self.not_in_list)


@dataclass
class SisoOutput:
    app_llr: np.ndarray
    extrinsic: np.ndarray

    def hard_decision(self) -> np.ndarray:
        return (self.app_llr < 0).astype(np.uint8)


def query_space(n: int, parity_filtered: bool) -> int:
    """Number of non-empty query positions an incorrect codeword can occupy."""
    return 2 ** (n - 1) - 1 if parity_filtered else 2**n - 1


def success_probability(n: int, k: int, parity_filtered: bool = False) -> float:
    """Chance a query lands on one of the other ``2^k - 1`` codewords of a random codebook."""
    return (2.0**k - 1.0) / float(query_space(n, parity_filtered))


def residual_mass(dl: DecodeList) -> float:
    """Noise-pattern mass not yet queried (restricted to the admissible parity)."""
    return max(dl.parity_mass - dl.cum_prob, 0.0)


def _normalise(probs, miss, phi) -> BlockApp:
    probs = np.asarray(probs, dtype=np.float64)
    d = probs.sum() + miss
    if d <= 0.0:
        return BlockApp(np.zeros_like(probs), 1.0, phi)
    return BlockApp(probs / d, miss / d, phi)


def approx_block_app(dl: DecodeList, n: int | None = None, k: int | None = None) -> BlockApp:
    """Geometric-approximation APPs of each list entry and of "not in list"."""
    n = dl.n if n is None else n
    k = dl.k if k is None else k
    phi = success_probability(n, k, dl.parity_filtered)
    if len(dl) == 0:
        return BlockApp(np.zeros(0), 1.0, phi)
    return _normalise(dl.probs, residual_mass(dl) * phi, phi)


# --- exact order statistics ---------------------------------------------------


def order_statistic_pmf(qs, n: int, k: int, parity_filtered: bool = False) -> Fraction:
    """``P(W_(1..L) = qs)`` for the L smallest of ``2^k - 1`` draws without
    replacement from ``{1, ..., T}``."""
    T = query_space(n, parity_filtered)
    M = 2**k - 1
    L = len(qs)
    if L == 0:
        return Fraction(1)
    if L > M or any(b <= a for a, b in zip(qs, qs[1:])) or qs[0] < 1 or qs[-1] > T:
        return Fraction(0)
    return Fraction(math.comb(T - qs[-1], M - L), math.comb(T, M))


def order_statistic_tail(prefix, q_last: int, n: int, k: int, parity_filtered: bool = False) -> Fraction:
    """``P(W_(1..L-1) = prefix, W_(L) >= q_last)``."""
    T = query_space(n, parity_filtered)
    M = 2**k - 1
    L = len(prefix) + 1
    if any(b <= a for a, b in zip(prefix, prefix[1:])) or (prefix and prefix[0] < 1):
        return Fraction(0)
    # W_(L) > W_(L-1) always, so smaller thresholds add nothing
    q_last = max(q_last, prefix[-1] + 1 if prefix else 1)
    if L > M or q_last > T:
        return Fraction(0)
    # hockey stick: sum_{q >= q_last} C(T - q, M - L) = C(T - q_last + 1, M - L + 1)
    return Fraction(math.comb(T - q_last + 1, M - L + 1), math.comb(T, M))


def exact_block_app(dl: DecodeList, n: int | None = None, k: int | None = None) -> BlockApp:
    """APPs from the exact order-statistic law of a uniformly random codebook."""
    n = dl.n if n is None else n
    k = dl.k if k is None else k
    if n > EXACT_MAX_N:
        raise UnsupportedScaleError(f"exact APPs limited to n <= {EXACT_MAX_N}")
    filt = dl.parity_filtered
    phi = success_probability(n, k, filt)
    L = len(dl)
    if L == 0:
        return BlockApp(np.zeros(0), 1.0, phi)
    qs = list(dl.queries)
    w_a = order_statistic_pmf(qs, n, k, filt)
    w_b = []
    for i in range(L - 1):
        omitted = qs[:i] + [q - 1 for q in qs[i + 1:]]
        w_b.append(order_statistic_pmf(omitted, n, k, filt))
    w_b.append(order_statistic_tail(qs[:-1], qs[-1], n, k, filt))
    scale = max(w_b + [w_a])
    if scale == 0:
        return BlockApp(np.zeros(L), 1.0, phi)
    pb = np.array([p * float(w / scale) for p, w in zip(dl.probs, w_b)])
    pa = residual_mass(dl) * float(w_a / scale)
    return _normalise(pb, pa, phi)


# --- bitwise soft output --------------------------------------------------------


def _log_ratio(num, den) -> np.ndarray:
    out = np.empty_like(num)
    with np.errstate(divide="ignore"):
        out[:] = np.log(num) - np.log(den)
    out[num <= 0.0] = -LLR_CLIP
    out[den <= 0.0] = LLR_CLIP
    return out


def bitwise_llr(dl: DecodeList, app: BlockApp, frame: LlrFrame) -> SisoOutput:
    """Per-bit APP LLRs mixing the list codewords with the retained input."""
    llr_in = frame.total
    if len(dl) == 0 or app.not_in_list >= 1.0:
        return SisoOutput(llr_in.copy(), frame.total - llr_in)
    x = np.clip(llr_in, -LLR_CLIP, LLR_CLIP)
    W = np.asarray(dl.codewords, dtype=np.float64)
    p1 = app.per_entry @ W
    p0 = app.per_entry.sum() - p1
    num = p0 + app.not_in_list / (1.0 + np.exp(-x))
    den = p1 + app.not_in_list / (1.0 + np.exp(x))
    out = _log_ratio(num, den)
    return SisoOutput(out, out - x)


def sogrand_siso(code, frame: LlrFrame, target_L=4, budget=None, stop_rule=None, parity_skip=True):
    """Decode, compute block APPs and bit LLRs in one call."""
    from .grand import DEFAULT_BUDGET, decode_list

    dl = decode_list(code, frame, target_L, budget or DEFAULT_BUDGET, stop_rule, parity_skip)
    app = approx_block_app(dl)
    return dl, app, bitwise_llr(dl, app, frame)


# --- baselines ------------------------------------------------------------------


def forney_app(dl: DecodeList, frame: LlrFrame | None = None) -> BlockApp:
    """List-conditional APPs: each entry's likelihood over the list total."""
    if len(dl) < 2:
        raise ValueError("Forney's estimate needs at least two list entries")
    p = np.asarray(dl.probs, dtype=np.float64)
    phi = success_probability(dl.n, dl.k, dl.parity_filtered)
    if p.sum() <= 0.0:
        return BlockApp(np.full(len(p), 1.0 / len(p)), 0.0, phi)
    return BlockApp(p / p.sum(), 0.0, phi)


def pyndiah_llr(dl: DecodeList, frame: LlrFrame, beta: float = 0.8) -> SisoOutput:
    """Max-log bit LLRs from the best list codeword on each side of every bit.

    Bits on which the whole list agrees get ``+-beta`` in the direction of
    the best codeword.
    """
    if len(dl) < 1:
        raise ValueError("Pyndiah's estimate needs a non-empty list")
    x = np.clip(frame.total, -LLR_CLIP, LLR_CLIP)
    W = np.asarray(dl.codewords, dtype=np.uint8)
    with np.errstate(divide="ignore"):
        logp = np.log(np.asarray(dl.probs, dtype=np.float64))
    best = W[int(np.argmax(logp))]
    ones = W == 1
    m1 = np.where(ones, logp[:, None], -np.inf).max(axis=0)
    m0 = np.where(~ones, logp[:, None], -np.inf).max(axis=0)
    out = np.where(best == 0, beta, -beta).astype(np.float64)
    both = np.isfinite(m0) & np.isfinite(m1)
    out[both] = m0[both] - m1[both]
    return SisoOutput(out, out - x)
