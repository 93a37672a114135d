"""1-line ORBGRAND list decoding with per-query probability accounting.

LLRs are positive for bit 0.  A noise pattern is scored by its logistic
weight, the sum of the reliability ranks (1 = least reliable) of the bits it
flips, and patterns are queried in increasing weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _fallback
from ._backend import kernels
from .codes import LinearCode

LLR_CLIP = _fallback.LLR_CLIP
DEFAULT_BUDGET = 10**6


class EnumerationExhausted(StopIteration):
    """Every (filtered) noise pattern has been emitted."""


@dataclass
class LlrFrame:
    channel: np.ndarray
    a_priori: np.ndarray | None = None

    def __post_init__(self):
        self.channel = np.asarray(self.channel, dtype=np.float64)
        if self.a_priori is None:
            self.a_priori = np.zeros_like(self.channel)
        else:
            self.a_priori = np.asarray(self.a_priori, dtype=np.float64)
        if self.a_priori.shape != self.channel.shape:
            raise ValueError("channel and a-priori LLRs must have the same length")

    @property
    def n(self) -> int:
        return self.channel.shape[0]

    @property
    def total(self) -> np.ndarray:
        return self.channel + self.a_priori

    def hard_decision(self) -> np.ndarray:
        return (self.total < 0).astype(np.uint8)


def flip_probabilities(llr) -> np.ndarray:
    mag = np.abs(np.clip(np.asarray(llr, dtype=np.float64), -LLR_CLIP, LLR_CLIP))
    return 1.0 / (1.0 + np.exp(mag))


def pattern_probability(pattern, frame: LlrFrame) -> float:
    """Probability that the channel's noise effect on the hard decision is ``pattern``."""
    z = np.asarray(pattern, dtype=bool)
    if z.shape[0] != frame.n:
        raise ValueError("pattern length does not match frame")
    p = flip_probabilities(frame.total)
    return float(np.prod(np.where(z, p, 1.0 - p)))


class QueryState:
    """Stepwise 1-line ORBGRAND pattern generator for one frame.

    ``parity_filter`` (0 or 1) keeps only patterns of that Hamming-weight parity.
    """

    def __init__(self, frame: LlrFrame, parity_filter: int | None = None):
        llr = frame.total
        self.n = frame.n
        self.order = _fallback.reliability_order(llr)
        self.flip_prob = flip_probabilities(llr)
        self.parity_filter = parity_filter
        self.queries_made = 0
        self.cum_prob = 0.0
        self.next_weight = 0
        self._it = _fallback.rank_sets(self.n, parity_filter)

    def next_ranks(self) -> list:
        try:
            ranks = next(self._it)
        except StopIteration:
            raise EnumerationExhausted from None
        self.next_weight = sum(ranks)
        return ranks

    def next_query(self) -> np.ndarray:
        ranks = self.next_ranks()
        z = np.zeros(self.n, dtype=np.uint8)
        z[self.order[np.asarray(ranks, dtype=np.int64) - 1]] = 1
        self.queries_made += 1
        p = self.flip_prob
        self.cum_prob += float(np.prod(np.where(z == 1, p, 1.0 - p)))
        return z


@dataclass
class DecodeList:
    n: int
    k: int
    codewords: list = field(default_factory=list)
    queries: list = field(default_factory=list)
    probs: list = field(default_factory=list)
    cum_prob: float = 0.0
    parity_mass: float = 1.0
    queries_made: int = 0
    abandoned: bool = False
    parity_filtered: bool = False

    def __len__(self):
        return len(self.codewords)

    @property
    def q_last(self) -> int:
        return self.queries[-1] if self.queries else 0

    def contains(self, c) -> bool:
        c = np.asarray(c, dtype=np.uint8)
        return any(np.array_equal(w, c) for w in self.codewords)


def decode_list(
    code: LinearCode,
    frame: LlrFrame,
    target_L: int = 1,
    budget: int = DEFAULT_BUDGET,
    stop_rule: float | None = None,
    parity_skip: bool = True,
) -> DecodeList:
    """Query ``y xor z`` in ORBGRAND order until ``target_L`` codewords are found.

    ``stop_rule`` ends the search early once the predicted probability that
    the transmitted codeword is not in the list falls below it.  Running out
    of ``budget`` returns the partial list with ``abandoned`` set.
    """
    if target_L < 1 or budget < 1:
        raise ValueError("target_L and budget must be >= 1")
    if frame.n != code.n:
        raise ValueError(f"frame length {frame.n} != n = {code.n}")
    words, qs, probs, cum, pmass, queries, abandoned, filtered = kernels.list_decode(
        frame.total, code.syndrome_columns, code.even, int(target_L), int(budget),
        float(stop_rule or 0.0), code.k, parity_skip,
    )
    return DecodeList(code.n, code.k, words, qs, probs, cum, pmass, queries, abandoned, filtered)
