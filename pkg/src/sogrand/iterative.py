"""Iterative SOGRAND decoding of product codes (row/column turbo) and QC-GLDPC codes (flooding BP)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf2
from ._backend import kernels
from .codes import GldpcCode, ProductCode
from .grand import DEFAULT_BUDGET, LLR_CLIP


@dataclass(frozen=True)
class TurboConfig:
    alpha: float = 0.5
    max_iterations: int = 20
    target_L: int = 4
    listbler_threshold: float = 1e-5
    budget: int = DEFAULT_BUDGET
    parity_skip: bool = True

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.target_L < 1 or self.budget < 1:
            raise ValueError("target_L and budget must be >= 1")


@dataclass
class IterationTrace:
    half_iterations_used: int
    queries_total: int
    queries_parallel_proxy: float
    success: bool
    decoded: np.ndarray

    @property
    def iterations(self) -> float:
        return self.half_iterations_used / 2.0


def _siso(code, llr_rows, cfg: TurboConfig):
    app, queries, _ = kernels.siso_rows(
        llr_rows, code.syndrome_columns, code.even, code.k, cfg.target_L,
        cfg.budget, cfg.listbler_threshold, cfg.parity_skip,
    )
    ext = app - np.clip(llr_rows, -LLR_CLIP, LLR_CLIP)
    return app, ext, queries


def _rows_valid(hard, Ht) -> bool:
    return not gf2.matmul(hard, Ht).any()


def turbo_decode_product(pc: ProductCode, channel_llr, cfg: TurboConfig = TurboConfig()) -> IterationTrace:
    """Alternate row and column SISO passes until every row and column is a codeword."""
    code = pc.component
    n = code.n
    L_ch = np.asarray(channel_llr, dtype=np.float64)
    if L_ch.shape != (n, n):
        raise ValueError(f"channel LLRs must be {n}x{n}")
    Ht = code.H.T
    L_a = np.zeros_like(L_ch)
    half = 0
    q_total = 0
    q_par = 0.0
    hard = (L_ch < 0).astype(np.uint8)
    for _ in range(cfg.max_iterations):
        for columns in (False, True):
            inp = L_ch + L_a
            if columns:
                inp = inp.T
            app, ext, q = _siso(code, inp, cfg)
            if columns:
                app, ext = app.T, ext.T
            half += 1
            q_total += int(q.sum())
            q_par += int(q.max()) / pc.N
            hard = (app < 0).astype(np.uint8)
            if _rows_valid(hard, Ht) and _rows_valid(hard.T, Ht):
                return IterationTrace(half, q_total, q_par, True, hard)
            L_a = cfg.alpha * ext
    return IterationTrace(half, q_total, q_par, False, hard)


def _other_edge(gc: GldpcCode) -> np.ndarray:
    """For every edge (check node, position) the flat index of the VN's other edge."""
    flat = gc.cn_vars.ravel()
    order = np.argsort(flat, kind="stable")
    if not np.array_equal(np.bincount(flat, minlength=gc.N), np.full(gc.N, 2)):
        raise ValueError("every variable node must have degree 2")
    pairs = order.reshape(-1, 2)
    other = np.empty(flat.size, dtype=np.int64)
    other[pairs[:, 0]] = pairs[:, 1]
    other[pairs[:, 1]] = pairs[:, 0]
    return other


GLDPC_SCHEDULES = ("two-phase", "flooding")


def gldpc_decode(gc: GldpcCode, channel_llr, cfg: TurboConfig = TurboConfig(), other_edge=None,
                 schedule: str = "two-phase") -> IterationTrace:
    """BP decoding with a SOGRAND SISO decoder at every check node.

    A check node's a-priori input on each edge is ``alpha`` times the
    extrinsic LLR last produced for that variable node by its other check
    node.  ``schedule="two-phase"`` updates the first block row of check nodes
    and then the second, so the second phase already sees the first phase's
    messages, as columns see rows in the product decoder.
    ``schedule="flooding"`` updates every check node from the previous
    iteration's messages.  Either way, each iteration ends with
    ``APP = L_ch + sum of incoming messages``, a hard decision and a validity
    check, and counts as two half-iterations.
    """
    if schedule not in GLDPC_SCHEDULES:
        raise ValueError(f"schedule must be one of {GLDPC_SCHEDULES}")
    code = gc.component
    L_ch = np.asarray(channel_llr, dtype=np.float64).ravel()
    if L_ch.size != gc.N:
        raise ValueError(f"channel LLRs must have length {gc.N}")
    other = _other_edge(gc) if other_edge is None else other_edge
    cn_vars = gc.cn_vars
    flat = cn_vars.ravel()
    n_cn = cn_vars.shape[0]
    Ht = code.H.T
    ch_edges = L_ch[cn_vars]
    c2v = np.zeros(cn_vars.shape)
    if schedule == "flooding":
        phases = [np.arange(n_cn)]
    else:
        phases = [np.arange(n_cn // 2), np.arange(n_cn // 2, n_cn)]
    q_total = 0
    q_par = 0.0
    hard = (L_ch < 0).astype(np.uint8)
    for it in range(1, cfg.max_iterations + 1):
        fresh = c2v.copy()
        for sel in phases:
            prior = fresh.ravel()[other].reshape(cn_vars.shape)[sel]
            _, ext, q = _siso(code, ch_edges[sel] + prior, cfg)
            fresh[sel] = cfg.alpha * ext
            q_total += int(q.sum())
            q_par += int(q.max()) / gc.N
        c2v = fresh
        app = L_ch + np.bincount(flat, weights=c2v.ravel(), minlength=gc.N)
        hard = (app < 0).astype(np.uint8)
        if _rows_valid(hard[cn_vars], Ht):
            return IterationTrace(2 * it, q_total, q_par, True, hard)
    return IterationTrace(2 * cfg.max_iterations, q_total, q_par, False, hard)
