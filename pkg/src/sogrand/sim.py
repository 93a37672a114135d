"""Monte-Carlo experiment runner, soft-output calibration and CSV reporting.

Every frame draws from its own generator keyed by ``(seed, snr point, frame
index)``, so results do not depend on execution order or worker count.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import codes
from .channel import AwgnSpec, FadingSpec, awgn_bpsk_llr, rician_qpsk_llr
from .grand import LlrFrame, decode_list
from .iterative import GLDPC_SCHEDULES, TurboConfig, _other_edge, gldpc_decode, turbo_decode_product
from .softout import approx_block_app, bitwise_llr, forney_app, pyndiah_llr

CSV_COLUMNS = [
    "snr_db", "frames", "block_errors", "bler", "bit_errors", "ber",
    "q_per_bit", "q_parallel_per_bit", "iters_avg",
]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    code: str = "ebch"
    ebch_m: int = 4
    ebch_t: int = 1
    crc_n: int = 25
    crc_k: int = 15
    crc_poly: str = "2b9"
    crc_notation: str = "koopman"
    matrix: str = ""
    construction: str = "product"
    channel: str = "awgn"
    rician_nc: int = 128
    rician_t: int = 4
    rician_k: float = 5.0
    snr_start: float = 2.0
    snr_stop: float = 2.0
    snr_step: float = 0.5
    alpha: float = 0.5
    max_iterations: int = 20
    target_L: int = 4
    listbler_threshold: float = 1e-5
    budget: int = 10**6
    parity_skip: bool = True
    gldpc_schedule: str = "two-phase"
    min_frame_errors: int = 200
    max_frames: int = 10**7
    seed: int = 1
    random_messages: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.code not in ("ebch", "crc", "import"):
            raise ConfigError(f"unknown code family {self.code!r}")
        if self.construction not in ("product", "gldpc", "single"):
            raise ConfigError(f"unknown construction {self.construction!r}")
        if self.channel not in ("awgn", "rician"):
            raise ConfigError(f"unknown channel {self.channel!r}")
        if self.gldpc_schedule not in GLDPC_SCHEDULES:
            raise ConfigError(f"gldpc_schedule must be one of {GLDPC_SCHEDULES}")
        if self.code == "import" and not self.matrix:
            raise ConfigError("code=import needs matrix=<path>")
        if self.snr_step <= 0 or self.snr_stop < self.snr_start:
            raise ConfigError("snr sweep is empty")
        if self.min_frame_errors < 1 or self.max_frames < 1:
            raise ConfigError("min_frame_errors and max_frames must be >= 1")
        try:
            self.turbo()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def snr_points(self) -> list:
        count = int(math.floor((self.snr_stop - self.snr_start) / self.snr_step + 1e-9)) + 1
        return [round(self.snr_start + i * self.snr_step, 10) for i in range(count)]

    def turbo(self) -> TurboConfig:
        return TurboConfig(self.alpha, self.max_iterations, self.target_L,
                           self.listbler_threshold, self.budget, self.parity_skip)

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            values[key] = _coerce(key, val, types[key])
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_text(text)

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in fields(self))


def _coerce(key, val, typ):
    try:
        if typ == "bool":
            low = val.lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(val)
            return low in ("1", "true", "yes")
        if typ == "int":
            return int(float(val))
        if typ == "float":
            return float(val)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {val!r} as {typ}") from None
    return val


def build_component(cfg: ExperimentConfig) -> codes.LinearCode:
    try:
        if cfg.code == "ebch":
            return codes.build_ebch(cfg.ebch_m, cfg.ebch_t)
        if cfg.code == "crc":
            return codes.build_crc_code(cfg.crc_n, cfg.crc_k, cfg.crc_poly, cfg.crc_notation)
        return codes.import_code(cfg.matrix)
    except (codes.CodeConstructionError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


# --- frame simulation ---------------------------------------------------------


class Setup:
    """Codes and channel objects shared by all frames of one experiment."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.component = build_component(cfg)
        self.turbo = cfg.turbo()
        c = cfg.construction
        if c == "product":
            self.long = codes.ProductCode(self.component)
            self.N, self.K = self.long.N, self.long.K
        elif c == "gldpc":
            self.long = codes.gldpc_build(self.component)
            self.N, self.K = self.long.N, self.long.K
            self.other_edge = _other_edge(self.long)
        else:
            self.long = self.component
            self.N, self.K = self.component.n, self.component.k
        self.rate = self.K / self.N
        if cfg.channel == "rician" and self.N != 2 * cfg.rician_t * cfg.rician_nc:
            raise ConfigError(
                f"frame of {self.N} bits does not fill t={cfg.rician_t} blocks of nc={cfg.rician_nc} QPSK symbols"
            )

    def rng(self, point: int, frame: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.cfg.seed, point, frame]))

    def transmit(self, rng):
        """Draw a message and return ``(message, codeword)``."""
        cfg = self.cfg
        if self.cfg.construction == "product":
            k = self.component.k
            msg = rng.integers(0, 2, (k, k), dtype=np.uint8) if cfg.random_messages else np.zeros((k, k), np.uint8)
            return msg, codes.product_encode(self.long, msg)
        msg = rng.integers(0, 2, self.K, dtype=np.uint8) if cfg.random_messages else np.zeros(self.K, np.uint8)
        if self.cfg.construction == "gldpc":
            return msg, self.long.encode(msg)
        return msg, codes.encode(self.component, msg)

    def channel_llr(self, codeword, snr_db, rng, frame):
        cfg = self.cfg
        if cfg.channel == "awgn":
            return awgn_bpsk_llr(codeword, AwgnSpec(snr_db, self.rate), rng)
        spec = FadingSpec(cfg.rician_nc, cfg.rician_t, cfg.rician_k, snr_db, self.rate, cfg.seed)
        return rician_qpsk_llr(codeword, spec, rng, frame).reshape(np.shape(codeword))

    def message_bits(self, word):
        if self.cfg.construction == "product":
            return np.asarray(word)[self.long.message_mask]
        info = list(self.long.info_set)
        return np.asarray(word).ravel()[info]

    def frame(self, snr_db, point, index):
        """Simulate one frame: ``(block_error, bit_errors, queries, parallel_proxy, iterations)``."""
        rng = self.rng(point, index)
        msg, cw = self.transmit(rng)
        llr = self.channel_llr(cw, snr_db, rng, index)
        c = self.cfg.construction
        if c == "product":
            tr = turbo_decode_product(self.long, llr, self.turbo)
        elif c == "gldpc":
            tr = gldpc_decode(self.long, llr, self.turbo, self.other_edge, self.cfg.gldpc_schedule)
        else:
            dl = decode_list(self.component, LlrFrame(llr), 1, self.turbo.budget, None, self.turbo.parity_skip)
            dec = dl.codewords[0] if len(dl) else (llr < 0).astype(np.uint8)
            q = dl.queries_made
            return (not np.array_equal(dec, cw), int((self.message_bits(dec) != msg.ravel()).sum()),
                    q, q / self.N, 0.5)
        block_err = not np.array_equal(tr.decoded.reshape(np.shape(cw)), cw)
        bit_err = int((self.message_bits(tr.decoded.reshape(np.shape(cw))) != self.message_bits(cw)).sum())
        return block_err, bit_err, tr.queries_total, tr.queries_parallel_proxy, tr.iterations


@dataclass
class PointStats:
    snr_db: float
    frames: int = 0
    block_errors: int = 0
    bit_errors: int = 0
    queries: int = 0
    parallel: float = 0.0
    iterations: float = 0.0
    N: int = 1
    K: int = 1

    def add(self, rec):
        be, bits, q, qp, it = rec
        self.frames += 1
        self.block_errors += int(be)
        self.bit_errors += bits
        self.queries += q
        self.parallel += qp
        self.iterations += it

    @property
    def bler(self):
        return self.block_errors / self.frames if self.frames else float("nan")

    @property
    def ber(self):
        return self.bit_errors / (self.frames * self.K) if self.frames else float("nan")

    @property
    def q_per_bit(self):
        return self.queries / (self.frames * self.N) if self.frames else float("nan")

    @property
    def q_parallel_per_bit(self):
        return self.parallel / self.frames if self.frames else float("nan")

    @property
    def iters_avg(self):
        return self.iterations / self.frames if self.frames else float("nan")

    def row(self):
        return [f"{self.snr_db:g}", str(self.frames), str(self.block_errors), f"{self.bler:.6g}",
                str(self.bit_errors), f"{self.ber:.6g}", f"{self.q_per_bit:.6g}",
                f"{self.q_parallel_per_bit:.6g}", f"{self.iters_avg:.6g}"]

    def wilson_interval(self, z: float = 1.96):
        """Wilson score interval on the BLER."""
        n, x = self.frames, self.block_errors
        if n == 0:
            return 0.0, 1.0
        p = x / n
        d = 1 + z * z / n
        c = (p + z * z / (2 * n)) / d
        h = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / d
        return max(c - h, 0.0), min(c + h, 1.0)


@dataclass
class SimStats:
    points: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for p in self.points:
            w.writerow(p.row())
        return buf.getvalue()


_WORKER_SETUP = None


def _init_worker(cfg):
    global _WORKER_SETUP
    _WORKER_SETUP = Setup(cfg)


def _run_chunk(args):
    snr, point, start, stop = args
    return [_WORKER_SETUP.frame(snr, point, i) for i in range(start, stop)]


def _worker_count(workers):
    if workers is None:
        workers = int(os.environ.get("SOGRAND_WORKERS", "1") or 1)
    return max(1, workers)


def run_sim(cfg: ExperimentConfig, workers: int | None = None, chunk: int = 256, progress=None) -> SimStats:
    """Simulate every SNR point until ``min_frame_errors`` or ``max_frames``.

    With several workers, frames are computed in chunks and accumulated in
    frame-index order, stopping at the same frame a sequential run would.
    """
    setup = Setup(cfg)
    stats = SimStats()
    workers = _worker_count(workers)
    pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(cfg,)) if workers > 1 else None
    try:
        for point, snr in enumerate(cfg.snr_points):
            ps = PointStats(snr, N=setup.N, K=setup.K)
            if pool is None:
                for i in range(cfg.max_frames):
                    ps.add(setup.frame(snr, point, i))
                    if ps.block_errors >= cfg.min_frame_errors:
                        break
            else:
                start = 0
                done = False
                while not done and start < cfg.max_frames:
                    jobs = []
                    for _ in range(workers):
                        stop = min(start + chunk, cfg.max_frames)
                        if start >= stop:
                            break
                        jobs.append((snr, point, start, stop))
                        start = stop
                    for recs in pool.map(_run_chunk, jobs):
                        for rec in recs:
                            if done:
                                break
                            ps.add(rec)
                            done = ps.block_errors >= cfg.min_frame_errors or ps.frames >= cfg.max_frames
            stats.points.append(ps)
            if progress:
                progress(ps)
    finally:
        if pool is not None:
            pool.shutdown()
    return stats


# --- calibration ----------------------------------------------------------------


def block_bin_edges(decades: int = 6):
    """Half-decade edges from ``10**-decades`` up to 1, plus an underflow bin from 0."""
    return np.concatenate([[0.0], 10.0 ** (-np.arange(2 * decades, -1, -1) / 2.0)])


def bit_bin_edges(bins: int = 20):
    return np.linspace(0.0, 1.0, bins + 1)


class CalibrationBins:
    """Online accumulator of (prediction, outcome) pairs into fixed bins."""

    def __init__(self, edges):
        self.edges = np.asarray(edges, dtype=np.float64)
        nb = len(self.edges) - 1
        self.count = np.zeros(nb, dtype=np.int64)
        self.pred_sum = np.zeros(nb)
        self.events = np.zeros(nb, dtype=np.int64)

    def add(self, pred, outcome):
        pred = np.atleast_1d(np.asarray(pred, dtype=np.float64))
        outcome = np.atleast_1d(np.asarray(outcome, dtype=np.int64))
        idx = np.searchsorted(self.edges, pred, side="left") - 1
        idx = np.where(pred <= self.edges[0], 0, idx)
        ok = (idx >= 0) & (idx < len(self.count)) & (pred >= self.edges[0])
        nb = len(self.count)
        self.count += np.bincount(idx[ok], minlength=nb)
        self.pred_sum += np.bincount(idx[ok], weights=pred[ok], minlength=nb)
        self.events += np.bincount(idx[ok], weights=outcome[ok], minlength=nb).astype(np.int64)

    def table(self):
        """Rows ``(lo, hi, mean predicted, empirical, count, events)`` for non-empty bins."""
        rows = []
        for i, c in enumerate(self.count):
            if c:
                rows.append((self.edges[i], self.edges[i + 1], self.pred_sum[i] / c,
                             self.events[i] / c, int(c), int(self.events[i])))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "predicted", "empirical", "count", "events"])
        for lo, hi, p, e, c, ev in self.table():
            w.writerow([f"{lo:.6g}", f"{hi:.6g}", f"{p:.6g}", f"{e:.6g}", c, ev])
        return buf.getvalue()


ESTIMATORS = ("sogrand", "forney", "pyndiah")


def calibration_frame(setup: Setup, snr_db, index, estimator, mode, beta=0.8):
    """One decode; returns ``(predictions, outcomes)`` for the requested mode."""
    cfg = setup.cfg
    code = setup.component
    L = cfg.target_L
    rng = setup.rng(0, index)
    msg, cw = setup.transmit(rng)
    frame = LlrFrame(setup.channel_llr(cw, snr_db, rng, index))
    size = L + 1 if estimator == "forney" else L
    thr = cfg.listbler_threshold if estimator == "sogrand" else None
    dl = decode_list(code, frame, size, cfg.budget, thr, cfg.parity_skip)
    if mode == "block":
        if estimator == "sogrand":
            pred = approx_block_app(dl).not_in_list
            miss = not dl.contains(cw)
        else:
            pred = float(forney_app(dl).per_entry[L:].sum()) if len(dl) >= 2 else 0.0
            miss = not any(np.array_equal(w, cw) for w in dl.codewords[:L])
        return np.array([pred]), np.array([int(miss)])
    if len(dl) == 0:
        llr = frame.total
    elif estimator == "sogrand":
        llr = bitwise_llr(dl, approx_block_app(dl), frame).app_llr
    elif estimator == "forney":
        llr = bitwise_llr(dl, forney_app(dl), frame).app_llr if len(dl) >= 2 else frame.total
    else:
        llr = pyndiah_llr(dl, frame, beta).app_llr
    return 1.0 / (1.0 + np.exp(np.clip(llr, -700, 700))), cw.astype(np.int64)


def calibrate(cfg: ExperimentConfig, estimator: str = "sogrand", mode: str = "block",
              frames: int | None = None, snr_db: float | None = None) -> CalibrationBins:
    """Bin each frame's predicted list error (block) or P(bit = 1) (bit) against the truth."""
    if cfg.construction != "single":
        raise ConfigError("calibration needs construction = single")
    if estimator not in ESTIMATORS:
        raise ConfigError(f"estimator must be one of {ESTIMATORS}")
    if mode not in ("block", "bit"):
        raise ConfigError("mode must be block or bit")
    if estimator == "pyndiah" and mode == "block":
        raise ConfigError("pyndiah provides bit soft output only")
    setup = Setup(cfg)
    snr = cfg.snr_start if snr_db is None else snr_db
    bins = CalibrationBins(block_bin_edges() if mode == "block" else bit_bin_edges())
    for i in range(cfg.max_frames if frames is None else frames):
        bins.add(*calibration_frame(setup, snr, i, estimator, mode))
    return bins


# --- debugging surfaces --------------------------------------------------------


def codegen(code: codes.LinearCode, out_dir, stem: str | None = None):
    """Write ``<stem>.G.txt`` and ``<stem>.H.txt``; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = stem or (code.name or f"code_{code.n}_{code.k}").replace("(", "_").replace(")", "").replace(",", "_")
    paths = []
    for which in ("G", "H"):
        p = out / f"{stem}.{which}.txt"
        codes.export_code(code, p, which)
        paths.append(p)
    return paths


def read_llr_file(path) -> np.ndarray:
    try:
        return np.array([float(v) for v in Path(path).read_text().split()])
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read LLR file {path}: {exc}") from exc


def decode_one(code: codes.LinearCode, llr, target_L=4, budget=10**6, stop_rule=None) -> str:
    """Human-readable report of one SOGRAND decode."""
    llr = np.asarray(llr, dtype=np.float64)
    if llr.size != code.n:
        raise ConfigError(f"LLR file has {llr.size} values, code length is {code.n}")
    frame = LlrFrame(llr)
    dl = decode_list(code, frame, target_L, budget, stop_rule)
    app = approx_block_app(dl)
    so = bitwise_llr(dl, app, frame)
    lines = [f"code: {code!r}", f"queries: {dl.queries_made}  abandoned: {dl.abandoned}",
             f"list size: {len(dl)}"]
    for i, (w, q, p) in enumerate(zip(dl.codewords, dl.queries, app.per_entry)):
        lines.append(f"  [{i}] q={q} app={p:.6g} word={''.join(map(str, w))}")
    lines.append(f"not_in_list: {app.not_in_list:.6g}")
    decided = dl.codewords[0] if len(dl) else so.hard_decision()
    lines.append("decoded: " + "".join(map(str, decided)))
    lines.append("app_llr: " + " ".join(f"{v:.4g}" for v in so.app_llr))
    lines.append("extrinsic: " + " ".join(f"{v:.4g}" for v in so.extrinsic))
    return "\n".join(lines)
