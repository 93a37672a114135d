"""Compare the compiled and pure-Python ORBGRAND kernels.

Both backends decode the same rows; the script checks they agree and prints
throughput in queries per second.

    python3 benchmarks/bench_kernels.py [--rows 200] [--code 16,11]
"""

import argparse
import time

import numpy as np

from sogrand import _fallback, codes
from sogrand.channel import AwgnSpec, awgn_bpsk_llr

try:
    from sogrand import _kernels
except ImportError:
    _kernels = None


def run(backend, code, rows, target_L, threshold):
    t0 = time.perf_counter()
    app, queries, found = backend.siso_rows(rows, code.syndrome_columns, code.even, code.k,
                                            target_L, 10**6, threshold, True)
    return time.perf_counter() - t0, app, queries


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=200)
    ap.add_argument("--code", default="16,11", help="eBCH n,k: 8,4 | 16,11 | 32,26 | 64,57")
    ap.add_argument("--snr", type=float, default=2.0)
    ap.add_argument("--list-size", type=int, default=4)
    ap.add_argument("--threshold", type=float, default=1e-5)
    args = ap.parse_args()

    n, k = (int(v) for v in args.code.split(","))
    m = n.bit_length() - 1
    t = {(8, 4): 1, (16, 11): 1, (32, 26): 1, (64, 57): 1, (16, 7): 2, (32, 21): 2}[(n, k)]
    code = codes.build_ebch(m, t)
    rng = np.random.default_rng(0)
    msg = rng.integers(0, 2, (args.rows, code.k), dtype=np.uint8)
    rows = awgn_bpsk_llr(codes.encode(code, msg), AwgnSpec(args.snr, code.rate), rng)

    results = {}
    for name, backend in (("python", _fallback), ("cython", _kernels)):
        if backend is None:
            print(f"{name:>7}: not available")
            continue
        run(backend, code, rows[:2], args.list_size, args.threshold)  # warm-up
        secs, app, q = run(backend, code, rows, args.list_size, args.threshold)
        results[name] = (secs, app, q)
        print(f"{name:>7}: {args.rows} rows of {code!r}, {int(q.sum())} queries in {secs:.3f} s "
              f"-> {q.sum() / secs:,.0f} queries/s")

    if len(results) == 2:
        (ts, a_py, q_py), (tc, a_cy, q_cy) = results["python"], results["cython"]
        assert np.array_equal(q_py, q_cy), "query counts differ"
        print(f"agreement: identical query counts, max |APP diff| = {np.abs(a_py - a_cy).max():.1e}")
        print(f"speed-up: {ts / tc:.1f}x")


if __name__ == "__main__":
    main()
