import itertools

import numpy as np
import pytest


def all_codewords(G):
    """Every codeword spanned by the rows of G (small k only)."""
    G = np.asarray(G, dtype=np.int64)
    k = G.shape[0]
    msgs = np.array(list(itertools.product([0, 1], repeat=k)), dtype=np.int64)
    return (msgs @ G % 2).astype(np.uint8)


def min_distance(G):
    w = all_codewords(G).sum(axis=1)
    return int(w[w > 0].min())


def int_rank(rows):
    """GF(2) rank with rows packed into Python ints, independent of sogrand.gf2."""
    vals = [int("".join(map(str, r)), 2) for r in np.asarray(rows, dtype=np.uint8)]
    rank = 0
    while vals:
        pivot = max(vals)
        vals.remove(pivot)
        if pivot == 0:
            continue
        rank += 1
        top = pivot.bit_length() - 1
        vals = [v ^ pivot if (v >> top) & 1 else v for v in vals]
    return rank


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
