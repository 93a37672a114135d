"""Dense linear algebra over GF(2) on ``uint8`` numpy arrays."""

import numpy as np


def as_bits(a) -> np.ndarray:
    """Coerce ``a`` to a 2-D ``uint8`` array of 0/1 entries."""
    m = np.atleast_2d(np.asarray(a, dtype=np.uint8))
    if m.ndim != 2:
        raise ValueError("bit matrix must be two-dimensional")
    if m.size and m.max() > 1:
        raise ValueError("bit matrix entries must be 0 or 1")
    return m


def rref(a):
    """Reduced row echelon form over GF(2).

    Returns
    -------
    r : ndarray
        The reduced matrix with zero rows dropped.
    pivots : list of int
        Pivot column of each remaining row.
    """
    m = as_bits(a).copy()
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        p = r + nz[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        hit = np.nonzero(m[:, c])[0]
        hit = hit[hit != r]
        if hit.size:
            m[hit] ^= m[r]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(a) -> int:
    return len(rref(a)[1])


def nullspace(a) -> np.ndarray:
    """Basis of the right null space ``{x : a x = 0}``, one vector per row."""
    m = as_bits(a)
    cols = m.shape[1]
    r, pivots = rref(m)
    free = [c for c in range(cols) if c not in set(pivots)]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, p in enumerate(pivots):
            basis[i, p] = r[row, f]
    return basis


def matmul(a, b) -> np.ndarray:
    return (np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64) % 2).astype(np.uint8)


def poly_mod(num: int, den: int) -> int:
    """Remainder of binary polynomials packed as ints (bit i = coeff of x^i)."""
    dd = den.bit_length() - 1
    while num.bit_length() - 1 >= dd and num:
        num ^= den << (num.bit_length() - 1 - dd)
    return num


def poly_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out
