"""Binary linear block codes: component constructors and long-code layouts.

Codeword bit ``j`` of a cyclic construction (BCH, CRC) carries the coefficient
of ``x^(n-1-j)``, so the first ``k`` positions hold the message verbatim and
the trailing ``n-k`` hold the remainder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import gf2


class CodeConstructionError(ValueError):
    """Raised when a requested code cannot be built."""


PRIMITIVE_POLYS = {
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
}


@dataclass(frozen=True, eq=False)
class LinearCode:
    """An ``(n, k)`` binary linear code.

    ``G`` is kept in reduced row echelon form; ``info_set`` lists its pivot
    columns, which carry the message bits of a systematic encoding.
    """

    G: np.ndarray
    H: np.ndarray
    info_set: tuple
    name: str = ""

    def __post_init__(self):
        self.G.setflags(write=False)
        self.H.setflags(write=False)

    @property
    def n(self) -> int:
        return self.G.shape[1]

    @property
    def k(self) -> int:
        return self.G.shape[0]

    @property
    def rate(self) -> float:
        return self.k / self.n

    @cached_property
    def even(self) -> bool:
        return bool(np.all(self.G.sum(axis=1) % 2 == 0))

    @cached_property
    def syndrome_columns(self) -> np.ndarray:
        """Column ``j`` of ``H`` packed into an unsigned 64-bit mask."""
        if self.n - self.k > 64:
            raise ValueError("packed syndromes need n - k <= 64")
        weights = np.uint64(1) << np.arange(self.n - self.k, dtype=np.uint64)
        return (self.H.astype(np.uint64) * weights[:, None]).sum(axis=0).astype(np.uint64)

    @classmethod
    def from_generator(cls, G, name: str = "") -> "LinearCode":
        G = gf2.as_bits(G)
        g, pivots = gf2.rref(G)
        if len(pivots) != G.shape[0]:
            raise CodeConstructionError("generator matrix is not full rank")
        n, k = g.shape[1], g.shape[0]
        free = [c for c in range(n) if c not in set(pivots)]
        H = np.zeros((n - k, n), dtype=np.uint8)
        H[:, free] = np.eye(n - k, dtype=np.uint8)
        H[:, pivots] = g[:, free].T
        return cls(g, H, tuple(pivots), name)

    @classmethod
    def from_parity_check(cls, H, name: str = "") -> "LinearCode":
        H = gf2.as_bits(H)
        if gf2.rank(H) != H.shape[0]:
            raise CodeConstructionError("parity-check matrix is not full rank")
        g, pivots = gf2.rref(gf2.nullspace(H))
        if g.shape[0] == 0:
            raise CodeConstructionError("parity-check matrix leaves no codewords")
        return cls(g, H.copy(), tuple(pivots), name)

    def __repr__(self):
        label = f" {self.name}" if self.name else ""
        return f"LinearCode({self.n},{self.k}{label}, even={self.even})"


def encode(code: LinearCode, message) -> np.ndarray:
    m = np.asarray(message, dtype=np.uint8)
    if m.shape[-1] != code.k:
        raise ValueError(f"message length {m.shape[-1]} != k = {code.k}")
    return gf2.matmul(m, code.G)


def syndrome(code: LinearCode, c) -> np.ndarray:
    c = np.asarray(c, dtype=np.uint8)
    if c.shape[-1] != code.n:
        raise ValueError(f"word length {c.shape[-1]} != n = {code.n}")
    return gf2.matmul(c, code.H.T)


def is_codeword(code: LinearCode, c) -> bool:
    return not syndrome(code, c).any()


def extract_message(code: LinearCode, c) -> np.ndarray:
    return np.asarray(c)[..., list(code.info_set)]


# --- component constructors -------------------------------------------------


def _gf_tables(m: int):
    prim = PRIMITIVE_POLYS[m]
    size = (1 << m) - 1
    exp = np.zeros(2 * size, dtype=np.int64)
    log = np.zeros(size + 1, dtype=np.int64)
    x = 1
    for i in range(size):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x >> m:
            x ^= prim
    exp[size:] = exp[:size]
    return exp, log


def minimal_polynomial(m: int, power: int) -> int:
    """Minimal polynomial over GF(2) of ``alpha**power`` in GF(2^m)."""
    exp, log = _gf_tables(m)
    size = (1 << m) - 1
    coset = []
    e = power % size
    while e not in coset:
        coset.append(e)
        e = (2 * e) % size
    # coefficients low->high in GF(2^m)
    poly = [1]
    for c in coset:
        root = int(exp[c])
        nxt = [0] * (len(poly) + 1)
        for i, a in enumerate(poly):
            nxt[i + 1] ^= a
            if a:
                nxt[i] ^= int(exp[log[a] + log[root]])
        poly = nxt
    assert all(a in (0, 1) for a in poly)
    return sum(a << i for i, a in enumerate(poly))


def bch_generator_polynomial(m: int, t: int) -> int:
    g = 1
    seen = []
    for i in range(1, 2 * t, 2):
        mp = minimal_polynomial(m, i)
        if mp not in seen:
            seen.append(mp)
            g = gf2.poly_mul(g, mp)
    return g


def cyclic_systematic_generator(n: int, poly: int) -> np.ndarray:
    r = poly.bit_length() - 1
    k = n - r
    G = np.zeros((k, n), dtype=np.uint8)
    for i in range(k):
        G[i, i] = 1
        rem = gf2.poly_mod(1 << (n - 1 - i), poly)
        for d in range(r):
            if rem >> d & 1:
                G[i, n - 1 - d] = 1
    return G


def build_ebch(m: int, t: int) -> LinearCode:
    """Extended BCH code of length ``2**m`` correcting ``t`` errors before extension."""
    if m not in PRIMITIVE_POLYS:
        raise CodeConstructionError(f"field degree m={m} not supported (3..8)")
    if t < 1:
        raise CodeConstructionError("t must be at least 1")
    n = (1 << m) - 1
    g = bch_generator_polynomial(m, t)
    k = n - (g.bit_length() - 1)
    if k <= 0:
        raise CodeConstructionError(f"BCH(m={m}, t={t}) has no message bits")
    core = LinearCode.from_generator(cyclic_systematic_generator(n, g))
    return extend_even(core, name=f"eBCH({n + 1},{k})")


def parse_crc_poly(poly, degree: int | None = None, notation: str = "implicit-leading") -> int:
    """Full generator polynomial (bit i = coeff of x^i) from a CRC label.

    ``implicit-leading`` treats the hex value as the low coefficients with an
    implied ``x^degree`` term; ``koopman`` treats it as the high coefficients
    with an implied ``+1``; ``full`` uses the value verbatim.
    """
    if isinstance(poly, str):
        poly = int(poly, 16)
    if notation == "full":
        return poly
    if notation == "koopman":
        return (poly << 1) | 1
    if notation == "implicit-leading":
        if degree is None:
            raise ValueError("implicit-leading notation needs the degree")
        return (1 << degree) | poly
    raise ValueError(f"unknown CRC notation {notation!r}")


def build_crc_code(n: int, k: int, poly, notation: str = "full") -> LinearCode:
    """Systematic CRC code: codeword = message || (message * x^(n-k) mod poly)."""
    full = parse_crc_poly(poly, n - k, notation)
    if full.bit_length() - 1 != n - k:
        raise CodeConstructionError(
            f"generator degree {full.bit_length() - 1} does not match n-k = {n - k}"
        )
    if not full & 1:
        raise CodeConstructionError("generator polynomial needs a nonzero constant term")
    return LinearCode.from_generator(cyclic_systematic_generator(n, full), name=f"CRC({n},{k})")


def extend_even(code: LinearCode, name: str = "") -> LinearCode:
    col = (code.G.sum(axis=1) % 2).astype(np.uint8)
    G = np.hstack([code.G, col[:, None]])
    return LinearCode.from_generator(G, name=name or code.name)


# --- matrix files -----------------------------------------------------------


def export_code(code: LinearCode, path, which: str = "G") -> None:
    mat = {"G": code.G, "H": code.H}[which]
    lines = [f"{code.n} {code.k} {which}"]
    lines += ["".join(str(b) for b in row) for row in mat]
    Path(path).write_text("\n".join(lines) + "\n")


def import_code(path) -> LinearCode:
    """Read a code from the ``n k [G|H]`` + 0/1-rows text format.

    Without the matrix tag, ``k`` rows mean a generator and ``n-k`` rows a
    parity-check matrix.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CodeConstructionError(f"cannot read matrix file {path}: {exc}") from exc
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    try:
        head = lines[0].split()
        n, k = int(head[0]), int(head[1])
        rows = np.array([[int(ch) for ch in ln.replace(" ", "")] for ln in lines[1:]], dtype=np.uint8)
    except (IndexError, ValueError) as exc:
        raise CodeConstructionError(f"malformed matrix file {path}: {exc}") from exc
    if rows.ndim != 2 or rows.shape[1] != n or rows.max(initial=0) > 1:
        raise CodeConstructionError(f"matrix rows must have {n} columns")
    tag = head[2].upper() if len(head) > 2 else ("G" if rows.shape[0] == k else "H")
    name = Path(path).stem
    code = (LinearCode.from_generator if tag == "G" else LinearCode.from_parity_check)(rows, name)
    if code.k != k:
        raise CodeConstructionError(f"header says k={k} but matrix gives k={code.k}")
    return code


# --- long codes ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProductCode:
    component: LinearCode

    @property
    def n(self) -> int:
        return self.component.n

    @property
    def N(self) -> int:
        return self.component.n ** 2

    @property
    def K(self) -> int:
        return self.component.k ** 2

    @property
    def rate(self) -> float:
        return self.K / self.N

    @cached_property
    def message_mask(self) -> np.ndarray:
        """Boolean ``n x n`` mask of the systematic message positions."""
        mask = np.zeros((self.n, self.n), dtype=bool)
        info = list(self.component.info_set)
        mask[np.ix_(info, info)] = True
        return mask

    def is_codeword(self, arr) -> bool:
        arr = np.asarray(arr, dtype=np.uint8)
        H = self.component.H
        return not (gf2.matmul(arr, H.T).any() or gf2.matmul(arr.T, H.T).any())


def product_encode(pc: ProductCode, message) -> np.ndarray:
    """Encode the ``k x k`` message rows first, then every column."""
    msg = np.asarray(message, dtype=np.uint8)
    k = pc.component.k
    if msg.shape != (k, k):
        raise ValueError(f"message must be {k}x{k}, got {msg.shape}")
    rows = encode(pc.component, msg)
    return encode(pc.component, rows.T).T


def circulant_permutation(n: int, shift: int) -> np.ndarray:
    """Identity matrix right-rotated by ``shift`` positions."""
    return np.roll(np.eye(n, dtype=np.uint8), shift, axis=1)


@dataclass(frozen=True, eq=False)
class GldpcCode:
    """Two-block-row quasi-cyclic GLDPC code with a component code at every check node.

    Check node ``a`` constrains variable nodes ``cn_vars[a]``; position ``j``
    of that list is bit ``j`` of the component codeword.
    """

    component: LinearCode
    adjacency: np.ndarray
    cn_vars: np.ndarray

    @property
    def n(self) -> int:
        return self.component.n

    @property
    def N(self) -> int:
        return self.component.n ** 2

    @property
    def design_K(self) -> int:
        n, k = self.component.n, self.component.k
        return n * n - 2 * n * (n - k)

    @cached_property
    def H(self) -> np.ndarray:
        n, r = self.component.n, self.component.n - self.component.k
        H = np.zeros((2 * n * r, self.N), dtype=np.uint8)
        for a, vars_ in enumerate(self.cn_vars):
            H[a * r:(a + 1) * r, vars_] = self.component.H
        return H

    @cached_property
    def _generator(self):
        g, pivots = gf2.rref(gf2.nullspace(self.H))
        return g, tuple(pivots)

    @property
    def G(self) -> np.ndarray:
        return self._generator[0]

    @property
    def info_set(self) -> tuple:
        return self._generator[1]

    @property
    def K(self) -> int:
        return self.N - gf2.rank(self.H)

    @property
    def rate(self) -> float:
        return self.K / self.N

    def encode(self, message) -> np.ndarray:
        return gf2.matmul(message, self.G)

    def is_codeword(self, c) -> bool:
        c = np.asarray(c, dtype=np.uint8)
        return not gf2.matmul(c[self.cn_vars], self.component.H.T).any()


def gldpc_build(component: LinearCode) -> GldpcCode:
    n = component.n
    top = np.hstack([circulant_permutation(n, 0)] * n)
    bottom = np.hstack([circulant_permutation(n, i) for i in range(n)])
    adjacency = np.vstack([top, bottom])
    cn_vars = np.zeros((2 * n, n), dtype=np.int64)
    for a in range(2 * n):
        for j in range(n):
            block = adjacency[a, j * n:(j + 1) * n]
            cn_vars[a, j] = j * n + int(np.flatnonzero(block)[0])
    adjacency.setflags(write=False)
    cn_vars.setflags(write=False)
    return GldpcCode(component, adjacency, cn_vars)


def product_layout(component: LinearCode) -> GldpcCode:
    """The product code expressed in the same check-node form (rows, then columns)."""
    n = component.n
    idx = np.arange(n * n).reshape(n, n)
    cn_vars = np.vstack([idx, idx.T])
    adjacency = np.zeros((2 * n, n * n), dtype=np.uint8)
    for a, vars_ in enumerate(cn_vars):
        adjacency[a, vars_] = 1
    return GldpcCode(component, adjacency, cn_vars)
