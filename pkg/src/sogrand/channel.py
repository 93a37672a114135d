"""BPSK/AWGN and Gray-QPSK block-Rician channels producing bit LLRs (positive = bit 0)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

QPSK_DELTA = 1.0 / math.sqrt(2.0)
RAYLEIGH_VAR = 0.5


@dataclass(frozen=True)
class AwgnSpec:
    ebn0_db: float
    rate: float

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must lie in (0, 1]")

    @property
    def noise_var(self) -> float:
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0))


@dataclass(frozen=True)
class FadingSpec:
    nc: int
    t: int
    k_factor: float
    ebn0_db: float
    rate: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ValueError("rate must lie in (0, 1]")

    @property
    def frame_bits(self) -> int:
        return 2 * self.t * self.nc

    @property
    def noise_var(self) -> float:
        """Per-dimension noise variance for unit-energy QPSK and ``E|H|^2 = 1``."""
        esn0 = 10.0 ** (es_n0_from_eb_n0(self.ebn0_db, self.rate, 2) / 10.0)
        return QPSK_DELTA**2 / esn0


def es_n0_from_eb_n0(ebn0_db: float, rate: float, bits_per_symbol: int) -> float:
    if bits_per_symbol not in (1, 2):
        raise ValueError("bits_per_symbol must be 1 or 2")
    return ebn0_db + 10.0 * math.log10(bits_per_symbol * rate)


def awgn_bpsk_llr(codeword, spec: AwgnSpec, rng: np.random.Generator) -> np.ndarray:
    c = np.asarray(codeword)
    s2 = spec.noise_var
    r = 1.0 - 2.0 * c + rng.normal(0.0, math.sqrt(s2), size=c.shape)
    return 2.0 * r / s2


def interleaver(length: int, seed, frame_index: int = 0) -> np.ndarray:
    """Seeded Fisher-Yates permutation; ``x[perm]`` interleaves."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(frame_index), 0x1EAF]))
    return rng.permutation(length)


def rician_gains(t: int, k_factor: float, rng: np.random.Generator) -> np.ndarray:
    """One complex Rician coefficient per coherence block, ``E|H|^2 = 1``."""
    h_ra = rng.normal(0.0, math.sqrt(RAYLEIGH_VAR), size=(t, 2)) @ np.array([1.0, 1.0j])
    if math.isinf(k_factor):
        return np.ones(t, dtype=complex)
    return math.sqrt(k_factor / (k_factor + 1.0)) + math.sqrt(1.0 / (k_factor + 1.0)) * h_ra


def qpsk_llr(y, h, noise_var: float, delta: float = QPSK_DELTA) -> np.ndarray:
    """Bit LLR pairs ``(c1, c2)`` per received symbol, interleaved as c1, c2, c1, ..."""
    z = np.asarray(y) * np.conj(h)
    out = np.empty(2 * z.size)
    out[0::2] = 2.0 * delta * z.real / noise_var
    out[1::2] = 2.0 * delta * z.imag / noise_var
    return out


def rician_qpsk_llr(codeword, spec: FadingSpec, rng: np.random.Generator, frame_index: int = 0) -> np.ndarray:
    c = np.asarray(codeword).ravel()
    if c.size != spec.frame_bits:
        raise ValueError(f"codeword has {c.size} bits, frame needs 2*t*nc = {spec.frame_bits}")
    perm = interleaver(c.size, spec.seed, frame_index)
    bits = c[perm]
    d = QPSK_DELTA
    x = d * (1.0 - 2.0 * bits[0::2]) + 1j * d * (1.0 - 2.0 * bits[1::2])
    h = np.repeat(rician_gains(spec.t, spec.k_factor, rng), spec.nc)
    s2 = spec.noise_var
    noise = rng.normal(0.0, math.sqrt(s2), size=(x.size, 2)) @ np.array([1.0, 1.0j])
    llr_int = qpsk_llr(h * x + noise, h, s2, d)
    llr = np.empty_like(llr_int)
    llr[perm] = llr_int
    return llr
