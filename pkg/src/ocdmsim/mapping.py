"""Gray-labeled QAM constellations and the two soft conversions of the
iterative receiver: bitwise LLRs -> per-symbol mean/variance (the a-priori
statistics fed to the equalizer) and equalized mean/variance -> max-log
extrinsic LLRs (fed to the decoder).

LLR sign convention used across the whole package:

    L = ln Pr{bit = 0} - ln Pr{bit = 1},  i.e.  Pr{bit = 1} = 1 / (1 + e^L).

All LLR arrays are magnitude-clipped to ``LLR_CAP``.
"""

from dataclasses import dataclass

import numpy as np

LLR_CAP = 50.0


def clip_llrs(llrs: np.ndarray, cap: float = LLR_CAP) -> np.ndarray:
    return np.clip(llrs, -cap, cap)


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy point set with its bit labeling.

    ``bit_labels[j]`` is the bit pattern of ``points[j]``; patterns are
    enumerated with bit 0 as the most significant position, so point j
    carries the binary expansion of j.
    """

    name: str
    points: np.ndarray      # (J,) complex128
    bit_labels: np.ndarray  # (J, log2 J) uint8

    @property
    def bits_per_symbol(self) -> int:
        return self.bit_labels.shape[1]


def _labels(n_bits: int) -> np.ndarray:
    j = np.arange(1 << n_bits)[:, None]
    shifts = np.arange(n_bits - 1, -1, -1)[None, :]
    return ((j >> shifts) & 1).astype(np.uint8)


# two-bit Gray code to amplitude level: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
_GRAY_LEVELS = np.array([-3.0, -1.0, 3.0, 1.0])


def qpsk() -> Constellation:
    labels = _labels(2)
    i = 1.0 - 2.0 * labels[:, 0]
    q = 1.0 - 2.0 * labels[:, 1]
    return Constellation("QPSK", (i + 1j * q) / np.sqrt(2.0), labels)


def qam16() -> Constellation:
    labels = _labels(4)
    i = _GRAY_LEVELS[labels[:, 0] * 2 + labels[:, 1]]
    q = _GRAY_LEVELS[labels[:, 2] * 2 + labels[:, 3]]
    return Constellation("16QAM", (i + 1j * q) / np.sqrt(10.0), labels)


def constellation(name: str) -> Constellation:
    key = name.lower().replace("-", "")
    if key == "qpsk":
        return qpsk()
    if key in ("16qam", "qam16"):
        return qam16()
    raise ValueError(f"unknown constellation {name!r}")


@dataclass
class SoftSymbols:
    """Per-symbol complex mean and real variance of a data block."""

    mean: np.ndarray
    variance: np.ndarray

    @classmethod
    def uninformative(cls, n: int) -> "SoftSymbols":
        return cls(np.zeros(n, dtype=complex), np.ones(n))


def map_bits(bits: np.ndarray, c: Constellation) -> np.ndarray:
    """Map a bit vector to constellation symbols, bits_per_symbol at a time."""
    bits = np.asarray(bits)
    m = c.bits_per_symbol
    if bits.size % m != 0:
        raise ValueError("map_bits: bit count not divisible by bits per symbol")
    groups = bits.reshape(-1, m).astype(np.int64)
    weights = 1 << np.arange(m - 1, -1, -1)
    return c.points[groups @ weights]


def apriori_stats(l_a: np.ndarray, c: Constellation) -> SoftSymbols:
    """Per-symbol mean and variance implied by bitwise a-priori LLRs.

    Symbol probabilities are products of the per-bit probabilities; the
    variance is the expected squared distance from the mean.  All-zero LLRs
    give mean 0 and variance 1 (the uninformative prior of iteration one).
    """
    l_a = clip_llrs(np.asarray(l_a, dtype=float))
    m = c.bits_per_symbol
    if l_a.size % m != 0:
        raise ValueError("apriori_stats: LLR count not divisible by bits per symbol")
    per_sym = l_a.reshape(-1, m)
    p1 = 1.0 / (1.0 + np.exp(per_sym))            # (S, m)
    p0 = 1.0 - p1
    ones = c.bit_labels[None, :, :].astype(bool)  # (1, J, m)
    pmf = np.where(ones, p1[:, None, :], p0[:, None, :]).prod(axis=2)  # (S, J)
    mean = pmf @ c.points
    spread_sq = np.abs(c.points[None, :] - mean[:, None]) ** 2
    variance = np.einsum("sj,sj->s", pmf, spread_sq)
    return SoftSymbols(mean, variance)


def extrinsic_llrs(post: SoftSymbols, c: Constellation) -> np.ndarray:
    """Max-log bit LLRs from equalized symbol means and error variances.

    For each bit the metric is the squared distance to the nearest point
    carrying a 1 minus the nearest carrying a 0, scaled by the inverse error
    variance; positive values therefore favor bit 0.
    """
    var = np.asarray(post.variance, dtype=float)
    if np.any(var <= 0):
        raise ValueError("extrinsic_llrs: posterior variance must be positive")
    d2 = np.abs(np.asarray(post.mean)[:, None] - c.points[None, :]) ** 2  # (S, J)
    m = c.bits_per_symbol
    out = np.empty((d2.shape[0], m))
    for b in range(m):
        zero_set = c.bit_labels[:, b] == 0
        min0 = d2[:, zero_set].min(axis=1)
        min1 = d2[:, ~zero_set].min(axis=1)
        out[:, b] = (min1 - min0) / var
    return clip_llrs(out.reshape(-1))
