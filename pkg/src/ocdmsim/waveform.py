"""Frequency-domain spreading for chirp-spread, DFT-precoded and plain OFDM
block transmission, plus the time-domain cyclic-prefix path used as a
validation oracle.

The transmit matrix applied in frequency domain is unitary for every kind:
chirp spreading composes the unitary DFT with a unimodular chirp phase ramp,
DFT precoding is the unitary DFT alone, and plain OFDM is the identity.
"""

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numerics import chirp_phases, unitary_dft, unitary_idft


class WaveformKind(enum.Enum):
    OCDM = "ocdm"
    DFT_PRECODED = "dftp"
    OFDM = "ofdm"


@dataclass(frozen=True)
class FrameLayout:
    """Static block/allocation geometry of one transmitted frame.

    ``allocation_start`` is the first of ``n_symbols_per_block`` contiguous
    bins inside the ``nfft`` grid; None centers the allocation.
    ``cp_samples`` only matters on the time-domain path.
    """

    n_symbols_per_block: int = 288
    n_blocks: int = 7
    nfft: int = 1536
    allocation_start: int | None = None
    cp_samples: int = 128

    def __post_init__(self) -> None:
        if self.n_symbols_per_block < 1 or self.n_blocks < 1:
            raise ValueError("FrameLayout: block sizes must be >= 1")
        if self.cp_samples < 0:
            raise ValueError("FrameLayout: cp_samples must be >= 0")
        start = self.first_bin
        if start < 0 or start + self.n_symbols_per_block > self.nfft:
            raise ValueError("FrameLayout: allocation does not fit inside nfft")

    @property
    def first_bin(self) -> int:
        if self.allocation_start is None:
            return (self.nfft - self.n_symbols_per_block) // 2
        return self.allocation_start

    @property
    def allocation(self) -> slice:
        return slice(self.first_bin, self.first_bin + self.n_symbols_per_block)


@lru_cache(maxsize=8)
def _chirp(n: int) -> np.ndarray:
    # cached, treated as immutable
    return chirp_phases(n)


def spread(d: np.ndarray, kind: WaveformKind) -> np.ndarray:
    """Apply the frequency-domain transmit matrix to a symbol block."""
    d = np.asarray(d)
    if kind is WaveformKind.OFDM:
        return d
    if kind is WaveformKind.DFT_PRECODED:
        return unitary_dft(d)
    if kind is WaveformKind.OCDM:
        return np.conj(_chirp(d.shape[-1])) * unitary_dft(d)
    raise ValueError(f"unknown waveform kind {kind!r}")


def despread_adjoint(v: np.ndarray, kind: WaveformKind) -> np.ndarray:
    """Apply the adjoint of the transmit matrix (inverse, since unitary)."""
    v = np.asarray(v)
    if kind is WaveformKind.OFDM:
        return v
    if kind is WaveformKind.DFT_PRECODED:
        return unitary_idft(v)
    if kind is WaveformKind.OCDM:
        return unitary_idft(_chirp(v.shape[-1]) * v)
    raise ValueError(f"unknown waveform kind {kind!r}")


@lru_cache(maxsize=8)
def dense_transmit_matrix(n: int, kind: WaveformKind) -> np.ndarray:
    """Dense N x N transmit matrix; reference/oracle use only (O(N^2) memory)."""
    if kind is WaveformKind.OFDM:
        return np.eye(n, dtype=complex)
    k = np.arange(n)
    fourier = np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    if kind is WaveformKind.DFT_PRECODED:
        return fourier
    if kind is WaveformKind.OCDM:
        return np.conj(_chirp(n))[:, None] * fourier
    raise ValueError(f"unknown waveform kind {kind!r}")


def time_modulate(spectrum_block: np.ndarray, layout: FrameLayout) -> np.ndarray:
    """Place a frequency-domain block on its allocated bins and synthesize
    time samples with a cyclic prefix prepended."""
    s = np.asarray(spectrum_block)
    if s.shape[-1] != layout.n_symbols_per_block:
        raise ValueError("time_modulate: block length does not match layout")
    grid = np.zeros(layout.nfft, dtype=complex)
    grid[layout.allocation] = s
    x = unitary_idft(grid)
    if layout.cp_samples == 0:
        return x
    return np.concatenate([x[-layout.cp_samples:], x])


def time_demodulate(y: np.ndarray, layout: FrameLayout) -> np.ndarray:
    """Drop the cyclic prefix, transform to frequency domain and extract the
    allocated bins."""
    y = np.asarray(y)
    if y.shape[-1] != layout.nfft + layout.cp_samples:
        raise ValueError("time_demodulate: input length does not match layout")
    body = y[layout.cp_samples:]
    return unitary_dft(body)[layout.allocation]
