"""Unitary DFT and chirp-phase primitives shared by the signal-path modules.

All transforms use the energy-preserving 1/sqrt(N) convention on the forward
side.  Every call to :func:`unitary_dft` / :func:`unitary_idft` bumps a
thread-local counter so callers (the equalizers, the Monte-Carlo harness) can
account for transform usage without global state leaking between workers.
"""

import threading

import numpy as np

_tls = threading.local()


def reset_transform_count() -> None:
    """Zero the transform-call counter of the calling thread."""
    _tls.count = 0


def transform_count() -> int:
    """Transform calls on this thread since the last reset (0 if never reset)."""
    return getattr(_tls, "count", 0)


def _bump_count() -> None:
    _tls.count = getattr(_tls, "count", 0) + 1


def unitary_dft(x: np.ndarray) -> np.ndarray:
    """Forward DFT scaled by 1/sqrt(N) so the transform is unitary.

    Works for any length (mixed-radix FFT under the hood), which matters
    because the default block size 288 = 2^5 * 3^2 is not a power of two.
    """
    x = np.asarray(x)
    n = x.shape[-1]
    if n == 0:
        raise ValueError("unitary_dft: input must have length >= 1")
    _bump_count()
    return np.fft.fft(x) / np.sqrt(n)


def unitary_idft(x: np.ndarray) -> np.ndarray:
    """Inverse of :func:`unitary_dft` (adjoint of the unitary DFT)."""
    x = np.asarray(x)
    n = x.shape[-1]
    if n == 0:
        raise ValueError("unitary_idft: input must have length >= 1")
    _bump_count()
    return np.fft.ifft(x) * np.sqrt(n)


def chirp_phases(n: int) -> np.ndarray:
    """Unimodular chirp vector with entry k equal to exp(-j*pi*k^2/n).

    The squared index is reduced mod 2n before the complex exponential so the
    phase argument stays small at large n.
    """
    if n < 1:
        raise ValueError("chirp_phases: n must be >= 1")
    k = np.arange(n, dtype=np.int64)
    return np.exp(-1j * np.pi * ((k * k) % (2 * n)) / n)
