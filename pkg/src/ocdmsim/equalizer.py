"""Soft interference-cancelling MMSE equalizers for one received block.

All variants share the same contract: given the received frequency-domain
block, the per-bin channel gains, a symbol-wise prior (mean/variance from
the decoder feedback) and the noise variance, produce a posterior mean and
variance per payload symbol, unbiased conditioned on each symbol.

Three routes exist on purpose and must stay independent:

* ``cwcu_full`` assembles the dense covariance and solves it directly.
  It is the reference implementation; cost grows cubically with block size.
* ``lce`` exploits that the spread-waveform system matrix is unitary and
  row-uniform, so with the prior variances averaged into one scalar the
  dense solve collapses to per-bin scaling between one spread and one
  despread.  Two transforms per call, one when the prior mean is zero.
* ``ofdm_exact`` is the exact per-bin special case used when the payload
  is not spread at all.

``pfe`` is the genie bound: feed back the true symbols with zero variance.
"""

from dataclasses import dataclass

import numpy as np

from .mapping import SoftSymbols
from .numerics import transform_count
from .waveform import WaveformKind, dense_transmit_matrix, despread_adjoint, spread

VAR_FLOOR = 1e-30


class NumericalError(RuntimeError):
    """Equalizer produced a non-finite quantity."""


@dataclass(frozen=True)
class EqualizerDiagnostics:
    """Per-call scalars exposed for instrumentation."""

    sigma_a_bar_sq: float
    lambda_norm: float
    fft_calls: int


def _check_block(y: np.ndarray, lam: np.ndarray, prior: SoftSymbols, sigma2: float) -> None:
    if y.ndim != 1 or y.size == 0:
        raise ValueError("equalizer: y must be a non-empty vector")
    if lam.shape != y.shape:
        raise ValueError("equalizer: channel gains must match the block length")
    if prior.mean.shape != y.shape or prior.variance.shape != y.shape:
        raise ValueError("equalizer: prior must match the block length")
    if sigma2 < 0:
        raise ValueError("equalizer: sigma2 must be non-negative")


def cwcu_full(
    y: np.ndarray,
    lam: np.ndarray,
    prior: SoftSymbols,
    sigma2: float,
    kind: WaveformKind,
) -> SoftSymbols:
    """Dense reference equalizer.

    Builds M = (Lam A) diag(va) (Lam A)^H + sigma2 I, solves it once for the
    cancelled observation and once per column for the bias normalizer, and
    returns the symbol-wise unbiased posterior.
    """
    y = np.asarray(y, dtype=complex)
    lam = np.asarray(lam, dtype=complex)
    _check_block(y, lam, prior, sigma2)
    n = y.size
    heff = lam[:, None] * dense_transmit_matrix(n, kind)
    m = (heff * prior.variance[None, :]) @ heff.conj().T
    m[np.diag_indices(n)] += sigma2
    resid = y - heff @ prior.mean
    z = np.linalg.solve(m, resid)
    w = np.linalg.solve(m, heff)
    q = np.einsum("ij,ij->j", heff.conj(), w).real
    q = np.maximum(q, VAR_FLOOR)
    mean = prior.mean + (heff.conj().T @ z) / q
    variance = np.maximum(1.0 / q - prior.variance, VAR_FLOOR)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(variance))):
        raise NumericalError("cwcu_full: non-finite posterior")
    return SoftSymbols(mean=mean, variance=variance)


def lce(
    y: np.ndarray,
    lam: np.ndarray,
    prior: SoftSymbols,
    sigma2: float,
    kind: WaveformKind,
) -> tuple[SoftSymbols, EqualizerDiagnostics]:
    """Low-complexity equalizer for the spread waveforms.

    Averages the prior variances into one scalar, which makes the dense
    covariance circulant-diagonalizable; the whole solve then reduces to a
    per-bin scale between one spread and one adjoint despread.  Matches
    ``cwcu_full`` exactly whenever the prior variance is uniform.
    """
    if kind is WaveformKind.OFDM:
        raise ValueError("lce: not defined without spreading, use ofdm_exact")
    y = np.asarray(y, dtype=complex)
    lam = np.asarray(lam, dtype=complex)
    _check_block(y, lam, prior, sigma2)
    calls_before = transform_count()
    va_bar = float(np.mean(prior.variance))
    gain2 = np.abs(lam) ** 2
    den = np.maximum(va_bar * gain2 + sigma2, VAR_FLOOR)
    g = lam.conj() / den
    # a dead channel floors to a near-zero normalizer: posterior collapses
    # to the prior with a huge variance instead of failing
    lam_norm = max(float(np.mean(gain2 / den)), VAR_FLOOR)
    if not np.isfinite(lam_norm):
        raise NumericalError("lce: non-finite bias normalizer")
    if np.any(prior.mean):
        cancelled = y - lam * spread(prior.mean, kind)
    else:
        cancelled = y
    mean = prior.mean + despread_adjoint(g * cancelled, kind) / lam_norm
    var_scalar = max(1.0 / lam_norm - va_bar, VAR_FLOOR)
    variance = np.full(y.size, var_scalar)
    if not np.all(np.isfinite(mean)):
        raise NumericalError("lce: non-finite posterior mean")
    diag = EqualizerDiagnostics(
        sigma_a_bar_sq=va_bar,
        lambda_norm=lam_norm,
        fft_calls=transform_count() - calls_before,
    )
    return SoftSymbols(mean=mean, variance=variance), diag


def ofdm_exact(
    y: np.ndarray,
    lam: np.ndarray,
    prior: SoftSymbols,
    sigma2: float,
) -> SoftSymbols:
    """Exact symbol-wise unbiased MMSE for the unspread waveform (the system
    matrix is identity, so everything is per-bin)."""
    y = np.asarray(y, dtype=complex)
    lam = np.asarray(lam, dtype=complex)
    _check_block(y, lam, prior, sigma2)
    gain2 = np.abs(lam) ** 2
    den = np.maximum(prior.variance * gain2 + sigma2, VAR_FLOOR)
    q = np.maximum(gain2 / den, VAR_FLOOR)
    mean = prior.mean + (lam.conj() / den) * (y - lam * prior.mean) / q
    variance = np.maximum(1.0 / q - prior.variance, VAR_FLOOR)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(variance))):
        raise NumericalError("ofdm_exact: non-finite posterior")
    return SoftSymbols(mean=mean, variance=variance)


def pfe(
    y: np.ndarray,
    lam: np.ndarray,
    true_symbols: np.ndarray,
    sigma2: float,
    kind: WaveformKind,
) -> SoftSymbols:
    """Perfect-feedback genie: the prior is the true transmit vector with
    zero variance, giving the matched-filter bound of the waveform."""
    true_symbols = np.asarray(true_symbols, dtype=complex)
    prior = SoftSymbols(mean=true_symbols, variance=np.zeros(true_symbols.size))
    if kind is WaveformKind.OFDM:
        return ofdm_exact(y, lam, prior, sigma2)
    posterior, _ = lce(y, lam, prior, sigma2, kind)
    return posterior
