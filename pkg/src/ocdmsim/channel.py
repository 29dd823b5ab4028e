"""Block-fading tapped-delay-line channel and its frequency-domain action.

A channel realization is drawn once per frame: independent zero-mean complex
Gaussian taps whose variances follow a delay/power profile, placed on the
sampling grid by rounding each delay to the nearest sample.  Every block of
the frame sees the same realization.  With a cyclic prefix longer than the
delay spread the per-block action is diagonal in frequency, so the simulator
works directly with the DFT bins the payload occupies.
"""

from dataclasses import dataclass, field

import numpy as np

from .waveform import FrameLayout


@dataclass(frozen=True)
class DelayProfile:
    """Power-delay profile; linear tap powers are normalized to sum to 1."""

    delays_ns: tuple[float, ...]
    powers_db: tuple[float, ...]
    powers_linear: tuple[float, ...] = field(init=False)

    def __post_init__(self) -> None:
        if len(self.delays_ns) != len(self.powers_db) or not self.delays_ns:
            raise ValueError("DelayProfile: delays and powers must match and be non-empty")
        if any(b <= a for a, b in zip(self.delays_ns, self.delays_ns[1:])):
            raise ValueError("DelayProfile: delays must be strictly increasing")
        if self.delays_ns[0] < 0:
            raise ValueError("DelayProfile: delays must be non-negative")
        lin = np.power(10.0, np.asarray(self.powers_db, dtype=float) / 10.0)
        lin /= lin.sum()
        object.__setattr__(self, "powers_linear", tuple(lin.tolist()))

    def tap_indices(self, sampling_rate_hz: float) -> np.ndarray:
        """Sample-grid index of each profile tap at the given rate."""
        if sampling_rate_hz <= 0:
            raise ValueError("DelayProfile: sampling rate must be positive")
        delays_s = np.asarray(self.delays_ns, dtype=float) * 1e-9
        return np.rint(delays_s * sampling_rate_hz).astype(np.int64)


# Extended Typical Urban profile (9 taps, 5 us delay spread).
ETU = DelayProfile(
    delays_ns=(0.0, 50.0, 120.0, 200.0, 230.0, 500.0, 1600.0, 2300.0, 5000.0),
    powers_db=(-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0),
)


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One frame's channel draw.

    taps: dense impulse response on the sampling grid.
    lam: channel gain of each allocated bin (unnormalized nfft-point DFT of
    the taps, restricted to the allocation).
    sigma2: complex noise variance per received sample.
    """

    taps: np.ndarray
    lam: np.ndarray
    sigma2: float


def draw_channel(
    rng: np.random.Generator,
    profile: DelayProfile,
    sampling_rate_hz: float,
    layout: FrameLayout,
    sigma2: float = 0.0,
) -> ChannelRealization:
    """Draw one realization: CN(0, p_i) per tap, taps at the same rounded
    sample index add up."""
    if sigma2 < 0:
        raise ValueError("draw_channel: sigma2 must be non-negative")
    idx = profile.tap_indices(sampling_rate_hz)
    if idx.max() >= layout.cp_samples:
        raise ValueError("draw_channel: delay spread exceeds the cyclic prefix")
    powers = np.asarray(profile.powers_linear)
    scale = np.sqrt(powers / 2.0)
    gains = scale * (rng.standard_normal(powers.size) + 1j * rng.standard_normal(powers.size))
    taps = np.zeros(int(idx.max()) + 1, dtype=complex)
    np.add.at(taps, idx, gains)
    lam = np.fft.fft(taps, n=layout.nfft)[layout.allocation]
    return ChannelRealization(taps=taps, lam=lam, sigma2=float(sigma2))


def apply_channel_freq(spread_blocks: np.ndarray, ch: ChannelRealization, rng: np.random.Generator) -> np.ndarray:
    """Per-bin channel gain plus white complex Gaussian noise.

    spread_blocks: (n_blocks, n) frequency-domain payload of one frame.
    """
    s = np.asarray(spread_blocks)
    if s.ndim != 2 or s.shape[1] != ch.lam.size:
        raise ValueError("apply_channel_freq: expected (n_blocks, n) matching the allocation")
    noise = np.sqrt(ch.sigma2 / 2.0) * (
        rng.standard_normal(s.shape) + 1j * rng.standard_normal(s.shape)
    )
    return ch.lam[None, :] * s + noise


def ebn0_to_sigma2(ebn0_db: float, code_rate: float, bits_per_symbol: int) -> float:
    """Noise variance per complex sample for unit-energy symbols at the
    given information-bit SNR."""
    if code_rate <= 0 or bits_per_symbol < 1:
        raise ValueError("ebn0_to_sigma2: invalid rate or modulation order")
    return 1.0 / (code_rate * bits_per_symbol * 10.0 ** (ebn0_db / 10.0))
