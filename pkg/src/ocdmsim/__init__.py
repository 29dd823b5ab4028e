"""Link-level Monte-Carlo simulator for chirp-spread multicarrier
transmission with an iterative soft-cancellation receiver."""

from .channel import ETU, ChannelRealization, DelayProfile, apply_channel_freq, draw_channel, ebn0_to_sigma2
from .equalizer import EqualizerDiagnostics, NumericalError, cwcu_full, lce, ofdm_exact, pfe
from .fec import (
    Interleaver,
    attach_crc24,
    bcjr_siso,
    check_crc24,
    deinterleave,
    extrinsic_from_decoder,
    frame_check,
    interleave,
    make_interleaver,
    rsc_encode,
)
from .harness import (
    ConfigError,
    PointResult,
    SimConfig,
    SweepResult,
    TrialRecord,
    build_context,
    load_config,
    run_point,
    run_sweep,
    run_trial,
    write_config,
    write_results,
)
from .mapping import (
    LLR_CAP,
    Constellation,
    SoftSymbols,
    apriori_stats,
    clip_llrs,
    constellation,
    extrinsic_llrs,
    map_bits,
    qam16,
    qpsk,
)
from .numerics import chirp_phases, reset_transform_count, transform_count, unitary_dft, unitary_idft
from .waveform import FrameLayout, WaveformKind, dense_transmit_matrix, despread_adjoint, spread, time_demodulate, time_modulate

__version__ = "0.1.0"

__all__ = [
    "ETU",
    "ChannelRealization",
    "DelayProfile",
    "apply_channel_freq",
    "draw_channel",
    "ebn0_to_sigma2",
    "EqualizerDiagnostics",
    "NumericalError",
    "cwcu_full",
    "lce",
    "ofdm_exact",
    "pfe",
    "Interleaver",
    "attach_crc24",
    "bcjr_siso",
    "check_crc24",
    "deinterleave",
    "extrinsic_from_decoder",
    "frame_check",
    "interleave",
    "make_interleaver",
    "rsc_encode",
    "ConfigError",
    "PointResult",
    "SimConfig",
    "SweepResult",
    "TrialRecord",
    "build_context",
    "load_config",
    "run_point",
    "run_sweep",
    "run_trial",
    "write_config",
    "write_results",
    "LLR_CAP",
    "Constellation",
    "SoftSymbols",
    "apriori_stats",
    "clip_llrs",
    "constellation",
    "extrinsic_llrs",
    "map_bits",
    "qam16",
    "qpsk",
    "chirp_phases",
    "reset_transform_count",
    "transform_count",
    "unitary_dft",
    "unitary_idft",
    "FrameLayout",
    "WaveformKind",
    "dense_transmit_matrix",
    "despread_adjoint",
    "spread",
    "time_demodulate",
    "time_modulate",
    "__version__",
]
