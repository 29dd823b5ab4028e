"""Monte-Carlo frame-error-rate harness.

One trial is one coded frame pushed through the whole chain: random info
bits, convolutional encoding, interleaving, constellation mapping, spreading
per block, one block-fading channel draw shared by all blocks of the frame,
then the iterative receiver (soft equalizer, demapper, log-MAP decoder with
extrinsic feedback).  A sweep runs trials per Eb/N0 point until both the
frame budget and the error-count target are met.

Reproducibility contract: every random draw comes from a stream derived
from (master_seed, ebn0_index, trial_index, purpose), so a trial's outcome
is independent of worker count, chunk schedule and of which other trials
ran.  The bit interleaver is derived from the master seed alone and is
shared by every trial of a run.
"""

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ETU, DelayProfile, draw_channel, apply_channel_freq, ebn0_to_sigma2
from .equalizer import cwcu_full, lce, ofdm_exact, pfe
from .fec import (
    CRC24_LEN,
    TAIL_BITS,
    Interleaver,
    attach_crc24,
    bcjr_siso,
    extrinsic_from_decoder,
    frame_check,
    interleave,
    deinterleave,
    make_interleaver,
    rsc_encode,
)
from .mapping import Constellation, SoftSymbols, apriori_stats, constellation, extrinsic_llrs, map_bits
from .numerics import transform_count
from .waveform import FrameLayout, WaveformKind, spread

CODE_RATE = 0.5

# purpose tags for per-trial random streams
_TAG_BITS = 0
_TAG_CHANNEL = 1
_TAG_NOISE = 2
_TAG_INTERLEAVER = 0xC0FFEE

_EQUALIZERS = ("lce", "full", "pfe", "ofdm-exact")
_STOP_MODES = ("genie", "crc24", "none")
_FEEDBACK_MODES = ("extrinsic", "posterior")
_HIST_BINS = 5


class ConfigError(Exception):
    """Invalid or inconsistent simulation configuration."""


@dataclass(frozen=True)
class SimConfig:
    """Complete description of one simulation run."""

    waveform: WaveformKind = WaveformKind.OCDM
    modulation: str = "qpsk"
    equalizer: str = "lce"
    max_iterations: int = 5
    stop_mode: str = "genie"
    feedback_mode: str = "extrinsic"
    layout: FrameLayout = FrameLayout()
    sampling_rate_hz: float = 23.04e6
    profile: DelayProfile = ETU
    ebn0_grid_db: tuple[float, ...] = (4.0, 5.0, 6.0, 7.0, 8.0)
    frames_per_point: int = 1000
    min_frame_errors: int = 0
    max_frames_factor: int = 50
    master_seed: int = 20240917

    def __post_init__(self) -> None:
        if self.modulation not in ("qpsk", "16qam"):
            raise ConfigError(f"unknown modulation {self.modulation!r}")
        if self.equalizer not in _EQUALIZERS:
            raise ConfigError(f"unknown equalizer {self.equalizer!r}")
        if self.stop_mode not in _STOP_MODES:
            raise ConfigError(f"unknown stop_mode {self.stop_mode!r}")
        if self.feedback_mode not in _FEEDBACK_MODES:
            raise ConfigError(f"unknown feedback_mode {self.feedback_mode!r}")
        if self.equalizer == "ofdm-exact" and self.waveform is not WaveformKind.OFDM:
            raise ConfigError("equalizer 'ofdm-exact' requires the ofdm waveform")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if not self.ebn0_grid_db:
            raise ConfigError("ebn0_grid_db must not be empty")
        if self.frames_per_point < 1 or self.max_frames_factor < 1 or self.min_frame_errors < 0:
            raise ConfigError("frame budgets must be positive")
        if self.sampling_rate_hz <= 0:
            raise ConfigError("sampling_rate_hz must be positive")
        if self.info_bits_per_frame < 1:
            raise ConfigError("frame too short to carry info bits")
        if self.stop_mode == "crc24" and self.info_bits_per_frame <= CRC24_LEN:
            raise ConfigError("crc24 stopping needs more info bits than the checksum")

    @property
    def bits_per_symbol(self) -> int:
        return 2 if self.modulation == "qpsk" else 4

    @property
    def coded_bits_per_frame(self) -> int:
        return self.layout.n_symbols_per_block * self.layout.n_blocks * self.bits_per_symbol

    @property
    def info_bits_per_frame(self) -> int:
        # rate-1/2 code with 6 termination steps fills the frame exactly
        return self.coded_bits_per_frame // 2 - TAIL_BITS


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of a single frame trial."""

    ebn0_db: float
    trial_index: int
    frame_error: bool
    bit_errors: int
    iterations_used: int
    fft_calls: int


@dataclass(frozen=True)
class PointResult:
    """Aggregated outcome of one Eb/N0 grid point."""

    ebn0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    info_bits_per_frame: int
    mean_iterations: float
    iter_hist: tuple[int, ...]

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames

    @property
    def ber(self) -> float:
        return self.bit_errors / (self.frames * self.info_bits_per_frame)


@dataclass(frozen=True)
class SweepResult:
    config: SimConfig
    points: tuple[PointResult, ...]


@dataclass(frozen=True, eq=False)
class FrameContext:
    """Per-run shared pieces derived from the config once."""

    const: Constellation
    ilv: Interleaver
    kind: WaveformKind
    k_info: int


def build_context(cfg: SimConfig) -> FrameContext:
    ilv_rng = np.random.default_rng(
        np.random.SeedSequence(cfg.master_seed, spawn_key=(_TAG_INTERLEAVER,))
    )
    return FrameContext(
        const=constellation(cfg.modulation),
        ilv=make_interleaver(cfg.coded_bits_per_frame, ilv_rng),
        kind=cfg.waveform,
        k_info=cfg.info_bits_per_frame,
    )


def _stream(cfg: SimConfig, ebn0_index: int, trial_index: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence(cfg.master_seed, spawn_key=(ebn0_index, trial_index, tag))
    )


def _equalize_block(
    cfg: SimConfig,
    y: np.ndarray,
    lam: np.ndarray,
    prior: SoftSymbols,
    sigma2: float,
    true_block: np.ndarray,
) -> SoftSymbols:
    eq = cfg.equalizer
    if eq == "pfe":
        return pfe(y, lam, true_block, sigma2, cfg.waveform)
    if eq == "full":
        return cwcu_full(y, lam, prior, sigma2, cfg.waveform)
    if eq == "ofdm-exact" or cfg.waveform is WaveformKind.OFDM:
        # low-complexity route degenerates per-bin without spreading
        return ofdm_exact(y, lam, prior, sigma2)
    posterior, _ = lce(y, lam, prior, sigma2, cfg.waveform)
    return posterior


def run_trial(cfg: SimConfig, ctx: FrameContext, ebn0_index: int, trial_index: int) -> TrialRecord:
    """Simulate one frame end to end; fully determined by (config, indices)."""
    ebn0_db = cfg.ebn0_grid_db[ebn0_index]
    sigma2 = ebn0_to_sigma2(ebn0_db, CODE_RATE, cfg.bits_per_symbol)
    bits_rng = _stream(cfg, ebn0_index, trial_index, _TAG_BITS)
    chan_rng = _stream(cfg, ebn0_index, trial_index, _TAG_CHANNEL)
    noise_rng = _stream(cfg, ebn0_index, trial_index, _TAG_NOISE)

    if cfg.stop_mode == "crc24":
        payload = bits_rng.integers(0, 2, ctx.k_info - CRC24_LEN).astype(np.uint8)
        info = attach_crc24(payload)
    else:
        info = bits_rng.integers(0, 2, ctx.k_info).astype(np.uint8)
    coded = rsc_encode(info)
    tx_bits = interleave(coded, ctx.ilv)
    d = map_bits(tx_bits, ctx.const)
    n = cfg.layout.n_symbols_per_block
    blocks = d.reshape(cfg.layout.n_blocks, n)
    s_blocks = np.stack([spread(b, ctx.kind) for b in blocks])
    ch = draw_channel(chan_rng, cfg.profile, cfg.sampling_rate_hz, cfg.layout, sigma2)
    y_blocks = apply_channel_freq(s_blocks, ch, noise_rng)

    prior = SoftSymbols.uninformative(d.size)
    decoded = np.zeros(ctx.k_info, dtype=np.uint8)
    iterations_used = cfg.max_iterations
    fft_calls = 0
    for it in range(1, cfg.max_iterations + 1):
        mean = np.empty(d.size, dtype=complex)
        variance = np.empty(d.size)
        for b in range(cfg.layout.n_blocks):
            sl = slice(b * n, (b + 1) * n)
            prior_b = SoftSymbols(mean=prior.mean[sl], variance=prior.variance[sl])
            calls_before = transform_count()
            post_b = _equalize_block(cfg, y_blocks[b], ch.lam, prior_b, sigma2, blocks[b])
            fft_calls += transform_count() - calls_before
            mean[sl] = post_b.mean
            variance[sl] = post_b.variance
        demapped = extrinsic_llrs(SoftSymbols(mean=mean, variance=variance), ctx.const)
        dec_in = deinterleave(demapped, ctx.ilv)
        coded_post, info_post = bcjr_siso(dec_in)
        decoded = (info_post < 0).astype(np.uint8)
        iterations_used = it
        if cfg.stop_mode != "none" and frame_check(decoded, cfg.stop_mode, truth=info):
            break
        if it < cfg.max_iterations:
            if cfg.feedback_mode == "extrinsic":
                fb = extrinsic_from_decoder(coded_post, dec_in)
            else:
                fb = coded_post
            prior = apriori_stats(interleave(fb, ctx.ilv), ctx.const)

    bit_errors = int(np.count_nonzero(decoded != info))
    return TrialRecord(
        ebn0_db=ebn0_db,
        trial_index=trial_index,
        frame_error=bit_errors > 0,
        bit_errors=bit_errors,
        iterations_used=iterations_used,
        fft_calls=fft_calls,
    )


def _trial_batch(cfg: SimConfig, ctx: FrameContext, ebn0_index: int, trials: range) -> list[TrialRecord]:
    return [run_trial(cfg, ctx, ebn0_index, t) for t in trials]


def run_point(cfg: SimConfig, ctx: FrameContext, ebn0_index: int, workers: int = 1) -> PointResult:
    """Run trials at one grid point until the frame budget is met and, if
    requested, enough frame errors were seen (capped at max_frames_factor
    times the budget).  The trial schedule is a pure function of the
    accumulated counts, so results do not depend on worker count."""
    records: list[TrialRecord] = []
    start = 0
    cap = cfg.max_frames_factor * cfg.frames_per_point
    while True:
        chunk = min(cfg.frames_per_point, cap - start)
        trials = range(start, start + chunk)
        if workers > 1 and chunk > 1:
            splits = np.array_split(np.asarray(trials), workers)
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futs = [
                    pool.submit(_trial_batch, cfg, ctx, ebn0_index, range(int(s[0]), int(s[-1]) + 1))
                    for s in splits
                    if s.size
                ]
                for f in futs:
                    records.extend(f.result())
            records.sort(key=lambda r: r.trial_index)
        else:
            records.extend(_trial_batch(cfg, ctx, ebn0_index, trials))
        start += chunk
        errors = sum(r.frame_error for r in records)
        if start >= cfg.frames_per_point and errors >= cfg.min_frame_errors:
            break
        if start >= cap:
            break
    hist = [0] * _HIST_BINS
    for r in records:
        hist[min(r.iterations_used, _HIST_BINS) - 1] += 1
    return PointResult(
        ebn0_db=cfg.ebn0_grid_db[ebn0_index],
        frames=len(records),
        frame_errors=sum(r.frame_error for r in records),
        bit_errors=sum(r.bit_errors for r in records),
        info_bits_per_frame=cfg.info_bits_per_frame,
        mean_iterations=float(np.mean([r.iterations_used for r in records])),
        iter_hist=tuple(hist),
    )


def run_sweep(cfg: SimConfig, workers: int = 1, progress=None) -> SweepResult:
    ctx = build_context(cfg)
    points = []
    for i in range(len(cfg.ebn0_grid_db)):
        p = run_point(cfg, ctx, i, workers=workers)
        points.append(p)
        if progress is not None:
            progress(p)
    return SweepResult(config=cfg, points=tuple(points))


CSV_HEADER = (
    "waveform,modulation,equalizer,ebn0_db,frames,frame_errors,fer,"
    "bit_errors,ber,mean_iterations,hist_i1,hist_i2,hist_i3,hist_i4,hist_i5,seed"
)


def write_results(result: SweepResult, path: str) -> None:
    """One CSV row per grid point; the last histogram bin also counts runs
    that used more than five iterations."""
    cfg = result.config
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER.split(","))
        for p in result.points:
            writer.writerow(
                [
                    cfg.waveform.value,
                    cfg.modulation,
                    cfg.equalizer,
                    f"{p.ebn0_db:g}",
                    p.frames,
                    p.frame_errors,
                    f"{p.fer:.6g}",
                    p.bit_errors,
                    f"{p.ber:.6g}",
                    f"{p.mean_iterations:.4f}",
                    *p.iter_hist,
                    cfg.master_seed,
                ]
            )


# --- flat key=value config files -------------------------------------------

_CONFIG_KEYS = (
    "waveform",
    "modulation",
    "equalizer",
    "max_iterations",
    "stop_mode",
    "feedback_mode",
    "n_symbols_per_block",
    "n_blocks",
    "nfft",
    "allocation_start",
    "cp_samples",
    "sampling_rate_hz",
    "profile_delays_ns",
    "profile_powers_db",
    "ebn0_grid_db",
    "frames_per_point",
    "min_frame_errors",
    "max_frames_factor",
    "master_seed",
)


def _float_tuple(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def load_config(path: str) -> SimConfig:
    """Read a flat key=value file; unknown keys are rejected, missing keys
    keep their defaults."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    raw: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, value = stripped.partition("=")
            key = key.strip()
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in raw:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            raw[key] = value.strip()
    return config_from_mapping(raw)


def config_from_mapping(raw: dict[str, str]) -> SimConfig:
    cfg = SimConfig()
    layout_kw = {}
    profile_kw = {}
    kwargs = {}
    try:
        for key, value in raw.items():
            if key == "waveform":
                try:
                    kwargs["waveform"] = WaveformKind(value)
                except ValueError:
                    raise ConfigError(f"unknown waveform {value!r}") from None
            elif key in ("modulation", "equalizer", "stop_mode", "feedback_mode"):
                kwargs[key] = value
            elif key in ("max_iterations", "frames_per_point", "min_frame_errors", "max_frames_factor", "master_seed"):
                kwargs[key] = int(value)
            elif key == "sampling_rate_hz":
                kwargs[key] = float(value)
            elif key in ("n_symbols_per_block", "n_blocks", "nfft", "cp_samples"):
                layout_kw[key] = int(value)
            elif key == "allocation_start":
                layout_kw[key] = None if value == "center" else int(value)
            elif key == "profile_delays_ns":
                profile_kw["delays_ns"] = _float_tuple(value)
            elif key == "profile_powers_db":
                profile_kw["powers_db"] = _float_tuple(value)
            elif key == "ebn0_grid_db":
                kwargs["ebn0_grid_db"] = _float_tuple(value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    try:
        if layout_kw:
            kwargs["layout"] = replace(SimConfig().layout, **layout_kw)
        if profile_kw:
            if set(profile_kw) != {"delays_ns", "powers_db"}:
                raise ConfigError("profile_delays_ns and profile_powers_db must be given together")
            kwargs["profile"] = DelayProfile(**profile_kw)
        return replace(cfg, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def write_config(cfg: SimConfig, path: str) -> None:
    lines = [
        f"waveform = {cfg.waveform.value}",
        f"modulation = {cfg.modulation}",
        f"equalizer = {cfg.equalizer}",
        f"max_iterations = {cfg.max_iterations}",
        f"stop_mode = {cfg.stop_mode}",
        f"feedback_mode = {cfg.feedback_mode}",
        f"n_symbols_per_block = {cfg.layout.n_symbols_per_block}",
        f"n_blocks = {cfg.layout.n_blocks}",
        f"nfft = {cfg.layout.nfft}",
        "allocation_start = "
        + ("center" if cfg.layout.allocation_start is None else str(cfg.layout.allocation_start)),
        f"cp_samples = {cfg.layout.cp_samples}",
        f"sampling_rate_hz = {cfg.sampling_rate_hz!r}",
        "profile_delays_ns = " + ",".join(f"{v:g}" for v in cfg.profile.delays_ns),
        "profile_powers_db = " + ",".join(f"{v:g}" for v in cfg.profile.powers_db),
        "ebn0_grid_db = " + ",".join(f"{v!r}" for v in cfg.ebn0_grid_db),
        f"frames_per_point = {cfg.frames_per_point}",
        f"min_frame_errors = {cfg.min_frame_errors}",
        f"max_frames_factor = {cfg.max_frames_factor}",
        f"master_seed = {cfg.master_seed}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
