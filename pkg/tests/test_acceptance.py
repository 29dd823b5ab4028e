"""End-to-end acceptance gates.

Each test prints one PASS/FAIL line (visible even under capture) and then
asserts the same condition.  Grids and budgets are pinned; every sweep is
fully seed-determined, so reruns reproduce identical numbers.

The two full-size criteria (low-complexity route vs genie bound, chirp
spreading vs no spreading) dominate the runtime: tens of minutes total.
Set OCDMSIM_LONG_RUN=1 to also run the deep-tail gain measurement.
"""

import math
import os

import numpy as np
import pytest

from ocdmsim import (
    SimConfig,
    SoftSymbols,
    WaveformKind,
    bcjr_siso,
    build_context,
    cwcu_full,
    draw_channel,
    lce,
    run_point,
    run_sweep,
    run_trial,
    spread,
    time_demodulate,
    time_modulate,
)
from ocdmsim.channel import ETU
from ocdmsim.fec import TAIL_BITS
from ocdmsim.mapping import LLR_CAP

from conftest import DESK_FS, DESK_LAYOUT, desk_config

FER_TARGET = 1e-2


def report(capsys, criterion, ok, detail):
    with capsys.disabled():
        print(f"\n[{criterion}] {'PASS' if ok else 'FAIL'}: {detail}", flush=True)
    assert ok, f"{criterion} failed: {detail}"


def crossing_db(points, target=FER_TARGET):
    """Eb/N0 where the curve crosses the target, log-linear between the
    rightmost bracketing pair; zero counts are floored at half an error."""
    xs = [p.ebn0_db for p in points]
    fs = [max(p.fer, 0.5 / p.frames) for p in points]
    for i in range(len(points) - 2, -1, -1):
        if fs[i] > target >= fs[i + 1]:
            t = (math.log(fs[i]) - math.log(target)) / (math.log(fs[i]) - math.log(fs[i + 1]))
            return xs[i] + t * (xs[i + 1] - xs[i])
    return None


# --- shared sweeps (session scope: computed once, reused across criteria) ---

FULL_GRID = (8.0, 9.0, 9.75)
OFDM_GRID = (9.5, 10.75, 12.0)


@pytest.fixture(scope="session")
def ocdm_lce_curve():
    cfg = SimConfig(
        equalizer="lce",
        max_iterations=5,
        ebn0_grid_db=FULL_GRID,
        frames_per_point=2000,
        min_frame_errors=100,
        max_frames_factor=12,
    )
    return run_sweep(cfg)


@pytest.fixture(scope="session")
def pfe_curve():
    # the genie posterior does not depend on the feedback, so one iteration
    # is the whole bound
    cfg = SimConfig(
        equalizer="pfe",
        max_iterations=1,
        ebn0_grid_db=FULL_GRID,
        frames_per_point=2000,
        min_frame_errors=100,
        max_frames_factor=12,
    )
    return run_sweep(cfg)


@pytest.fixture(scope="session")
def ofdm_curve():
    cfg = SimConfig(
        waveform=WaveformKind.OFDM,
        equalizer="lce",
        max_iterations=5,
        ebn0_grid_db=OFDM_GRID,
        frames_per_point=2000,
        min_frame_errors=100,
        max_frames_factor=12,
    )
    return run_sweep(cfg)


def test_criterion_1_fast_route_exactness(capsys):
    rng = np.random.default_rng(101)
    worst = 0.0
    for n in (4, 8, 16, 288):
        for kind in (WaveformKind.OCDM, WaveformKind.DFT_PRECODED):
            for zero_mean in (False, True):
                lam = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                mean = np.zeros(n, complex)
                if not zero_mean:
                    mean = rng.standard_normal(n) + 1j * rng.standard_normal(n)
                prior = SoftSymbols(mean=mean, variance=np.full(n, rng.uniform(0.05, 1.0)))
                y = lam * spread(rng.standard_normal(n) + 1j * rng.standard_normal(n), kind)
                y += 0.3 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
                sigma2 = rng.uniform(0.02, 1.0)
                fast, _ = lce(y, lam, prior, sigma2, kind)
                dense = cwcu_full(y, lam, prior, sigma2, kind)
                worst = max(
                    worst,
                    float(np.max(np.abs(fast.mean - dense.mean))),
                    float(np.max(np.abs(fast.variance - dense.variance))),
                )
    report(
        capsys,
        "CRITERION 1 fast-equalizer exactness",
        worst <= 1e-9,
        f"max |fast - dense| = {worst:.3e} (bound 1e-9)",
    )


def test_criterion_2_decoder_exactness(capsys):
    from test_fec import exhaustive_map_oracle

    rng = np.random.default_rng(202)
    worst = 0.0
    for k in (4, 7, 10):
        for _ in range(2):
            llrs = rng.normal(0.0, 2.0, 2 * (k + TAIL_BITS))
            coded_post, info_post = bcjr_siso(llrs)
            want_coded, want_info = exhaustive_map_oracle(llrs, k)
            worst = max(
                worst,
                float(np.max(np.abs(info_post - want_info))),
                float(np.max(np.abs(coded_post - np.clip(want_coded, -LLR_CAP, LLR_CAP)))),
            )
    report(
        capsys,
        "CRITERION 2 decoder exactness",
        worst <= 1e-6,
        f"max |decoder - exhaustive| = {worst:.3e} over K in (4,7,10) (bound 1e-6)",
    )


def test_criterion_3_fast_vs_dense_fer(capsys):
    grid = (7.0, 8.0, 9.0, 10.0)
    curves = {}
    for eq in ("lce", "full"):
        cfg = desk_config(equalizer=eq, ebn0_grid_db=grid, frames_per_point=2000)
        curves[eq] = run_sweep(cfg).points
    x_lce = crossing_db(curves["lce"])
    x_full = crossing_db(curves["full"])
    detail = (
        f"crossings lce={x_lce and round(x_lce, 3)} dB, full={x_full and round(x_full, 3)} dB; "
        f"lce fer={[p.fer for p in curves['lce']]}, full fer={[p.fer for p in curves['full']]}"
    )
    ok = x_lce is not None and x_full is not None and abs(x_lce - x_full) <= 0.2
    report(capsys, "CRITERION 3 fast-vs-dense FER gap <= 0.2 dB", ok, detail)


def test_criterion_4_ocdm_approaches_genie(capsys, ocdm_lce_curve, pfe_curve):
    for sweep in (ocdm_lce_curve, pfe_curve):
        for p in sweep.points:
            assert p.frames >= 2000
            assert p.frame_errors >= 100, f"thin statistics at {p.ebn0_db} dB"
    x_lce = crossing_db(ocdm_lce_curve.points)
    x_pfe = crossing_db(pfe_curve.points)
    detail = (
        f"crossings lce={x_lce and round(x_lce, 3)} dB, genie={x_pfe and round(x_pfe, 3)} dB; "
        f"lce fer={[round(p.fer, 5) for p in ocdm_lce_curve.points]}, "
        f"genie fer={[round(p.fer, 5) for p in pfe_curve.points]}"
    )
    ok = x_lce is not None and x_pfe is not None and abs(x_lce - x_pfe) <= 0.3
    report(capsys, "CRITERION 4 gap to genie bound <= 0.3 dB", ok, detail)


def test_criterion_5_spreading_gain(capsys, ocdm_lce_curve, ofdm_curve):
    for p in ofdm_curve.points:
        assert p.frames >= 2000
    x_ocdm = crossing_db(ocdm_lce_curve.points)
    x_ofdm = crossing_db(ofdm_curve.points)
    detail = (
        f"crossings ocdm={x_ocdm and round(x_ocdm, 3)} dB, ofdm={x_ofdm and round(x_ofdm, 3)} dB; "
        f"ofdm fer={[round(p.fer, 5) for p in ofdm_curve.points]}"
    )
    ok = x_ocdm is not None and x_ofdm is not None and (x_ofdm - x_ocdm) >= 1.5
    report(capsys, "CRITERION 5 spreading gain >= 1.5 dB at 1e-2", ok, detail)


@pytest.mark.skipif(
    not os.environ.get("OCDMSIM_LONG_RUN"),
    reason="deep-tail job; set OCDMSIM_LONG_RUN=1 to run",
)
def test_criterion_5_long_run_deep_tail(capsys):
    common = dict(frames_per_point=5000, min_frame_errors=100, max_frames_factor=40, max_iterations=5)
    ocdm = run_sweep(SimConfig(equalizer="lce", ebn0_grid_db=(10.0, 11.0, 12.0), **common))
    ofdm = run_sweep(
        SimConfig(waveform=WaveformKind.OFDM, equalizer="lce", ebn0_grid_db=(12.0, 13.0, 14.0), **common)
    )
    x_ocdm = crossing_db(ocdm.points, 1e-3)
    x_ofdm = crossing_db(ofdm.points, 1e-3)
    detail = f"1e-3 crossings ocdm={x_ocdm} dB, ofdm={x_ofdm} dB"
    ok = x_ocdm is not None and x_ofdm is not None and 2.0 <= (x_ofdm - x_ocdm) <= 3.0
    report(capsys, "CRITERION 5L deep-tail gain 2.5 +/- 0.5 dB at 1e-3", ok, detail)


def test_criterion_6_iteration_histogram(capsys):
    cfg = SimConfig(equalizer="lce", max_iterations=5, ebn0_grid_db=(12.25,), frames_per_point=1000)
    point = run_point(cfg, build_context(cfg), 0)
    frac = 1.0 - point.iter_hist[0] / point.frames
    detail = f"hist={point.iter_hist}, fraction needing >= 2 iterations = {frac:.4f} (bound 0.10)"
    report(capsys, "CRITERION 6 early-stop histogram", frac <= 0.10, detail)


def test_criterion_7_transform_budget(capsys):
    # direct per-call instrumentation
    rng = np.random.default_rng(707)
    n = 64
    lam = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    y = lam * spread(rng.standard_normal(n) + 1j * rng.standard_normal(n), WaveformKind.OCDM)
    _, first = lce(y, lam, SoftSymbols.uninformative(n), 0.3, WaveformKind.OCDM)
    informed = SoftSymbols(mean=np.ones(n, complex), variance=np.full(n, 0.5))
    _, later = lce(y, lam, informed, 0.3, WaveformKind.OCDM)
    per_call_ok = first.fft_calls == 1 and later.fft_calls == 2

    # whole-receiver accounting: I iterations cost at most 2I-1 per block
    counts = {}
    for iters in (1, 3, 5):
        cfg = desk_config(stop_mode="none", max_iterations=iters, ebn0_grid_db=(6.0,))
        rec = run_trial(cfg, build_context(cfg), 0, 2)
        counts[iters] = rec.fft_calls
    blocks = DESK_LAYOUT.n_blocks
    frame_ok = all(
        counts[i] <= blocks * (2 * i - 1) and counts[1] == blocks for i in (1, 3, 5)
    )
    detail = (
        f"per call: first iteration {first.fft_calls} (expect 1), later {later.fft_calls} "
        f"(expect 2); per frame {counts} with {blocks} blocks (budget 2I-1 per block)"
    )
    report(capsys, "CRITERION 7 transform budget", per_call_ok and frame_ok, detail)


def test_criterion_8_iteration_monotonicity(capsys):
    grid = (4.0, 5.0, 6.0, 7.0, 8.0)
    fers = {}
    for iters in (1, 5):
        cfg = desk_config(max_iterations=iters, ebn0_grid_db=grid, frames_per_point=300)
        fers[iters] = [p.fer for p in run_sweep(cfg).points]
    pairs = list(zip(fers[5], fers[1]))
    ok = all(f5 <= f1 for f5, f1 in pairs)
    detail = f"paired-seed FER (I=5, I=1) per point: {pairs}"
    report(capsys, "CRITERION 8 iteration monotonicity", ok, detail)


def test_criterion_9_time_frequency_equivalence(capsys):
    rng = np.random.default_rng(909)
    layout = DESK_LAYOUT  # nfft = 128 <= 256
    worst = 0.0
    for _ in range(100):
        ch = draw_channel(rng, ETU, DESK_FS, layout)
        blocks = rng.standard_normal((2, 64)) + 1j * rng.standard_normal((2, 64))
        tx = np.concatenate([time_modulate(b, layout) for b in blocks])
        rx = np.convolve(tx, ch.taps)[: tx.size]
        span = layout.nfft + layout.cp_samples
        for i, b in enumerate(blocks):
            y_time = time_demodulate(rx[i * span : (i + 1) * span], layout)
            y_fast = ch.lam * b
            worst = max(worst, float(np.max(np.abs(y_time - y_fast))))
    report(
        capsys,
        "CRITERION 9 time/frequency equivalence",
        worst <= 1e-9,
        f"max |time-path - fast-path| = {worst:.3e} over 100 channels (bound 1e-9)",
    )
