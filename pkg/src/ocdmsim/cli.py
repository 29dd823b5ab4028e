"""Command-line front end.

Three subcommands: ``run`` sweeps Eb/N0 points and writes a CSV, ``selftest``
replays a set of built-in numeric oracles, ``histogram`` prints the
early-stopping iteration histogram of a single grid point.

Exit codes: 0 success, 1 selftest failure, 2 configuration problem,
3 numerical failure inside the receiver.
"""

import argparse
import sys

import numpy as np

from .channel import ebn0_to_sigma2
from .equalizer import NumericalError, cwcu_full, lce
from .fec import attach_crc24, bcjr_siso, check_crc24, make_interleaver, interleave, deinterleave, rsc_encode
from .harness import (
    ConfigError,
    SimConfig,
    load_config,
    run_point,
    run_sweep,
    build_context,
    write_results,
)
from .mapping import SoftSymbols, apriori_stats, extrinsic_llrs, qpsk
from .numerics import chirp_phases
from .waveform import WaveformKind, despread_adjoint, spread


def _parse_ebn0(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return (float(parts[0]),)
        if len(parts) == 3:
            start, step, stop = (float(p) for p in parts)
            if step <= 0 or stop < start:
                raise ConfigError(f"bad ebn0 range {text!r}: need start:step:stop with step > 0")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return tuple(start + step * i for i in range(count))
    except ValueError:
        pass
    raise ConfigError(f"bad ebn0 value {text!r}: expected a number or start:step:stop")


def _add_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--frames", type=int, help="frames per grid point")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--waveform", choices=[k.value for k in WaveformKind])
    p.add_argument("--mod", choices=["qpsk", "16qam"], dest="modulation")
    p.add_argument("--equalizer", choices=["lce", "full", "pfe", "ofdm-exact"])
    p.add_argument("--iters", type=int, help="maximum receiver iterations")
    p.add_argument("--stop", choices=["genie", "crc24", "none"], dest="stop_mode")


def _build_config(args: argparse.Namespace, ebn0: tuple[float, ...] | None) -> SimConfig:
    from dataclasses import replace

    cfg = load_config(args.config) if args.config else SimConfig()
    updates = {}
    if ebn0 is not None:
        updates["ebn0_grid_db"] = ebn0
    if args.frames is not None:
        updates["frames_per_point"] = args.frames
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.waveform is not None:
        updates["waveform"] = WaveformKind(args.waveform)
    if args.modulation is not None:
        updates["modulation"] = args.modulation
    if args.equalizer is not None:
        updates["equalizer"] = args.equalizer
    if args.iters is not None:
        updates["max_iterations"] = args.iters
    if args.stop_mode is not None:
        updates["stop_mode"] = args.stop_mode
    try:
        return replace(cfg, **updates) if updates else cfg
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _cmd_run(args: argparse.Namespace) -> int:
    ebn0 = _parse_ebn0(args.ebn0) if args.ebn0 else None
    cfg = _build_config(args, ebn0)

    def progress(p):
        print(
            f"ebn0={p.ebn0_db:g} dB  frames={p.frames}  frame_errors={p.frame_errors}  "
            f"fer={p.fer:.4g}  ber={p.ber:.4g}  mean_iters={p.mean_iterations:.3f}"
        )

    result = run_sweep(cfg, workers=args.workers, progress=progress)
    write_results(result, args.out)
    print(f"wrote {len(result.points)} points to {args.out}")
    return 0


def _cmd_histogram(args: argparse.Namespace) -> int:
    ebn0 = _parse_ebn0(args.ebn0)
    if len(ebn0) != 1:
        raise ConfigError("histogram needs a single --ebn0 value")
    cfg = _build_config(args, ebn0)
    point = run_point(cfg, build_context(cfg), 0)
    print(f"iteration histogram at ebn0={point.ebn0_db:g} dB ({point.frames} frames)")
    peak = max(point.iter_hist) or 1
    for i, count in enumerate(point.iter_hist, start=1):
        bar = "#" * int(round(40 * count / peak))
        label = f"{i}+" if i == len(point.iter_hist) else f"{i} "
        print(f"  iters {label} {count:6d} {bar}")
    print(f"mean iterations {point.mean_iterations:.3f}, fer {point.fer:.4g}")
    return 0


def _selftest_checks():
    rng = np.random.default_rng(7)

    def close(a, b, tol=1e-9):
        return np.allclose(a, b, rtol=0, atol=tol)

    # discrete chirp and spreading of a unit impulse, length 4
    root = np.exp(1j * np.pi / 4)
    yield "chirp phases (n=4)", close(chirp_phases(4), [1, root.conj(), -1, root.conj()])
    e0 = np.zeros(4, dtype=complex)
    e0[0] = 1.0
    yield "impulse spreading (n=4)", close(
        spread(e0, WaveformKind.OCDM), np.array([1, root, -1, root]) / 2.0
    )
    x = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    yield "spreading is unitary", close(despread_adjoint(spread(x, WaveformKind.OCDM), WaveformKind.OCDM), x)

    # soft mapping oracles
    stats = apriori_stats(np.array([2.0, 0.0]), qpsk())
    yield "soft symbol mean", close(stats.mean[0], np.tanh(1.0) / np.sqrt(2), 1e-12)
    yield "soft symbol variance", close(stats.variance[0], 1 - np.tanh(1.0) ** 2 / 2, 1e-12)
    post = SoftSymbols(mean=np.array([0.7 + 0.7j]), variance=np.array([0.5]))
    llrs = extrinsic_llrs(post, qpsk())
    yield "demapper first-bit llr", close(llrs[0], 3.959798, 1e-5)

    # noise scaling
    yield "noise variance (qpsk, 0 dB)", close(ebn0_to_sigma2(0.0, 0.5, 2), 1.0)
    yield "noise variance (16qam, 10 dB)", close(ebn0_to_sigma2(10.0, 0.5, 4), 0.05)

    # coding chain
    yield "all-zero codeword", bool(np.all(rsc_encode(np.zeros(16, dtype=np.uint8)) == 0))
    info = rng.integers(0, 2, 64).astype(np.uint8)
    coded = rsc_encode(info)
    _, info_post = bcjr_siso(20.0 * (1.0 - 2.0 * coded.astype(float)))
    yield "noiseless decode", bool(np.all((info_post < 0) == info))
    ilv = make_interleaver(140, rng)
    v = rng.standard_normal(140)
    yield "interleaver round trip", close(deinterleave(interleave(v, ilv), ilv), v, 0)
    framed = attach_crc24(info)
    corrupted = framed.copy()
    corrupted[11] ^= 1
    yield "crc accept/reject", check_crc24(framed) and not check_crc24(corrupted)

    # equalizer consistency: scalar-variance prior makes both routes exact
    n = 16
    lam = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    truth = (rng.integers(0, 2, n) * 2 - 1 + 1j * (rng.integers(0, 2, n) * 2 - 1)) / np.sqrt(2)
    prior = SoftSymbols(mean=0.4 * truth, variance=np.full(n, 0.7))
    y = lam * spread(truth, WaveformKind.OCDM)
    y = y + 0.1 * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    fast, _ = lce(y, lam, prior, 0.02, WaveformKind.OCDM)
    dense = cwcu_full(y, lam, prior, 0.02, WaveformKind.OCDM)
    yield "fast equalizer matches dense", close(fast.mean, dense.mean, 1e-8) and close(
        fast.variance, dense.variance, 1e-8
    )

    # perfect-feedback variance on a flat channel collapses to sigma2
    flat = np.ones(n, dtype=complex)
    yf = flat * spread(truth, WaveformKind.OCDM)
    pfe_prior = SoftSymbols(mean=truth, variance=np.zeros(n))
    pfe_post, _ = lce(yf, flat, pfe_prior, 0.5, WaveformKind.OCDM)
    yield "perfect-feedback variance", close(pfe_post.variance, 0.5, 1e-12)


def _cmd_selftest(_args: argparse.Namespace) -> int:
    failures = 0
    for name, ok in _selftest_checks():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failures += 0 if ok else 1
    if failures:
        print(f"{failures} selftest check(s) failed")
        return 1
    print("all selftest checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ocdmsim", description="Chirp-spread multicarrier link simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="sweep Eb/N0 points and write a results CSV")
    _add_overrides(p_run)
    p_run.add_argument("--ebn0", help="grid as start:step:stop or a single value")
    p_run.add_argument("--out", default="results.csv", help="output CSV path")
    p_run.add_argument("--workers", type=int, default=1, help="parallel trial processes")
    p_run.set_defaults(func=_cmd_run)

    p_hist = sub.add_parser("histogram", help="iteration histogram at one Eb/N0 point")
    _add_overrides(p_hist)
    p_hist.add_argument("--ebn0", required=True, help="single Eb/N0 value in dB")
    p_hist.set_defaults(func=_cmd_histogram)

    p_self = sub.add_parser("selftest", help="run built-in numeric oracle checks")
    p_self.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
