"""Command line front end.

Four subcommands: kappa-hist (conditioning experiment -> kappa.csv),
ser-curve (error rate experiment -> ser.csv), pathloss (scaling law table to
stdout), optimize (single-scene phase solve -> optimize.json).  Every file
emitting command also writes manifest.json with the resolved configuration,
so a single-threaded run can be reproduced byte-identically from the
manifest alone.

Outputs land in the working directory unless RIS_FORGE_OUT is set.  CSV and
JSON files are UTF-8 with LF line endings.  Exit codes: 0 success, 1 runtime
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .channel import RisConfig, condition_number, effective_channel, spectral_entropy
from .errors import RisForgeError
from .linksim import (
    DETECTORS,
    ExperimentConfig,
    normalize_scene,
    run_kappa_experiment,
    run_ser_experiment,
)
from .optimize import maximize_spectral_entropy, quantize_phases
from .pathloss import (
    classify_regime,
    near_field_boundary,
    reflected_pathloss,
    scattered_pathloss,
)

KAPPA_HEADER = "realization,kappa_before,kappa_after,se_before,se_after,iters"
SER_HEADER = "scenario,detector,snr_db,ser,trials,ci_halfwidth"


def _out_dir() -> str:
    out = os.environ.get("RIS_FORGE_OUT") or os.getcwd()
    os.makedirs(out, exist_ok=True)
    return out


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: str, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out: str, command: str, seed: int, config: dict,
                    threads: int, duration: float, outputs: list) -> str:
    path = os.path.join(out, "manifest.json")
    _write_json(path, {
        "tool": "risforge",
        "version": __version__,
        "command": command,
        "seed": seed,
        "config": config,
        "threads": threads,
        "duration_seconds": duration,
        "outputs": outputs,
    })
    return path


def _parse_snr_grid(text: str) -> tuple:
    """Inclusive start:stop:step grid; 0:20:2 yields 11 points."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"--snr-db expects start:stop:step, got {text!r}")
    start, stop, step = (float(p) for p in parts)
    if not all(map(math.isfinite, (start, stop, step))) or step <= 0 or stop < start:
        raise ValueError(f"--snr-db needs finite start <= stop and step > 0, got {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + k * step for k in range(count))


def _parse_detectors(text: str) -> tuple:
    names = tuple(tok.strip() for tok in text.split(",") if tok.strip())
    if not names or set(names) - set(DETECTORS) or len(set(names)) != len(names):
        raise ValueError(f"--detectors expects distinct names from {','.join(DETECTORS)}, got {text!r}")
    return names


def cmd_kappa_hist(args) -> int:
    try:
        config = ExperimentConfig(
            num_tx=args.m, num_rx=args.n, num_elements=args.l,
            ris_power_fraction=args.rho,
            channel_realizations=args.realizations,
            seed=args.seed, threads=args.threads,
        )
    except (RisForgeError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        started = time.monotonic()
        samples = run_kappa_experiment(config)
        out = _out_dir()
        csv_path = os.path.join(out, "kappa.csv")
        _write_csv(csv_path, KAPPA_HEADER, (
            (s.realization, s.kappa_before, s.kappa_after, s.se_before, s.se_after, s.iterations)
            for s in samples
        ))
        _write_manifest(out, "kappa-hist", args.seed, {
            "num_tx": config.num_tx, "num_rx": config.num_rx,
            "num_elements": config.num_elements,
            "ris_power_fraction": config.ris_power_fraction,
            "channel_realizations": config.channel_realizations,
        }, config.threads, time.monotonic() - started, ["kappa.csv"])
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {csv_path}")
    return 0


def cmd_ser_curve(args) -> int:
    try:
        grid = _parse_snr_grid(args.snr_db)
        detectors = _parse_detectors(args.detectors)
        # neither scenario flag selects both
        scenarios = []
        if args.baseline or not args.assisted:
            scenarios.append("baseline")
        if args.assisted or not args.baseline:
            scenarios.append("assisted")
        config = ExperimentConfig(
            num_tx=args.m, num_rx=args.n, num_elements=args.l,
            ris_power_fraction=args.rho,
            snr_grid_db=grid, detectors=detectors,
            trials_per_point=args.trials,
            channel_realizations=args.realizations,
            seed=args.seed, threads=args.threads,
        )
    except (RisForgeError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        started = time.monotonic()
        curves = run_ser_experiment(config, scenarios=tuple(scenarios))
        out = _out_dir()
        csv_path = os.path.join(out, "ser.csv")
        rows = []
        for curve in curves:
            for i, snr in enumerate(curve.snr_db):
                rows.append((curve.scenario, curve.detector, snr,
                             curve.ser[i], curve.trials[i], curve.ci_halfwidth[i]))
        _write_csv(csv_path, SER_HEADER, rows)
        _write_manifest(out, "ser-curve", args.seed, {
            "num_tx": config.num_tx, "num_rx": config.num_rx,
            "num_elements": config.num_elements,
            "ris_power_fraction": config.ris_power_fraction,
            "snr_grid_db": list(config.snr_grid_db),
            "detectors": list(config.detectors),
            "scenarios": scenarios,
            "trials_per_point": config.trials_per_point,
            "channel_realizations": config.channel_realizations,
        }, config.threads, time.monotonic() - started, ["ser.csv"])
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {csv_path}")
    return 0


def cmd_pathloss(args) -> int:
    try:
        if (args.ris_size is None) != (args.freq is None):
            raise ValueError("--ris-size and --freq must be given together")
        reflected = reflected_pathloss(args.d_sr, args.d_rd, args.n)
        scattered = scattered_pathloss(args.d_sr, args.d_rd, args.n)
    except (RisForgeError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    lines = [
        ("reflected_loss", f"{reflected:.6g}"),
        ("scattered_loss", f"{scattered:.6g}"),
        ("reflected_over_scattered_db", f"{10.0 * math.log10(reflected / scattered):.6g}"),
    ]
    if args.ris_size is not None:
        try:
            boundary = near_field_boundary(args.ris_size, args.freq)
            regime = classify_regime(args.d_sr, args.d_rd, args.ris_size, args.freq)
        except RisForgeError as exc:
            print(f"usage error: {exc}", file=sys.stderr)
            return 2
        lines.append(("near_field_boundary_m", f"{boundary:.6g}"))
        lines.append(("regime", regime))
    for key, value in lines:
        print(f"{key:<28}{value}")
    return 0


def cmd_optimize(args) -> int:
    try:
        if args.quantize_bits is not None and args.quantize_bits < 1:
            raise ValueError(f"--quantize-bits must be positive, got {args.quantize_bits}")
        config = ExperimentConfig(
            num_tx=args.m, num_rx=args.n, num_elements=args.l,
            ris_power_fraction=args.rho, seed=args.seed,
            quantize_bits=args.quantize_bits,
        )
    except (RisForgeError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        started = time.monotonic()
        # same stream layout as realization 0 of the experiments
        child = np.random.SeedSequence(config.seed).spawn(1)[0]
        channel_ss, phase_ss, _ = child.spawn(3)
        scene = normalize_scene(
            config.num_tx, config.num_rx, config.num_elements,
            config.ris_power_fraction, np.random.default_rng(channel_ss),
        )
        init = np.random.default_rng(phase_ss).uniform(-np.pi, np.pi, config.num_elements)
        before = effective_channel(scene, RisConfig.full_reflection(init))
        result = maximize_spectral_entropy(scene, config.opt_options, initial_phases=init)
        phases = result.phases
        if config.quantize_bits is not None:
            phases = quantize_phases(phases, config.quantize_bits)
        after = effective_channel(scene, RisConfig.full_reflection(phases))
        out = _out_dir()
        json_path = os.path.join(out, "optimize.json")
        _write_json(json_path, {
            "num_tx": config.num_tx,
            "num_rx": config.num_rx,
            "num_elements": config.num_elements,
            "ris_power_fraction": config.ris_power_fraction,
            "seed": config.seed,
            "quantize_bits": config.quantize_bits,
            "converged": result.converged,
            "iterations": result.iterations,
            "kappa_before": condition_number(before),
            "kappa_after": condition_number(after),
            "se_before": spectral_entropy(before),
            "se_after": spectral_entropy(after),
            "se_trace": [float(v) for v in result.objective_trace],
            "phases": [float(v) for v in phases],
        })
        _write_manifest(out, "optimize", config.seed, {
            "num_tx": config.num_tx, "num_rx": config.num_rx,
            "num_elements": config.num_elements,
            "ris_power_fraction": config.ris_power_fraction,
            "quantize_bits": config.quantize_bits,
        }, 1, time.monotonic() - started, ["optimize.json"])
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {json_path}")
    return 0


def _add_scene_flags(parser, include_rho: bool = True):
    parser.add_argument("--m", type=int, default=4, help="transmit antennas (default 4)")
    parser.add_argument("--n", type=int, default=4, help="receive antennas (default 4)")
    parser.add_argument("--l", type=int, default=100, help="surface elements (default 100)")
    if include_rho:
        parser.add_argument("--rho", type=float, default=0.5,
                            help="fraction of received power routed through the surface (default 0.5)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risforge",
        description="Surface-assisted MIMO conditioning and link level experiments.",
    )
    parser.add_argument("--version", action="version", version=f"risforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    kappa = sub.add_parser("kappa-hist", help="condition number experiment, writes kappa.csv")
    _add_scene_flags(kappa)
    kappa.add_argument("--realizations", type=int, default=10000, help="channel draws (default 10000)")
    kappa.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    kappa.add_argument("--threads", type=int, default=1, help="worker threads (default 1, bit-reproducible)")
    kappa.set_defaults(func=cmd_kappa_hist)

    ser = sub.add_parser("ser-curve", help="symbol error rate experiment, writes ser.csv")
    _add_scene_flags(ser)
    ser.add_argument("--snr-db", default="0:20:2", help="grid start:stop:step in dB (default 0:20:2)")
    ser.add_argument("--detectors", default="zf,ml",
                     help=f"comma list from {{{','.join(DETECTORS)}}} (default zf,ml)")
    ser.add_argument("--assisted", action="store_true", help="run only the surface-assisted scenario")
    ser.add_argument("--baseline", action="store_true", help="run only the unassisted scenario")
    ser.add_argument("--trials", type=int, default=1000, help="vectors per SNR point per realization (default 1000)")
    ser.add_argument("--realizations", type=int, default=100, help="channel draws (default 100)")
    ser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    ser.add_argument("--threads", type=int, default=1, help="worker threads (default 1, bit-reproducible)")
    ser.set_defaults(func=cmd_ser_curve)

    pl = sub.add_parser("pathloss", help="print scaling law table for one link geometry")
    pl.add_argument("--d-sr", type=float, required=True, help="source to surface distance, m")
    pl.add_argument("--d-rd", type=float, required=True, help="surface to destination distance, m")
    pl.add_argument("--n", type=float, required=True, help="propagation exponent")
    pl.add_argument("--ris-size", type=float, default=None, help="largest aperture dimension, m")
    pl.add_argument("--freq", type=float, default=None, help="carrier frequency, Hz")
    pl.set_defaults(func=cmd_pathloss)

    opt = sub.add_parser("optimize", help="single-scene phase solve, writes optimize.json")
    _add_scene_flags(opt)
    opt.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    opt.add_argument("--quantize-bits", type=int, default=None,
                     help="snap the solution to a 2**bits phase grid before reporting")
    opt.set_defaults(func=cmd_optimize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage or help
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
