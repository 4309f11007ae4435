"""Command line entry point: ``pulserecon {reconstruct,simulate,oracle,trains}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness, io
from .curve_ordering import nn_crust, orient
from .errors import ReconstructionError
from .reconstruction import DEFAULT_GRID_SIZE, algorithm1_oracle, algorithm2
from .signal_model import SamplingConfig, extract_trains, synth_stream


def int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _pulse_meta(est, d, tau) -> dict:
    return {"Tp_hat": est.Tp_hat, "n_trains": est.n_trains, "d": d, "tau": tau}


def cmd_reconstruct(args) -> int:
    trains = io.read_trains(args.trains)
    d = trains.shape[1] - 1
    if args.d is not None and args.d != d:
        print(f"error: trains have {d + 1} columns but --d {args.d}", file=sys.stderr)
        return 2
    cfg = SamplingConfig(d, args.tau, axis_epsilon=args.axis_epsilon)
    if args.dump_chain:
        try:
            ordering = orient(trains, nn_crust(trains), args.axis_epsilon)
            io.write_trains(args.dump_chain, trains[ordering.perm])
        except ReconstructionError as exc:
            print(f"chain dump skipped: {exc}", file=sys.stderr)
    try:
        est = algorithm2(trains, d, args.tau, cfg, args.grid_size)
    except ReconstructionError as exc:
        stage = getattr(exc, "stage", "")
        print(f"insufficient data ({stage}): {exc}", file=sys.stderr)
        return 1
    out = Path(args.out)
    path = io.write_pulse(out / "pulse_hat.csv", est.pulse, _pulse_meta(est, d, args.tau))
    print(f"Tp_hat={est.Tp_hat:.10g} n_trains={est.n_trains} -> {path}")
    return 0


def cmd_trains(args) -> int:
    pulse = io.load_pulse(args.pulse)
    tau = args.tau_frac * pulse.Tp
    cfg = SamplingConfig(args.d, tau, args.mode)
    stream_seed, extract_seed = np.random.SeedSequence(args.seed).spawn(2)
    trains = extract_trains(synth_stream(pulse, args.n, stream_seed, cfg), cfg, extract_seed)
    path = io.write_trains(args.out, trains)
    print(f"{len(trains)} trains (d={args.d}, tau={tau:.10g}) -> {path}")
    return 0


def cmd_simulate(args) -> int:
    overrides = {
        "pulse": args.pulse, "d": args.d, "tau_frac": args.tau_frac, "n": args.n,
        "trials": args.trials, "mode": args.mode, "seed": args.seed, "out": args.out,
        "workers": args.workers,
    }
    if args.config:
        cfg = harness.ExperimentConfig.from_json(args.config, **overrides)
    else:
        cfg = harness.ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
    if cfg.out is None:
        cfg.out = "results"
    _, summary = harness.simulate(cfg)
    print("cell            median        q1            q3            fail_prob")
    for s in summary:
        print(f"{s.cell:<15} {s.median:<13.6g} {s.q1:<13.6g} {s.q3:<13.6g} {s.fail_prob:.4f}")
    print(f"outputs in {cfg.out}/")
    return 0


def cmd_oracle(args) -> int:
    pulse = io.load_pulse(args.pulse)
    tau = args.tau_frac * pulse.Tp
    est = algorithm1_oracle(pulse, args.d, tau, args.m, args.grid_size)
    t = est.pulse.knot_times
    sup = float(np.max(np.abs(est.pulse.knot_values - pulse(t))))
    path = io.write_pulse(Path(args.out) / "pulse_hat.csv", est.pulse, _pulse_meta(est, args.d, tau))
    print(f"Tp_hat={est.Tp_hat:.15g} |Tp_hat-Tp|={abs(est.Tp_hat - pulse.Tp):.3g} sup_err={sup:.3g} -> {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pulserecon", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reconstruct", help="estimate a pulse from a train CSV")
    p.add_argument("trains", help="CSV, one train per row")
    p.add_argument("--tau", type=float, required=True, help="sample spacing (seconds)")
    p.add_argument("--d", type=int, help="train length minus one (checked against the CSV)")
    p.add_argument("--grid-size", type=int, default=DEFAULT_GRID_SIZE)
    p.add_argument("--axis-epsilon", type=float, default=0.0)
    p.add_argument("--dump-chain", metavar="FILE", help="write the ordered trains here")
    p.add_argument("--out", default=".", metavar="DIR")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("trains", help="synthesize a stream and dump its trains")
    p.add_argument("--pulse", default="default", help="'default', 'triangle' or a CSV fixture")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--tau-frac", type=float, default=0.16)
    p.add_argument("--n", type=int, default=512, help="number of pulses")
    p.add_argument("--mode", choices=["direct", "stream"], default="stream")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="trains.csv", metavar="FILE")
    p.set_defaults(func=cmd_trains)

    p = sub.add_parser("simulate", help="Monte Carlo RMSE study")
    p.add_argument("--config", metavar="JSON", help="ExperimentConfig as JSON; flags override")
    p.add_argument("--pulse", help="'default', 'triangle' or a CSV fixture")
    p.add_argument("--d", type=int_list, help="e.g. 2,3,4")
    p.add_argument("--tau-frac", type=float)
    p.add_argument("--n", type=int_list, help="e.g. 32,128,512")
    p.add_argument("--trials", type=int)
    p.add_argument("--mode", choices=["direct", "stream"])
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", metavar="DIR")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="reconstruct from the exact train distribution")
    p.add_argument("--pulse", default="default")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--tau-frac", type=float, default=0.16)
    p.add_argument("--m", type=int, default=10_000, help="curve resolution")
    p.add_argument("--grid-size", type=int, default=DEFAULT_GRID_SIZE)
    p.add_argument("--out", default=".", metavar="DIR")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
