"""File formats: pulse knots, train dumps and reconstructed pulses.

A pulse is stored as a CSV with header ``t,value`` plus a JSON sidecar of
the same stem.  Trains are stored one per row, no header.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .signal_model import Interp, PulseSignal, default_pulse, triangle_pulse

BUILTIN_PULSES = {"default": default_pulse, "triangle": triangle_pulse}


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_pulse(path, pulse: PulseSignal, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "value"])
        for t, v in zip(pulse.knot_times, pulse.knot_values):
            w.writerow([fmt(t), fmt(v)])
    side = {"interp": pulse.interp.value}
    if meta:
        side.update(meta)
    sidecar_path(path).write_text(json.dumps(side, indent=2) + "\n")
    return path


def read_pulse(path) -> PulseSignal:
    """Load a pulse fixture.  A missing sidecar means linear interpolation."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["t", "value"]:
            raise ValueError(f"{path}: expected header 't,value'")
        rows = [(float(r["t"]), float(r["value"])) for r in reader]
    t, v = np.array(rows).T
    interp = Interp.LINEAR
    side = sidecar_path(path)
    if side.exists():
        interp = Interp(json.loads(side.read_text()).get("interp", "linear"))
    return PulseSignal(t, v, interp)


def load_pulse(spec: str) -> PulseSignal:
    """Resolve a built-in pulse name or a fixture path."""
    if spec in BUILTIN_PULSES:
        return BUILTIN_PULSES[spec]()
    return read_pulse(spec)


def write_trains(path, trains) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.atleast_2d(trains), fmt="%.17g", delimiter=",")
    return path


def read_trains(path) -> np.ndarray:
    trains = np.loadtxt(path, delimiter=",", ndmin=2)
    return trains
