"""Monte Carlo driver for the reconstruction error study.

Every (d, N) cell runs ``trials`` independent experiments: synthesize a
stream of N pulses, extract the nonzero trains, reconstruct, and score the
estimate by RMSE.  Each trial draws its randomness from
``SeedSequence([seed, d, N, trial])`` so cells are reproducible on their
own, in any order and on any number of workers.
"""
from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid

from .errors import ConditionViolation, ReconstructionError
from .io import fmt, load_pulse
from .reconstruction import DEFAULT_GRID_SIZE, PulseEstimate, algorithm2
from .signal_model import PulseSignal, SamplingConfig, SamplingMode, extract_trains, synth_stream

log = logging.getLogger(__name__)

DEFAULT_N_LADDER = tuple(2**k for k in range(5, 14))
DEFAULT_QUAD_POINTS = 4096


@dataclass
class ExperimentConfig:
    pulse: str = "default"
    d: list[int] = field(default_factory=lambda: [2])
    tau_frac: float = 0.16
    n: list[int] = field(default_factory=lambda: list(DEFAULT_N_LADDER))
    trials: int = 1000
    mode: str = "stream"
    seed: int = 0
    out: str | None = None
    workers: int = 1
    grid_size: int = DEFAULT_GRID_SIZE
    quad_points: int = DEFAULT_QUAD_POINTS
    axis_epsilon: float = 0.0

    def __post_init__(self):
        self.d = [int(x) for x in np.atleast_1d(self.d)]
        self.n = [int(x) for x in np.atleast_1d(self.n)]
        self.mode = SamplingMode(self.mode).value
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(x < 1 for x in self.n):
            raise ValueError("every N must be >= 1")
        if any(x < 1 for x in self.d):
            raise ValueError("every d must be >= 1")
        if not 0 < self.tau_frac < 1:
            raise ValueError("tau_frac must lie in (0, 1)")

    @classmethod
    def from_json(cls, path, **overrides) -> ExperimentConfig:
        data = json.loads(Path(path).read_text())
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)


@dataclass(frozen=True)
class TrialReport:
    d: int
    N: int
    trial: int
    ok: bool
    Tp_hat: float = float("nan")
    rmse: float = float("nan")
    stage: str = ""

    @property
    def cell(self) -> str:
        return f"d={self.d};N={self.N}"

    @property
    def outcome(self) -> str:
        return "ok" if self.ok else f"failed:{self.stage}"


@dataclass(frozen=True)
class CellSummary:
    d: int
    N: int
    trials: int
    n_ok: int
    median: float
    q1: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    fail_prob: float

    @property
    def cell(self) -> str:
        return f"d={self.d};N={self.N}"

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


def rmse(p: PulseSignal, estimate, quad_points: int = DEFAULT_QUAD_POINTS) -> float:
    """RMS difference over ``[0, max(Tp, Tp_hat)]`` by the trapezoid rule."""
    p_hat = estimate.pulse if isinstance(estimate, PulseEstimate) else estimate
    T = max(p.Tp, p_hat.Tp)
    t = np.linspace(0.0, T, quad_points)
    err = (p(t) - p_hat(t)) ** 2
    return float(np.sqrt(trapezoid(err, t) / T))


def trial_rngs(seed: int, d: int, N: int, trial: int):
    """Independent seed sequences for the stream and the train extraction."""
    return np.random.SeedSequence([seed, d, N, trial]).spawn(2)


def run_trial(pulse: PulseSignal, cfg: ExperimentConfig, d: int, N: int, trial: int) -> TrialReport:
    tau = cfg.tau_frac * pulse.Tp
    scfg = SamplingConfig(d, tau, cfg.mode, cfg.axis_epsilon)
    stream_seed, extract_seed = trial_rngs(cfg.seed, d, N, trial)
    stream = synth_stream(pulse, N, stream_seed, scfg)
    trains = extract_trains(stream, scfg, extract_seed)
    try:
        if len(trains) == 0:
            raise ReconstructionError("no nonzero trains")
        est = algorithm2(trains, d, tau, scfg, cfg.grid_size)
    except ConditionViolation:
        raise
    except ReconstructionError as exc:
        return TrialReport(d, N, trial, False, stage=getattr(exc, "stage", "extract"))
    return TrialReport(d, N, trial, True, est.Tp_hat, rmse(pulse, est, cfg.quad_points))


def _run_cell_chunk(args):
    pulse, cfg, d, N, trials = args
    return [run_trial(pulse, cfg, d, N, k) for k in trials]


def run_cell(cfg: ExperimentConfig, d: int, N: int, pulse: PulseSignal | None = None) -> list[TrialReport]:
    pulse = pulse if pulse is not None else load_pulse(cfg.pulse)
    return _run_cell_chunk((pulse, cfg, d, N, range(cfg.trials)))


def run_experiment(cfg: ExperimentConfig, pulse: PulseSignal | None = None) -> list[TrialReport]:
    """All cells of the (d, N) grid, sorted by (d, N, trial)."""
    pulse = pulse if pulse is not None else load_pulse(cfg.pulse)
    jobs = []
    chunk = max(1, cfg.trials // max(1, 4 * cfg.workers))
    for d in cfg.d:
        for N in cfg.n:
            for start in range(0, cfg.trials, chunk):
                jobs.append((pulse, cfg, d, N, range(start, min(start + chunk, cfg.trials))))
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_cell_chunk, jobs))
    else:
        results = [_run_cell_chunk(job) for job in jobs]
    reports = [r for chunk_reports in results for r in chunk_reports]
    reports.sort(key=lambda r: (r.d, r.N, r.trial))
    return reports


def summarize(reports) -> list[CellSummary]:
    """Per-cell median, quartiles, 1.5*IQR whiskers and failure probability."""
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to summarize")
    cells: dict[tuple[int, int], list[TrialReport]] = {}
    for r in reports:
        cells.setdefault((r.d, r.N), []).append(r)
    out = []
    for (d, N), rs in sorted(cells.items()):
        errs = np.array([r.rmse for r in rs if r.ok])
        if errs.size:
            q1, med, q3 = np.percentile(errs, [25, 50, 75])
            lo_fence, hi_fence = q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1)
            w_lo = errs[errs >= lo_fence].min()
            w_hi = errs[errs <= hi_fence].max()
        else:
            q1 = med = q3 = w_lo = w_hi = float("nan")
        fails = sum(not r.ok for r in rs)
        out.append(CellSummary(d, N, len(rs), len(rs) - fails, float(med), float(q1), float(q3),
                               float(w_lo), float(w_hi), fails / len(rs)))
    return out


def loglog_slope(ns, values) -> float:
    """Least-squares slope of log(values) against log(ns)."""
    slope, _ = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)
    return float(slope)


REPORT_COLUMNS = ["cell", "d", "N", "trial", "outcome", "Tp_hat", "rmse"]
SUMMARY_COLUMNS = ["cell", "d", "N", "median", "q1", "q3", "fail_prob", "iqr",
                   "whisker_lo", "whisker_hi", "trials", "n_ok"]


def write_reports(path, reports) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            w.writerow([r.cell, r.d, r.N, r.trial, r.outcome,
                        fmt(r.Tp_hat) if r.ok else "", fmt(r.rmse) if r.ok else ""])
    return path


def write_summary(path, summary) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for s in summary:
            w.writerow([s.cell, s.d, s.N, fmt(s.median), fmt(s.q1), fmt(s.q3), fmt(s.fail_prob),
                        fmt(s.iqr), fmt(s.whisker_lo), fmt(s.whisker_hi), s.trials, s.n_ok])
    return path


def simulate(cfg: ExperimentConfig) -> tuple[list[TrialReport], list[CellSummary]]:
    """Run the experiment and, if ``cfg.out`` is set, write the CSV outputs."""
    reports = run_experiment(cfg)
    summary = summarize(reports)
    if cfg.out:
        out = Path(cfg.out)
        write_reports(out / "reports.csv", reports)
        write_summary(out / "summary.csv", summary)
        (out / "config.json").write_text(json.dumps(asdict(cfg), indent=2) + "\n")
    return reports, summary
