"""Pulse signals, pulse streams and sample trains.

A pulse is a real function vanishing outside ``(0, Tp)``.  A sample train
is the vector ``[p(t), p(t + tau), ..., p(t + d*tau)]``, i.e. a point in
``R^(d+1)``.  Trains taken from a stream of non-overlapping copies of the
pulse are trains of the pulse itself, at some start time in ``(-d*tau, Tp)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConditionViolation


class Interp(str, Enum):
    LINEAR = "linear"
    CUBIC = "cubic"


class SamplingMode(str, Enum):
    DIRECT = "direct"
    STREAM = "stream"


@dataclass(frozen=True, eq=False)
class PulseSignal:
    """Finite-support pulse given by knots and an interpolation rule.

    ``knot_times`` must start at 0 and end at the support length ``Tp``;
    the end knots carry the value 0.  Evaluation outside ``(0, Tp)`` is
    exactly zero.
    """

    knot_times: np.ndarray
    knot_values: np.ndarray
    interp: Interp = Interp.LINEAR
    _spline: CubicSpline | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.knot_times, dtype=float)
        v = np.asarray(self.knot_values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise ValueError("knot_times and knot_values must be 1-D of equal length >= 2")
        if t[0] != 0.0:
            raise ValueError("first knot must be at t=0")
        if not np.all(np.diff(t) > 0):
            raise ValueError("knot_times must be strictly increasing")
        if v[0] != 0.0 or v[-1] != 0.0:
            raise ValueError("pulse must vanish at both support endpoints")
        interp = Interp(self.interp)
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "knot_times", t)
        object.__setattr__(self, "knot_values", v)
        object.__setattr__(self, "interp", interp)
        if interp is Interp.CUBIC:
            if t.size < 3:
                raise ValueError("cubic interpolation needs at least 3 knots")
            object.__setattr__(self, "_spline", CubicSpline(t, v, bc_type="natural"))

    def __eq__(self, other):
        if not isinstance(other, PulseSignal):
            return NotImplemented
        return (
            self.interp is other.interp
            and np.array_equal(self.knot_times, other.knot_times)
            and np.array_equal(self.knot_values, other.knot_values)
        )

    __hash__ = None

    @property
    def Tp(self) -> float:
        return float(self.knot_times[-1])

    def __call__(self, t):
        return eval_pulse(self, t)

    def scaled(self, amplitude: float = 1.0, time: float = 1.0) -> PulseSignal:
        """Return ``amplitude * p(t / time)``."""
        return PulseSignal(self.knot_times * time, self.knot_values * amplitude, self.interp)


def eval_pulse(p: PulseSignal, t):
    """Evaluate ``p`` at scalar or array ``t``; zero outside ``(0, Tp)``."""
    t_arr = np.asarray(t, dtype=float)
    inside = (t_arr > 0.0) & (t_arr < p.Tp)
    out = np.zeros_like(t_arr)
    if np.any(inside):
        ti = t_arr[inside]
        if p.interp is Interp.CUBIC:
            out[inside] = p._spline(ti)
        else:
            out[inside] = np.interp(ti, p.knot_times, p.knot_values)
    if np.ndim(t) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class SamplingConfig:
    d: int
    tau: float
    mode: SamplingMode = SamplingMode.DIRECT
    axis_epsilon: float = 0.0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.axis_epsilon < 0:
            raise ValueError("axis_epsilon must be nonnegative")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "mode", SamplingMode(self.mode))

    @property
    def span(self) -> float:
        """Time span ``d * tau`` of one train."""
        return self.d * self.tau


@dataclass(frozen=True)
class GapLaw:
    """Gaps between consecutive pulses: ``min_gap + Tp * U(lo, hi)``."""

    min_gap: float
    lo: float = 0.1
    hi: float = 1.1

    @classmethod
    def default(cls, cfg: SamplingConfig) -> GapLaw:
        return cls(min_gap=cfg.span)

    def draw(self, rng: np.random.Generator, size: int, Tp: float) -> np.ndarray:
        return self.min_gap + Tp * rng.uniform(self.lo, self.hi, size)


@dataclass(frozen=True)
class PulseStream:
    pulse: PulseSignal
    onsets: np.ndarray

    def __post_init__(self):
        onsets = np.asarray(self.onsets, dtype=float)
        if onsets.ndim != 1 or onsets.size < 1:
            raise ValueError("a stream needs at least one onset")
        if np.any(np.diff(onsets) <= 0):
            raise ValueError("onset times must be strictly increasing")
        onsets.setflags(write=False)
        object.__setattr__(self, "onsets", onsets)

    @property
    def N(self) -> int:
        return int(self.onsets.size)

    @property
    def inter_pulse_distance(self) -> float:
        """Smallest gap between the end of a pulse and the next onset."""
        if self.N < 2:
            return np.inf
        return float(np.min(np.diff(self.onsets) - self.pulse.Tp))

    def __call__(self, t):
        """Evaluate the stream; assumes the pulses do not overlap."""
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.onsets, t_arr, side="right") - 1
        valid = idx >= 0
        out = np.zeros_like(t_arr)
        out[valid] = eval_pulse(self.pulse, t_arr[valid] - self.onsets[idx[valid]])
        return out


def sample_train(p: PulseSignal, t, cfg: SamplingConfig) -> np.ndarray:
    """Sample train(s) of ``p`` starting at ``t``.

    Scalar ``t`` gives a vector of length ``d+1``; an array of start times
    gives one train per row.
    """
    offsets = cfg.tau * np.arange(cfg.d + 1)
    t_arr = np.asarray(t, dtype=float)
    return eval_pulse(p, t_arr[..., None] + offsets)


def synth_stream(
    p: PulseSignal,
    n: int,
    seed,
    cfg: SamplingConfig | None = None,
    gap_law: GapLaw | None = None,
) -> PulseStream:
    """Synthesize ``n`` copies of ``p`` with i.i.d. gaps drawn from ``gap_law``.

    With ``cfg`` given, a gap law whose lower bound is below ``d * tau`` is
    rejected, so the result always satisfies the non-overlap condition.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if gap_law is None:
        if cfg is None:
            raise ValueError("either cfg or gap_law is required")
        gap_law = GapLaw.default(cfg)
    if gap_law.min_gap < 0 or gap_law.lo < 0 or gap_law.hi < gap_law.lo:
        raise ValueError(f"invalid gap law {gap_law}")
    if cfg is not None and gap_law.min_gap < cfg.span:
        raise ConditionViolation(
            f"gap law lower bound {gap_law.min_gap} is below d*tau={cfg.span}"
        )
    rng = np.random.default_rng(seed)
    gaps = gap_law.draw(rng, n - 1, p.Tp)
    onsets = np.concatenate([[0.0], np.cumsum(gaps + p.Tp)])
    return PulseStream(p, onsets)


def _nonzero_rows(trains: np.ndarray, axis_epsilon: float) -> np.ndarray:
    return trains[np.any(np.abs(trains) > axis_epsilon, axis=1)]


def extract_trains(stream: PulseStream, cfg: SamplingConfig, seed, phase: float | None = None) -> np.ndarray:
    """Collect the nonzero sample trains of a stream, one per row.

    In stream mode the stream is sampled at period ``tau`` on a grid with a
    uniformly random phase (or the given ``phase``) and every window of
    ``d+1`` consecutive samples is a candidate.  In direct mode each pulse
    contributes one train with a start time drawn from ``U(-d*tau, Tp)``.
    """
    if stream.inter_pulse_distance < cfg.span:
        raise ConditionViolation(
            f"inter-pulse distance {stream.inter_pulse_distance:.6g} < d*tau = {cfg.span:.6g}"
        )
    rng = np.random.default_rng(seed)
    p = stream.pulse
    if cfg.mode is SamplingMode.DIRECT:
        starts = rng.uniform(-cfg.span, p.Tp, stream.N)
        return _nonzero_rows(sample_train(p, starts, cfg), cfg.axis_epsilon)

    if phase is None:
        phase = rng.uniform(0.0, cfg.tau)
    first = stream.onsets[0] - cfg.span
    last = stream.onsets[-1] + p.Tp
    j0 = int(np.floor((first - phase) / cfg.tau)) - 1
    j1 = int(np.ceil((last - phase) / cfg.tau)) + 1
    grid = phase + cfg.tau * np.arange(j0, j1 + 1)
    samples = stream(grid)
    windows = np.lib.stride_tricks.sliding_window_view(samples, cfg.d + 1)
    return _nonzero_rows(np.array(windows), cfg.axis_epsilon)


def triangle_pulse(Tp: float = 1.0) -> PulseSignal:
    """``1 - |2t/Tp - 1|`` on ``(0, Tp)``."""
    return PulseSignal(np.array([0.0, 0.5, 1.0]) * Tp, np.array([0.0, 1.0, 0.0]))


def default_pulse(n_knots: int = 129) -> PulseSignal:
    """Smooth two-lobe test pulse on ``(0, 1)``.

    A tall lobe peaking near t=0.39 and a shallow one near t=0.65, with
    monotone flanks, so the d=2 train curve is regular for tau up to about
    0.34 and folds onto the X_1-axis beyond that.
    """
    t = np.linspace(0.0, 1.0, n_knots)
    dip = np.exp(-(((t - 0.56) / 0.09) ** 2))
    v = np.sin(np.pi * t) * (0.8 + 0.2 * np.cos(2 * np.pi * (t - 0.3))) * (1 - 0.35 * dip)
    v[0] = v[-1] = 0.0
    return PulseSignal(t, v, Interp.CUBIC)
