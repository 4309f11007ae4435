"""Pulse estimation from ordered sample trains.

The ordered trains, capped with the origin at both ends, form a polygonal
chain approximating the train curve.  The arc-length position of the k-th
ordered train estimates the curve quantile of order ``(k - 0.5)/n``; the
ordinals where each coordinate switches on and off give the pulse length,
and averaging the ``d+1`` coordinate slices of the quantile map gives the
pulse itself.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .curve_ordering import as_cloud, nn_crust, orient
from .errors import InsufficientData, MissingCoordinateData, ReconstructionError
from .signal_model import Interp, PulseSignal, SamplingConfig, sample_train

log = logging.getLogger(__name__)

DEFAULT_GRID_SIZE = 512


@dataclass(frozen=True)
class PolygonalChain:
    """Origin-capped chain ``0, p_1, ..., p_n, 0`` with cumulative arc length."""

    vertices: np.ndarray
    cum_len: np.ndarray

    @property
    def n(self) -> int:
        return len(self.vertices) - 2

    @property
    def length(self) -> float:
        return float(self.cum_len[-1])

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]


@dataclass(frozen=True)
class QuantileEstimate:
    alphas: np.ndarray
    values: np.ndarray

    def __call__(self, alpha):
        return np.interp(alpha, self.alphas, self.values)


@dataclass(frozen=True)
class AlphaEstimates:
    """Support edges of each coordinate, as fractions of the start-time range.

    ``alpha_min[k-1]`` is defined for ``k = 1..d`` and ``alpha_max[k-2]`` for
    ``k = 2..d+1`` (1-based coordinates).
    """

    alpha_min: np.ndarray
    alpha_max: np.ndarray

    @property
    def d(self) -> int:
        return len(self.alpha_min)

    @classmethod
    def exact(cls, Tp: float, d: int, tau: float) -> AlphaEstimates:
        """The true values for a pulse of length ``Tp``."""
        total = Tp + d * tau
        k_min = np.arange(1, d + 1)
        k_max = np.arange(2, d + 2)
        return cls((d + 1 - k_min) * tau / total, (Tp + (d + 1 - k_max) * tau) / total)


@dataclass(frozen=True)
class PulseEstimate:
    Tp_hat: float
    pulse: PulseSignal
    n_trains: int = 0


def build_chain(ordered) -> PolygonalChain:
    pts = np.asarray(ordered, dtype=float)
    if pts.ndim != 2 or len(pts) == 0:
        raise ValueError("cannot build a chain from an empty point set")
    origin = np.zeros((1, pts.shape[1]))
    vertices = np.vstack([origin, pts, origin])
    seg = np.linalg.norm(np.diff(vertices, axis=0), axis=1)
    cum_len = np.concatenate([[0.0], np.cumsum(seg)])
    return PolygonalChain(vertices, cum_len)


def arc_coordinate(chain: PolygonalChain, k: int) -> float:
    """Arc length from the origin to the k-th ordered train (1-based)."""
    if not 1 <= k <= chain.n:
        raise IndexError(f"vertex index {k} outside 1..{chain.n}")
    return float(chain.cum_len[k])


def chain_point(chain: PolygonalChain, s):
    """Point(s) at arc length ``s`` along the chain."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0) or np.any(s_arr > chain.length):
        raise ValueError(f"arc length outside [0, {chain.length}]")
    out = np.stack(
        [np.interp(s_arr, chain.cum_len, chain.vertices[:, c]) for c in range(chain.dim)],
        axis=-1,
    )
    return out


def estimate_quantile(chain: PolygonalChain) -> QuantileEstimate:
    n = chain.n
    if n < 1:
        raise ValueError("chain has no train vertices")
    alphas = np.concatenate([[0.0], (np.arange(1, n + 1) - 0.5) / n, [1.0]])
    values = chain.cum_len.copy()
    if np.any(np.diff(values) < 0):
        warnings.warn("quantile grid not monotone; clamping by running maximum", RuntimeWarning)
        values = np.maximum.accumulate(values)
    return QuantileEstimate(alphas, values)


def q_hat(chain: PolygonalChain, Q: QuantileEstimate, alpha):
    """Curve point of quantile order ``alpha``; zero outside ``(0, 1)``."""
    a = np.asarray(alpha, dtype=float)
    inside = (a > 0) & (a < 1)
    out = np.zeros(a.shape + (chain.dim,))
    if np.any(inside):
        s = np.clip(Q(a[inside]), 0.0, chain.length)
        out[inside] = chain_point(chain, s)
    return out


def estimate_alphas(ordered, axis_epsilon: float = 0.0) -> AlphaEstimates:
    pts = np.asarray(ordered, dtype=float)
    n, dim = pts.shape
    d = dim - 1
    nonzero = np.abs(pts) > axis_epsilon
    alpha_min = np.empty(d)
    alpha_max = np.empty(d)
    for c in range(dim):
        rows = np.flatnonzero(nonzero[:, c])
        if rows.size == 0:
            raise MissingCoordinateData(f"coordinate {c + 1} is zero in every train")
        first, last = rows[0] + 1, rows[-1] + 1
        if c < d:
            alpha_min[c] = (first - 1) / n
        if c > 0:
            alpha_max[c - 1] = last / n
    return AlphaEstimates(alpha_min, alpha_max)


def estimate_Tp(alphas: AlphaEstimates, d: int, tau: float) -> float:
    """Pulse length averaged over the 2d support-edge estimates.

    Terms with a zero ``alpha_min`` or a unit ``alpha_max`` are undefined;
    they are dropped and the average is taken over the rest.
    """
    k_min = np.arange(1, d + 1)
    k_max = np.arange(2, d + 2)
    a_min = np.asarray(alphas.alpha_min, dtype=float)
    a_max = np.asarray(alphas.alpha_max, dtype=float)
    ok_min = a_min > 0
    ok_max = a_max < 1
    used = int(ok_min.sum() + ok_max.sum())
    if used == 0:
        raise ReconstructionError("every pulse-length term is degenerate")
    if used < 2 * d:
        log.info("dropped %d degenerate pulse-length terms", 2 * d - used)
    total = np.sum((d + 1 - k_min[ok_min]) / a_min[ok_min])
    total += np.sum((k_max[ok_max] - 1) / (1 - a_max[ok_max]))
    return float(tau / used * total - d * tau)


def slice_estimates(chain, Q, Tp_hat: float, d: int, tau: float, t) -> np.ndarray:
    """The d+1 coordinate slices of the quantile map, one row per slice."""
    t = np.asarray(t, dtype=float)
    rows = []
    for k in range(1, d + 2):
        alpha = (t + (d + 1 - k) * tau) / (Tp_hat + d * tau)
        rows.append(q_hat(chain, Q, alpha)[..., k - 1])
    return np.array(rows)


def reconstruct_pulse(
    chain: PolygonalChain,
    Q: QuantileEstimate,
    Tp_hat: float,
    d: int,
    tau: float,
    grid_size: int = DEFAULT_GRID_SIZE,
) -> PulseEstimate:
    """Average the coordinate slices on a uniform grid over ``[0, Tp_hat]``."""
    if not Tp_hat > 0:
        raise ReconstructionError(f"non-positive pulse length estimate {Tp_hat}")
    t = np.linspace(0.0, Tp_hat, grid_size)
    values = slice_estimates(chain, Q, Tp_hat, d, tau, t).mean(axis=0)
    values[0] = values[-1] = 0.0
    return PulseEstimate(Tp_hat, PulseSignal(t, values, Interp.LINEAR), chain.n)


def algorithm2(trains, d: int, tau: float, cfg: SamplingConfig | None = None, grid_size: int = DEFAULT_GRID_SIZE) -> PulseEstimate:
    """Estimate the pulse from unordered nonzero sample trains.

    Raises
    ------
    InsufficientData
        The trains could not be ordered; ``stage`` tells where it stopped.
    MissingCoordinateData
        Some coordinate never leaves zero.
    """
    eps = cfg.axis_epsilon if cfg is not None else 0.0
    pts = as_cloud(trains)
    if pts.shape[1] != d + 1:
        raise ValueError(f"trains have {pts.shape[1]} samples, expected d+1={d + 1}")
    ordering = orient(pts, nn_crust(pts), eps)
    ordered = pts[ordering.perm]
    chain = build_chain(ordered)
    Q = estimate_quantile(chain)
    alphas = estimate_alphas(ordered, eps)
    try:
        Tp_hat = estimate_Tp(alphas, d, tau)
    except ReconstructionError as exc:
        raise InsufficientData(str(exc), stage="estimate_Tp") from exc
    if not Tp_hat > 0:
        raise InsufficientData(f"pulse length estimate {Tp_hat} is not positive", stage="estimate_Tp")
    return reconstruct_pulse(chain, Q, Tp_hat, d, tau, grid_size)


def _support_edge(f, lo: float, hi: float, rising: bool, iters: int = 200) -> float:
    """Bisect for the switch between zero and nonzero of ``f`` on ``[lo, hi]``.

    ``rising``: f is zero at ``lo`` and nonzero at ``hi``; otherwise the reverse.
    """
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if (f(mid) != 0.0) == rising:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class OracleResult:
    estimate: PulseEstimate
    alphas: AlphaEstimates
    chain: PolygonalChain
    quantile: QuantileEstimate


def algorithm1_oracle(
    p: PulseSignal,
    d: int,
    tau: float,
    m: int = 10_000,
    grid_size: int = DEFAULT_GRID_SIZE,
    full: bool = False,
):
    """Reconstruct ``p`` from the exact distribution of its sample trains.

    The distribution of trains for uniform start times is represented by
    its quantile map ``alpha -> train at -d*tau + alpha*(Tp + d*tau)``.
    The curve is resolved by ``m`` trains at the quantile orders
    ``(j - 0.5)/m``, whose curve order is known.  The support edges of each
    coordinate are located on the quantile map by bisection, so the pulse
    length is recovered to machine precision.
    """
    cfg = SamplingConfig(d, tau)
    total = p.Tp + cfg.span

    def q_exact(alpha):
        return sample_train(p, -cfg.span + alpha * total, cfg)

    alpha_grid = (np.arange(1, m + 1) - 0.5) / m
    trains = q_exact(alpha_grid)
    if not np.any(np.all(trains[:, :-1] == 0, axis=1)):
        raise InsufficientData("resolution too coarse to reach the last axis", stage="orient")
    keep = np.any(trains != 0, axis=1)
    if not keep.all():
        # interior zeros of p break the one-to-one map onto the curve
        raise InsufficientData("exact curve passes through the origin", stage="nn_crust")

    chain = build_chain(trains)
    Q = estimate_quantile(chain)

    nonzero = trains != 0
    a_min = np.empty(d)
    a_max = np.empty(d)
    for c in range(d + 1):
        rows = np.flatnonzero(nonzero[:, c])
        if rows.size == 0:
            raise MissingCoordinateData(f"coordinate {c + 1} is zero on the whole curve")
        coord = lambda a, c=c: q_exact(a)[c]
        if c < d:
            lo = alpha_grid[rows[0] - 1] if rows[0] > 0 else 0.0
            a_min[c] = _support_edge(coord, lo, alpha_grid[rows[0]], rising=True)
        if c > 0:
            hi = alpha_grid[rows[-1] + 1] if rows[-1] + 1 < m else 1.0
            a_max[c - 1] = _support_edge(coord, alpha_grid[rows[-1]], hi, rising=False)
    alphas = AlphaEstimates(a_min, a_max)
    Tp_hat = estimate_Tp(alphas, d, tau)
    est = reconstruct_pulse(chain, Q, Tp_hat, d, tau, grid_size)
    if full:
        return OracleResult(est, alphas, chain, Q)
    return est
