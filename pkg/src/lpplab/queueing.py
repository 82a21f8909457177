"""Tandem-queue recursions, the queueing operator, and its fixed points.

A station maps an inter-arrival row A and a service row S to waiting times
W and the next station's inter-arrival row:

    W[n]   = (sup over recent j of sum_{i=j}^{n-1} (S[i] - A[i]))^+
    A'[n]  = (W[n] + S[n] - A[n])^- + S[n+1]

The sup over the infinite past is truncated to a sliding window of H
indices; stable queues forget the past geometrically, and the window makes
the truncation bias explicit instead of hiding it in a warm-up convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import env
from .errors import ParameterError, StabilityError


def default_horizon(n: int) -> int:
    return max(1, int(10 * math.sqrt(n)))


def trailing_minimum(values, window: int) -> np.ndarray:
    """out[i] = min(values[max(0, i-window+1) .. i]), in O(n) by block prefix/suffix mins."""
    v = np.asarray(values, dtype=np.float64)
    if window < 1:
        raise ParameterError("window must be >= 1")
    if window == 1 or v.size == 0:
        return v.copy()
    n = v.size
    nblocks = -(-n // window)
    padded = np.concatenate([v, np.full(nblocks * window - n, np.inf)])
    blocks = padded.reshape(nblocks, window)
    left = np.minimum.accumulate(blocks, axis=1).ravel()[:n]
    right = np.minimum.accumulate(blocks[:, ::-1], axis=1)[:, ::-1].ravel()
    out = left.copy()
    idx = np.arange(window - 1, n)
    out[idx] = np.minimum(right[idx - window + 1], left[idx])
    return out


def waiting_from_history(A_row, S_row, horizon: int) -> np.ndarray:
    """Waiting times at one station from matched arrival/service rows.

    W[n] looks back at most ``horizon`` indices; W[0] = 0.  With
    horizon >= len(A_row) this is the exact Lindley evolution from an empty
    station and satisfies W[n+1] = (W[n] + S[n] - A[n])^+ identically.
    """
    A = np.asarray(A_row, dtype=np.float64)
    S = np.asarray(S_row, dtype=np.float64)
    if A.shape != S.shape or A.ndim != 1:
        raise ParameterError("arrival and service rows must be 1-D and matched")
    if not 1 <= horizon:
        raise ParameterError("horizon must be >= 1")
    if horizon > A.size:
        raise ParameterError("horizon exceeds available history")
    # prefix sums of load increments; W[n] = (P[n] - min over recent j of P[j])^+
    P = np.concatenate([[0.0], np.cumsum(S - A)])
    recent_min = trailing_minimum(P[:-1], horizon)
    W = np.maximum(P[1:] - recent_min, 0.0)
    return np.concatenate([[0.0], W[:-1]])


def lindley_evolve(w0: float, A_row, S_row) -> np.ndarray:
    """Plain Lindley recursion W[n+1] = (W[n] + S[n] - A[n])^+ from W[0] = w0."""
    A = np.asarray(A_row, dtype=np.float64)
    S = np.asarray(S_row, dtype=np.float64)
    W = np.empty(A.size, dtype=np.float64)
    W[0] = w0
    for n in range(A.size - 1):
        W[n + 1] = max(W[n] + S[n] - A[n], 0.0)
    return W


def departures(A_row, S_row, W_row) -> np.ndarray:
    """Next station's inter-arrival row: A'[n] = (W+S-A)[n]^- + S[n+1]."""
    d = W_row + S_row - A_row
    return np.maximum(-d[:-1], 0.0) + S_row[1:]


def apply_phi(A_row, S_row, horizon: int, burn_in: int | None = None) -> np.ndarray:
    """One pass of the queueing operator; drops a transient prefix.

    Output length is len(A_row) - burn_in; burn_in defaults to the horizon,
    inside which the waiting-time window is still filling.
    """
    A = np.asarray(A_row, dtype=np.float64)
    S = np.asarray(S_row, dtype=np.float64)
    W = waiting_from_history(A, S, horizon)
    out = departures(A, S, W)
    burn = horizon if burn_in is None else burn_in
    if not 1 <= burn <= out.size:
        raise ParameterError("burn-in outside usable range")
    return out[burn - 1:]


@dataclass(frozen=True, eq=False)
class FixedPointEstimate:
    """Cesaro-pooled empirical fixed point of the queueing operator."""

    alpha: float
    sample: np.ndarray          # pooled inter-arrival values
    f_hat: float                # stationary mean-workload estimate
    iterations: int
    window: int
    w_sample: np.ndarray        # pooled waiting times behind f_hat
    sample_iterates: np.ndarray
    sample_indices: np.ndarray

    def sample_csv_rows(self):
        """Rows for the sample export, columns iterate,index,value."""
        return list(zip(self.sample_iterates.tolist(),
                        self.sample_indices.tolist(), self.sample.tolist()))


# Cesaro pooling keeps at most this many values; longer runs thin the iterates.
MAX_POOLED_VALUES = 4_000_000


def iterate_fixed_point(alpha: float, spec: env.DistributionSpec, n: int,
                        k_iterations: int, horizon: int | None = None,
                        seed: int = 0, pool_all: bool = False) -> FixedPointEstimate:
    """Iterate the queueing operator from constant arrivals at mean ``alpha``.

    Fresh independent service rows come from disjoint RNG sub-streams per
    application.  Iterates ceil(k/2)..k (all of them with ``pool_all``) are
    pooled into the Cesaro sample, thinned evenly when the pool would exceed
    MAX_POOLED_VALUES; the workload estimate is f_hat = mean(pooled W) + m0.
    """
    m0, _ = env.moments(spec)
    if not alpha > m0:
        raise StabilityError(
            f"mean inter-arrival {alpha} must exceed mean service {m0}")
    if k_iterations < 1:
        raise ParameterError("need at least one iteration")
    H = default_horizon(n) if horizon is None else int(horizon)
    stream = env.RngStream(seed).child(0x5E)
    A = np.full(n, float(alpha))
    first_kept = 1 if pool_all else (k_iterations + 1) // 2
    kept = k_iterations - first_kept + 1
    stride = max(1, -(-kept * n // MAX_POOLED_VALUES))
    pooled_A, pooled_W, iter_tags, idx_tags = [], [], [], []
    for j in range(1, k_iterations + 1):
        if A.size <= H + 1:
            raise ParameterError("window exhausted; increase n or reduce iterations")
        S = env.sample_iid(spec, A.size, stream.child(j))
        W = waiting_from_history(A, S, H)
        A = departures(A, S, W)[H - 1:]
        if j >= first_kept and (j - first_kept) % stride == 0:
            pooled_A.append(A)
            pooled_W.append(W[H:])
            iter_tags.append(np.full(A.size, j))
            idx_tags.append(np.arange(A.size))
    sample = np.concatenate(pooled_A)
    w_pool = np.concatenate(pooled_W)
    return FixedPointEstimate(float(alpha), sample, float(w_pool.mean() + m0),
                              k_iterations, n, w_pool,
                              np.concatenate(iter_tags), np.concatenate(idx_tags))


def exponential_workload_mean(alpha: float, m0: float) -> float:
    """Stationary workload mean m0*alpha/(alpha - m0) for exponential services."""
    return m0 * alpha / (alpha - m0)


def f_involution_check(alpha: float, spec: env.DistributionSpec, n: int,
                       k_iterations: int, horizon: int | None = None,
                       seed: int = 0) -> tuple[float, float]:
    """Estimate f at ``alpha``, then f at that estimate; the pair should invert."""
    first = iterate_fixed_point(alpha, spec, n, k_iterations, horizon, seed)
    second = iterate_fixed_point(first.f_hat, spec, n, k_iterations, horizon, seed + 1)
    return first.f_hat, second.f_hat


@dataclass(frozen=True, eq=False)
class QueueSystem:
    """Matrices of a finite tandem system: A is N x (K+1), W and S are N x K."""

    A: np.ndarray
    W: np.ndarray
    S: np.ndarray

    @property
    def customers(self) -> int:
        return self.S.shape[0]

    @property
    def stations(self) -> int:
        return self.S.shape[1]


def build_system(A0_row, S_matrix) -> QueueSystem:
    """Propagate one arrival row through every service column.

    Stations start empty (W[0, k] = 0).  Columns shorten by one customer per
    station, so the result is trimmed to the rectangle on which every
    identity can be checked.
    """
    A0 = np.asarray(A0_row, dtype=np.float64)
    S = np.asarray(S_matrix, dtype=np.float64)
    n0, k_stations = S.shape
    if A0.size != n0:
        raise ParameterError("arrival row and service matrix disagree on customers")
    if n0 <= k_stations:
        raise ParameterError("need more customers than stations")
    n_out = n0 - k_stations
    A_cols, W_cols = [A0], []
    a = A0
    for k in range(k_stations):
        s = S[:a.size, k]
        w = lindley_evolve(0.0, a, s)
        a = departures(a, s, w)
        W_cols.append(w)
        A_cols.append(a)
    A = np.column_stack([col[:n_out] for col in A_cols])
    W = np.column_stack([col[:n_out] for col in W_cols])
    return QueueSystem(A, W, S[:n_out].copy())


def verify_system(sys: QueueSystem) -> dict:
    """Exact residuals of the tandem identities; values are max |residual|."""
    A, W, S = sys.A, sys.W, sys.S
    K = sys.stations
    d = W[:-1, :] + S[:-1, :] - A[:-1, :K]
    lindley = np.abs(W[1:, :] - np.maximum(d, 0.0)).max() if d.size else 0.0
    dep = np.abs(A[:-1, 1:] - (np.maximum(-d, 0.0) + S[1:, :])).max() if d.size else 0.0
    cons = np.abs((W[1:, :] + S[1:, :] + A[:-1, :K])
                  - (W[:-1, :] + S[:-1, :] + A[:-1, 1:])).max() if d.size else 0.0
    rec = np.abs(S[1:, :] - np.minimum(W[1:, :] + S[1:, :], A[:-1, 1:])).max() if d.size else 0.0
    w_neg = float(max(0.0, -W.min())) if W.size else 0.0
    report = {
        "w_negative": w_neg,
        "lindley": float(lindley),
        "departures": float(dep),
        "conservation": float(cons),
        "recovery": float(rec),
    }
    report["max_residual"] = max(report.values())
    return report


def tail_waiting_ratio(W_row, start: int = 1000) -> float:
    """Diagnostic max_{n >= start} W[n] / n; tends to zero for stable queues."""
    W = np.asarray(W_row, dtype=np.float64)
    if W.size <= start:
        raise ParameterError("row too short for the tail diagnostic")
    n = np.arange(start, W.size)
    return float((W[start:] / n).max())


def horizon_sweep(alpha: float, spec: env.DistributionSpec, n: int,
                  horizons, seed: int = 0) -> list[tuple[int, float]]:
    """Mean waiting time per lookback window on one fixed arrival/service draw.

    Convergence utility for choosing H: the means plateau once the window
    covers the queue's memory, making the truncation bias visible.
    """
    stream = env.RngStream(seed).child(0x4A)
    A = env.sample_iid(env.DistributionSpec.exponential(1.0 / alpha), n, stream.child(0))
    S = env.sample_iid(spec, n, stream.child(1))
    out = []
    for h in horizons:
        W = waiting_from_history(A, S, int(h))
        out.append((int(h), float(W[int(h):].mean())))
    return out


def block_mixing_diagnostic(sample, blocks: int = 50) -> float:
    """Ratio of block-mean variance to the i.i.d. prediction; near 1 when mixing.

    Ergodicity of the fixed point is only conjectured in general, so this is
    reported as a diagnostic, never asserted.
    """
    v = np.asarray(sample, dtype=np.float64)
    if blocks < 2 or v.size < 2 * blocks:
        raise ParameterError("need at least two values per block")
    size = v.size // blocks
    means = v[:blocks * size].reshape(blocks, size).mean(axis=1)
    expected = v.var(ddof=1) / size
    return float(means.var(ddof=1) / expected) if expected > 0 else 0.0
