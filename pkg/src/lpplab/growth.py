"""Corner-growth, tandem-queue, and exclusion-process views of one passage table.

All three read the same forward table (source at the origin, first vertex
excluded) rather than running clock dynamics: on a fixed environment the
infection time of a site, the departure time of the matching customer, and
the swap time of the matching particle are the same number, so equivalence
is checked pathwise and exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import env, passage
from .errors import CapacityError, ParameterError, RangeError

STEP_RIGHT = 1  # +e1
STEP_DOWN = 2   # -e2


@dataclass(frozen=True, eq=False)
class GrowthState:
    """A forward passage table read as a growing infected cluster."""

    table: passage.PassageTable

    @classmethod
    def from_field(cls, field: env.WeightField) -> "GrowthState":
        if field.origin != (0, 0):
            raise ParameterError("growth state expects a field anchored at the origin")
        table = passage.compute_forward(field, (0, 0), passage.Convention.EXCLUDE_FIRST)
        return cls(table)

    def infected(self, x: tuple[int, int], t: float) -> bool:
        return bool(self.table.value(*x) <= t)


def infection_time(state: GrowthState, x: tuple[int, int]) -> float:
    """Time at which site ``x`` joins the cluster."""
    return state.table.value(*x)


@dataclass(frozen=True, eq=False)
class HeightFunction:
    """Down-right staircase bounding the fattened healthy region.

    ``anchor`` is the top-left endpoint; ``steps`` walk toward the bottom-right
    over {STEP_RIGHT (+e1), STEP_DOWN (-e2)}.
    """

    anchor: tuple[float, float]
    steps: np.ndarray

    def vertices(self) -> np.ndarray:
        moves = np.where(self.steps[:, None] == STEP_RIGHT,
                         np.array([1.0, 0.0]), np.array([0.0, -1.0]))
        return np.vstack([np.zeros((1, 2)), np.cumsum(moves, axis=0)]) + self.anchor


def single_corner_flip(before: HeightFunction, after: HeightFunction):
    """Position of the one south-west corner flipped between two boundaries.

    Returns the step index where a (DOWN, RIGHT) pair became (RIGHT, DOWN),
    or None if the boundaries do not differ by exactly one flip.
    """
    a, b = before.steps, after.steps
    if a.shape != b.shape or before.anchor != after.anchor:
        return None
    diff = np.nonzero(a != b)[0]
    if diff.size != 2 or diff[1] != diff[0] + 1:
        return None
    i = int(diff[0])
    if (a[i], a[i + 1]) == (STEP_DOWN, STEP_RIGHT) and (b[i], b[i + 1]) == (STEP_RIGHT, STEP_DOWN):
        return i
    return None


def boundary_at(state: GrowthState, t: float) -> HeightFunction:
    """Boundary staircase of the healthy region at time ``t``, clipped to the window."""
    G = state.table.G
    height, width = G.shape
    infected = G <= t
    if t >= 0 and (infected[-1, :].any() or infected[:, -1].any()):
        raise CapacityError("infected set reaches the window edge; enlarge the window")
    counts = infected.sum(axis=0)  # infected cells per column; a staircase profile
    steps = np.empty(width + height, dtype=np.uint8)
    pos = 0
    level = height
    for x in range(width):
        drop = level - int(counts[x])
        steps[pos:pos + drop] = STEP_DOWN
        pos += drop
        steps[pos] = STEP_RIGHT
        pos += 1
        level = int(counts[x])
    steps[pos:] = STEP_DOWN
    steps.setflags(write=False)
    return HeightFunction((-0.5, height - 0.5), steps)


@dataclass(frozen=True, eq=False)
class EventLog:
    """Time-sorted particle/hole swap events; site (k, l) swaps particle k with hole l."""

    times: np.ndarray
    ks: np.ndarray
    ls: np.ndarray
    tie_warning: bool

    def __len__(self) -> int:
        return self.times.size

    def rows(self):
        return zip(self.times.tolist(), self.ks.tolist(), self.ls.tolist())


def tasep_events(state: GrowthState, horizon: tuple[int, int]) -> EventLog:
    """Every swap event over the first ``horizon = (K, L)`` particles and holes."""
    K, L = int(horizon[0]), int(horizon[1])
    G = state.table.G
    if K < 1 or L < 1 or K > G.shape[1] or L > G.shape[0]:
        raise RangeError(f"horizon {horizon} outside table window")
    block = G[:L, :K]
    ls, ks = np.divmod(np.arange(block.size), K)
    times = block.ravel()

    strict = state.table.field.spec.is_continuous
    interior_k = block[:, 1:] > block[:, :-1] if strict else block[:, 1:] >= block[:, :-1]
    interior_l = block[1:, :] > block[:-1, :] if strict else block[1:, :] >= block[:-1, :]
    if not (interior_k.all() and interior_l.all()):
        raise ParameterError("event precedence violated; table is not a growth table")

    order = np.lexsort((ls, ks, times))
    times, ks, ls = times[order], ks[order], ls[order]
    tie_warning = bool((np.diff(times) == 0).any())
    if tie_warning and strict:
        raise ParameterError("tied event times under a continuous weight law")
    return EventLog(times, ks.astype(np.int64), ls.astype(np.int64), tie_warning)


def queue_departures_direct(field: env.WeightField, K: int, L: int) -> np.ndarray:
    """Departure times of customers 0..K-1 from stations 0..L-1, by the queue story.

    Plain recursion, independent of the table kernel: a customer departs a
    station one service time after both the previous customer has departed it
    and the customer itself has cleared the previous station.
    """
    if K < 1 or L < 1 or K > field.width or L > field.height:
        raise RangeError("queue window outside field")
    w = field.values
    dep = np.zeros((L, K), dtype=w.dtype)
    for k in range(1, K):
        dep[0, k] = dep[0, k - 1] + w[0, k]
    for ell in range(1, L):
        dep[ell, 0] = dep[ell - 1, 0] + w[ell, 0]
        for k in range(1, K):
            dep[ell, k] = w[ell, k] + max(dep[ell, k - 1], dep[ell - 1, k])
    return dep


def event_log_csv_rows(log: EventLog):
    """Rows for the event export, columns time,k,l."""
    return [(t, k, l) for t, k, l in log.rows()]


def scaled_boundary_distance(state: GrowthState, t: float) -> float:
    """Hausdorff distance between the t-scaled boundary and the limit curve.

    Diagnostic only: compares boundary vertices of the infected set at time t,
    scaled by 1/t, against {(x, y) : sqrt(x) + sqrt(y) = 1}.
    """
    boundary = boundary_at(state, t)
    pts = boundary.vertices() / t
    pts = pts[(pts[:, 0] >= -0.5 / t) & (pts[:, 1] >= -0.5 / t)]
    s = np.linspace(0.0, 1.0, 2001)
    curve = np.column_stack([s**2, (1.0 - s) ** 2])
    d2 = ((pts[:, None, :] - curve[None, :, :]) ** 2).sum(axis=2)
    forward = np.sqrt(d2.min(axis=1)).max()
    backward = np.sqrt(d2.min(axis=0)).max()
    return float(max(forward, backward))
