"""Finite geodesics, the minimal-gradient walking rule, and their statistics.

Backtracking a reverse table and walking the minimal gradient of a proxy
are the same algorithm expressed through G differences; both emit the
right-most optimal path under PREFER_E1 ties and the left-most under
PREFER_E2.  Experiments measure coalescence, directedness, and tie counts
over replicated environments.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import busemann, env, passage
from .errors import ParameterError, RangeError, TieError

E1, E2 = 1, 2


class TieRule(enum.Enum):
    PREFER_E1 = "e1"     # right-most geodesic
    PREFER_E2 = "e2"     # left-most geodesic
    ASSERT_NO_TIE = "assert"

    def pick(self, site: tuple[int, int]) -> int:
        if self is TieRule.PREFER_E1:
            return E1
        if self is TieRule.PREFER_E2:
            return E2
        raise TieError(site)


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    """Monotone lattice path; steps over {E1, E2}; weight per active convention."""

    start: tuple[int, int]
    steps: np.ndarray
    weight_sum: float

    def __len__(self) -> int:
        return int(self.steps.size)

    @property
    def end(self) -> tuple[int, int]:
        return (self.start[0] + int((self.steps == E1).sum()),
                self.start[1] + int((self.steps == E2).sum()))

    def vertices(self) -> np.ndarray:
        """(len+1, 2) array of visited lattice points, start included."""
        out = np.empty((self.steps.size + 1, 2), dtype=np.int64)
        out[0] = self.start
        out[1:, 0] = self.start[0] + np.cumsum(self.steps == E1)
        out[1:, 1] = self.start[1] + np.cumsum(self.steps == E2)
        return out

    def x_coordinates(self) -> np.ndarray:
        """e1 coordinate per step index; the ordering invariant compares these."""
        return self.vertices()[:, 0]

    def csv_rows(self):
        """Rows for the path export, columns index,x1,x2."""
        return [(i, int(v[0]), int(v[1])) for i, v in enumerate(self.vertices())]


def path_weight(field: env.WeightField, path: GeodesicPath,
                convention: passage.Convention):
    """Weight of a path under the stated convention, summed independently."""
    verts = path.vertices()
    keep = verts[1:] if convention is passage.Convention.EXCLUDE_FIRST else verts[:-1]
    ix = keep[:, 0] - field.origin[0]
    iy = keep[:, 1] - field.origin[1]
    return field.values[iy, ix].sum() if keep.size else field.values.dtype.type(0)


def backtrack(reverse_table: passage.PassageTable, u: tuple[int, int],
              rule: TieRule) -> GeodesicPath:
    """Geodesic from ``u`` to the table anchor by following the larger neighbor."""
    if reverse_table.orientation is not passage.Orientation.REVERSE:
        raise ParameterError("backtracking wants a reverse table")
    G = reverse_table.G
    ox, oy = reverse_table.window_origin
    rx, ry = u[0] - ox, u[1] - oy
    ax, ay = reverse_table.width - 1, reverse_table.height - 1
    if not (0 <= rx <= ax and 0 <= ry <= ay):
        raise RangeError(f"start {u} outside table window")
    steps = np.empty((ax - rx) + (ay - ry), dtype=np.uint8)
    k = 0
    while rx < ax or ry < ay:
        if rx == ax:
            step = E2
        elif ry == ay:
            step = E1
        else:
            g1, g2 = G[ry, rx + 1], G[ry + 1, rx]
            step = E1 if g1 > g2 else E2 if g2 > g1 else rule.pick((ox + rx, oy + ry))
        steps[k] = step
        k += 1
        rx, ry = (rx + 1, ry) if step == E1 else (rx, ry + 1)
    steps.setflags(write=False)
    return GeodesicPath(tuple(u), steps, reverse_table.value(*u))


def follow_min_gradient(proxy: busemann.BusemannProxy, u: tuple[int, int],
                        rule: TieRule) -> GeodesicPath:
    """Geodesic from ``u`` to the proxy target along the minimal gradient.

    Inside the window the step matches the gradient that recovers the site
    weight; past the window edge the path marches straight to the target.
    """
    ox, oy = proxy.window_origin
    rx, ry = u[0] - ox, u[1] - oy
    tx, ty = proxy.target[0] - ox, proxy.target[1] - oy
    if not (0 <= rx < proxy.width and 0 <= ry < proxy.height):
        raise RangeError(f"start {u} outside proxy window")
    steps = np.empty((tx - rx) + (ty - ry), dtype=np.uint8)
    k = 0
    while rx < tx or ry < ty:
        if rx >= proxy.width or ry >= proxy.height:
            step = E1 if rx < tx else E2
        else:
            b1v, b2v = proxy.b1[ry, rx], proxy.b2[ry, rx]
            step = E1 if b1v < b2v else E2 if b2v < b1v else rule.pick((ox + rx, oy + ry))
        steps[k] = step
        k += 1
        rx, ry = (rx + 1, ry) if step == E1 else (rx, ry + 1)
    steps.setflags(write=False)
    return GeodesicPath(tuple(u), steps, proxy.table.value(*u))


def tie_census(proxy: busemann.BusemannProxy) -> int:
    """Number of window sites where the two gradients are exactly equal."""
    return int((proxy.b1 == proxy.b2).sum())


def meeting_point(path_a: GeodesicPath, path_b: GeodesicPath):
    """First shared vertex of two monotone paths with a common endpoint, or None."""
    va, vb = path_a.vertices(), path_b.vertices()
    la = va[:, 0] + va[:, 1]
    lb = vb[:, 0] + vb[:, 1]
    lo = max(la[0], lb[0])
    ia, ib = lo - la[0], lo - lb[0]
    length = min(la[-1], lb[-1]) - lo + 1
    if length <= 0:
        return None
    sa = va[ia:ia + length]
    sb = vb[ib:ib + length]
    hits = np.nonzero((sa[:, 0] == sb[:, 0]) & (sa[:, 1] == sb[:, 1]))[0]
    if hits.size == 0:
        return None
    return (int(sa[hits[0], 0]), int(sa[hits[0], 1]))


@dataclass(frozen=True)
class CoalescenceResult:
    n: int
    target: tuple[int, int]
    replicas: int
    coalesced_fraction: float   # met with |target - meet|_1 >= margin * n
    met_fraction: float         # met anywhere before or at the target
    mean_distance: float        # mean |target - meet|_1 over replicas that met


def coalescence_replica(spec: env.DistributionSpec, u: tuple[int, int],
                        v: tuple[int, int], target: tuple[int, int], seed: int,
                        replica: int = 0, rule: TieRule = TieRule.PREFER_E1):
    """One replica's meeting outcome: |target - meet|_1, or None if paths never meet."""
    field = env.sample_field(spec, (0, 0), target[0] + 1, target[1] + 1,
                             seed, replica=replica)
    table = passage.compute_reverse(field, target, passage.Convention.EXCLUDE_LAST)
    meet = meeting_point(backtrack(table, u, rule), backtrack(table, v, rule))
    if meet is None:
        return None
    return (target[0] - meet[0]) + (target[1] - meet[1])


def coalescence_experiment(spec: env.DistributionSpec, u: tuple[int, int],
                           v: tuple[int, int], xi, n_list, replicas: int,
                           seed: int, rule: TieRule = TieRule.PREFER_E1,
                           margin: float = 0.1) -> list[CoalescenceResult]:
    """Fraction of replica environments whose geodesics from u and v coalesce.

    Meeting within margin*n of the target does not count as coalescence:
    point-to-point paths always merge at the target itself.
    """
    s = xi[0] + xi[1]
    x1, x2 = xi[0] / s, xi[1] / s
    results = []
    for n in n_list:
        target = (math.floor(n * x1), math.floor(n * x2))
        if not (0 <= u[0] <= target[0] and 0 <= u[1] <= target[1]
                and 0 <= v[0] <= target[0] and 0 <= v[1] <= target[1]):
            raise ParameterError(f"starts {u}, {v} must lie inside [0, {target}]")
        met = 0
        coalesced = 0
        distances = []
        for r in range(replicas):
            dist = coalescence_replica(spec, u, v, target, seed, replica=r, rule=rule)
            if dist is None:
                continue
            met += 1
            distances.append(dist)
            if dist >= margin * n:
                coalesced += 1
        results.append(CoalescenceResult(
            n, target, replicas, coalesced / replicas, met / replicas,
            float(np.mean(distances)) if distances else math.nan))
    return results


@dataclass(frozen=True)
class DirectionStats:
    n: int
    target: tuple[int, int]
    deviations: np.ndarray   # midpoint e1 deviation per replica
    mean: float
    spread: float


def direction_replica(spec: env.DistributionSpec, target: tuple[int, int],
                      seed: int, replica: int = 0,
                      rule: TieRule = TieRule.PREFER_E1) -> float:
    """Midpoint e1 deviation of one replica's geodesic from 0 to ``target``."""
    field = env.sample_field(spec, (0, 0), target[0] + 1, target[1] + 1,
                             seed, replica=replica)
    table = passage.compute_reverse(field, target, passage.Convention.EXCLUDE_LAST)
    path = backtrack(table, (0, 0), rule)
    length = len(path)
    mid = path.vertices()[length // 2]
    return (2.0 * mid[0] - target[0]) / length


def direction_stats(spec: env.DistributionSpec, xi, n: int, replicas: int,
                    seed: int, rule: TieRule = TieRule.PREFER_E1) -> DirectionStats:
    """Normalized midpoint displacement of geodesics toward floor(n*xi).

    Per replica records 2*mid.e1/L - target.e1/L for the path midpoint; the
    mean vanishes by symmetry and the spread shrinks with n.
    """
    s = xi[0] + xi[1]
    target = (math.floor(n * xi[0] / s), math.floor(n * xi[1] / s))
    devs = np.array([direction_replica(spec, target, seed, replica=r, rule=rule)
                     for r in range(replicas)])
    return DirectionStats(n, target, devs, float(devs.mean()),
                          float(devs.std(ddof=1)) if replicas > 1 else 0.0)
