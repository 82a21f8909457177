"""Last-passage tables by dynamic programming, plus an enumeration oracle.

Two vertex-exclusion conventions are first-class: a path's weight either
skips its first vertex (the classic growth/queue convention) or its last
(the convention under which reverse tables feed gradient fields).  The two
are linked cell-by-cell by  G_first(x,y) = G_last(x,y) - w(x) + w(y).
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import env
from .errors import CapacityError, ParameterError, RangeError

# Full tables are refused above this size; estimators stream rows instead.
MAX_TABLE_CELLS = 64_000_000

# Cap on |y - x|_1 for exhaustive path enumeration.
MAX_ENUM_SPAN = 22


class Convention(enum.Enum):
    EXCLUDE_FIRST = "exclude_first"
    EXCLUDE_LAST = "exclude_last"


class Orientation(enum.Enum):
    FORWARD = "forward"
    REVERSE = "reverse"


@dataclass(frozen=True, eq=False)
class PassageTable:
    """Grid of last-passage times anchored at one corner.

    FORWARD tables hold G(anchor -> x) for x >= anchor; REVERSE tables hold
    G(x -> anchor) for x <= anchor.  ``G[iy, ix]`` corresponds to lattice
    point ``(window_origin[0] + ix, window_origin[1] + iy)``.
    """

    field: env.WeightField
    anchor: tuple[int, int]
    orientation: Orientation
    convention: Convention
    window_origin: tuple[int, int]
    G: np.ndarray

    @property
    def width(self) -> int:
        return self.G.shape[1]

    @property
    def height(self) -> int:
        return self.G.shape[0]

    def value(self, x: int, y: int):
        ix, iy = x - self.window_origin[0], y - self.window_origin[1]
        if not (0 <= ix < self.width and 0 <= iy < self.height):
            raise RangeError(f"point ({x},{y}) outside table window")
        return self.G[iy, ix]


def _check_capacity(width: int, height: int) -> None:
    if width * height > MAX_TABLE_CELLS:
        raise CapacityError(
            f"table of {width}x{height} cells exceeds cap of {MAX_TABLE_CELLS}")


def _forward_exclude_first(w: np.ndarray) -> np.ndarray:
    """G[j,i] = w[j,i] + max(G[j-1,i], G[j,i-1]) with G[0,0] = 0.

    Row j is evaluated as a prefix sum plus a running maximum; with integer
    or dyadic weights this equals the plain recursion value for value.
    """
    height, width = w.shape
    G = np.empty_like(w)
    G[0] = np.cumsum(w[0]) - w[0, 0]
    for j in range(1, height):
        P = np.cumsum(w[j])
        base = G[j - 1] - P + w[j]  # G[j-1,k] - P[k-1]
        np.maximum.accumulate(base, out=base)
        G[j] = P + base
    return G


def compute_forward(field: env.WeightField, source: tuple[int, int],
                    convention: Convention) -> PassageTable:
    """Table of passage times from ``source`` to every x >= source in the window."""
    sx, sy = source[0] - field.origin[0], source[1] - field.origin[1]
    if not (0 <= sx < field.width and 0 <= sy < field.height):
        raise RangeError(f"source {source} outside field window")
    sub = field.values[sy:, sx:]
    _check_capacity(sub.shape[1], sub.shape[0])
    G = _forward_exclude_first(sub)
    if convention is Convention.EXCLUDE_LAST:
        G = G - sub + sub[0, 0]
    G.setflags(write=False)
    return PassageTable(field, tuple(source), Orientation.FORWARD, convention,
                        tuple(source), G)


def compute_reverse(field: env.WeightField, target: tuple[int, int],
                    convention: Convention) -> PassageTable:
    """Table of passage times from every x <= target in the window to ``target``."""
    tx, ty = target[0] - field.origin[0], target[1] - field.origin[1]
    if not (0 <= tx < field.width and 0 <= ty < field.height):
        raise RangeError(f"target {target} outside field window")
    sub = field.values[:ty + 1, :tx + 1]
    _check_capacity(sub.shape[1], sub.shape[0])
    # exclude-last to the target equals exclude-first on the point reflection
    G = _forward_exclude_first(sub[::-1, ::-1])[::-1, ::-1]
    if convention is Convention.EXCLUDE_FIRST:
        G = G - sub + sub[ty, tx]
    G = np.ascontiguousarray(G)
    G.setflags(write=False)
    return PassageTable(field, tuple(target), Orientation.REVERSE, convention,
                        tuple(field.origin), G)


def _path_step_matrix(dx: int, dy: int) -> np.ndarray:
    """All monotone step sequences as a boolean matrix (True = e1 step)."""
    span = dx + dy
    combos = list(itertools.combinations(range(span), dx))
    steps = np.zeros((max(len(combos), 1), span), dtype=bool)
    for r, pos in enumerate(combos):
        steps[r, list(pos)] = True
    return steps


def brute_force_passage(field: env.WeightField, x: tuple[int, int],
                        y: tuple[int, int], convention: Convention):
    """Exhaustive-enumeration oracle: (optimal value, every optimal path).

    Independent of the DP: every monotone path from x to y is generated and
    summed.  Limited to spans |y - x|_1 <= 22.
    """
    from .geodesics import GeodesicPath

    dx, dy = y[0] - x[0], y[1] - x[1]
    if dx < 0 or dy < 0:
        raise ParameterError(f"target {y} not >= source {x}")
    span = dx + dy
    if span > MAX_ENUM_SPAN:
        raise CapacityError(f"span {span} exceeds enumeration cap {MAX_ENUM_SPAN}")
    if span == 0:
        return field.values.dtype.type(0), [GeodesicPath(tuple(x), np.zeros(0, np.uint8), 0)]

    steps = _path_step_matrix(dx, dy)
    xs = np.cumsum(steps, axis=1) + (x[0] - field.origin[0])
    ys = np.cumsum(~steps, axis=1) + (x[1] - field.origin[1])
    if convention is Convention.EXCLUDE_FIRST:
        flat = ys * field.width + xs  # vertices v_1 .. v_span
        sums = np.cumsum(field.values.ravel()[flat], axis=1)[:, -1]
    else:
        flat = ys[:, :-1] * field.width + xs[:, :-1]  # v_1 .. v_{span-1}
        start = field.value_at(*x)
        if span == 1:
            sums = np.full(steps.shape[0], start)
        else:
            sums = start + np.cumsum(field.values.ravel()[flat], axis=1)[:, -1]
    value = sums.max()
    paths = []
    for r in np.nonzero(sums == value)[0]:
        arr = np.where(steps[r], 1, 2).astype(np.uint8)
        paths.append(GeodesicPath(tuple(x), arr, value))
    return value, paths


def shape_value(spec: env.DistributionSpec, xi, n: int, seed: int,
                replica: int = 0) -> float:
    """One replica of G(0 -> floor(n*xi)) / n, streamed two rows at a time.

    Memory stays O(row width); weight rows are regenerated on demand from
    the counter-based RNG.
    """
    x1, x2 = float(xi[0]), float(xi[1])
    if n < 1:
        raise ParameterError("n must be >= 1")
    if x1 < 0 or x2 < 0 or (x1 == 0 and x2 == 0):
        raise ParameterError("direction must be nonnegative and nonzero")
    tx, ty = math.floor(n * x1), math.floor(n * x2)
    width = tx + 1
    row = env.sample_window_row(spec, (0, 0), width, 0, seed, replica=replica)
    G = np.cumsum(row) - row[0]
    for j in range(1, ty + 1):
        row = env.sample_window_row(spec, (0, 0), width, j, seed, replica=replica)
        P = np.cumsum(row)
        base = G - P + row
        np.maximum.accumulate(base, out=base)
        G = P + base
    return float(G[tx]) / n


def shape_estimate(spec: env.DistributionSpec, xi, n: int, replicas: int,
                   seed: int) -> tuple[float, float]:
    """Monte Carlo estimate of G(0 -> floor(n*xi)) / n with its standard error."""
    if replicas < 1:
        raise ParameterError("replicas must be >= 1")
    values = np.array([shape_value(spec, xi, n, seed, replica=r)
                       for r in range(replicas)])
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
    return mean, stderr


def rost_shape(xi, m0: float, sigma0: float) -> float:
    """Closed-form shape value m0*|xi|_1 + 2*sigma0*sqrt(xi1*xi2)."""
    return m0 * (xi[0] + xi[1]) + 2.0 * sigma0 * math.sqrt(xi[0] * xi[1])
