"""Two-type infection labels, the separating interface, and its direction law.

Every site of the quadrant except the origin is labeled by which axis
neighbor's subtree of the geodesic tree it belongs to; the interface is the
up-right dual-lattice staircase separating the two labels.  For exponential
weights the asymptotic direction of the interface has an explicit law, which
the sampling routines here verify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import env, passage
from .errors import ParameterError, RangeError, TieError

E1, E2 = 1, 2


@dataclass(frozen=True, eq=False)
class CompetitionLabels:
    """Grid of {1, 2} subtree labels over a forward table's window.

    ``labels[iy, ix]`` labels lattice point (ix, iy) relative to the source;
    the source itself carries 0.  ``tie_mask`` marks sites whose two parents
    are exactly tied (resolved toward the e1 parent and flagged).
    """

    labels: np.ndarray
    tie_mask: np.ndarray
    table: passage.PassageTable

    @property
    def tie_count(self) -> int:
        return int(self.tie_mask.sum())


def label_grid(field: env.WeightField,
               convention: passage.Convention = passage.Convention.EXCLUDE_FIRST
               ) -> CompetitionLabels:
    """Label every site by the axis subtree that infected it.

    A site's parent is the neighbor below or to the left with the larger
    passage time; labels propagate down the resulting tree, with the axes
    forced to their own labels.
    """
    table = passage.compute_forward(field, field.origin, convention)
    G = table.G
    height, width = G.shape
    if height < 2 or width < 2:
        raise ParameterError("need at least a 2x2 window to label")
    labels = np.zeros((height, width), dtype=np.int8)
    tie_mask = np.zeros((height, width), dtype=bool)
    labels[0, 1:] = 1
    labels[1:, 0] = 2
    idx = np.arange(width)
    for y in range(1, height):
        left_g = G[y, :-1]
        below_g = G[y - 1, 1:]
        take_left = np.empty(width, dtype=bool)
        take_left[0] = False
        take_left[1:] = left_g >= below_g
        tie_mask[y, 1:] = left_g == below_g
        base = np.where(take_left, np.int8(0), labels[y - 1])
        base[0] = 2
        src = np.maximum.accumulate(np.where(take_left, -1, idx))
        labels[y] = base[src]
    labels.setflags(write=False)
    tie_mask.setflags(write=False)
    return CompetitionLabels(labels, tie_mask, table)


@dataclass(frozen=True, eq=False)
class InterfacePath:
    """Up-right staircase on the dual lattice separating the two labels.

    Stored as integer points p = phi - (1/2, 1/2); the walk starts at
    p = (0, 0), i.e. phi_0 = (1/2, 1/2).
    """

    steps: np.ndarray

    def __len__(self) -> int:
        return int(self.steps.size)

    def dual_points(self) -> np.ndarray:
        out = np.empty((self.steps.size + 1, 2), dtype=np.int64)
        out[0] = (0, 0)
        out[1:, 0] = np.cumsum(self.steps == E1)
        out[1:, 1] = np.cumsum(self.steps == E2)
        return out

    @property
    def phi_end(self) -> tuple[float, float]:
        p = self.dual_points()[-1]
        return (p[0] + 0.5, p[1] + 0.5)


def interface_path(labels: CompetitionLabels, max_len: int) -> InterfacePath:
    """Walk the separating staircase from phi_0 = (1/2, 1/2).

    Steps e2 when the site diagonally ahead belongs to subtree 1, else e1;
    stops at ``max_len`` steps or the window edge.  A tie on the frontier
    raises TieError.
    """
    grid = labels.labels
    height, width = grid.shape
    a = b = 0
    steps = []
    while len(steps) < max_len and a + 1 < width and b + 1 < height:
        if labels.tie_mask[b + 1, a + 1]:
            raise TieError((a + 1, b + 1))
        if grid[b + 1, a + 1] == 1:
            steps.append(E2)
            b += 1
        else:
            steps.append(E1)
            a += 1
    return InterfacePath(np.array(steps, dtype=np.uint8))


def separates_labels(labels: CompetitionLabels, path: InterfacePath) -> bool:
    """Exact check that subtree-1 sites sit below the staircase and subtree-2 above."""
    grid = labels.labels
    height, width = grid.shape
    steps = path.steps
    e1_pos = np.nonzero(steps == E1)[0]
    # number of e2 steps taken before each e1 step = height at which column i is crossed
    crossing_height = np.cumsum(steps == E2)[e1_pos]
    for i, b in enumerate(crossing_height, start=1):
        if i >= width:
            break
        col = grid[1:height, i]
        below = np.arange(1, height) <= b
        if not np.all(np.where(below, col == 1, col == 2)):
            return False
    return True


def direction_cdf(a) -> np.ndarray:
    """CDF of the interface direction's e1 component for exponential weights."""
    a = np.clip(np.asarray(a, dtype=np.float64), 0.0, 1.0)
    return 1.0 - np.sqrt(1.0 - a) / (np.sqrt(a) + np.sqrt(1.0 - a))


def angle_cdf(t) -> np.ndarray:
    """CDF of the interface angle against e1 for exponential weights."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, math.pi / 2.0)
    s, c = np.sqrt(np.sin(t)), np.sqrt(np.cos(t))
    return s / (s + c)


def angle_distribution(a_sample) -> np.ndarray:
    """Map direction samples a to angles atan((1-a)/a)."""
    a = np.asarray(a_sample, dtype=np.float64)
    if a.size == 0:
        raise ParameterError("empty sample")
    return np.arctan2(1.0 - a, a)


def _walk_interface_on_table(G: np.ndarray, n_steps: int) -> tuple[int, int]:
    """G-only interface walk; returns the dual endpoint after n_steps."""
    a = b = 0
    height, width = G.shape
    for _ in range(n_steps):
        if a + 1 >= width or b + 1 >= height:
            raise RangeError("interface walk left the window")
        g_left = G[b + 1, a]    # parent via e1-axis side sits above-left
        g_below = G[b, a + 1]
        if g_left == g_below:
            raise TieError((a + 1, b + 1))
        if g_below > g_left:
            b += 1              # site ahead is subtree 1; interface climbs
        else:
            a += 1
    return a, b


@dataclass(frozen=True, eq=False)
class XiStarSample:
    """Per-replica interface directions after n steps."""

    n: int
    a_hat: np.ndarray
    endpoints: np.ndarray  # (replicas, 2) dual endpoints

    def theta_hat(self) -> np.ndarray:
        phi1 = self.endpoints[:, 0] + 0.5
        phi2 = self.endpoints[:, 1] + 0.5
        return np.arctan2(phi2, phi1)

    def csv_rows(self):
        """Rows for the export, columns replica,n,phi_x1,phi_x2,a_hat,theta_hat."""
        th = self.theta_hat()
        return [(r, self.n, p[0] + 0.5, p[1] + 0.5, a, t)
                for r, (p, a, t) in enumerate(zip(self.endpoints, self.a_hat, th))]


def interface_direction_sample(spec: env.DistributionSpec, n: int, seed: int,
                               replica: int = 0) -> tuple[int, int]:
    """Dual endpoint of one replica's interface after n steps."""
    if not spec.is_continuous:
        raise ParameterError("interface direction sampling needs a continuous law")
    width = n + 2
    field = env.sample_field(spec, (0, 0), width, width, seed, replica=replica)
    table = passage.compute_forward(field, (0, 0), passage.Convention.EXCLUDE_FIRST)
    return _walk_interface_on_table(table.G, n)


def xi_star_distribution(spec: env.DistributionSpec, n: int, replicas: int,
                         seed: int) -> XiStarSample:
    """Sample the interface direction phi_n . e1 / n over replica environments."""
    ends = np.array([interface_direction_sample(spec, n, seed, replica=r)
                     for r in range(replicas)], dtype=np.int64).reshape(replicas, 2)
    a_hat = (ends[:, 0] + 0.5) / n
    return XiStarSample(n, a_hat, ends)


@dataclass(frozen=True)
class SignChangeResult:
    bracket: tuple[float, float]
    monotone_ok: bool
    interface_a: float
    gradient_gaps: np.ndarray  # B1(0) - B2(0) per grid direction


def busemann_sign_change(spec: env.DistributionSpec, n: int, xi_grid,
                         replicas: int, seed: int,
                         interface_steps: int | None = None) -> list[SignChangeResult]:
    """Locate the sign flip of B1(0) - B2(0) across an increasing direction grid.

    Per replica the gradients toward targets on the antidiagonal |z|_1 = n
    bracket the flip; the same environment's interface direction is returned
    for cross-validation.  The gap is exactly monotone when the targets share
    one antidiagonal, so a non-monotone pattern is reported, not raised.
    """
    ts = [float(t) for t in xi_grid]
    if any(not 0 < t < 1 for t in ts) or ts != sorted(ts):
        raise ParameterError("direction grid must be increasing inside (0, 1)")
    targets = []
    for t in ts:
        a = min(max(int(round(n * t)), 1), n - 1)
        targets.append((a, n - a))
    steps = n if interface_steps is None else interface_steps
    width = n + 2
    results = []
    for r in range(replicas):
        field = env.sample_field(spec, (0, 0), width, width, seed, replica=r)
        gaps = np.empty(len(targets))
        for i, z in enumerate(targets):
            table = passage.compute_reverse(field, z, passage.Convention.EXCLUDE_LAST)
            gaps[i] = table.value(0, 1) - table.value(1, 0)  # B1(0) - B2(0)
        monotone_ok = bool(np.all(np.diff(gaps) <= 0))
        below = np.nonzero(gaps < 0)[0]
        if below.size == 0:
            bracket = (ts[-1], 1.0)
        elif below[0] == 0:
            bracket = (0.0, ts[0])
        else:
            bracket = (ts[below[0] - 1], ts[below[0]])
        fwd = passage.compute_forward(field, (0, 0), passage.Convention.EXCLUDE_FIRST)
        a, _ = _walk_interface_on_table(fwd.G, steps)
        results.append(SignChangeResult(bracket, monotone_ok, (a + 0.5) / steps, gaps))
    return results
