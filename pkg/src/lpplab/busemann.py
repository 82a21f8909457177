"""Finite-horizon gradient fields toward a far target, and their stationary twins.

A proxy holds both forward gradients of one reverse passage table,

    B1(x) = G(x -> z) - G(x+e1 -> z),   B2(x) = G(x -> z) - G(x+e2 -> z),

on the window x + e1 + e2 <= z.  Two identities are structural and are
checked exactly: recovery  w(x) = min(B1(x), B2(x))  and plaquette closure
B1(x) + B2(x+e1) = B2(x) + B1(x+e2).  The stationary counterpart maps a
tandem-queue fixed point onto the same grid layout, where the queueing
conservation and recovery laws become the two identities above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import env, passage, queueing
from .errors import ParameterError, RangeError

DEFAULT_STATIONARY_BURN = 200


def antidiagonal_target(n: int, xi) -> tuple[int, int]:
    """Lattice target nearest n*xi on the antidiagonal |target|_1 = n."""
    x1 = xi[0] / (xi[0] + xi[1])
    t1 = min(max(int(round(n * x1)), 1), n - 1)
    return (t1, n - t1)


@dataclass(frozen=True, eq=False)
class BusemannProxy:
    """Both gradient grids of one reverse table toward ``target``.

    ``b1[iy, ix]`` and ``b2[iy, ix]`` are the e1/e2 gradients at lattice point
    ``(window_origin[0] + ix, window_origin[1] + iy)``.
    """

    target: tuple[int, int]
    convention: passage.Convention
    window_origin: tuple[int, int]
    b1: np.ndarray
    b2: np.ndarray
    table: passage.PassageTable

    @property
    def width(self) -> int:
        return self.b1.shape[1]

    @property
    def height(self) -> int:
        return self.b1.shape[0]


def build_proxy(field: env.WeightField, target: tuple[int, int]) -> BusemannProxy:
    """Gradient grids from one reverse (exclude-last) table toward ``target``."""
    zx, zy = target[0] - field.origin[0], target[1] - field.origin[1]
    if zx < 1 or zy < 1:
        raise RangeError(f"target {target} leaves no window below it")
    table = passage.compute_reverse(field, target, passage.Convention.EXCLUDE_LAST)
    G = table.G
    b1 = G[:-1, :-1] - G[:-1, 1:]
    b2 = G[:-1, :-1] - G[1:, :-1]
    b1.setflags(write=False)
    b2.setflags(write=False)
    return BusemannProxy(tuple(target), passage.Convention.EXCLUDE_LAST,
                         tuple(field.origin), b1, b2, table)


def identity_residuals(b1: np.ndarray, b2: np.ndarray, omega: np.ndarray) -> tuple[float, float]:
    """(max recovery residual, max plaquette-closure residual) of gradient grids."""
    recovery = np.abs(omega - np.minimum(b1, b2)).max()
    closure = np.abs((b1[:-1, :-1] + b2[:-1, 1:])
                     - (b2[:-1, :-1] + b1[1:, :-1])).max()
    return float(recovery), float(closure)


def proxy_residuals(field: env.WeightField, proxy: BusemannProxy) -> tuple[float, float]:
    h, w = proxy.b1.shape
    ox = proxy.window_origin[0] - field.origin[0]
    oy = proxy.window_origin[1] - field.origin[1]
    omega = field.values[oy:oy + h, ox:ox + w]
    return identity_residuals(proxy.b1, proxy.b2, omega)


@dataclass(frozen=True)
class ExactExponentialModel:
    """Closed forms for exponential weights with rate ``theta``.

    Gradient marginals toward direction xi are exponential with rates
    rate1/rate2 below, their means tie back to the shape function through
    mean1*xi1 + mean2*xi2 = g(xi).
    """

    theta: float

    @property
    def m0(self) -> float:
        return 1.0 / self.theta

    @property
    def sigma0(self) -> float:
        return 1.0 / self.theta

    def shape(self, xi) -> float:
        return passage.rost_shape(xi, self.m0, self.sigma0)

    def mean1(self, xi) -> float:
        return self.m0 + self.sigma0 * math.sqrt(xi[1] / xi[0])

    def mean2(self, xi) -> float:
        return self.m0 + self.sigma0 * math.sqrt(xi[0] / xi[1])

    def rate1(self, xi) -> float:
        r = math.sqrt(xi[0])
        return self.theta * r / (r + math.sqrt(xi[1]))

    def rate2(self, xi) -> float:
        r = math.sqrt(xi[1])
        return self.theta * r / (math.sqrt(xi[0]) + r)

    def euler_gap(self, xi) -> float:
        """|mean1*xi1 + mean2*xi2 - g(xi)|; zero up to rounding."""
        return abs(self.mean1(xi) * xi[0] + self.mean2(xi) * xi[1] - self.shape(xi))


def crossing_inequalities(field: env.WeightField, x: tuple[int, int],
                          y: tuple[int, int], z: tuple[int, int]) -> tuple[bool, bool]:
    """Gradient comparison between two targets on one antidiagonal.

    Requires x + e1 + e2 <= y, z, |y|_1 = |z|_1 and y.e1 < z.e1; returns
    whether the e1 gradient toward y dominates the one toward z, and the
    e2 counterpart with the inequality reversed.
    """
    if (y[0] - x[0] < 1 or y[1] - x[1] < 1 or z[0] - x[0] < 1 or z[1] - x[1] < 1):
        raise ParameterError("targets must dominate x + e1 + e2")
    if y[0] + y[1] != z[0] + z[1]:
        raise ParameterError("targets must sit on one antidiagonal")
    if tuple(y) == tuple(z):
        return True, True
    if not y[0] < z[0]:
        raise ParameterError("need y.e1 < z.e1")
    conv = passage.Convention.EXCLUDE_LAST
    ty = passage.compute_reverse(field, y, conv)
    tz = passage.compute_reverse(field, z, conv)
    gy, gz = ty.value(*x), tz.value(*x)
    e1_ok = bool(gy - ty.value(x[0] + 1, x[1]) >= gz - tz.value(x[0] + 1, x[1]))
    e2_ok = bool(gy - ty.value(x[0], x[1] + 1) <= gz - tz.value(x[0], x[1] + 1))
    return e1_ok, e2_ok


def crossing_census(field: env.WeightField, level: int, triples: int,
                    seed: int) -> tuple[int, int]:
    """Sample (x, y, z) crossing checks in bulk; returns (checked, violations).

    Targets are pooled on the antidiagonal |target|_1 = level (relative to
    the field origin) so reverse tables are reused across triples.
    """
    rng = np.random.default_rng(seed)
    ox, oy = field.origin
    amin, amax = 1, level - 1
    if amax <= amin:
        raise ParameterError("level too small")
    pool_a = np.unique(rng.integers(amin, amax + 1, size=min(24, amax - amin + 1)))
    conv = passage.Convention.EXCLUDE_LAST
    tables = {int(a): passage.compute_reverse(field, (ox + int(a), oy + level - int(a)), conv)
              for a in pool_a}
    checked = violations = 0
    for _ in range(triples):
        a, b = sorted(rng.choice(pool_a, size=2, replace=False).tolist())
        ya, za = tables[int(a)], tables[int(b)]
        # x must satisfy x + (1,1) <= both targets
        xmax = min(a - 1, b - 1)
        ymax = min(level - a - 1, level - b - 1)
        if xmax < 0 or ymax < 0:
            continue
        px = ox + int(rng.integers(0, xmax + 1))
        py = oy + int(rng.integers(0, ymax + 1))
        g_y, g_z = ya.value(px, py), za.value(px, py)
        e1_ok = g_y - ya.value(px + 1, py) >= g_z - za.value(px + 1, py)
        e2_ok = g_y - ya.value(px, py + 1) <= g_z - za.value(px, py + 1)
        checked += 1
        violations += int(not (e1_ok and e2_ok))
    return checked, violations


@dataclass(frozen=True, eq=False)
class MarginalSample:
    """Pooled gradient samples at probe sites near the origin."""

    xi: tuple[float, float]
    n: int
    target: tuple[int, int]
    probe_sites: np.ndarray  # (sites, 2) lattice points
    b1: np.ndarray           # (replicas * sites,)
    b2: np.ndarray

    def csv_rows(self):
        """Rows for the sample export, columns edge,x1,x2,value."""
        sites = np.tile(self.probe_sites, (self.b1.size // self.probe_sites.shape[0], 1))
        rows = [("e1", int(s[0]), int(s[1]), v) for s, v in zip(sites, self.b1.tolist())]
        rows += [("e2", int(s[0]), int(s[1]), v) for s, v in zip(sites, self.b2.tolist())]
        return rows


def probe_sites(n: int, probes: int, target: tuple[int, int]) -> np.ndarray:
    """Probe sites on one antidiagonal within sqrt(n) of the origin.

    Keeping probes on one antidiagonal keeps the direction to the target
    within o(1) of xi and, for exponential weights, makes the probed values
    mutually independent.
    """
    level = min(probes - 1, int(math.sqrt(n)))
    if level < 0 or level + 2 > min(target):
        raise ParameterError("probe window does not fit under the target")
    return np.array([(i, level - i) for i in range(level + 1)], dtype=np.int64)


def marginal_replica(spec: env.DistributionSpec, target: tuple[int, int],
                     sites: np.ndarray, seed: int, replica: int = 0
                     ) -> tuple[np.ndarray, np.ndarray]:
    """One replica's (b1, b2) gradients at the probe sites."""
    field = env.sample_field(spec, (0, 0), target[0] + 1, target[1] + 1,
                             seed, replica=replica)
    proxy = build_proxy(field, target)
    return (proxy.b1[sites[:, 1], sites[:, 0]].copy(),
            proxy.b2[sites[:, 1], sites[:, 0]].copy())


def estimate_marginals(spec: env.DistributionSpec, xi, n: int, replicas: int,
                       probes: int, seed: int) -> MarginalSample:
    """Sample both gradients near the origin, one proxy per replica."""
    if not (xi[0] > 0 and xi[1] > 0):
        raise ParameterError("direction must be interior")
    target = antidiagonal_target(n, xi)
    sites = probe_sites(n, probes, target)
    b1_all, b2_all = [], []
    for r in range(replicas):
        b1, b2 = marginal_replica(spec, target, sites, seed, replica=r)
        b1_all.append(b1)
        b2_all.append(b2)
    return MarginalSample((xi[0] / (xi[0] + xi[1]), xi[1] / (xi[0] + xi[1])), n,
                          target, sites, np.concatenate(b1_all), np.concatenate(b2_all))


def monotonicity_in_direction(field: env.WeightField, xi, zeta, n: int) -> tuple[bool, bool]:
    """Exact gradient ordering between two directions on one antidiagonal.

    With xi1 < zeta1 the e1 gradients toward the xi target dominate those
    toward the zeta target at every shared window site, and the e2 gradients
    are dominated; returns the two verdicts.
    """
    ty = antidiagonal_target(n, (xi[0] / (xi[0] + xi[1]), xi[1] / (xi[0] + xi[1])))
    tz = antidiagonal_target(n, (zeta[0] / (zeta[0] + zeta[1]), zeta[1] / (zeta[0] + zeta[1])))
    if ty == tz:
        return True, True
    if not ty[0] < tz[0]:
        raise ParameterError("need xi1 < zeta1 after target rounding")
    ox, oy = field.origin
    py = build_proxy(field, (ox + ty[0], oy + ty[1]))
    pz = build_proxy(field, (ox + tz[0], oy + tz[1]))
    w = min(py.width, pz.width)
    h = min(py.height, pz.height)
    e1_ok = bool(np.all(py.b1[:h, :w] >= pz.b1[:h, :w]))
    e2_ok = bool(np.all(py.b2[:h, :w] <= pz.b2[:h, :w]))
    return e1_ok, e2_ok


@dataclass(frozen=True, eq=False)
class StationaryCocycleField:
    """Exactly stationary gradient field generated from a queueing fixed point."""

    alpha: float
    spec: env.DistributionSpec
    b1: np.ndarray
    b2: np.ndarray
    omega: np.ndarray

    def residuals(self) -> tuple[float, float]:
        return identity_residuals(self.b1, self.b2, self.omega)


def stationary_field_from_queue(alpha: float, spec: env.DistributionSpec,
                                width: int, height: int, seed: int,
                                burn: int = DEFAULT_STATIONARY_BURN,
                                fp_iterations: int = 8) -> StationaryCocycleField:
    """Build a width x height stationary gradient field at e1-mean ``alpha``.

    Horizontal increments are inter-arrival rows of the iterated fixed point,
    vertical increments are workloads; the index reversal turns the queueing
    conservation/recovery laws into plaquette closure and weight recovery,
    which therefore hold exactly.
    """
    m0, _ = env.moments(spec)
    if not alpha > m0:
        raise ParameterError(f"alpha {alpha} must exceed mean service {m0}")
    customers = burn + width + height + 2
    n = customers + 64
    while True:
        H = queueing.default_horizon(n)
        if n - fp_iterations * H >= customers:
            break
        n += fp_iterations * H
    est = queueing.iterate_fixed_point(alpha, spec, n, fp_iterations, seed=seed)
    a_row = est.sample[est.sample_iterates == est.iterations][:customers]

    stream = env.RngStream(seed).child(0xA7)
    A_rows, W_rows, S_rows = [a_row], [], []
    a = a_row
    for station in range(height):
        s = env.sample_iid(spec, a.size, stream.child(station)).astype(np.float64)
        w = queueing.lindley_evolve(0.0, a, s)
        A_rows.append(queueing.departures(a, s, w))
        W_rows.append(w)
        S_rows.append(s)
        a = A_rows[-1]

    b1 = np.empty((height, width))
    b2 = np.empty((height, width))
    omega = np.empty((height, width))
    for j in range(height):
        la = height - j          # station whose arrivals are the e1 increments
        ls = height - 1 - j      # station whose workloads are the e2 increments
        b1[j] = A_rows[la][burn:burn + width][::-1]
        seg = slice(burn + 1, burn + width + 1)
        b2[j] = (W_rows[ls][seg] + S_rows[ls][seg])[::-1]
        omega[j] = S_rows[ls][seg][::-1]
    for arr in (b1, b2, omega):
        arr.setflags(write=False)
    return StationaryCocycleField(float(alpha), spec, b1, b2, omega)


def proxy_stability(spec: env.DistributionSpec, xi, n: int, probes: int,
                    seed: int) -> float:
    """Fraction of probe sites whose gradients differ between targets at n and 2n.

    Convergence diagnostic for the far-target limit; exact comparison.
    """
    t2 = antidiagonal_target(2 * n, xi)
    field = env.sample_field(spec, (0, 0), t2[0] + 1, t2[1] + 1, seed)
    near = build_proxy(field, antidiagonal_target(n, xi))
    far = build_proxy(field, t2)
    level = min(probes - 1, int(math.sqrt(n)))
    sites = np.array([(i, level - i) for i in range(level + 1)], dtype=np.int64)
    diff = ((near.b1[sites[:, 1], sites[:, 0]] != far.b1[sites[:, 1], sites[:, 0]])
            | (near.b2[sites[:, 1], sites[:, 0]] != far.b2[sites[:, 1], sites[:, 0]]))
    return float(diff.mean())
