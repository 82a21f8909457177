"""Reproducible random weight environments on the planar lattice.

Every cell value is a pure function of (seed, replica, absolute cell
coordinate) through a counter-based hash, so any sub-window regenerates
bit-identically, disjoint windows can be drawn in parallel, and enlarging
a window never changes existing values.

Continuous distributions are emitted on the dyadic grid of spacing 2^-28.
Passage-time magnitudes in this lab stay far below 2^25, so every sum,
difference, max and min of such weights is exact in float64.  That is what
lets downstream identity checks (recursions, cocycle closure, recovery,
queueing conservation laws) assert residuals of exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RangeError

# Dyadic resolution for continuous weight values.
QUANTUM_BITS = 28
QUANTUM = 2.0**-QUANTUM_BITS

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_CHAIN_MULT = np.uint64(0xD1342543DE82EF95)
_X_MULT = np.uint64(0x9E3779B97F4A7C15)
_Y_MULT = np.uint64(0xC2B2AE3D27D4EB4F)
_Y_SALT = np.uint64(0x165667B19E3779F9)

_DOMAIN_FIELD = 0x11
_DOMAIN_STREAM = 0x57


def _mix64(z):
    """splitmix64 finalizer; accepts uint64 scalars or arrays."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _derive_key(words) -> np.uint64:
    with np.errstate(over="ignore"):
        h = _GOLD
        for w in words:
            h = _mix64((h ^ np.uint64(int(w) & _MASK64)) * _CHAIN_MULT + np.uint64(1))
    return h


def _cell_bits(key: np.uint64, xs, ys):
    """Hash absolute lattice coordinates to uniform 64-bit words."""
    with np.errstate(over="ignore"):
        xu = np.asarray(xs, dtype=np.int64).astype(np.uint64) * _X_MULT
        yu = np.asarray(ys, dtype=np.int64).astype(np.uint64) * _Y_MULT
        return _mix64(_mix64(xu ^ key) ^ _mix64(yu ^ _Y_SALT))


def _bits_to_open_unit(bits) -> np.ndarray:
    """Map 64-bit words to floats strictly inside (0, 1)."""
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def quantize_up(values: np.ndarray) -> np.ndarray:
    """Round up to the dyadic grid; positive inputs stay strictly positive."""
    return np.ceil(values * 2.0**QUANTUM_BITS) * QUANTUM


_KINDS = ("exponential", "geometric", "bernoulli", "uniform", "constant")
_TOKENS = {"exp": "exponential", "geom": "geometric", "bern": "bernoulli",
           "unif": "uniform", "const": "constant"}


@dataclass(frozen=True)
class DistributionSpec:
    """Single-site weight law.

    kinds and parameters:
      exponential(rate)   density rate*exp(-rate*s) on s>0
      geometric(p)        P(j) = p^(j-1) * (1-p) on j = 1, 2, ...
      bernoulli(p)        values {0,1}, P(1) = p
      uniform(a, b)       uniform on [a, b], a < b
      constant(c)         point mass at c
    """

    kind: str
    params: tuple

    def __post_init__(self):
        k, p = self.kind, self.params
        if k == "exponential":
            if len(p) != 1 or not p[0] > 0:
                raise ParameterError(f"exponential rate must be > 0, got {p}")
        elif k in ("geometric", "bernoulli"):
            if len(p) != 1 or not (0 < p[0] < 1):
                raise ParameterError(f"{k} parameter must be in (0,1), got {p}")
        elif k == "uniform":
            if len(p) != 2 or not p[0] < p[1]:
                raise ParameterError(f"uniform needs a < b, got {p}")
        elif k == "constant":
            if len(p) != 1 or not math.isfinite(p[0]):
                raise ParameterError(f"constant needs one finite value, got {p}")
        else:
            raise ParameterError(f"unknown distribution kind {k!r}")

    # -- constructors ------------------------------------------------------
    @classmethod
    def exponential(cls, rate: float) -> "DistributionSpec":
        return cls("exponential", (float(rate),))

    @classmethod
    def geometric(cls, p: float) -> "DistributionSpec":
        return cls("geometric", (float(p),))

    @classmethod
    def bernoulli(cls, p: float) -> "DistributionSpec":
        return cls("bernoulli", (float(p),))

    @classmethod
    def uniform(cls, a: float, b: float) -> "DistributionSpec":
        return cls("uniform", (float(a), float(b)))

    @classmethod
    def constant(cls, c: float) -> "DistributionSpec":
        return cls("constant", (float(c),))

    # -- properties --------------------------------------------------------
    @property
    def is_integer_valued(self) -> bool:
        return self.kind in ("geometric", "bernoulli")

    @property
    def is_continuous(self) -> bool:
        return self.kind in ("exponential", "uniform")

    @property
    def mean(self) -> float:
        return moments(self)[0]

    @property
    def std(self) -> float:
        return moments(self)[1]

    def cdf(self, x):
        """Reference CDF, available for the continuous kinds."""
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "exponential":
            rate = self.params[0]
            return np.where(x < 0, 0.0, 1.0 - np.exp(-rate * x))
        if self.kind == "uniform":
            a, b = self.params
            return np.clip((x - a) / (b - a), 0.0, 1.0)
        raise ParameterError(f"no reference CDF for kind {self.kind!r}")

    def in_support(self, values: np.ndarray) -> bool:
        v = np.asarray(values)
        if self.kind == "exponential":
            return bool(np.all(v > 0))
        if self.kind == "geometric":
            return bool(np.all(v >= 1))
        if self.kind == "bernoulli":
            return bool(np.all((v == 0) | (v == 1)))
        if self.kind == "uniform":
            a, b = self.params
            return bool(np.all((v >= a) & (v <= b)))
        return bool(np.all(v == self.params[0]))

    # -- CLI token grammar: exp:<rate> geom:<p> bern:<p> unif:<a>,<b> const:<c>
    def to_token(self) -> str:
        short = {v: k for k, v in _TOKENS.items()}[self.kind]
        return short + ":" + ",".join(repr(p) for p in self.params)

    @classmethod
    def parse(cls, token: str) -> "DistributionSpec":
        try:
            short, _, rest = token.partition(":")
            kind = _TOKENS[short.strip()]
            params = tuple(float(p) for p in rest.split(","))
        except (KeyError, ValueError):
            raise ParameterError(f"cannot parse distribution token {token!r}") from None
        return cls(kind, params)


def moments(spec: DistributionSpec) -> tuple[float, float]:
    """Closed-form (mean, standard deviation) of one weight."""
    k, p = spec.kind, spec.params
    if k == "exponential":
        return 1.0 / p[0], 1.0 / p[0]
    if k == "geometric":
        q = 1.0 - p[0]
        return 1.0 / q, math.sqrt(p[0]) / q
    if k == "bernoulli":
        return p[0], math.sqrt(p[0] * (1.0 - p[0]))
    if k == "uniform":
        a, b = p
        return (a + b) / 2.0, (b - a) / math.sqrt(12.0)
    return p[0], 0.0


def _draw(spec: DistributionSpec, u: np.ndarray) -> np.ndarray:
    """Transform open-(0,1) uniforms into weight values."""
    k, p = spec.kind, spec.params
    if k == "exponential":
        return quantize_up(-np.log1p(-u) / p[0])
    if k == "geometric":
        return (1 + np.floor(np.log(u) / math.log(p[0]))).astype(np.int64)
    if k == "bernoulli":
        return (u < p[0]).astype(np.int64)
    if k == "uniform":
        a, b = p
        return a + (b - a) * u
    return np.full(u.shape, p[0], dtype=np.float64)


@dataclass(frozen=True, eq=False)
class WeightField:
    """A rectangular window of i.i.d. weights.

    ``values[iy, ix]`` carries the weight at lattice point
    ``(origin[0] + ix, origin[1] + iy)``.  Arrays are read-only; a field is
    safe to share across threads.  ``shift_view`` slides the window over the
    originally generated backing without re-sampling.
    """

    spec: DistributionSpec
    seed: int
    replica_index: int
    origin: tuple[int, int]
    values: np.ndarray
    _backing: np.ndarray
    _shift: tuple[int, int]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    def value_at(self, x: int, y: int):
        ix, iy = x - self.origin[0], y - self.origin[1]
        if not (0 <= ix < self.width and 0 <= iy < self.height):
            raise RangeError(f"point ({x},{y}) outside field window")
        return self.values[iy, ix]


def sample_field(spec: DistributionSpec, origin: tuple[int, int], width: int,
                 height: int, seed: int, replica: int = 0) -> WeightField:
    """Draw an i.i.d. window; deterministic in all arguments."""
    if width < 1 or height < 1:
        raise ParameterError("field dimensions must be >= 1")
    key = _derive_key((_DOMAIN_FIELD, seed, replica))
    xs = (origin[0] + np.arange(width, dtype=np.int64))[None, :]
    ys = (origin[1] + np.arange(height, dtype=np.int64))[:, None]
    values = _draw(spec, _bits_to_open_unit(_cell_bits(key, xs, ys)))
    values.setflags(write=False)
    return WeightField(spec, seed, replica, (origin[0], origin[1]), values,
                       values, (0, 0))


def sample_window_row(spec: DistributionSpec, origin: tuple[int, int],
                      width: int, y: int, seed: int, replica: int = 0) -> np.ndarray:
    """One row of the field ``sample_field`` would generate, on demand."""
    key = _derive_key((_DOMAIN_FIELD, seed, replica))
    xs = origin[0] + np.arange(width, dtype=np.int64)
    return _draw(spec, _bits_to_open_unit(_cell_bits(key, xs, np.int64(y))))


def field_from_values(values, spec: DistributionSpec,
                      origin: tuple[int, int] = (0, 0)) -> WeightField:
    """Explicit-valued field with a declared law; for hand-built configurations."""
    arr = np.array(values, dtype=np.int64 if spec.is_integer_valued else np.float64)
    if arr.ndim != 2:
        raise ParameterError("values must be a 2-D grid")
    arr.setflags(write=False)
    return WeightField(spec, 0, 0, (origin[0], origin[1]), arr, arr, (0, 0))


def _window_slice(field: WeightField, z: tuple[int, int]) -> np.ndarray:
    # offset of the requested window inside the backing array
    bx = field._shift[0] + z[0]
    by = field._shift[1] + z[1]
    bh, bw = field._backing.shape
    if not (0 <= bx and bx + field.width <= bw and 0 <= by and by + field.height <= bh):
        raise RangeError(f"shift {z} leaves the generated region")
    return field._backing[by:by + field.height, bx:bx + field.width]


def shift_view(field: WeightField, z: tuple[int, int]) -> WeightField:
    """Environment shift: the view exposes value(x) = old value(x + z).

    Pure re-indexing over the backing array; raises RangeError when the
    shifted window would leave the generated region.
    """
    view = _window_slice(field, z)
    return WeightField(field.spec, field.seed, field.replica_index, field.origin,
                       view, field._backing,
                       (field._shift[0] + z[0], field._shift[1] + z[1]))


def crop(field: WeightField, origin: tuple[int, int], width: int, height: int) -> WeightField:
    """Sub-window view of a field (same absolute coordinates, no copy)."""
    bx = origin[0] - field.origin[0] + field._shift[0]
    by = origin[1] - field.origin[1] + field._shift[1]
    bh, bw = field._backing.shape
    if not (0 <= bx and bx + width <= bw and 0 <= by and by + height <= bh):
        raise RangeError("crop window leaves the generated region")
    view = field._backing[by:by + height, bx:bx + width]
    return WeightField(field.spec, field.seed, field.replica_index,
                       (origin[0], origin[1]), view, field._backing, (bx, by))


@dataclass(frozen=True)
class RngStream:
    """Splittable counter-based stream: distinct paths give independent output."""

    seed: int
    path: tuple = ()

    @property
    def key(self) -> np.uint64:
        return _derive_key((_DOMAIN_STREAM, self.seed) + self.path)

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.path + (int(index),))

    def uniforms(self, count: int, lane: int = 0) -> np.ndarray:
        """``count`` open-(0,1) uniforms; ``lane`` selects a parallel row."""
        bits = _cell_bits(self.key, np.arange(count, dtype=np.int64), np.int64(lane))
        return _bits_to_open_unit(bits)


def sample_iid(spec: DistributionSpec, count: int, stream: RngStream,
               lane: int = 0) -> np.ndarray:
    """Length-``count`` i.i.d. draws from ``spec`` on one stream lane."""
    return _draw(spec, stream.uniforms(count, lane))
