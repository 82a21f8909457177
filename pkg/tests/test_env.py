"""Environment generation: determinism, moments, shifts, and the spec grammar."""

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from lpplab import env
from lpplab.errors import ParameterError, RangeError

EXP1 = env.DistributionSpec.exponential(1.0)


def test_constant_field_is_constant():
    f = env.sample_field(env.DistributionSpec.constant(2.5), (0, 0), 12, 9, seed=1)
    assert np.all(f.values == 2.5)


def test_exponential_empirical_mean():
    # 3 sigma-of-the-mean band around 1.0 at a million samples
    f = env.sample_field(EXP1, (0, 0), 1000, 1000, seed=2)
    assert abs(f.values.mean() - 1.0) <= 3.0 / 1000.0


def test_bernoulli_empirical_fraction():
    f = env.sample_field(env.DistributionSpec.bernoulli(0.8), (0, 0), 1000, 1000, seed=3)
    assert abs(f.values.mean() - 0.8) <= 0.003


def test_regeneration_is_bit_identical():
    a = env.sample_field(EXP1, (-3, 5), 40, 17, seed=11, replica=4)
    b = env.sample_field(EXP1, (-3, 5), 40, 17, seed=11, replica=4)
    assert np.array_equal(a.values, b.values)


def test_subwindow_matches_parent_window():
    # counter-based generation: values depend only on absolute coordinates
    big = env.sample_field(EXP1, (0, 0), 30, 30, seed=5)
    small = env.sample_field(EXP1, (7, 11), 9, 6, seed=5)
    assert np.array_equal(small.values, big.values[11:17, 7:16])
    row = env.sample_window_row(EXP1, (0, 0), 30, 13, seed=5)
    assert np.array_equal(row, big.values[13])


def test_replicas_differ():
    a = env.sample_field(EXP1, (0, 0), 20, 20, seed=5, replica=0)
    b = env.sample_field(EXP1, (0, 0), 20, 20, seed=5, replica=1)
    assert not np.array_equal(a.values, b.values)


def test_parallel_generation_equals_sequential():
    windows = [((17 * k, 3 * k), 25, 25) for k in range(8)]
    seq = [env.sample_field(EXP1, o, w, h, seed=9).values for o, w, h in windows]
    with ThreadPoolExecutor(max_workers=4) as pool:
        par = list(pool.map(lambda a: env.sample_field(EXP1, a[0], a[1], a[2], seed=9).values,
                            windows))
    for s, p in zip(seq, par):
        assert np.array_equal(s, p)


def test_shift_view_identity_and_inverse():
    backing = env.sample_field(EXP1, (0, 0), 12, 12, seed=21)
    f = env.crop(backing, (2, 2), 8, 8)
    assert np.array_equal(env.shift_view(f, (0, 0)).values, f.values)
    fwd = env.shift_view(f, (1, 0))
    assert np.array_equal(fwd.values, backing.values[2:10, 3:11])
    back = env.shift_view(fwd, (-1, 0))
    assert np.array_equal(back.values, f.values)
    assert back.origin == f.origin


def test_shift_view_composes_additively():
    backing = env.sample_field(EXP1, (0, 0), 15, 15, seed=22)
    f = env.crop(backing, (4, 4), 6, 6)
    two_hops = env.shift_view(env.shift_view(f, (1, 2)), (2, -1))
    one_hop = env.shift_view(f, (3, 1))
    assert np.array_equal(two_hops.values, one_hop.values)


def test_shift_view_out_of_bounds():
    f = env.sample_field(EXP1, (0, 0), 6, 6, seed=23)
    with pytest.raises(RangeError):
        env.shift_view(f, (1, 0))


def test_moments_closed_forms():
    assert env.moments(env.DistributionSpec.exponential(2.0)) == (0.5, 0.5)
    assert env.moments(env.DistributionSpec.constant(3.0)) == (3.0, 0.0)
    m, s = env.moments(env.DistributionSpec.uniform(1.0, 3.0))
    assert m == 2.0 and abs(s - 2.0 / math.sqrt(12.0)) < 1e-15


def test_geometric_moments_against_series():
    # independent oracle: sum the probability series to machine tolerance
    p = 0.5
    j = np.arange(1, 400, dtype=np.float64)
    pmf = p ** (j - 1) * (1 - p)
    mean = float((j * pmf).sum())
    second = float((j * j * pmf).sum())
    std = math.sqrt(second - mean * mean)
    m, s = env.moments(env.DistributionSpec.geometric(p))
    assert abs(m - mean) < 1e-12 and abs(s - std) < 1e-12
    assert (m, round(s**2, 12)) == (2.0, 2.0)


@pytest.mark.parametrize("spec", [
    EXP1,
    env.DistributionSpec.geometric(0.3),
    env.DistributionSpec.uniform(1.0, 3.0),
    env.DistributionSpec.bernoulli(0.25),
])
def test_moments_match_empirical(spec):
    f = env.sample_field(spec, (0, 0), 1000, 1000, seed=31)
    m0, s0 = env.moments(spec)
    n = f.values.size
    assert abs(f.values.mean() - m0) <= 4 * s0 / math.sqrt(n)
    # variance estimator standard error ~ s0^2 * sqrt(2/n) for light tails
    assert abs(f.values.std() - s0) <= 4 * s0 * math.sqrt(2.0 / n)


def test_disjoint_windows_uncorrelated():
    n = 100_000
    a = env.sample_field(EXP1, (0, 0), n, 1, seed=41).values.ravel()
    b = env.sample_field(EXP1, (0, 500), n, 1, seed=41).values.ravel()
    corr = np.corrcoef(a, b)[0, 1]
    assert abs(corr) < 4.0 / math.sqrt(n)


def test_support_constraints():
    assert np.all(env.sample_field(EXP1, (0, 0), 500, 500, seed=6).values > 0)
    g = env.sample_field(env.DistributionSpec.geometric(0.7), (0, 0), 300, 300, seed=6)
    assert g.values.dtype == np.int64 and g.values.min() >= 1
    b = env.sample_field(env.DistributionSpec.bernoulli(0.5), (0, 0), 100, 100, seed=6)
    assert b.values.dtype == np.int64 and set(np.unique(b.values)) <= {0, 1}


def test_continuous_values_are_dyadic():
    # exact-identity tests downstream rely on the 2^-28 grid
    f = env.sample_field(EXP1, (0, 0), 200, 200, seed=7)
    scaled = f.values * 2.0**env.QUANTUM_BITS
    assert np.array_equal(scaled, np.round(scaled))


def test_spec_token_round_trip():
    for token in ("exp:1.5", "geom:0.25", "bern:0.8", "unif:1.0,2.5", "const:3.0"):
        spec = env.DistributionSpec.parse(token)
        again = env.DistributionSpec.parse(spec.to_token())
        assert again == spec


@pytest.mark.parametrize("token", ["exp:-1", "geom:1.5", "bern:0", "unif:3,1",
                                   "wat:1", "exp:", "exp:a"])
def test_invalid_specs_rejected(token):
    with pytest.raises(ParameterError):
        env.DistributionSpec.parse(token)


def test_rng_stream_paths_independent():
    root = env.RngStream(123)
    a = root.child(1).uniforms(50_000)
    b = root.child(2).uniforms(50_000)
    assert not np.array_equal(a, b)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4.0 / math.sqrt(50_000)
    assert np.array_equal(a, env.RngStream(123).child(1).uniforms(50_000))


def test_field_values_read_only():
    f = env.sample_field(EXP1, (0, 0), 4, 4, seed=1)
    with pytest.raises(ValueError):
        f.values[0, 0] = 0.0


def test_field_from_values_and_value_at():
    f = env.field_from_values([[1.0, 2.0], [3.0, 4.0]], env.DistributionSpec.uniform(0.5, 5.0))
    assert f.value_at(1, 0) == 2.0 and f.value_at(0, 1) == 3.0
    with pytest.raises(RangeError):
        f.value_at(2, 0)
