"""Gradient fields: exact identities, monotonicity, marginals, stationary twins."""

import numpy as np
import pytest

from lpplab import busemann, env, passage, stats
from lpplab.errors import ParameterError, RangeError

EXP1 = env.DistributionSpec.exponential(1.0)
UNIF = env.DistributionSpec.uniform(0.5, 5.0)


def test_two_by_two_gradients():
    f = env.field_from_values([[1.0, 2.0], [3.0, 4.0]], UNIF)
    proxy = busemann.build_proxy(f, (1, 1))
    assert proxy.b1[0, 0] == 4.0 - 2.0
    assert proxy.b2[0, 0] == 4.0 - 3.0
    assert min(proxy.b1[0, 0], proxy.b2[0, 0]) == f.value_at(0, 0)


def test_recovery_and_closure_exact():
    for r in range(30):
        f = env.sample_field(EXP1, (0, 0), 60, 60, seed=1, replica=r)
        proxy = busemann.build_proxy(f, (59, 59))
        rec, clo = busemann.proxy_residuals(f, proxy)
        assert rec == 0.0 and clo == 0.0


def test_recovery_exact_for_integer_weights():
    f = env.sample_field(env.DistributionSpec.geometric(0.5), (0, 0), 40, 40, seed=2)
    proxy = busemann.build_proxy(f, (39, 39))
    rec, clo = busemann.proxy_residuals(f, proxy)
    assert rec == 0 and clo == 0


def test_build_proxy_window_errors():
    f = env.sample_field(EXP1, (0, 0), 10, 10, seed=3)
    with pytest.raises(RangeError):
        busemann.build_proxy(f, (0, 5))


def test_crossing_single_triples():
    f = env.sample_field(EXP1, (0, 0), 40, 40, seed=4)
    ok1, ok2 = busemann.crossing_inequalities(f, (2, 3), (10, 25), (20, 15))
    assert ok1 and ok2
    assert busemann.crossing_inequalities(f, (2, 3), (10, 25), (10, 25)) == (True, True)
    c = env.field_from_values(np.full((20, 20), 2.0), env.DistributionSpec.constant(2.0))
    assert busemann.crossing_inequalities(c, (0, 0), (5, 10), (10, 5)) == (True, True)
    with pytest.raises(ParameterError):
        busemann.crossing_inequalities(f, (2, 3), (10, 25), (20, 16))
    with pytest.raises(ParameterError):
        busemann.crossing_inequalities(f, (2, 3), (20, 15), (10, 25))


def test_crossing_census_no_violations():
    f = env.sample_field(EXP1, (0, 0), 50, 50, seed=5)
    checked, violations = busemann.crossing_census(f, 46, 1000, seed=6)
    assert checked >= 900 and violations == 0


def test_monotonicity_in_direction_exact():
    for r in range(10):
        f = env.sample_field(EXP1, (0, 0), 130, 130, seed=7, replica=r)
        ok1, ok2 = busemann.monotonicity_in_direction(f, (0.3, 0.7), (0.7, 0.3), 120)
        assert ok1 and ok2
    f = env.sample_field(EXP1, (0, 0), 130, 130, seed=7)
    assert busemann.monotonicity_in_direction(f, (0.5, 0.5), (0.5, 0.5), 120) == (True, True)
    c = env.field_from_values(np.ones((90, 90)), env.DistributionSpec.constant(1.0))
    assert busemann.monotonicity_in_direction(c, (0.3, 0.7), (0.7, 0.3), 80) == (True, True)


def test_exact_exponential_model_ties_to_shape():
    model = busemann.ExactExponentialModel(1.0)
    for t in np.linspace(0.05, 0.95, 19):
        assert model.euler_gap((t, 1.0 - t)) < 1e-12
    xi = (0.8, 0.2)
    assert abs(model.mean1(xi) - 1.5) < 1e-12
    assert abs(model.rate1((0.5, 0.5)) - 0.5) < 1e-12
    assert abs(1.0 / model.rate2(xi) - model.mean2(xi)) < 1e-12


def test_estimate_marginals_small_scale():
    sample = busemann.estimate_marginals(EXP1, (0.5, 0.5), 400, 30, 20, seed=8)
    assert sample.b1.size == sample.b2.size == 30 * 20
    assert 1.8 <= sample.b1.mean() <= 2.2
    assert 1.8 <= sample.b2.mean() <= 2.2
    rows = sample.csv_rows()
    assert len(rows) == 2 * sample.b1.size and rows[0][0] == "e1"


def test_marginal_probe_sites_capped_by_sqrt_n():
    target = busemann.antidiagonal_target(400, (0.5, 0.5))
    sites = busemann.probe_sites(400, 100, target)
    assert sites.shape[0] == int(np.sqrt(400)) + 1
    assert np.all(sites.sum(axis=1) == sites[0].sum())


def test_stationary_field_identities_and_laws():
    field = busemann.stationary_field_from_queue(2.0, EXP1, 60, 30, seed=9)
    assert field.residuals() == (0.0, 0.0)
    # every horizontal-increment row follows the output law of the station
    law = env.DistributionSpec.exponential(0.5)
    pooled = field.b1.ravel()
    assert stats.ks_statistic(pooled, law.cdf) <= 0.05
    assert stats.ks_statistic(field.b2.ravel(), law.cdf) <= 0.05
    # recovered weights carry the service law
    assert np.array_equal(np.minimum(field.b1, field.b2), field.omega)
    assert stats.ks_statistic(field.omega.ravel(), EXP1.cdf) <= 0.05


def test_stationary_field_shift_invariance():
    field = busemann.stationary_field_from_queue(2.0, EXP1, 64, 32, seed=10)
    base = field.b1[:16, :24].ravel()
    # two-sample critical distance at the 1% level for equal sizes
    crit = 1.63 * np.sqrt(2.0 / base.size)
    for dx, dy in ((20, 0), (0, 12), (24, 14)):
        shifted = field.b1[dy:dy + 16, dx:dx + 24].ravel()
        grid = np.sort(np.concatenate([base, shifted]))
        d = np.abs(stats.EmpiricalSample(base).cdf(grid)
                   - stats.EmpiricalSample(shifted).cdf(grid)).max()
        assert d <= crit


def test_stationary_field_mean_matches_alpha():
    field = busemann.stationary_field_from_queue(2.0, EXP1, 80, 40, seed=11)
    assert abs(field.b1.mean() - 2.0) < 0.15
    assert abs(field.b2.mean() - 2.0) < 0.2


def test_stationary_field_requires_stability():
    with pytest.raises(ParameterError):
        busemann.stationary_field_from_queue(0.5, EXP1, 10, 10, seed=1)


def test_bg_closure_small_scale():
    model = busemann.ExactExponentialModel(1.0)
    sample = busemann.estimate_marginals(EXP1, (0.5, 0.5), 500, 40, 23, seed=12)
    closure = sample.b1.mean() * 0.5 + sample.b2.mean() * 0.5
    assert abs(closure - model.shape((0.5, 0.5))) <= 0.1


def test_proxy_stability_diagnostic():
    frac = busemann.proxy_stability(EXP1, (0.5, 0.5), 150, 12, seed=13)
    print(f"probe sites with different gradients at n vs 2n: {frac:.3f}")
    assert 0.0 <= frac <= 1.0
