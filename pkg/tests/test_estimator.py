import json
import math

import numpy as np
import pytest

from exitbound import (HorizonError, IntervalSurvivalOracle, empirical_survival,
                       estimate_d_p, oracle_quantile, quantile_bound,
                       sup_over_starts, theorem_rhs)
from exitbound.estimator import REPORT_JSON_FIELDS
from conftest import synth_sample


def test_survival_at_zero_is_one():
    sample = synth_sample([0.1, 0.2, 0.3], dt=0.1, t_max=1.0)
    assert empirical_survival(sample, 0.0) == 1.0


def test_survival_direct_count():
    sample = synth_sample([0.1, 0.2, 0.3], dt=0.1, t_max=1.0)
    assert empirical_survival(sample, 0.2) == pytest.approx(2.0 / 3.0)


def test_survival_counts_censored_as_alive():
    sample = synth_sample([0.1], dt=0.1, t_max=1.0, n_censored=1)
    assert empirical_survival(sample, 0.5) == pytest.approx(0.5)


def test_survival_beyond_horizon_rejected():
    sample = synth_sample([0.1, 0.2], dt=0.1, t_max=1.0)
    with pytest.raises(HorizonError):
        empirical_survival(sample, 1.5)


def test_survival_nonincreasing_in_t():
    rng = np.random.default_rng(0)
    for _ in range(20):
        times = np.round(rng.exponential(1.0, size=50) / 0.01).astype(int)
        times = 0.01 * np.clip(times, 1, 900)
        sample = synth_sample(sorted(times), dt=0.01, t_max=9.0)
        values = [empirical_survival(sample, t) for t in np.linspace(0, 9, 40)]
        assert all(a >= b for a, b in zip(values, values[1:]))


def test_order_statistic_point_estimate():
    sample = synth_sample([1.0, 2.0, 3.0, 4.0], dt=1.0, t_max=5.0)
    report = estimate_d_p(sample, 0.5)
    assert report.d_p == 2.0
    assert report.bound == pytest.approx(math.log(2.0) / 2.0)
    assert report.warning  # n*p = 2 < 10


def test_generalized_inverse_property():
    # S(d + dt) <= p < S(d - dt) for dt-granular samples, ties included
    rng = np.random.default_rng(7)
    dt = 0.01
    for trial in range(50):
        n = int(rng.integers(5, 400))
        p = float(rng.uniform(0.05, 0.9))
        steps = rng.integers(1, 60, size=n)  # heavy ties
        sample = synth_sample(sorted(dt * steps), dt=dt, t_max=1.0)
        d = estimate_d_p(sample, p).d_p
        assert empirical_survival(sample, d + dt) <= p
        assert empirical_survival(sample, d - dt) > p


def test_censoring_above_p_is_a_horizon_error():
    sample = synth_sample([0.1] * 5, dt=0.1, t_max=1.0, n_censored=5)
    with pytest.raises(HorizonError):
        estimate_d_p(sample, 0.2)


def test_ci_brackets_point_estimate():
    rng = np.random.default_rng(11)
    for trial in range(25):
        n = int(rng.integers(50, 2000))
        times = np.sort(0.001 * rng.integers(1, 5000, size=n))
        sample = synth_sample(times, dt=0.001, t_max=5.0)
        for p in (0.5, 0.2, 0.05):
            r = estimate_d_p(sample, p)
            assert r.d_lo <= r.d_p <= r.d_hi
            assert r.certified_bound <= r.bound
            assert r.bound > 0


def test_undersampled_quantile_is_flagged():
    times = 0.01 * np.arange(1, 101)
    sample = synth_sample(times, dt=0.01, t_max=2.0)
    report = estimate_d_p(sample, 0.05)  # n*p = 5 < 10
    assert report.warning is not None
    full = estimate_d_p(sample, 0.5)
    assert full.warning is None


def test_quantile_bound_identities():
    p = 0.01
    d = math.log(1.0 / p) / math.pi ** 2
    assert quantile_bound(d, p) == pytest.approx(math.pi ** 2, rel=1e-12)
    # table arithmetic from the reference experiments
    assert quantile_bound(0.09522, 0.5) == pytest.approx(7.28, abs=5e-3)
    assert quantile_bound(1.2799, 0.1) == pytest.approx(1.799, abs=5e-4)


def test_quantile_bound_rejects_bad_arguments():
    with pytest.raises(ValueError):
        quantile_bound(0.0, 0.5)
    with pytest.raises(ValueError):
        quantile_bound(1.0, 0.0)
    with pytest.raises(ValueError):
        quantile_bound(1.0, 1.0)


def test_theorem_rhs_values():
    assert theorem_rhs(1.0, math.exp(-1.0), 1.0) == pytest.approx(1.0, rel=1e-12)
    assert theorem_rhs(3.0, 0.25, 0.25) == 0.0
    rhs = theorem_rhs(math.pi ** 2, 0.01, 1.0)
    assert rhs == pytest.approx(math.log(100.0) / math.pi ** 2, rel=1e-12)
    assert rhs == pytest.approx(0.4666, abs=5e-4)
    # the exact interval quantile dominates the theorem's right-hand side
    d = oracle_quantile(IntervalSurvivalOracle(), 0.5, 0.01)
    assert d >= rhs
    assert d == pytest.approx(0.491077, abs=1e-5)


def test_theorem_rhs_vacuous_below_level_set():
    assert theorem_rhs(2.0, 0.5, 0.1) < 0.0


def test_sup_over_starts_selects_max_d_p():
    s1 = estimate_d_p(synth_sample([0.1] * 20, dt=0.1, t_max=1.0, start=(0.25,)), 0.5)
    s2 = estimate_d_p(synth_sample([0.3] * 20, dt=0.1, t_max=1.0, start=(0.5,)), 0.5)
    s3 = estimate_d_p(synth_sample([0.2] * 20, dt=0.1, t_max=1.0, start=(0.75,)), 0.5)
    assert sup_over_starts([s1]) is s1
    winner = sup_over_starts([s1, s2, s3])
    assert winner is s2
    assert winner.bound == min(r.bound for r in (s1, s2, s3))


def test_sup_over_starts_rejects_mixed_p():
    s1 = estimate_d_p(synth_sample([0.1] * 20, dt=0.1, t_max=1.0), 0.5)
    s2 = estimate_d_p(synth_sample([0.1] * 20, dt=0.1, t_max=1.0), 0.4)
    with pytest.raises(ValueError):
        sup_over_starts([s1, s2])
    with pytest.raises(ValueError):
        sup_over_starts([])


def test_sup_over_starts_on_interval_oracle_grid():
    # symmetric problem: the midpoint start dominates
    oracle = IntervalSurvivalOracle()
    quantiles = {x: oracle_quantile(oracle, x, 0.2) for x in (0.25, 0.5, 0.75)}
    assert max(quantiles, key=quantiles.get) == 0.5


def test_degenerate_sample_reproduces_oracle_bound():
    # a 1-point sample holding the exact oracle quantile must return it verbatim
    oracle = IntervalSurvivalOracle()
    d = oracle_quantile(oracle, 0.5, 0.5)
    sample = synth_sample([d], dt=d, t_max=2 * d)
    report = estimate_d_p(sample, 0.5)
    assert report.d_p == d
    assert report.bound == pytest.approx(math.log(2.0) / d, rel=1e-12)
    # exact value of that bound, frozen from the series oracle
    assert report.bound == pytest.approx(7.320408, abs=1e-4)


def test_report_json_schema():
    sample = synth_sample([0.1, 0.2, 0.3, 0.4], dt=0.1, t_max=1.0)
    report = estimate_d_p(sample, 0.5)
    record = report.to_json_dict()
    assert tuple(record.keys()) == REPORT_JSON_FIELDS
    text = json.dumps(record)
    parsed = json.loads(text)
    assert parsed["problem"] == "synthetic"
    assert parsed["start"] == [0.5]
    assert parsed["seed"] == 0
    assert parsed["censored_fraction"] == 0.0
