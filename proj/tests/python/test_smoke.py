import math

import numpy as np
import pytest

import lrst


def small_trial(shift=0.0, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(20, 3, 2))
    y = rng.normal(size=(25, 3, 2)) + shift
    return lrst.TrialData(x, y)


def test_round_trip_shapes():
    d = small_trial()
    assert (d.n_x, d.n_y, d.visits, d.outcomes) == (20, 25, 3, 2)
    assert d.x.shape == (20, 3, 2)


def test_rank_summary_matches_pairwise_definition():
    d = small_trial(0.3)
    r = lrst.rank_summary(d)
    x, y = d.x[:, 0, 0], d.y[:, 0, 0]
    pairwise = np.mean(np.sign(y[None, :] - x[:, None]))
    assert r.theta_hat[0, 0] == pytest.approx(pairwise, abs=1e-12)


def test_test_statistic_antisymmetric_under_arm_swap():
    d = small_trial(0.5)
    a = lrst.lrst_test(d)
    b = lrst.lrst_test(lrst.TrialData(d.y, d.x))
    assert b.z == pytest.approx(-a.z, abs=1e-12)
    assert 0.0 <= a.p_value <= 1.0


def test_power_and_sample_size_are_consistent():
    s = lrst.bapi302_scenario()
    o = lrst.oracle(s, method="quadrature", nodes=32)
    p = lrst.theoretical_power(o.theta.theta_bar, o.C, o.D, 2 / 3, 300, o.visits)
    assert 0.6 < p.power < 0.8
    n = lrst.required_sample_size(o.theta.theta_bar, o.C, o.D, 1.0, o.visits, power=0.8)
    assert n.achieved_power >= 0.8
    zero = lrst.theoretical_power(0.0, o.C, o.D, 1.0, 300, o.visits)
    assert zero.power == pytest.approx(0.05, abs=1e-12)


def test_estimated_power_reports_variance():
    p = lrst.estimated_power(small_trial(0.4))
    assert 0.0 < p.power < 1.0
    assert p.se is not None and p.se >= 0.0


def test_scenario_json_round_trip():
    s = lrst.bapi302_scenario()
    t = lrst.GaussianScenario.from_json(s.to_json())
    assert np.array_equal(t.mu_control, s.mu_control)


def test_simulation_is_reproducible():
    s = lrst.bapi302_scenario()
    a = lrst.simulate_power(s, 100, 50, seed=7)
    b = lrst.simulate_power(s, 100, 50, seed=7)
    assert a == b
    assert 0.0 <= a["empirical_power"] <= 1.0


def test_errors_carry_code():
    x = np.ones((1, 2, 2))
    with pytest.raises(lrst.LrstError, match="^InvalidArgument"):
        lrst.TrialData(x, np.ones((3, 2, 2)))
    with pytest.raises(ValueError, match="^DegenerateVariance"):
        lrst.lrst_test(lrst.TrialData(np.ones((3, 2, 1)), np.ones((3, 2, 1))))
