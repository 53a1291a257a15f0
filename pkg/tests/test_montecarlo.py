import math
import warnings

import numpy as np
import pytest

from ssacc.capacity import avg_rb_closed, avg_rw_closed, capacity_context
from ssacc.channel import reference_scenario
from ssacc.detection import amdep_closed, eta_pair
from ssacc.montecarlo import (Estimate, McConfig, estimate_amdep, estimate_avg_capacity,
                              estimate_qoe, sample_values)
from ssacc.qoe_opt import QoeWeights, evaluate, fixed_environment


def test_config_validation():
    assert McConfig(samples=10, batch=100).batch == 10
    for bad in (dict(samples=0), dict(samples=5, workers=0), dict(samples=5, batch=0),
                dict(samples=5, seed=-1)):
        with pytest.raises(ValueError):
            McConfig(**bad)


def test_estimate_from_samples():
    x = np.array([1.0, 2.0, 4.0, 7.0])
    e = Estimate.from_samples(x)
    assert e.mean == pytest.approx(3.5) and e.count == 4
    assert e.std_error == pytest.approx(np.std(x, ddof=1) / 2)
    assert e.z_score(3.5 + e.std_error) == pytest.approx(1.0)
    assert Estimate(1.0, 0.0, 1).z_score(1.0) == 0.0
    assert Estimate(1.0, 0.0, 1).z_score(2.0) == math.inf


@pytest.mark.parametrize("which", ["amdep", "bob", "willie", "secrecy"])
def test_partition_invariance(which):
    p = reference_scenario(8)
    ref = sample_values(p, McConfig(samples=25000, seed=3), which)
    for batch, workers in ((1000, 1), (7000, 4), (3001, 8)):
        got = sample_values(p, McConfig(samples=25000, seed=3, batch=batch, workers=workers), which)
        np.testing.assert_array_equal(got, ref)


def test_seeds_and_quantities_use_distinct_streams():
    p = reference_scenario(8)
    a = sample_values(p, McConfig(samples=1000, seed=1), "willie")
    b = sample_values(p, McConfig(samples=1000, seed=2), "willie")
    assert not np.array_equal(a, b)


def test_amdep_estimate_against_closed():
    p = reference_scenario(8)
    e = estimate_amdep(p, McConfig(samples=200000, seed=5))
    assert abs(e.z_score(amdep_closed(eta_pair(p)))) < 4


@pytest.mark.parametrize("which,fn", [("bob", avg_rb_closed), ("willie", avg_rw_closed)])
def test_capacity_estimate_against_closed(which, fn):
    p = reference_scenario(8, 40.0, 30.0)
    e = estimate_avg_capacity(p, McConfig(samples=200000, seed=6), which)
    assert abs(e.z_score(fn(capacity_context(p)))) < 4


def test_secrecy_bounded_by_bob():
    p = reference_scenario(8)
    mc = McConfig(samples=20000, seed=7)
    s = sample_values(p, mc, "secrecy")
    assert np.all(s >= 0)
    assert estimate_avg_capacity(p, mc, "secrecy").mean <= estimate_avg_capacity(p, mc, "bob").mean


def test_qoe_estimate_against_closed():
    p = reference_scenario(8)
    env = fixed_environment(p, p.P_A + p.P_J_max)
    w = QoeWeights()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        closed = evaluate(env, p.P_A / (p.P_A + p.P_J_max), w).qoe
    e = estimate_qoe(p, w, McConfig(samples=200000, seed=8))
    assert abs(e.z_score(closed)) < 4


def test_exact_mode_runs():
    p = reference_scenario(4)
    e = estimate_amdep(p, McConfig(samples=20000, seed=9, mode="exact"))
    assert abs(e.mean - amdep_closed(eta_pair(p))) < 0.05


def test_bad_quantity():
    with pytest.raises(ValueError):
        sample_values(reference_scenario(), McConfig(samples=10), "bogus")
    with pytest.raises(ValueError):
        estimate_avg_capacity(reference_scenario(), McConfig(samples=10), "amdep")
