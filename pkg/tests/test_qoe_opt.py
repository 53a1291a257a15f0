import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ssacc.capacity import avg_rw_no_jamming
from ssacc.channel import dbm_to_watts, reference_scenario
from ssacc.detection import amdep_closed, eta_pair
from ssacc.montecarlo import McConfig
from ssacc.qoe_opt import (DEFAULT_BOUNDS, Allocation, CovertTarget, Environment, QoeWeights, amdep_at,
                           evaluate, feasible_kappa_max, fixed_environment, grid_oracle, qoe_closed,
                           reward, sample_environment)
from ssacc.rng import CounterStream

P40 = dbm_to_watts(40.0)
ENV = fixed_environment(reference_scenario(8), P40)
W = QoeWeights()


def test_validation():
    for bad in (lambda: QoeWeights(alpha=1.5), lambda: QoeWeights(varsigma=-1), lambda: CovertTarget(0.0),
                lambda: CovertTarget(1.5), lambda: Allocation(1.2), lambda: Allocation(-0.1),
                lambda: Environment((30, 30, 30, 80), P40), lambda: Environment((30, 30, 30), P40),
                lambda: Environment((30, 30, 30, 30), 0.0), lambda: ENV.params(0.0)):
        with pytest.raises(ValueError):
            bad()


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-6, 1 - 1e-6))
def test_power_split(kappa):
    p = ENV.params(kappa)
    assert p.P_A + p.P_J_max == pytest.approx(P40, rel=1e-14)
    e = eta_pair(p)
    assert ENV.ratio(kappa) == pytest.approx(e.eta1 / e.eta2, rel=1e-12)
    assert amdep_at(ENV, kappa) == pytest.approx(amdep_closed(e), rel=1e-10, abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_amdep_decreasing_in_kappa(k1, k2):
    lo, hi = sorted((k1, k2))
    assert amdep_at(ENV, lo) >= amdep_at(ENV, hi)


def test_amdep_independent_of_budget():
    e50 = fixed_environment(reference_scenario(8), dbm_to_watts(50.0))
    for k in (0.1, 0.5, 0.9):
        assert abs(amdep_at(ENV, k) - amdep_at(e50, k)) <= 1e-12


def test_endpoint_limits():
    m0, m1 = evaluate(ENV, 0.0, W), evaluate(ENV, 1.0, W)
    assert (m0.amdep, m0.qoe) == (1.0, 0.0)
    assert m1.amdep == 0.0 and m1.rw == pytest.approx(avg_rw_no_jamming(reference_scenario(8, 40.0, 40.0).with_(P_A=P40)))
    near = evaluate(ENV, 1 - 1e-7, W)
    assert near.rw == pytest.approx(m1.rw, rel=1e-3) and near.rb == pytest.approx(m1.rb, rel=1e-6)
    assert evaluate(ENV, 1e-6, W).rb < 1e-2


def test_qoe_definition():
    m = evaluate(ENV, 0.5, QoeWeights(0.3, 0.9))
    assert m.qoe == pytest.approx(0.3 * m.asc + 0.9 * m.rw * m.amdep, rel=1e-14)
    assert qoe_closed(ENV, Allocation(0.5), QoeWeights(0.3, 0.9)) == m.qoe


def test_reward_penalty_and_feasibility():
    t = CovertTarget(0.2)
    kmax = feasible_kappa_max(ENV, t)
    assert amdep_at(ENV, kmax) == pytest.approx(0.8, abs=1e-9)
    assert reward(ENV, kmax * 0.9, W, t) == pytest.approx(evaluate(ENV, kmax * 0.9, W).qoe)
    r_bad = reward(ENV, min(1.0, kmax + 0.1), W, t)
    assert -1 <= r_bad < 0 and r_bad == pytest.approx(amdep_at(ENV, kmax + 0.1) - 1)
    assert feasible_kappa_max(ENV, CovertTarget(1.0)) == 1.0


def test_reward_monte_carlo_close_to_closed():
    t = CovertTarget(0.2)
    closed = reward(ENV, 0.3, W, t)
    mc = reward(ENV, 0.3, W, t, mc=McConfig(samples=100000, seed=4))
    assert mc == pytest.approx(closed, rel=0.02)


def _dense_best(env, target, points=4001):
    ks = np.linspace(0, 1, points)
    r = np.array([reward(env, float(k), W, target) for k in ks])
    return float(ks[np.argmax(r)]), float(np.max(r))


@pytest.mark.parametrize("lam,kappa,value", [(0.2, 0.42915, 4.94428), (1.0, 0.68398, 5.12490)])
def test_grid_oracle_reference(lam, kappa, value):
    res = grid_oracle(ENV, W, CovertTarget(lam))
    assert res.feasible
    assert res.kappa == pytest.approx(kappa, abs=2e-5)
    assert res.reward == pytest.approx(value, abs=2e-5)
    assert res.reward >= res.grid_reward


def test_grid_oracle_against_dense_search():
    env = sample_environment(DEFAULT_BOUNDS, CounterStream(77, 1), 0, P40)
    t = CovertTarget(0.2)
    k, r = _dense_best(env, t)
    res = grid_oracle(env, W, t, grid_points=201)
    assert res.reward >= r - 1e-4 * abs(r)
    assert abs(res.kappa - k) < 2e-3


def test_sample_environment():
    s = CounterStream(5, 2)
    envs = [sample_environment(DEFAULT_BOUNDS, s, i, P40) for i in range(50)]
    d = np.array([e.realized for e in envs])
    assert np.all(d >= 20) and np.all(d <= 70)
    assert sample_environment(DEFAULT_BOUNDS, s, 17, P40) == envs[17]
    assert len({e.realized for e in envs}) == 50


def test_fixed_environment_pins_scenario():
    p = reference_scenario(128, 30.0, 35.0)
    env = fixed_environment(p, 2.0)
    assert env.bounds == tuple((x, x) for x in env.realized)
    q = env.params(0.25)
    assert (q.N, q.d_RW, q.P_A) == (128, p.d_RW, 0.5)
    assert math.isfinite(evaluate(env, 0.25, W).qoe)
