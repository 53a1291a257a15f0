import json

import numpy as np
import pytest
from scipy import stats

from ssacc.channel import dbm_to_watts, reference_scenario
from ssacc.gdm_rl import (Actor, Adam, Critic, DiffusionPolicy, EnvSource, NoiseSchedule, ReplayBuffer,
                          TrainConfig, TrainingDiverged, actor_update, baseline_train, critic_update,
                          deterministic_action, forward_diffuse, generate_action, load_checkpoint,
                          policy_update, save_checkpoint, squash, state_features, train)
from ssacc.gdm_rl.agent import STATE_DIM, critic_loss_and_grads, policy_loss_and_grads
from ssacc.qoe_opt import (DEFAULT_BOUNDS, CovertTarget, QoeWeights, fixed_environment, grid_oracle,
                           reward, sample_environment)
from ssacc.rng import CounterStream

W = QoeWeights()


def fd_worst(params, loss, analytic, h=1e-6):
    """Largest relative gap between analytic gradients and central differences."""
    worst = 0.0
    for p, g in zip(params, analytic):
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + h
            lp = loss()
            p[idx] = old - h
            lm = loss()
            p[idx] = old
            fd = (lp - lm) / (2 * h)
            worst = max(worst, abs(fd - g[idx]) / max(abs(fd), abs(g[idx]), 1e-7))
    return worst


class AnalyticCritic:
    """Q(s, a) = -(a - 0.7)^2 with the interface the updates expect."""

    def __init__(self, state_dim=STATE_DIM):
        self.net = self
        self.state_dim = state_dim

    def forward(self, states, actions):
        a = np.asarray(actions, dtype=float)
        return -(a - 0.7) ** 2, a

    def backward(self, acts, grad_out):
        dq = grad_out[:, 0] * -2.0 * (acts - 0.7)
        return [], np.concatenate([np.zeros((acts.size, self.state_dim)), dq[:, None]], axis=1)


class TestSchedule:
    def test_validation_and_alpha_bars(self):
        s = NoiseSchedule.linear(5, 1e-4, 0.2)
        assert s.steps == 5 and np.all(np.diff(s.alpha_bars) < 0)
        assert NoiseSchedule.linear(1).steps == 1
        for bad in ((), (0.2, 0.1), (1.0,), (-0.1,)):
            with pytest.raises(ValueError):
                NoiseSchedule(bad)

    def test_forward_zero_betas(self):
        s = NoiseSchedule((0.0, 0.0, 0.0))
        x0 = np.array([0.3, -1.2])
        for t in (1, 2, 3):
            np.testing.assert_array_equal(forward_diffuse(x0, t, s, np.random.default_rng(0)), x0)

    @pytest.mark.parametrize("t", [1, 3, 5])
    def test_forward_variance(self, t):
        s = NoiseSchedule.linear(5, 1e-4, 0.2)
        x = forward_diffuse(np.zeros(100000), t, s, np.random.default_rng(t))
        assert np.var(x) == pytest.approx(1 - s.alpha_bars[t - 1], rel=0.02)

    def test_forward_isotropic_limit(self):
        s = NoiseSchedule((0.999,) * 3)
        x = forward_diffuse(np.full(100000, 5.0), 3, s, np.random.default_rng(1))
        assert abs(np.mean(x)) < 0.02 and np.var(x) == pytest.approx(1.0, rel=0.02)
        with pytest.raises(ValueError):
            forward_diffuse(0.0, 4, s, np.random.default_rng(0))


class TestGeneration:
    def test_deterministic_repeatable_and_bounded(self):
        pol = DiffusionPolicy(STATE_DIM, NoiseSchedule.linear(5), rng=np.random.default_rng(3))
        s = np.random.default_rng(4).standard_normal(STATE_DIM)
        assert generate_action(pol, s, deterministic=True) == generate_action(pol, s, deterministic=True)
        states = np.random.default_rng(5).uniform(-3, 3, size=(10000, STATE_DIM))
        a = generate_action(pol, states, np.random.default_rng(6))
        assert a.shape == (10000,) and np.all((a >= 0) & (a <= 1))
        with pytest.raises(ValueError):
            generate_action(pol, s)

    def test_squash_of_normal(self):
        pol = DiffusionPolicy(STATE_DIM, NoiseSchedule((1e-12,)), hidden=(4,), rng=np.random.default_rng(0))
        for p in pol.params[-2:]:
            p[...] = 0.0
        a = generate_action(pol, np.zeros((100000, STATE_DIM)), np.random.default_rng(7))
        assert stats.kstest(a, lambda v: stats.norm.cdf(np.log(v / (1 - v)))).pvalue > 1e-3


class TestGradients:
    def test_critic_fd(self):
        rng = np.random.default_rng(1)
        cr = Critic(3, (4, 3), rng)
        s, a, r = rng.standard_normal((6, 3)), rng.uniform(size=6), rng.standard_normal(6)
        _, g = critic_loss_and_grads(cr, s, a, r)
        assert fd_worst(cr.params, lambda: critic_loss_and_grads(cr, s, a, r)[0], g) < 1e-4

    @pytest.mark.parametrize("z,scale", [(2, 1.0), (3, 4.0)])
    def test_policy_fd(self, z, scale):
        rng = np.random.default_rng(2)
        pol = DiffusionPolicy(3, NoiseSchedule.linear(z, 0.05, 0.3), hidden=(2,), emb_dim=4, rng=rng,
                              squash_scale=scale)
        cr = Critic(3, (3,), rng)
        s = rng.standard_normal((4, 3))
        noise = pol.draw_noise(rng, 4)
        _, g = policy_loss_and_grads(pol, cr, s, noise)
        assert fd_worst(pol.params, lambda: policy_loss_and_grads(pol, cr, s, noise)[0], g) < 1e-3

    def test_actor_fd(self):
        rng = np.random.default_rng(3)
        act, cr = Actor(3, (4,), rng), Critic(3, (3,), rng)
        s = rng.standard_normal((5, 3))
        before = [p.copy() for p in act.params]
        loss0 = actor_update(act, cr, s, 0.0)
        # gradient recovered from one plain step of known size
        lr = 1e-7
        actor_update(act, cr, s, lr)
        g = [(b - p) / lr for b, p in zip(before, act.params)]
        act.net.set_params(before)
        assert fd_worst(act.params, lambda: actor_update(act, cr, s, 0.0), g, h=1e-5) < 1e-3
        assert actor_update(act, cr, s, 0.0) == loss0


class TestUpdates:
    def test_zero_lr_is_identity(self):
        rng = np.random.default_rng(4)
        pol = DiffusionPolicy(STATE_DIM, NoiseSchedule.linear(3), hidden=(4,), emb_dim=4, rng=rng)
        cr = Critic(STATE_DIM, (4,), rng)
        s = rng.standard_normal((8, STATE_DIM))
        p0, c0 = [p.copy() for p in pol.params], [p.copy() for p in cr.params]
        policy_update(pol, cr, s, 0.0, rng, Adam(pol.params, 0.0))
        critic_update(cr, (s, rng.uniform(size=8), rng.standard_normal(8)), 0.0, Adam(cr.params, 0.0))
        for a, b in zip(p0 + c0, pol.params + cr.params):
            np.testing.assert_array_equal(a, b)

    def test_critic_fixed_point(self):
        rng = np.random.default_rng(5)
        cr = Critic(STATE_DIM, (16, 16), rng)
        batch = (rng.standard_normal((32, STATE_DIM)), rng.uniform(size=32), np.full(32, 2.5))
        opt = Adam(cr.params, 1e-2)
        for _ in range(2000):
            loss = critic_update(cr, batch, 1e-2, opt)
        assert loss < 1e-3
        np.testing.assert_allclose(cr.q(batch[0], batch[1]), 2.5, atol=0.05)

    def test_policy_analytic_critic(self):
        rng = np.random.default_rng(6)
        pol = DiffusionPolicy(STATE_DIM, NoiseSchedule.linear(5), hidden=(32, 32), rng=rng, squash_scale=4.0)
        states = rng.uniform(-1, 1, size=(16, STATE_DIM))
        opt = Adam(pol.params, 3e-3)
        for _ in range(600):
            policy_update(pol, AnalyticCritic(), states, 3e-3, rng, opt)
        det = generate_action(pol, states, deterministic=True)
        sto = generate_action(pol, states, np.random.default_rng(8))
        assert np.all(np.abs(det - 0.7) < 0.05) and np.all(np.abs(sto - 0.7) < 0.05)

    def test_actor_analytic_critic(self):
        rng = np.random.default_rng(7)
        act = Actor(STATE_DIM, (32, 32), rng)
        states = rng.uniform(-1, 1, size=(16, STATE_DIM))
        opt = Adam(act.params, 3e-3)
        for _ in range(600):
            actor_update(act, AnalyticCritic(), states, 3e-3, opt)
        assert np.all(np.abs(act.act(states) - 0.7) < 0.05)


def test_replay_buffer():
    buf = ReplayBuffer(5, 2)
    for i in range(8):
        buf.add([i, i], i / 10, float(i), [i + 1, i + 1])
    assert len(buf) == 5 and sorted(buf.rewards.tolist()) == [3.0, 4.0, 5.0, 6.0, 7.0]
    s, a, r, ns = buf.sample(np.random.default_rng(0), 4)
    assert len(set(r.tolist())) == 4 and np.all(ns[:, 0] == s[:, 0] + 1)
    assert len(buf.sample(np.random.default_rng(0), 50)[2]) == 5
    with pytest.raises(ValueError):
        ReplayBuffer(0, 2)


def test_state_features_range():
    s = CounterStream(3, 1)
    feats = np.array([state_features(sample_environment(DEFAULT_BOUNDS, s, i, dbm_to_watts(40)))
                      for i in range(200)])
    assert feats.shape == (200, STATE_DIM)
    assert np.all(feats[:, 0] == 0.0) and np.all(np.abs(feats[:, 1:]) <= 1.0 + 1e-12)


def test_config_validation():
    for bad in (dict(steps=0), dict(lr_policy=0.0), dict(exploration=-1.0), dict(target_tau=2.0),
                dict(squash_scale=0.0)):
        with pytest.raises(ValueError):
            TrainConfig(**bad)
    assert TrainConfig().digest() == TrainConfig().digest() != TrainConfig(seed=1).digest()


ENV = fixed_environment(reference_scenario(8), dbm_to_watts(40.0))


@pytest.fixture(scope="module")
def fixed_runs():
    cfg = TrainConfig(steps=3000, eval_every=300, seed=0)
    t = CovertTarget(1.0)
    return cfg, t, train([ENV], W, t, cfg, eval_envs=[ENV]), baseline_train([ENV], W, t, cfg, eval_envs=[ENV])


def test_fixed_environment_reaches_oracle(fixed_runs):
    cfg, t, gdm, base = fixed_runs
    best = grid_oracle(ENV, W, t)
    k = deterministic_action(gdm.model, ENV)
    assert abs(k - best.kappa) < 0.05
    assert reward(ENV, k, W, t) >= 0.98 * best.reward
    assert reward(ENV, deterministic_action(base.model, ENV), W, t) >= 0.95 * best.reward
    assert len(gdm.trajectory) == len(base.trajectory) == cfg.steps // cfg.eval_every


def test_training_is_reproducible(fixed_runs):
    cfg, t, gdm, _ = fixed_runs
    again = train([ENV], W, t, cfg, eval_envs=[ENV])
    assert again.trajectory == gdm.trajectory
    for a, b in zip(again.model.params, gdm.model.params):
        np.testing.assert_array_equal(a, b)


def test_actions_stay_in_unit_interval():
    seen = []

    def fn(env, k):
        seen.append(k)
        return reward(env, k, W, CovertTarget(0.2))

    cfg = TrainConfig(steps=200, eval_every=50, exploration=2.0, batch=16)
    train(EnvSource(bounds=DEFAULT_BOUNDS, p_max=dbm_to_watts(40.0), seed=1), W, CovertTarget(0.2), cfg,
          reward_fn=fn)
    assert min(seen) >= 0.0 and max(seen) <= 1.0


def test_divergence_raises_with_diagnostics():
    cfg = TrainConfig(steps=50, batch=8, eval_every=10)
    with pytest.raises(TrainingDiverged) as err:
        train([ENV], W, CovertTarget(1.0), cfg, eval_envs=[ENV], reward_fn=lambda e, k: float("nan"))
    info = json.loads(str(err.value))
    assert info["step"] == 7 and "policy" in info["param_norms"]


def test_target_critic_option():
    cfg = TrainConfig(steps=100, batch=16, eval_every=50, target_tau=0.005)
    res = train([ENV], W, CovertTarget(1.0), cfg, eval_envs=[ENV])
    assert np.all(np.isfinite(res.rewards))


@pytest.mark.parametrize("learner", [train, baseline_train])
def test_checkpoint_round_trip(tmp_path, learner):
    cfg = TrainConfig(steps=80, batch=16, eval_every=40, hidden=(8, 8))
    res = learner([ENV], W, CovertTarget(1.0), cfg, eval_envs=[ENV])
    path = tmp_path / "ckpt.npz"
    save_checkpoint(path, res.model, res.critic, cfg, {"note": "x"})
    model, critic, cfg2, meta = load_checkpoint(path)
    assert cfg2 == cfg and meta["config_sha256"] == cfg.digest() and meta["extra"] == {"note": "x"}
    assert deterministic_action(model, ENV) == deterministic_action(res.model, ENV)
    s = state_features(ENV)[None, :]
    assert critic.q(s, [0.5])[0] == res.critic.q(s, [0.5])[0]


def test_squash_bounds():
    assert squash(0.0) == 0.5 and 0 <= squash(-800.0) < squash(800.0) <= 1
