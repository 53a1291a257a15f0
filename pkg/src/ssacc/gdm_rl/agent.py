"""Q-guided training of the diffusion policy and a deterministic actor baseline.

The task is a contextual bandit: the reward depends only on the current
environment and action, so the critic regresses the immediate reward and
the actor ascends the critic.
"""
import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ssacc.gdm_rl.diffusion import DiffusionPolicy, NoiseSchedule, squash
from ssacc.gdm_rl.nn import Adam, Mlp, MlpSpec
from ssacc.qoe_opt import (LINKS, CovertTarget, Environment, QoeWeights, reward,
                           sample_environment)
from ssacc.rng import CounterStream

log = logging.getLogger(__name__)

STATE_DIM = 5
CHECKPOINT_VERSION = 1


def state_features(env: Environment) -> np.ndarray:
    """Power budget in decades around 40 dBm and the four composite losses mapped to [-1, 1] over the bounds."""
    p = env.base
    exps = {"d_AR": p.alpha_AR, "d_JR": p.alpha_JR, "d_RB": p.alpha_RB, "d_RW": p.alpha_RW}
    pairs = (("d_RB", "d_AR"), ("d_RB", "d_JR"), ("d_RW", "d_JR"), ("d_RW", "d_AR"))
    d = dict(zip(LINKS, env.realized))
    b = dict(zip(LINKS, env.bounds))
    feats = [(10.0 * math.log10(env.p_max) + 30.0 - 40.0) / 10.0]
    for k1, k2 in pairs:
        val = -exps[k1] * math.log10(d[k1]) - exps[k2] * math.log10(d[k2])
        lo = -exps[k1] * math.log10(b[k1][1]) - exps[k2] * math.log10(b[k2][1])
        hi = -exps[k1] * math.log10(b[k1][0]) - exps[k2] * math.log10(b[k2][0])
        feats.append(0.0 if hi == lo else 2.0 * (val - lo) / (hi - lo) - 1.0)
    return np.array(feats)


class Critic:
    """Q_nu(state, action) -> scalar."""

    def __init__(self, state_dim: int, hidden=(64, 64), rng: np.random.Generator = None,
                 activation: str = "tanh"):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.net = Mlp(MlpSpec((state_dim + 1,) + tuple(hidden) + (1,), activation), rng)

    @property
    def params(self):
        return self.net.params

    def _inp(self, states, actions):
        return np.concatenate([np.atleast_2d(states), np.asarray(actions, dtype=float).reshape(-1, 1)], axis=1)

    def q(self, states, actions):
        return self.net(self._inp(states, actions))[:, 0]

    def forward(self, states, actions):
        out, acts = self.net.forward(self._inp(states, actions))
        return out[:, 0], acts


class ReplayBuffer:
    """Ring buffer of (state, action, reward, next state) transitions."""

    def __init__(self, capacity: int, state_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros(capacity)
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.size = 0
        self._head = 0

    def __len__(self):
        return self.size

    def add(self, state, action, r, next_state):
        i = self._head
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = r
        self.next_states[i] = next_state
        self._head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, batch: int):
        """Uniform batch without replacement (the whole buffer if it is smaller)."""
        idx = rng.choice(self.size, size=min(batch, self.size), replace=False)
        return self.states[idx], self.actions[idx], self.rewards[idx], self.next_states[idx]


def critic_loss_and_grads(critic: Critic, states, actions, rewards):
    q, acts = critic.forward(states, actions)
    diff = q - rewards
    loss = float(np.mean(diff ** 2))
    grads, _ = critic.net.backward(acts, (2.0 / diff.size) * diff[:, None])
    return loss, grads


def critic_update(critic: Critic, batch, lr: float, opt: Adam = None) -> float:
    """One Adam (or plain gradient) step on mean((r - Q)^2); returns the pre-step loss."""
    states, actions, rewards = batch[0], batch[1], batch[2]
    loss, grads = critic_loss_and_grads(critic, states, actions, rewards)
    if lr != 0:
        if opt is None:
            for p, g in zip(critic.params, grads):
                p -= lr * g
        else:
            opt.step(critic.params, grads, lr)
    return loss


def _action_grad_of_q(critic: Critic, states, actions):
    q, acts = critic.forward(states, actions)
    _, g_in = critic.net.backward(acts, np.ones((q.size, 1)))
    return q, g_in[:, -1:]


def policy_loss_and_grads(policy: DiffusionPolicy, critic: Critic, states, noise):
    x_z, zs = noise
    a, tape = policy.run_chain(states, x_z, zs, record=True)
    q, dq_da = _action_grad_of_q(critic, states, a[:, 0])
    n = q.size
    loss = -float(np.mean(q))
    grads = policy.backprop(tape, -dq_da / n)
    return loss, grads


def policy_update(policy: DiffusionPolicy, critic: Critic, states, lr: float,
                  rng: np.random.Generator = None, opt: Adam = None, noise=None) -> float:
    """One step on -mean Q(s, a_theta(s)) through the full reverse chain; returns the pre-step loss."""
    states = np.atleast_2d(states)
    if noise is None:
        if rng is None:
            raise ValueError("need a generator or explicit noise")
        noise = policy.draw_noise(rng, states.shape[0])
    loss, grads = policy_loss_and_grads(policy, critic, states, noise)
    if lr != 0:
        if opt is None:
            for p, g in zip(policy.params, grads):
                p -= lr * g
        else:
            opt.step(policy.params, grads, lr)
    return loss


class Actor:
    """Deterministic state -> action network with a logistic output."""

    def __init__(self, state_dim: int, hidden=(64, 64), rng: np.random.Generator = None,
                 activation: str = "tanh"):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.net = Mlp(MlpSpec((state_dim,) + tuple(hidden) + (1,), activation), rng)

    @property
    def params(self):
        return self.net.params

    def act(self, states):
        return squash(self.net(np.atleast_2d(states)))[:, 0]


def actor_update(actor: Actor, critic: Critic, states, lr: float, opt: Adam = None) -> float:
    states = np.atleast_2d(states)
    out, acts = actor.net.forward(states)
    a = squash(out)
    q, dq_da = _action_grad_of_q(critic, states, a[:, 0])
    loss = -float(np.mean(q))
    grads, _ = actor.net.backward(acts, -dq_da * a * (1.0 - a) / q.size)
    if lr != 0:
        if opt is None:
            for p, g in zip(actor.params, grads):
                p -= lr * g
        else:
            opt.step(actor.params, grads, lr)
    return loss


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 5000
    batch: int = 64
    lr_policy: float = 1e-3
    lr_critic: float = 3e-3
    exploration: float = 0.2
    seed: int = 0
    eval_every: int = 100
    buffer_capacity: int = 10000
    hidden: tuple = (64, 64)
    emb_dim: int = 16
    diffusion_steps: int = 5
    beta_min: float = 1e-4
    beta_max: float = 0.2
    target_tau: float = 0.0
    squash_scale: float = 4.0

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        for k in ("steps", "batch", "eval_every", "buffer_capacity", "emb_dim", "diffusion_steps"):
            if int(getattr(self, k)) < 1:
                raise ValueError(f"{k} must be a positive integer")
        for k in ("lr_policy", "lr_critic"):
            if not getattr(self, k) > 0:
                raise ValueError(f"{k} must be positive")
        if self.exploration < 0:
            raise ValueError("exploration must be nonnegative")
        if not self.squash_scale > 0:
            raise ValueError("squash_scale must be positive")
        if not 0 <= self.target_tau <= 1:
            raise ValueError("target_tau must lie in [0, 1]")

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(asdict(self), sort_keys=True).encode()).hexdigest()


@dataclass
class TrainResult:
    """Learned model plus one row per evaluation: (step, eval_reward, loss_q, loss_pi)."""

    model: object
    critic: Critic
    trajectory: list = field(default_factory=list)

    @property
    def rewards(self) -> np.ndarray:
        return np.array([row[1] for row in self.trajectory])


class TrainingDiverged(RuntimeError):
    pass


class EnvSource:
    """Environments for training: a fixed list cycled in order, or samples from bounds."""

    def __init__(self, envs=None, bounds=None, p_max=None, base=None, seed: int = 0):
        if envs is None and bounds is None:
            raise ValueError("need fixed environments or bounds")
        self.envs = list(envs) if envs is not None else None
        self.bounds, self.p_max, self.base = bounds, p_max, base
        self.stream = CounterStream(seed, 11)

    def __call__(self, j: int) -> Environment:
        if self.envs is not None:
            return self.envs[j % len(self.envs)]
        return sample_environment(self.bounds, self.stream, j, self.p_max, self.base)


def _exploration_scale(cfg: TrainConfig, j: int) -> float:
    frac = j / max(cfg.steps - 1, 1)
    return cfg.exploration * (1.0 - 0.9 * frac)


def _soft_update(target, source, tau):
    for pt, ps in zip(target, source):
        pt *= 1.0 - tau
        pt += tau * ps


def _check_finite(j, loss_q, loss_pi, nets):
    if math.isfinite(loss_q) and math.isfinite(loss_pi):
        return
    norms = {name: [float(np.linalg.norm(p)) for p in net.params] for name, net in nets.items()}
    raise TrainingDiverged(json.dumps({"step": j, "loss_q": loss_q, "loss_pi": loss_pi, "param_norms": norms}))


def _train_loop(kind, envs, weights: QoeWeights, target: CovertTarget, cfg: TrainConfig,
                eval_envs=None, reward_fn=None):
    if not isinstance(envs, EnvSource):
        envs = EnvSource(envs=envs)
    eval_envs = list(eval_envs) if eval_envs is not None else [envs(i) for i in range(8)]
    reward_fn = reward_fn or (lambda env, k: reward(env, k, weights, target))
    root = CounterStream(cfg.seed, 12)
    rng = root.generator()
    init_rng = root.child(13).generator()
    if kind == "gdm":
        sched = NoiseSchedule.linear(cfg.diffusion_steps, cfg.beta_min, cfg.beta_max)
        model = DiffusionPolicy(STATE_DIM, sched, cfg.hidden, cfg.emb_dim, init_rng,
                                squash_scale=cfg.squash_scale)
    else:
        model = Actor(STATE_DIM, cfg.hidden, init_rng)
    critic = Critic(STATE_DIM, cfg.hidden, init_rng)
    target_critic = None
    if cfg.target_tau > 0:
        target_critic = Critic(STATE_DIM, cfg.hidden, init_rng)
        target_critic.net.set_params(critic.net.copy_params())
    opt_pi = Adam(model.params, cfg.lr_policy)
    opt_q = Adam(critic.params, cfg.lr_critic)
    buf = ReplayBuffer(cfg.buffer_capacity, STATE_DIM)
    eval_states = np.array([state_features(e) for e in eval_envs])

    def act_det(states):
        if kind == "gdm":
            return model.run_chain(states, np.zeros((states.shape[0], 1)), None)[:, 0]
        return model.act(states)

    def evaluate():
        acts = act_det(eval_states)
        return float(np.mean([reward_fn(e, float(a)) for e, a in zip(eval_envs, acts)]))

    result = TrainResult(model, critic)
    loss_q = loss_pi = float("nan")
    env = envs(0)
    state = state_features(env)
    for j in range(cfg.steps):
        if kind == "gdm":
            x_z, zs = model.draw_noise(rng, 1)
            a0 = float(model.run_chain(state[None, :], x_z, zs)[0, 0])
        else:
            a0 = float(model.act(state[None, :])[0])
        a = min(1.0, max(0.0, a0 + _exploration_scale(cfg, j) * rng.standard_normal()))
        r = reward_fn(env, a)
        next_env = envs(j + 1)
        next_state = state_features(next_env)
        buf.add(state, a, r, next_state)
        if len(buf) >= min(cfg.batch, cfg.buffer_capacity):
            batch = buf.sample(rng, cfg.batch)
            loss_q = critic_update(critic, batch, cfg.lr_critic, opt_q)
            guide = target_critic if target_critic is not None else critic
            if kind == "gdm":
                loss_pi = policy_update(model, guide, batch[0], cfg.lr_policy, rng, opt_pi)
            else:
                loss_pi = actor_update(model, guide, batch[0], cfg.lr_policy, opt_pi)
            if target_critic is not None:
                _soft_update(target_critic.params, critic.params, cfg.target_tau)
            _check_finite(j, loss_q, loss_pi, {"policy": model.net, "critic": critic.net})
        if (j + 1) % cfg.eval_every == 0 or j == cfg.steps - 1:
            result.trajectory.append((j + 1, evaluate(), loss_q, loss_pi))
            log.debug("step %d eval %.4f", j + 1, result.trajectory[-1][1])
        env, state = next_env, next_state
    return result


def train(envs, weights: QoeWeights, target: CovertTarget, cfg: TrainConfig, eval_envs=None,
          reward_fn=None) -> TrainResult:
    """Train the diffusion policy; ``envs`` is an :class:`EnvSource` or a list of environments."""
    return _train_loop("gdm", envs, weights, target, cfg, eval_envs, reward_fn)


def baseline_train(envs, weights: QoeWeights, target: CovertTarget, cfg: TrainConfig, eval_envs=None,
                   reward_fn=None) -> TrainResult:
    """Same loop with a direct state -> action actor in place of the diffusion chain."""
    return _train_loop("baseline", envs, weights, target, cfg, eval_envs, reward_fn)


def deterministic_action(model, env: Environment) -> float:
    s = state_features(env)[None, :]
    if isinstance(model, DiffusionPolicy):
        return float(model.run_chain(s, np.zeros((1, 1)), None)[0, 0])
    return float(model.act(s)[0])


def save_checkpoint(path, model, critic: Critic, cfg: TrainConfig, extra: dict = None):
    """Write all parameters, the schedule and the config digest to an ``.npz`` file."""
    meta = {"version": CHECKPOINT_VERSION, "kind": "gdm" if isinstance(model, DiffusionPolicy) else "baseline",
            "config": asdict(cfg), "config_sha256": cfg.digest(), "extra": extra or {}}
    if isinstance(model, DiffusionPolicy):
        meta["betas"] = list(model.schedule.betas)
    arrays = {f"model_{i}": p for i, p in enumerate(model.params)}
    arrays.update({f"critic_{i}": p for i, p in enumerate(critic.params)})
    np.savez(path, meta=np.array(json.dumps(meta, sort_keys=True)), **arrays)


def load_checkpoint(path):
    """Return (model, critic, config, metadata) from :func:`save_checkpoint` output."""
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
        cfg_d = dict(meta["config"])
        cfg_d["hidden"] = tuple(cfg_d["hidden"])
        cfg = TrainConfig(**cfg_d)
        if meta["kind"] == "gdm":
            model = DiffusionPolicy(STATE_DIM, NoiseSchedule(tuple(meta["betas"])), cfg.hidden, cfg.emb_dim,
                                    squash_scale=cfg.squash_scale)
        else:
            model = Actor(STATE_DIM, cfg.hidden)
        critic = Critic(STATE_DIM, cfg.hidden)
        model.net.set_params([z[f"model_{i}"] for i in range(len(model.params))])
        critic.net.set_params([z[f"critic_{i}"] for i in range(len(critic.params))])
    return model, critic, cfg, meta
