"""Denoising-diffusion policy for a scalar action in [0, 1].

The reverse chain runs Z DDPM steps with fixed variance beta_t from x_Z,
then squashes x_0 with the logistic map a = 1 / (1 + exp(-x_0 / s)).  The
temperature s widens the latent range per unit of action, which shrinks the
action spread left by the last noisy reverse steps.  Every reverse step is
recorded on a tape so the policy loss can be differentiated through the
whole chain.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ssacc.gdm_rl.nn import Mlp, MlpSpec


@dataclass(frozen=True)
class NoiseSchedule:
    betas: tuple

    def __post_init__(self):
        b = np.asarray(self.betas, dtype=float)
        if b.ndim != 1 or b.size < 1:
            raise ValueError("need at least one diffusion step")
        if np.any(b < 0) or np.any(b >= 1):
            raise ValueError("betas must lie in [0, 1)")
        if np.any(np.diff(b) < 0):
            raise ValueError("betas must be nondecreasing")
        object.__setattr__(self, "betas", tuple(float(x) for x in b))

    @classmethod
    def linear(cls, steps: int = 5, beta_min: float = 1e-4, beta_max: float = 0.2) -> "NoiseSchedule":
        if steps < 1:
            raise ValueError("steps must be >= 1")
        if steps == 1:
            return cls((beta_min,))
        return cls(tuple(np.linspace(beta_min, beta_max, steps)))

    @property
    def steps(self) -> int:
        return len(self.betas)

    @property
    def alphas(self) -> np.ndarray:
        return 1.0 - np.asarray(self.betas)

    @property
    def alpha_bars(self) -> np.ndarray:
        return np.cumprod(self.alphas)


def step_embedding(t, dim: int) -> np.ndarray:
    """Sinusoidal embedding of step indices ``t`` (array of ints) into ``dim`` features."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    half = dim // 2
    freqs = np.exp(-np.log(1000.0) * np.arange(half) / max(half, 1))
    ang = t[:, None] * freqs[None, :]
    emb = np.concatenate([np.sin(ang), np.cos(ang)], axis=1)
    if dim % 2:
        emb = np.concatenate([emb, np.zeros((t.size, 1))], axis=1)
    return emb


def squash(x):
    return expit(x)


def forward_diffuse(x0, t: int, schedule: NoiseSchedule, rng: np.random.Generator):
    """x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) xi with xi standard normal."""
    if not 1 <= t <= schedule.steps:
        raise ValueError(f"t must lie in [1, {schedule.steps}]")
    x0 = np.asarray(x0, dtype=float)
    abar = schedule.alpha_bars[t - 1]
    return np.sqrt(abar) * x0 + np.sqrt(1.0 - abar) * rng.standard_normal(x0.shape)


class DiffusionPolicy:
    """Noise-prediction network eps_theta(state, x_t, t) with its schedule."""

    def __init__(self, state_dim: int, schedule: NoiseSchedule, hidden=(64, 64), emb_dim: int = 16,
                 rng: np.random.Generator = None, activation: str = "tanh", squash_scale: float = 1.0):
        rng = rng if rng is not None else np.random.default_rng(0)
        if not squash_scale > 0:
            raise ValueError("squash_scale must be positive")
        self.squash_scale = float(squash_scale)
        self.state_dim = state_dim
        self.schedule = schedule
        self.emb_dim = emb_dim
        self.net = Mlp(MlpSpec((state_dim + 1 + emb_dim,) + tuple(hidden) + (1,), activation), rng)
        self._emb = step_embedding(np.arange(1, schedule.steps + 1), emb_dim)

    @property
    def params(self):
        return self.net.params

    def _coeffs(self, t):
        s = self.schedule
        beta = s.betas[t - 1]
        alpha = 1.0 - beta
        abar = s.alpha_bars[t - 1]
        c1 = 1.0 / np.sqrt(alpha)
        c2 = c1 * beta / np.sqrt(1.0 - abar) if abar < 1.0 else 0.0
        return c1, c2, np.sqrt(beta)

    def draw_noise(self, rng: np.random.Generator, batch: int):
        """x_Z and the per-step noises for steps Z..2 (step 1 adds none)."""
        return rng.standard_normal((batch, 1)), rng.standard_normal((self.schedule.steps, batch, 1))

    def run_chain(self, states, x_z, zs, record: bool = False):
        """Reverse chain from ``x_z``; ``zs[t-1]`` is the noise added at step t (ignored for t=1).

        Returns the squashed actions, and the tape if ``record``.
        """
        states = np.atleast_2d(states)
        x = np.asarray(x_z, dtype=float).reshape(-1, 1)
        n = x.shape[0]
        tape = []
        for t in range(self.schedule.steps, 0, -1):
            inp = np.concatenate([states, x, np.broadcast_to(self._emb[t - 1], (n, self.emb_dim))], axis=1)
            eps, acts = self.net.forward(inp)
            c1, c2, sig = self._coeffs(t)
            if record:
                tape.append((t, acts))
            x = c1 * x - c2 * eps
            if t > 1 and zs is not None:
                x = x + sig * zs[t - 1]
        a = squash(x / self.squash_scale)
        return (a, (tape, a)) if record else a

    def backprop(self, tape_out, grad_a):
        """Gradient of sum(grad_a * a) w.r.t. network parameters."""
        tape, a = tape_out
        g = grad_a * a * (1.0 - a) / self.squash_scale
        total = [np.zeros_like(p) for p in self.net.params]
        for t, acts in reversed(tape):
            c1, c2, _ = self._coeffs(t)
            grads, g_in = self.net.backward(acts, -c2 * g)
            for k, gk in enumerate(grads):
                total[k] += gk
            g = c1 * g + g_in[:, self.state_dim:self.state_dim + 1]
        return total


def generate_action(policy: DiffusionPolicy, state, rng: np.random.Generator = None,
                    deterministic: bool = False):
    """Actions in [0, 1] for a state (1-D) or batch of states (2-D).

    Deterministic mode starts from x_Z = 0 and adds no per-step noise.
    """
    states = np.atleast_2d(np.asarray(state, dtype=float))
    n = states.shape[0]
    if deterministic:
        a = policy.run_chain(states, np.zeros((n, 1)), None)
    else:
        if rng is None:
            raise ValueError("stochastic generation needs a generator")
        x_z, zs = policy.draw_noise(rng, n)
        a = policy.run_chain(states, x_z, zs)
    a = a[:, 0]
    return float(a[0]) if np.ndim(state) == 1 else a
