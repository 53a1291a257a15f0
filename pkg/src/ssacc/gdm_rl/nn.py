"""Small multilayer perceptrons with hand-written backpropagation and Adam."""
from dataclasses import dataclass

import numpy as np

_ACTS = {
    "tanh": (np.tanh, lambda y: 1.0 - y * y),
    "relu": (lambda x: np.maximum(x, 0.0), lambda y: (y > 0).astype(float)),
    "linear": (lambda x: x, lambda y: np.ones_like(y)),
}


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths and activations; the output layer uses ``output``."""

    widths: tuple
    activation: str = "tanh"
    output: str = "linear"

    def __post_init__(self):
        if len(self.widths) < 2 or any(int(w) < 1 for w in self.widths):
            raise ValueError("need at least input and output widths, all positive")
        for a in (self.activation, self.output):
            if a not in _ACTS:
                raise ValueError(f"unknown activation {a!r}")


class Mlp:
    """Fully connected network y = f_L(... f_1(x W_1 + b_1) ...)."""

    def __init__(self, spec: MlpSpec, rng: np.random.Generator):
        self.spec = spec
        self.params = []
        w = spec.widths
        for i in range(len(w) - 1):
            lim = np.sqrt(6.0 / (w[i] + w[i + 1]))
            self.params.append(rng.uniform(-lim, lim, size=(w[i], w[i + 1])))
            self.params.append(np.zeros(w[i + 1]))

    @property
    def n_layers(self):
        return len(self.params) // 2

    def _act(self, layer):
        return self.spec.output if layer == self.n_layers - 1 else self.spec.activation

    def forward(self, x):
        """Return the output and the cache needed by :meth:`backward`."""
        acts = [x]
        h = x
        for i in range(self.n_layers):
            h = _ACTS[self._act(i)][0](h @ self.params[2 * i] + self.params[2 * i + 1])
            acts.append(h)
        return h, acts

    def __call__(self, x):
        return self.forward(x)[0]

    def backward(self, acts, grad_out):
        """Gradients of sum(grad_out * y) w.r.t. parameters and input."""
        grads = [None] * len(self.params)
        g = grad_out
        for i in reversed(range(self.n_layers)):
            g = g * _ACTS[self._act(i)][1](acts[i + 1])
            grads[2 * i] = acts[i].T @ g
            grads[2 * i + 1] = g.sum(axis=0)
            g = g @ self.params[2 * i].T
        return grads, g

    def copy_params(self):
        return [p.copy() for p in self.params]

    def set_params(self, params):
        self.params = [np.array(p, dtype=float) for p in params]


class Adam:
    def __init__(self, params, lr, b1=0.9, b2=0.999, eps=1e-8):
        self.lr = lr
        self.b1, self.b2, self.eps = b1, b2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads, lr=None):
        lr = self.lr if lr is None else lr
        if lr == 0:
            return
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
