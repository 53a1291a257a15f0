"""Special functions and Gauss-Laguerre rules.

Thin validated front-ends over the kernel backend.  Functions accept a
scalar or an array-like; arrays are evaluated elementwise and returned as
``numpy.ndarray``.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ssacc import _kernels

MAX_ORDER = 256
EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Laguerre rule for integrals of the form int_0^inf e^{-x} f(x) dx.

    ``log_weights`` is authoritative; ``weights`` is its exponential and
    underflows to zero for the outermost nodes of high-order rules.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray

    def integrate(self, f):
        """Apply the rule to ``f`` (vectorized over the node array)."""
        return float(np.sum(self.weights * f(self.nodes)))


@lru_cache(maxsize=None)
def gauss_laguerre(order: int) -> QuadratureRule:
    """Return the ``order``-point Gauss-Laguerre rule.

    Nodes are the roots of L_order found by Newton iteration on the
    three-term recurrence; weights are x / ((order+1)^2 L_{order+1}(x)^2).
    """
    if isinstance(order, bool) or int(order) != order:
        raise TypeError("quadrature order must be an integer")
    order = int(order)
    if order < 1 or order > MAX_ORDER:
        raise ValueError(f"quadrature order must be in [1, {MAX_ORDER}], got {order}")
    nodes, logw = _kernels.laguerre_rule(order)
    nodes = np.asarray(nodes, dtype=float)
    logw = np.asarray(logw, dtype=float)
    for arr in (nodes, logw):
        arr.setflags(write=False)
    weights = np.exp(logw)
    weights.setflags(write=False)
    return QuadratureRule(order, nodes, weights, logw)


def _elementwise(func, *args):
    arrays = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in args])
    if arrays[0].ndim == 0:
        return func(*[float(a) for a in arrays])
    out = np.empty(arrays[0].shape)
    flat = [a.ravel() for a in arrays]
    for i in range(out.size):
        out.flat[i] = func(*[f[i] for f in flat])
    return out


def log_gamma(x):
    """Natural log of the gamma function for x > 0."""
    if np.any(np.asarray(x) <= 0):
        raise ValueError("log_gamma requires x > 0")
    return _elementwise(_kernels.lgamma, x)


def lower_incomplete_gamma(s, x):
    """gamma(s, x) = int_0^x t^{s-1} e^{-t} dt."""
    if np.any(np.asarray(s) <= 0):
        raise ValueError("lower_incomplete_gamma requires s > 0")
    if np.any(np.asarray(x) < 0):
        raise ValueError("lower_incomplete_gamma requires x >= 0")
    return _elementwise(_kernels.lower_gamma, s, x)


def regularized_lower_gamma(s, x):
    """P(s, x) = gamma(s, x) / Gamma(s)."""
    if np.any(np.asarray(s) <= 0):
        raise ValueError("regularized_lower_gamma requires s > 0")
    if np.any(np.asarray(x) < 0):
        raise ValueError("regularized_lower_gamma requires x >= 0")
    return _elementwise(_kernels.regularized_lower_gamma, s, x)


def upper_incomplete_gamma(s, x):
    """Gamma(s, x) for s >= 0, x > 0, always from the continued fraction."""
    if np.any(np.asarray(s) < 0):
        raise ValueError("upper_incomplete_gamma requires s >= 0")
    if np.any(np.asarray(x) <= 0):
        raise ValueError("upper_incomplete_gamma requires x > 0")
    return _elementwise(_kernels.upper_gamma, s, x)


def upper_gamma_zero(x):
    """Gamma(0, x), the exponential integral E1(x), for x > 0."""
    if np.any(np.asarray(x) <= 0):
        raise ValueError("upper_gamma_zero diverges at 0; requires x > 0")
    return _elementwise(_kernels.e1, x)


def exp_scaled_gamma_zero(x):
    """g(x) = e^x Gamma(0, x), evaluated without forming e^x for large x."""
    if np.any(np.asarray(x) <= 0):
        raise ValueError("exp_scaled_gamma_zero requires x > 0")
    return _elementwise(_kernels.e1_scaled, x)
