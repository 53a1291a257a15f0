"""Instantaneous SINRs, secrecy capacity and the quadrature closed forms of the
average Bob, Willie and secrecy capacities (bits/s/Hz).

The closed forms assume perfect self-interference cancellation at Bob
(rho = 0) and uniform jammer power on [0, P_J_max].
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from ssacc import _kernels
from ssacc.channel import (DEFAULT_TERMS, CascadedStats, ChannelDraw, SystemParams,
                           cascaded_stats)
from ssacc.numerics import QuadratureRule, gauss_laguerre

LN2 = math.log(2.0)
DEFAULT_ORDER = 100


class ApproximationWarning(UserWarning):
    """Closed-form ASC fell below zero; the E(R_B) - E(R_W) form is unreliable there."""


@dataclass(frozen=True)
class CapacityContext:
    """Precomputed constants for one scenario.

    ``varpi1`` is Bob's SNR per unit normalized gain and ``nu2`` the
    prefactor P_A L4 / (P_J_max L3 ln 2) of the Willie outer integral.
    ``bob_scale`` stretches the Bob quadrature nodes (1 keeps the plain rule).
    """

    params: SystemParams
    stats: CascadedStats
    rule_b: QuadratureRule
    rule_w: QuadratureRule
    varpi1: float
    nu2: float
    bob_scale: float
    terms: int = DEFAULT_TERMS

    @property
    def varpi2(self) -> float:
        p = self.params
        return p.beta ** 2 * p.P_A * p.L4

    @property
    def k3(self) -> float:
        """beta^2 P_J_max L3 / sigma_W^2: jamming-to-noise ratio at Willie per unit gain."""
        p = self.params
        return p.beta ** 2 * p.P_J_max * p.L3 / p.sigma2_W

    @property
    def u0(self) -> float:
        """sigma_W^2 / (N varpi2): inverse mean SNR of Willie without jamming."""
        return self.params.sigma2_W / (self.params.N * self.varpi2)


def auto_bob_scale(lam: float, rule: QuadratureRule) -> float:
    """Node stretch so that the rule reaches about 12 standard deviations past the mean gain."""
    reach = lam + 1.0 + 12.0 * math.sqrt(2.0 + 4.0 * lam)
    return max(1.0, reach / (0.8 * float(rule.nodes[-1])))


def capacity_context(params: SystemParams, u1: int = DEFAULT_ORDER, u2: int = DEFAULT_ORDER,
                     terms: int = DEFAULT_TERMS, bob_scale=None) -> CapacityContext:
    stats = cascaded_stats(params)
    rule_b = gauss_laguerre(u1)
    rule_w = gauss_laguerre(u2)
    varpi1 = params.P_A * params.L1 * stats.scale * params.beta ** 2 / params.sigma2_B
    nu2 = params.P_A * params.L4 / (params.P_J_max * params.L3 * LN2)
    if bob_scale is None:
        bob_scale = auto_bob_scale(stats.lam, rule_b)
    if not bob_scale > 0:
        raise ValueError("bob_scale must be positive")
    return CapacityContext(params, stats, rule_b, rule_w, varpi1, nu2, float(bob_scale), terms)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def sinr_bob(params: SystemParams, draw: ChannelDraw, stats: CascadedStats = None):
    if stats is None:
        stats = cascaded_stats(params)
    b2 = params.beta ** 2
    sig = params.P_A * b2 * stats.scale * np.asarray(draw.g_ARB_sq) * params.L1
    interf = params.rho * np.asarray(draw.p_J) * b2 * np.asarray(draw.g_JRB_sq) * params.L2
    return _scalar(sig / (interf + params.sigma2_B))


def sinr_willie(params: SystemParams, draw: ChannelDraw):
    b2 = params.beta ** 2
    sig = params.P_A * b2 * np.asarray(draw.g_ARW_sq) * params.L4
    jam = np.asarray(draw.p_J) * b2 * np.asarray(draw.g_JRW_sq) * params.L3
    return _scalar(sig / (jam + params.sigma2_W))


def secrecy_from_sinr(psi_b, psi_w):
    return _scalar(np.maximum(np.log2(1.0 + np.asarray(psi_b)) - np.log2(1.0 + np.asarray(psi_w)), 0.0))


def secrecy_capacity(params: SystemParams, draw: ChannelDraw, stats: CascadedStats = None):
    """[log2(1 + psi_B) - log2(1 + psi_W)]^+."""
    return secrecy_from_sinr(sinr_bob(params, draw, stats), sinr_willie(params, draw))


def avg_rb_closed(ctx: CapacityContext) -> float:
    """Gauss-Laguerre evaluation of E[log2(1 + varpi1 X)], X noncentral chi-square.

    The density series and the rule are fused in log space.  Raises
    ``ArithmeticError`` if a term is not finite; a larger order or
    ``bob_scale`` is then needed.
    """
    rule = ctx.rule_b
    return _kernels.bob_sum(rule.nodes, rule.log_weights, ctx.bob_scale, ctx.stats.lam,
                            ctx.varpi1, ctx.terms)


def avg_rw_closed(ctx: CapacityContext, split: bool = True) -> float:
    """Willie capacity nu2 * int_0^inf e^{-t} Phi2(t) dt.

    Phi2(t) = [ln(1 + nu3) + g(u0 (1 + nu3)) - g(u0)] / t with
    nu3 = k3 N t and g(x) = e^x Gamma(0, x).  With ``split`` the integral is
    cut at t = 1 and the head is remapped to a second Laguerre panel, which
    resolves the knee of Phi2 near t ~ 1 / (k3 N); ``split=False`` is the
    plain single-panel rule.
    """
    if ctx.params.P_A == 0:
        return 0.0
    rule = ctx.rule_w
    k3n = ctx.k3 * ctx.params.N
    s = _kernels.willie_sum(rule.nodes, rule.weights, k3n, ctx.u0, 1.0 if split else 0.0)
    return ctx.nu2 * s


def asc_closed(ctx: CapacityContext, split: bool = True) -> float:
    """E(R_B) - E(R_W); warns with :class:`ApproximationWarning` when negative."""
    val = avg_rb_closed(ctx) - avg_rw_closed(ctx, split)
    if val < 0:
        warnings.warn(f"closed-form ASC is negative ({val:.3g})", ApproximationWarning, stacklevel=2)
    return val


def avg_rw_no_jamming(params: SystemParams) -> float:
    """E[log2(1 + varpi2 X / sigma_W^2)] for X exponential with mean N: g(u0) / ln 2."""
    if params.P_A == 0:
        return 0.0
    u0 = params.sigma2_W / (params.N * params.beta ** 2 * params.P_A * params.L4)
    return _kernels.e1_scaled(u0) / LN2


def _j2_scalar(x, y, p):
    a = p.sigma2_W / p.beta ** 2
    A = p.P_A * p.L4 * x
    if A == 0.0:
        return 0.0
    w = p.L3 * y * p.P_J_max
    if w < 1e-7 * a:
        return (math.log1p(A / a) - 0.5 * w * A / (a * (a + A))) / LN2
    return (A * math.log1p(w / (a + A)) + (a + w) * math.log1p(A / (a + w))
            - a * math.log1p(A / a)) / (w * LN2)


def j2(x, y, ctx: CapacityContext):
    """Jammer-power average of log2(1 + psi_W) given Willie gains x (ARW) and y (JRW).

    Averages over p_J uniform on [0, P_J_max]; y = 0 gives the
    no-jamming value.  Result in bits/s/Hz.
    """
    if np.any(np.asarray(x) < 0) or np.any(np.asarray(y) < 0):
        raise ValueError("gains must be nonnegative")
    f = np.vectorize(lambda a, b: _j2_scalar(a, b, ctx.params), otypes=[float])
    return _scalar(f(x, y))


def _j3_scalar(y, ctx):
    p = ctx.params
    u0 = ctx.u0
    g0 = _kernels.e1_scaled(u0)
    # bracket = int_{u0}^{u} g(s) ds with u - u0 = d
    d = p.beta ** 2 * p.P_J_max * p.L3 * y / (p.N * ctx.varpi2)
    if d < 1e-5 * u0:
        if y == 0.0:
            return g0 / LN2
        bracket = d * (g0 + 0.5 * d * (g0 - 1.0 / u0))
    else:
        bracket = math.log1p(d / u0) + _kernels.e1_scaled(u0 + d) - g0
    return p.N * ctx.nu2 / y * bracket


def j3(y, ctx: CapacityContext):
    """Average of :func:`j2` over the exponential ARW gain, for JRW gain y."""
    if np.any(np.asarray(y) < 0):
        raise ValueError("gain must be nonnegative")
    f = np.vectorize(lambda b: _j3_scalar(b, ctx), otypes=[float])
    return _scalar(f(y))
