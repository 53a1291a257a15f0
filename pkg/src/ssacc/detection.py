"""Radiometer detection at the warden: FAP, MDP, DEP and its channel average.

With infinitely many samples the radiometer statistic equals the mean
received power.  Under H0 it is zeta1 * p_J + zeta2, under H1 it is
zeta1 * p_J + zeta3, with p_J uniform on [0, P_J_max].  All functions below
broadcast over arrays of coefficients and thresholds.
"""
import math
from dataclasses import dataclass

import numpy as np

from ssacc.channel import ChannelDraw, SystemParams


@dataclass(frozen=True)
class DetectionCoefficients:
    """Received-power coefficients and the four threshold breakpoints."""

    zeta1: np.ndarray
    zeta2: np.ndarray
    zeta3: np.ndarray
    p_j_max: float

    @property
    def tau1(self):
        return self.zeta2

    @property
    def tau2(self):
        return self.zeta1 * self.p_j_max + self.zeta2

    @property
    def tau3(self):
        return self.zeta3

    @property
    def tau4(self):
        return self.zeta1 * self.p_j_max + self.zeta3


@dataclass(frozen=True)
class EtaPair:
    eta1: float
    eta2: float

    def __post_init__(self):
        if not (self.eta1 > 0 and self.eta2 >= 0):
            raise ValueError("eta1 must be positive and eta2 nonnegative")


def coefficients(params: SystemParams, draw: ChannelDraw) -> DetectionCoefficients:
    b2 = params.beta ** 2
    zeta1 = params.L3 * b2 * np.asarray(draw.g_JRW_sq, dtype=float)
    zeta2 = np.full_like(zeta1, params.sigma2_W)
    zeta3 = params.L4 * params.P_A * b2 * np.asarray(draw.g_ARW_sq, dtype=float) + params.sigma2_W
    if zeta1.ndim == 0:
        zeta1, zeta2, zeta3 = float(zeta1), float(zeta2), float(zeta3)
    return DetectionCoefficients(zeta1, zeta2, zeta3, params.P_J_max)


def _ramp(tau, lo, width):
    # fraction of Uniform[0, 1) jammer mass below (tau - lo) / width, point mass if width == 0
    tau, lo, width = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (tau, lo, width)))
    out = np.where(tau >= lo, 1.0, 0.0)
    pos = width > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.clip((tau - lo) / np.where(pos, width, 1.0), 0.0, 1.0)
    return np.where(pos, frac, out)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def fap_fixed(c: DetectionCoefficients, tau):
    """P(T > tau | H0) for a fixed threshold tau."""
    _check_tau(tau)
    return _scalar(1.0 - _ramp(tau, c.zeta2, c.zeta1 * c.p_j_max))


def mdp_fixed(c: DetectionCoefficients, tau):
    """P(T < tau | H1) for a fixed threshold tau."""
    _check_tau(tau)
    return _scalar(_ramp(tau, c.zeta3, c.zeta1 * c.p_j_max))


def dep_fixed(c: DetectionCoefficients, tau):
    """FAP + MDP, clamped to [0, 1]."""
    return _scalar(np.clip(np.asarray(fap_fixed(c, tau)) + np.asarray(mdp_fixed(c, tau)), 0.0, 1.0))


def _check_tau(tau):
    if np.any(np.asarray(tau) < 0):
        raise ValueError("threshold must be nonnegative")


def min_dep(c: DetectionCoefficients):
    """Minimum DEP over thresholds and the closed interval attaining it.

    Returns ``(value, (lo, hi))``.  When the H0 and H1 power ranges are
    disjoint (tau2 <= tau3) the minimum is 0 on [tau2, tau3]; otherwise it is
    1 - (zeta3 - zeta2) / (zeta1 P_J_max) on [tau3, tau2].
    """
    z1p = np.asarray(c.zeta1 * c.p_j_max, dtype=float)
    gap = np.asarray(c.zeta3 - c.zeta2, dtype=float)
    tau2 = np.asarray(c.tau2, dtype=float)
    tau3 = np.asarray(c.tau3, dtype=float)
    separated = tau2 <= tau3
    with np.errstate(divide="ignore", invalid="ignore"):
        overlap = 1.0 - gap / np.where(z1p > 0, z1p, 1.0)
    value = np.where(separated, 0.0, np.clip(overlap, 0.0, 1.0))
    value = np.where(gap <= 0, 1.0, value)
    lo = np.minimum(tau2, tau3)
    hi = np.maximum(tau2, tau3)
    return _scalar(value), (_scalar(lo), _scalar(hi))


def eta_pair(params: SystemParams) -> EtaPair:
    """eta1 = P_J_max L3 beta^2 and eta2 = P_A L4 beta^2."""
    b2 = params.beta ** 2
    return EtaPair(params.P_J_max * params.L3 * b2, params.P_A * params.L4 * b2)


def amdep_closed(eta: EtaPair) -> float:
    """Average minimum DEP 1 - ln(1 + r) / r with r = eta1 / eta2."""
    r = eta.eta1 / eta.eta2 if eta.eta2 > 0 else math.inf
    if math.isinf(r):
        return 1.0
    if r < 1e-8:
        # 1 - ln(1+r)/r = r/2 - r^2/3 + ...
        return r / 2.0 - r * r / 3.0
    return 1.0 - math.log1p(r) / r


def amdep_ratio(r):
    """AMDEP as a function of r = eta1 / eta2 (vectorized, r >= 0)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("ratio must be nonnegative")
    small = r < 1e-8
    rs = np.where(small, r, 0.0)
    rl = np.where(small | np.isinf(r), 1.0, r)
    out = np.where(small, rs / 2.0 - rs * rs / 3.0, 1.0 - np.log1p(rl) / rl)
    return _scalar(np.where(np.isinf(r), 1.0, out))
