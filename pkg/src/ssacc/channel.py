"""Scenario parameters, cascaded RIS fading statistics and channel samplers."""
import math
from dataclasses import dataclass, asdict, fields, replace

import numpy as np
from scipy.special import gammaincinv, ndtri

from ssacc import _kernels
from ssacc.numerics import log_gamma
from ssacc.rng import CounterStream

DEFAULT_TERMS = 512


def dbm_to_watts(dbm):
    """Convert dBm to watts: 10^((dBm - 30) / 10)."""
    out = 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)
    return float(out) if out.ndim == 0 else out


def watts_to_dbm(watts):
    w = np.asarray(watts, dtype=float)
    if np.any(w <= 0):
        raise ValueError("power must be positive to express in dBm")
    out = 10.0 * np.log10(w) + 30.0
    return float(out) if out.ndim == 0 else out


def path_loss(d, alpha):
    """Large-scale gain d^-alpha."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    if np.any(np.asarray(alpha) < 0):
        raise ValueError("path-loss exponent must be nonnegative")
    out = d ** (-np.asarray(alpha, dtype=float))
    return float(out) if out.ndim == 0 else out


_POWER_KEYS = ("P_A", "P_J_max", "sigma2_B", "sigma2_W")


@dataclass(frozen=True)
class SystemParams:
    """Geometry, fading, RIS and power settings of one scenario.

    Powers and noise are in watts, distances in meters.
    """

    d_AR: float
    d_JR: float
    d_RB: float
    d_RW: float
    alpha_AR: float
    alpha_JR: float
    alpha_RB: float
    alpha_RW: float
    m_AR: float
    m_JR: float
    m_RB: float
    m_RW: float
    N: int
    beta: float
    P_A: float
    P_J_max: float
    sigma2_B: float
    sigma2_W: float
    rho: float = 0.0

    def __post_init__(self):
        for name in ("d_AR", "d_JR", "d_RB", "d_RW") + _POWER_KEYS:
            v = getattr(self, name)
            ok = isinstance(v, (int, float)) and math.isfinite(v) and (v > 0 or (name == "P_A" and v == 0))
            if not ok:
                kind = "a nonnegative" if name == "P_A" else "a positive"
                raise ValueError(f"{name} must be {kind} finite number, got {v!r}")
        for name in ("alpha_AR", "alpha_JR", "alpha_RB", "alpha_RW"):
            if not getattr(self, name) >= 2:
                raise ValueError(f"{name} must be >= 2")
        for name in ("m_AR", "m_JR", "m_RB", "m_RW"):
            if not getattr(self, name) >= 0.5:
                raise ValueError(f"{name} must be >= 0.5")
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        object.__setattr__(self, "N", int(self.N))
        if not 0 < self.beta <= 1:
            raise ValueError("beta must lie in (0, 1]")
        if not 0 <= self.rho <= 1:
            raise ValueError("rho must lie in [0, 1]")

    @property
    def L1(self) -> float:
        """Alice-RIS-Bob composite loss."""
        return path_loss(self.d_RB, self.alpha_RB) * path_loss(self.d_AR, self.alpha_AR)

    @property
    def L2(self) -> float:
        """Jammer-RIS-Bob composite loss."""
        return path_loss(self.d_RB, self.alpha_RB) * path_loss(self.d_JR, self.alpha_JR)

    @property
    def L3(self) -> float:
        """Jammer-RIS-Willie composite loss."""
        return path_loss(self.d_RW, self.alpha_RW) * path_loss(self.d_JR, self.alpha_JR)

    @property
    def L4(self) -> float:
        """Alice-RIS-Willie composite loss."""
        return path_loss(self.d_RW, self.alpha_RW) * path_loss(self.d_AR, self.alpha_AR)

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def with_powers_dbm(self, P_A_dBm=None, P_J_dBm=None) -> "SystemParams":
        ch = {}
        if P_A_dBm is not None:
            ch["P_A"] = dbm_to_watts(P_A_dBm)
        if P_J_dBm is not None:
            ch["P_J_max"] = dbm_to_watts(P_J_dBm)
        return replace(self, **ch)

    def with_distances(self, d_AR, d_JR, d_RB, d_RW) -> "SystemParams":
        return replace(self, d_AR=float(d_AR), d_JR=float(d_JR), d_RB=float(d_RB), d_RW=float(d_RW))

    def to_dict(self, dbm: bool = False) -> dict:
        """Plain mapping; with ``dbm`` the powers are written as ``<key>_dBm``."""
        out = asdict(self)
        if dbm:
            for k in _POWER_KEYS:
                out[k + "_dBm"] = watts_to_dbm(out.pop(k))
        return out

    @classmethod
    def from_dict(cls, mapping: dict) -> "SystemParams":
        """Inverse of :meth:`to_dict`; each power may be given in watts or dBm, not both."""
        data = dict(mapping)
        for k in _POWER_KEYS:
            key_w, key_dbm = k + "_W", k + "_dBm"
            given = [x for x in (k, key_w, key_dbm) if x in data]
            if len(given) > 1:
                raise ValueError(f"{k} given more than once: {given}")
            if key_dbm in data:
                data[k] = dbm_to_watts(float(data.pop(key_dbm)))
            elif key_w in data:
                data[k] = float(data.pop(key_w))
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ValueError(f"unknown parameter keys: {unknown}")
        required = {f.name for f in fields(cls) if f.name != "rho"}
        missing = sorted(required - set(data))
        if missing:
            raise ValueError(f"missing parameter keys: {missing}")
        for k, v in data.items():
            if k != "N":
                data[k] = float(v)
        return cls(**data)


def reference_scenario(N: int = 8, P_A_dBm: float = 40.0, P_J_dBm: float = 40.0) -> SystemParams:
    """Reference scenario: 100 m Alice/jammer hops, Bob at 50 m, Willie at 20 m."""
    return SystemParams(
        d_AR=100.0, d_JR=100.0, d_RB=50.0, d_RW=20.0,
        alpha_AR=3.0, alpha_JR=2.5, alpha_RB=2.5, alpha_RW=2.5,
        m_AR=3.0, m_JR=3.0, m_RB=3.0, m_RW=3.0,
        N=N, beta=0.9,
        P_A=dbm_to_watts(P_A_dBm), P_J_max=dbm_to_watts(P_J_dBm),
        sigma2_B=dbm_to_watts(-80.0), sigma2_W=dbm_to_watts(-80.0),
        rho=0.0,
    )


@dataclass(frozen=True)
class CascadedStats:
    """Parameters of the normalized Bob cascaded gain.

    ``mu`` is (E|h_RB| E|h_AR|)^2, ``lam`` the noncentrality N mu / (1 - mu)
    and ``scale`` the normalization N (1 - mu).
    """

    mu: float
    lam: float
    scale: float


def _mean_abs_sq(m: float) -> float:
    # (E|h|)^2 for a unit-spread Nakagami-m magnitude
    return math.exp(2.0 * (log_gamma(m + 0.5) - log_gamma(m))) / m


def cascaded_stats(params: SystemParams) -> CascadedStats:
    mu = _mean_abs_sq(params.m_RB) * _mean_abs_sq(params.m_AR)
    N = params.N
    return CascadedStats(mu=mu, lam=N * mu / (1.0 - mu), scale=N * (1.0 - mu))


def _check_nonneg(x):
    if np.any(np.asarray(x) < 0):
        raise ValueError("x must be nonnegative")


def pdf_g_arb_sq(x, stats: CascadedStats, terms: int = DEFAULT_TERMS):
    """Noncentral chi-square (one degree of freedom) density of the Bob gain."""
    _check_nonneg(x)
    if terms < 1:
        raise ValueError("terms must be >= 1")
    f = np.vectorize(lambda v: math.exp(_kernels.ncx2_logpdf(v, stats.lam, terms)), otypes=[float])
    out = f(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


def cdf_g_arb_sq(x, stats: CascadedStats, terms: int = DEFAULT_TERMS):
    _check_nonneg(x)
    if terms < 1:
        raise ValueError("terms must be >= 1")
    f = np.vectorize(lambda v: _kernels.ncx2_cdf(v, stats.lam, terms), otypes=[float])
    out = f(np.asarray(x, dtype=float))
    return float(out) if out.ndim == 0 else out


def pdf_g_exp_sq(x, N: int):
    """Exponential density with mean N (non-Bob cascaded gains)."""
    _check_nonneg(x)
    if N < 1:
        raise ValueError("N must be >= 1")
    return np.exp(-np.asarray(x, dtype=float) / N) / N if np.ndim(x) else math.exp(-x / N) / N


def cdf_g_exp_sq(x, N: int):
    _check_nonneg(x)
    if N < 1:
        raise ValueError("N must be >= 1")
    return -np.expm1(-np.asarray(x, dtype=float) / N) if np.ndim(x) else -math.expm1(-x / N)


@dataclass(frozen=True)
class ChannelDraw:
    """Normalized squared cascaded gains and the realized jammer power.

    Fields are scalars or equal-length arrays (a batch of realizations).
    """

    g_ARB_sq: np.ndarray
    g_ARW_sq: np.ndarray
    g_JRB_sq: np.ndarray
    g_JRW_sq: np.ndarray
    p_J: np.ndarray

    def __len__(self):
        return int(np.size(self.g_ARB_sq))

    def __getitem__(self, idx) -> "ChannelDraw":
        return ChannelDraw(*(np.asarray(getattr(self, f.name))[idx] for f in fields(self)))


MODES = ("distribution", "exact")


def _nakagami(u, m):
    return np.sqrt(gammaincinv(m, u) / m)


def sample_draws(params: SystemParams, stats: CascadedStats, stream: CounterStream,
                 start: int, count: int, mode: str = "distribution") -> ChannelDraw:
    """Realizations ``start .. start+count-1`` of ``stream``.

    ``distribution`` mode draws the gains from their limiting laws
    (noncentral chi-square for Bob, exponential with mean N otherwise).
    ``exact`` mode builds each cascaded sum from per-element Nakagami
    magnitudes and uniform phases, with RIS phases aligned to Bob.
    """
    if mode == "distribution":
        u = stream.uniforms(start, count, 5)
        g_arb = (ndtri(u[:, 0]) + math.sqrt(stats.lam)) ** 2
        N = params.N
        exps = -N * np.log(u[:, 1:4])
        p_j = params.P_J_max * u[:, 4]
        return ChannelDraw(g_arb, exps[:, 0].copy(), exps[:, 1].copy(), exps[:, 2].copy(), p_j)
    if mode != "exact":
        raise ValueError(f"mode must be one of {MODES}")
    N = params.N
    u = stream.uniforms(start, count, 8 * N + 1)
    h_rb = _nakagami(u[:, 0:N], params.m_RB)
    h_ar = _nakagami(u[:, N:2 * N], params.m_AR)
    h_rw = _nakagami(u[:, 2 * N:3 * N], params.m_RW)
    h_jr = _nakagami(u[:, 3 * N:4 * N], params.m_JR)
    two_pi = 2.0 * math.pi
    ph_rb, ph_ar, ph_rw, ph_jr = (two_pi * u[:, k * N:(k + 1) * N] for k in range(4, 8))
    # RIS phases cancel phi_RB + phi_AR; the residues below remain on other links
    g_arb = np.sum(h_rb * h_ar, axis=1) ** 2 / stats.scale
    g_arw = np.abs(np.sum(h_rw * h_ar * np.exp(1j * (ph_rw - ph_rb)), axis=1)) ** 2
    g_jrb = np.abs(np.sum(h_rb * h_jr * np.exp(1j * (ph_jr - ph_ar)), axis=1)) ** 2
    g_jrw = np.abs(np.sum(h_rw * h_jr * np.exp(1j * (ph_rw + ph_jr - ph_rb - ph_ar)), axis=1)) ** 2
    p_j = params.P_J_max * u[:, 8 * N]
    return ChannelDraw(g_arb, g_arw, g_jrb, g_jrw, p_j)


def sample_draw(params: SystemParams, stats: CascadedStats, stream: CounterStream,
                index: int = 0, mode: str = "distribution") -> ChannelDraw:
    """Single realization number ``index`` as scalars."""
    d = sample_draws(params, stats, stream, index, 1, mode)
    return ChannelDraw(*(float(np.asarray(getattr(d, f.name))[0]) for f in fields(d)))


def sample_nakagami(m: float, stream: CounterStream, start: int, count: int) -> np.ndarray:
    """Unit-spread Nakagami-m magnitudes."""
    if m < 0.5:
        raise ValueError("Nakagami shape must be >= 0.5")
    return _nakagami(stream.uniforms(start, count, 1)[:, 0], m)
