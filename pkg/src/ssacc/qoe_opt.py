"""QoE metric, constrained reward, mobility environments and the grid oracle
for the power split kappa = P_A / P_max (jammer gets the rest)."""
import math
from dataclasses import dataclass, field

import numpy as np

from ssacc.capacity import avg_rb_closed, avg_rw_closed, avg_rw_no_jamming, capacity_context
from ssacc.channel import SystemParams, reference_scenario
from ssacc.detection import amdep_ratio
from ssacc.rng import CounterStream

LINKS = ("d_AR", "d_JR", "d_RB", "d_RW")
DEFAULT_BOUNDS = ((20.0, 70.0),) * 4
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class QoeWeights:
    alpha: float = 0.5
    varsigma: float = 0.5

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        if not self.varsigma >= 0:
            raise ValueError("varsigma must be nonnegative")


@dataclass(frozen=True)
class CovertTarget:
    """Covertness requirement AMDEP >= 1 - lambda_cap; lambda_cap = 1 disables it."""

    lambda_cap: float = 0.2

    def __post_init__(self):
        if not 0 < self.lambda_cap <= 1:
            raise ValueError("lambda_cap must lie in (0, 1]")


@dataclass(frozen=True)
class Allocation:
    kappa: float

    def __post_init__(self):
        if not (isinstance(self.kappa, (int, float)) and 0 <= self.kappa <= 1):
            raise ValueError(f"kappa must lie in [0, 1], got {self.kappa!r}")


@dataclass(frozen=True)
class Environment:
    """One mobility state: realized link distances, power budget and fixed scenario settings.

    ``base`` supplies fading, RIS and noise settings; its distances and
    powers are overridden by ``realized`` and the allocation.
    """

    realized: tuple
    p_max: float
    bounds: tuple = DEFAULT_BOUNDS
    base: SystemParams = field(default_factory=reference_scenario)

    def __post_init__(self):
        object.__setattr__(self, "realized", tuple(float(d) for d in self.realized))
        object.__setattr__(self, "bounds", tuple((float(lo), float(hi)) for lo, hi in self.bounds))
        if len(self.realized) != 4 or len(self.bounds) != 4:
            raise ValueError("need four link distances and four bounds")
        for d, (lo, hi) in zip(self.realized, self.bounds):
            if not 0 < lo <= hi:
                raise ValueError("bounds must satisfy 0 < low <= high")
            if not lo <= d <= hi:
                raise ValueError(f"distance {d} outside bounds [{lo}, {hi}]")
        if not self.p_max > 0:
            raise ValueError("p_max must be positive")

    def params(self, kappa: float) -> SystemParams:
        """Scenario with P_A = kappa P_max and P_J_max = (1 - kappa) P_max, kappa in (0, 1)."""
        if not 0 < kappa < 1:
            raise ValueError("closed forms need kappa strictly inside (0, 1)")
        return self.base.with_distances(*self.realized).with_(
            P_A=kappa * self.p_max, P_J_max=(1.0 - kappa) * self.p_max)

    def ratio(self, kappa: float) -> float:
        """eta1 / eta2 = (1 - kappa) L3 / (kappa L4); inf at kappa = 0."""
        p = self.base.with_distances(*self.realized)
        den = kappa * p.L4
        if den == 0:
            return math.inf
        return (1.0 - kappa) * p.L3 / den


def fixed_environment(params: SystemParams, p_max: float, bounds=None) -> Environment:
    """Environment that pins the distances of ``params``."""
    realized = tuple(getattr(params, k) for k in LINKS)
    if bounds is None:
        bounds = tuple((d, d) for d in realized)
    return Environment(realized, p_max, bounds, params)


@dataclass(frozen=True)
class Metrics:
    kappa: float
    amdep: float
    rb: float
    rw: float
    asc: float
    qoe: float


def evaluate(env: Environment, kappa: float, weights: QoeWeights, u1: int = 100, u2: int = 100) -> Metrics:
    """Closed-form AMDEP, capacities and QoE at one allocation, with endpoint limits."""
    kappa = Allocation(kappa).kappa
    if kappa == 0:
        return Metrics(0.0, 1.0, 0.0, 0.0, 0.0, 0.0)
    if kappa == 1:
        p = env.base.with_distances(*env.realized).with_(P_A=env.p_max)
        ctx = capacity_context(p, u1, u2)
        rb = avg_rb_closed(ctx)
        rw = avg_rw_no_jamming(p)
        return Metrics(1.0, 0.0, rb, rw, rb - rw, weights.alpha * (rb - rw))
    p = env.params(kappa)
    ctx = capacity_context(p, u1, u2)
    amdep = amdep_ratio(env.ratio(kappa))
    rb = avg_rb_closed(ctx)
    rw = avg_rw_closed(ctx)
    asc = rb - rw
    return Metrics(kappa, amdep, rb, rw, asc, weights.alpha * asc + weights.varsigma * rw * amdep)


def qoe_closed(env: Environment, alloc, weights: QoeWeights) -> float:
    """alpha E(R_S) + varsigma E(R_W) AMDEP at the given allocation."""
    kappa = alloc.kappa if isinstance(alloc, Allocation) else alloc
    return evaluate(env, kappa, weights).qoe


def amdep_at(env: Environment, kappa: float) -> float:
    kappa = Allocation(kappa).kappa
    if kappa == 0:
        return 1.0
    return amdep_ratio(env.ratio(kappa))


def reward_from_metrics(m: Metrics, target: CovertTarget) -> float:
    if m.amdep < 1.0 - target.lambda_cap:
        return m.amdep - 1.0
    return m.qoe


def reward(env: Environment, alloc, weights: QoeWeights, target: CovertTarget, mc=None) -> float:
    """QoE when the covertness constraint holds, else the penalty AMDEP - 1.

    With ``mc`` (a :class:`ssacc.montecarlo.McConfig`) both the AMDEP and the
    QoE are Monte Carlo estimates instead of closed forms.
    """
    kappa = alloc.kappa if isinstance(alloc, Allocation) else Allocation(alloc).kappa
    if mc is None:
        amdep = amdep_at(env, kappa)
        if amdep < 1.0 - target.lambda_cap:
            return amdep - 1.0
        return evaluate(env, kappa, weights).qoe
    from ssacc.montecarlo import estimate_amdep, estimate_qoe
    if kappa in (0, 1):
        return reward_from_metrics(evaluate(env, kappa, weights), target)
    p = env.params(kappa)
    amdep = estimate_amdep(p, mc).mean
    if amdep < 1.0 - target.lambda_cap:
        return amdep - 1.0
    return estimate_qoe(p, weights, mc).mean


def sample_environment(bounds, stream: CounterStream, index: int, p_max: float,
                       base: SystemParams = None) -> Environment:
    """Environment number ``index``: each distance uniform on its bounds."""
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    u = stream.uniforms(index, 1, 4)[0]
    realized = tuple(min(hi, lo + (hi - lo) * ui) for (lo, hi), ui in zip(bounds, u))
    return Environment(realized, p_max, bounds, base if base is not None else reference_scenario())


def feasible_kappa_max(env: Environment, target: CovertTarget) -> float:
    """Largest kappa with AMDEP >= 1 - lambda_cap (AMDEP decreases in kappa)."""
    need = 1.0 - target.lambda_cap
    if need <= 0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if amdep_at(env, mid) >= need:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15:
            break
    return lo


@dataclass(frozen=True)
class OracleResult:
    kappa: float
    reward: float
    feasible: bool
    grid_kappa: float
    grid_reward: float


def grid_oracle(env: Environment, weights: QoeWeights, target: CovertTarget,
                grid_points: int = 1001, tol: float = 1e-6) -> OracleResult:
    """Best kappa on a uniform grid, refined by golden-section search on the neighbouring cells.

    Ties go to the smaller kappa.  If every grid point violates the
    covertness constraint the least-violating point is returned with
    ``feasible`` False.
    """
    if grid_points < 3:
        raise ValueError("grid_points must be >= 3")
    kappas = np.linspace(0.0, 1.0, grid_points)
    rewards = np.array([reward(env, float(k), weights, target) for k in kappas])
    best = float(np.max(rewards))
    i = int(np.flatnonzero(rewards == best)[0])
    k_grid = float(kappas[i])
    feasible = amdep_at(env, k_grid) >= 1.0 - target.lambda_cap
    lo = float(kappas[max(i - 1, 0)])
    hi = float(kappas[min(i + 1, grid_points - 1)])
    k_ref, r_ref = _golden_max(lambda k: reward(env, k, weights, target), lo, hi, tol)
    if r_ref > best and (amdep_at(env, k_ref) >= 1.0 - target.lambda_cap) == feasible:
        return OracleResult(k_ref, r_ref, feasible, k_grid, best)
    return OracleResult(k_grid, best, feasible, k_grid, best)


def _golden_max(f, lo, hi, tol):
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)
