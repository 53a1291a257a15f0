"""Experiment runners: each returns (columns, rows) for one CSV artifact."""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from ssacc.capacity import avg_rb_closed, avg_rw_closed, capacity_context
from ssacc.channel import dbm_to_watts, watts_to_dbm
from ssacc.detection import amdep_closed, eta_pair
from ssacc.gdm_rl.agent import EnvSource, baseline_train, train
from ssacc.montecarlo import estimate_amdep, estimate_avg_capacity
from ssacc.qoe_opt import (evaluate, fixed_environment, grid_oracle, reward_from_metrics,
                           sample_environment)
from ssacc.rng import CounterStream

log = logging.getLogger(__name__)

ENV_STREAM = 31


def _pmap(fn, items, workers):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _mc(spec):
    return replace(spec.mc, workers=spec.workers)


def validate_amdep(spec):
    cols = ["N", "P_A_dBm", "P_J_dBm", "amdep_closed", "amdep_mc", "amdep_se", "samples", "seed"]
    rows = []
    pj = watts_to_dbm(spec.params.P_J_max)
    for N in spec.sweep["N"]:
        for pa in spec.sweep["P_A_dBm"]:
            p = spec.params.with_(N=int(N)).with_powers_dbm(P_A_dBm=pa)
            est = estimate_amdep(p, _mc(spec))
            rows.append([int(N), float(pa), pj, amdep_closed(eta_pair(p)), est.mean, est.std_error,
                         est.count, spec.mc.seed])
    return cols, rows


def validate_capacity(spec):
    cols = ["N", "P_A_dBm", "P_J_dBm", "rb_closed", "rb_mc", "rb_se", "rw_closed", "rw_mc", "rw_se",
            "asc_closed", "asc_mc", "asc_se", "samples", "seed"]
    absolute = spec.report["absolute_rates"]
    bw = float(spec.report["bandwidth_hz"])
    if absolute:
        cols += ["rb_closed_bps", "rw_closed_bps", "asc_closed_bps"]
    rows = []
    pj = watts_to_dbm(spec.params.P_J_max)
    q = spec.quadrature
    for N in spec.sweep["N"]:
        for pa in spec.sweep["P_A_dBm"]:
            p = spec.params.with_(N=int(N)).with_powers_dbm(P_A_dBm=pa)
            ctx = capacity_context(p, q["u1"], q["u2"], q["terms"])
            rb, rw = avg_rb_closed(ctx), avg_rw_closed(ctx)
            e = {w: estimate_avg_capacity(p, _mc(spec), w) for w in ("bob", "willie", "secrecy")}
            row = [int(N), float(pa), pj, rb, e["bob"].mean, e["bob"].std_error, rw, e["willie"].mean,
                   e["willie"].std_error, rb - rw, e["secrecy"].mean, e["secrecy"].std_error,
                   spec.mc.samples, spec.mc.seed]
            if absolute:
                row += [rb * bw, rw * bw, (rb - rw) * bw]
            rows.append(row)
    return cols, rows


_SWEEP_COLS = ["env_id", "d_AR", "d_JR", "d_RB", "d_RW", "p_max_dBm", "kappa", "amdep", "asc", "rw", "qoe",
               "reward", "feasible"]


def _sweep_row(env_id, env, m, target):
    r = reward_from_metrics(m, target)
    return [env_id, *env.realized, watts_to_dbm(env.p_max), m.kappa, m.amdep, m.asc, m.rw, m.qoe, r,
            m.amdep >= 1.0 - target.lambda_cap]


def _table_env(spec, p_max_dbm):
    return fixed_environment(spec.params, dbm_to_watts(p_max_dbm))


def sweep_kappa(spec):
    n = spec.sweep["kappa_points"]
    kappas = [i / (n - 1) for i in range(n)]
    rows = []
    q = spec.quadrature
    for env_id, pm in enumerate(spec.sweep["P_max_dBm"]):
        env = _table_env(spec, pm)
        ms = _pmap(lambda k: evaluate(env, k, spec.weights, q["u1"], q["u2"]), kappas, spec.workers)
        rows += [_sweep_row(env_id, env, m, spec.target) for m in ms]
    return _SWEEP_COLS, rows


def sweep_pmax(spec):
    rows = []
    q = spec.quadrature
    for env_id, pm in enumerate(spec.sweep["P_max_dBm"]):
        env = _table_env(spec, pm)
        for k in spec.sweep["kappas"]:
            rows.append(_sweep_row(env_id, env, evaluate(env, float(k), spec.weights, q["u1"], q["u2"]),
                                   spec.target))
    return _SWEEP_COLS, rows


def sample_envs(spec, count=None, offset=0):
    stream = CounterStream(spec.env_seed, ENV_STREAM)
    count = spec.env_count if count is None else count
    return [sample_environment(spec.bounds, stream, offset + i, spec.p_max, spec.params)
            for i in range(count)]


def optimize_grid(spec):
    cols = ["env_id", "d_AR", "d_JR", "d_RB", "d_RW", "p_max_dBm", "kappa_star", "reward_star", "feasible",
            "grid_kappa", "grid_reward", "amdep", "asc", "rw", "qoe"]
    envs = sample_envs(spec)
    res = _pmap(lambda e: grid_oracle(e, spec.weights, spec.target, spec.sweep["grid_points"]), envs,
                spec.workers)
    rows = []
    for i, (env, o) in enumerate(zip(envs, res)):
        m = evaluate(env, o.kappa, spec.weights)
        rows.append([i, *env.realized, watts_to_dbm(env.p_max), o.kappa, o.reward, o.feasible, o.grid_kappa,
                     o.grid_reward, m.amdep, m.asc, m.rw, m.qoe])
    return cols, rows


_TRAIN_COLS = ["learner", "seed", "step", "eval_reward", "loss_q", "loss_pi"]


def _train_rows(spec, kinds):
    rows = []
    eval_envs = sample_envs(spec, spec.training_extra["eval_envs"], offset=10_000)
    for seed in spec.training_extra["seeds"]:
        cfg = replace(spec.train, seed=int(seed))
        for kind in kinds:
            source = EnvSource(bounds=spec.bounds, p_max=spec.p_max, base=spec.params, seed=int(seed))
            fn = train if kind == "gdm" else baseline_train
            res = fn(source, spec.weights, spec.target, cfg, eval_envs=eval_envs)
            rows += [[kind, int(seed), step, er, lq, lp] for step, er, lq, lp in res.trajectory]
    return _TRAIN_COLS, rows


def train_gdm(spec):
    return _train_rows(spec, ["gdm"])


def train_baseline(spec):
    return _train_rows(spec, ["baseline"])


def compare(spec):
    return _train_rows(spec, ["gdm", "baseline"])


RUNNERS = {
    "validate-amdep": validate_amdep,
    "validate-capacity": validate_capacity,
    "sweep-kappa": sweep_kappa,
    "sweep-pmax": sweep_pmax,
    "optimize-grid": optimize_grid,
    "train-gdm": train_gdm,
    "train-baseline": train_baseline,
    "compare": compare,
}


def run_experiment(spec):
    return RUNNERS[spec.kind](spec)
