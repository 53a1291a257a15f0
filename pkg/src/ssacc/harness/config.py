"""Strict YAML experiment configuration.

Every key is declared below with its type and whether it is optional.
Unknown keys are errors (reported with their line), optional keys that are
absent take their default and the substitution is logged.
"""
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field

import yaml

from ssacc.channel import SystemParams, dbm_to_watts
from ssacc.gdm_rl.agent import TrainConfig
from ssacc.montecarlo import McConfig
from ssacc.qoe_opt import LINKS, CovertTarget, QoeWeights

log = logging.getLogger(__name__)

KINDS = ("validate-amdep", "validate-capacity", "sweep-kappa", "sweep-pmax", "optimize-grid",
         "train-gdm", "train-baseline", "compare")

REQUIRED = object()

_NUM = (int, float)
_POWER_KEYS = ("P_A", "P_J_max", "sigma2_B", "sigma2_W")

_SYSTEM = {
    **{k: (_NUM, REQUIRED) for k in ("d_AR", "d_JR", "d_RB", "d_RW")},
    **{f"alpha_{k}": (_NUM, REQUIRED) for k in ("AR", "JR", "RB", "RW")},
    **{f"m_{k}": (_NUM, REQUIRED) for k in ("AR", "JR", "RB", "RW")},
    "N": (int, REQUIRED),
    "beta": (_NUM, REQUIRED),
    "rho": (_NUM, 0.0),
    **{f"{k}_dBm": (_NUM, None) for k in _POWER_KEYS},
    **{f"{k}_W": (_NUM, None) for k in _POWER_KEYS},
}

_SCHEMA = {
    "system": (dict, REQUIRED, _SYSTEM),
    "montecarlo": (dict, {}, {
        "samples": (int, 100_000), "seed": (int, 0), "batch": (int, 100_000),
        "mode": (str, "distribution"),
    }),
    "quadrature": (dict, {}, {"u1": (int, 100), "u2": (int, 100), "terms": (int, 512)}),
    "qoe": (dict, {}, {"alpha": (_NUM, 0.5), "varsigma": (_NUM, 0.5), "lambda_cap": (_NUM, 0.2)}),
    "environment": (dict, {}, {
        "bounds": (dict, {}, {k: (list, [20.0, 70.0]) for k in LINKS}),
        "p_max_dBm": (_NUM, None), "p_max_W": (_NUM, None),
        "count": (int, 5), "seed": (int, 0),
    }),
    "sweep": (dict, {}, {
        "P_A_dBm": (list, [20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0]),
        "N": (list, [8, 128]),
        "kappa_points": (int, 101),
        "kappas": (list, [0.2, 0.8]),
        "P_max_dBm": (list, [40.0, 50.0]),
        "grid_points": (int, 1001),
    }),
    "training": (dict, {}, {
        "steps": (int, 5000), "batch": (int, 64), "lr_policy": (_NUM, 1e-3), "lr_critic": (_NUM, 3e-3),
        "exploration": (_NUM, 0.2), "seed": (int, 0), "eval_every": (int, 100),
        "buffer_capacity": (int, 10000), "hidden": (list, [64, 64]), "emb_dim": (int, 16),
        "diffusion_steps": (int, 5), "beta_min": (_NUM, 1e-4), "beta_max": (_NUM, 0.2),
        "target_tau": (_NUM, 0.0), "squash_scale": (_NUM, 4.0),
        "seeds": (list, [0, 1, 2, 3, 4]), "eval_envs": (int, 8),
    }),
    "report": (dict, {}, {"bandwidth_hz": (_NUM, 1e6), "absolute_rates": (bool, False)}),
}


class ConfigError(ValueError):
    """Configuration problem; ``problems`` lists (key path, line, message)."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(f"{p}{f' (line {ln})' if ln else ''}: {m}" for p, ln, m in self.problems))

    def record(self) -> dict:
        return {"error": "config", "problems": [{"key": p, "line": ln, "message": m} for p, ln, m in self.problems]}


def _to_python(node, lines, path):
    """Build Python values from a YAML node tree, remembering the line of every key."""
    if isinstance(node, yaml.MappingNode):
        out = {}
        for knode, vnode in node.value:
            key = knode.value
            sub = f"{path}.{key}" if path else key
            if key in out:
                raise ConfigError([(sub, knode.start_mark.line + 1, "duplicate key")])
            lines[sub] = knode.start_mark.line + 1
            out[key] = _to_python(vnode, lines, sub)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_to_python(v, lines, f"{path}[{i}]") for i, v in enumerate(node.value)]
    return yaml.SafeLoader(" ").construct_object(node, deep=True) if node.tag else node.value


def _parse_text(text: str):
    lines = {}
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError([("<document>", mark.line + 1 if mark else None, str(exc).splitlines()[0])])
    if node is None:
        return {}, lines
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError([("<document>", node.start_mark.line + 1, "top level must be a mapping")])
    return _to_python(node, lines, ""), lines


def _check_type(value, typ):
    if typ is _NUM:
        return isinstance(value, _NUM) and not isinstance(value, bool)
    if typ is int:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, typ)


def _validate(data, schema, lines, path, problems, defaults_used):
    out = {}
    for key in data:
        if key not in schema:
            sub = f"{path}.{key}" if path else key
            problems.append((sub, lines.get(sub), "unknown key"))
    for key, spec in schema.items():
        typ, default = spec[0], spec[1]
        sub = f"{path}.{key}" if path else key
        if key not in data:
            if default is REQUIRED:
                problems.append((sub, None, "missing required key"))
                continue
            if default is None:
                continue
            value = {} if typ is dict else default
            defaults_used.append(sub)
        else:
            value = data[key]
            if value is None and typ is dict:
                value = {}
            if not _check_type(value, typ):
                problems.append((sub, lines.get(sub), f"expected {getattr(typ, '__name__', 'number')}, "
                                                      f"got {type(value).__name__}"))
                continue
        if typ is dict:
            value = _validate(value, spec[2], lines, sub, problems, defaults_used)
        out[key] = value
    return out


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    params: SystemParams
    mc: McConfig
    weights: QoeWeights
    target: CovertTarget
    train: TrainConfig
    bounds: tuple
    p_max: float
    env_count: int
    env_seed: int
    quadrature: dict
    sweep: dict
    training_extra: dict
    report: dict
    out: str = None
    workers: int = 1
    normalized: dict = field(default_factory=dict, repr=False)

    def digest(self) -> str:
        """SHA-256 of the normalized configuration (output path and worker count excluded)."""
        return hashlib.sha256(json.dumps(self.normalized, sort_keys=True).encode()).hexdigest()


def _build(values, lines, kind, problems):
    sysd = dict(values["system"])
    for k in _POWER_KEYS:
        dbm, w = sysd.pop(f"{k}_dBm", None), sysd.pop(f"{k}_W", None)
        if dbm is not None and w is not None:
            problems.append((f"system.{k}", lines.get(f"system.{k}_W"), "given both in dBm and in watts"))
        elif dbm is not None:
            sysd[k] = dbm_to_watts(dbm)
        elif w is not None:
            sysd[k] = float(w)
        else:
            problems.append((f"system.{k}_dBm", None, "missing required key (or give it as _W)"))
    env = values["environment"]
    if "p_max_dBm" in env and "p_max_W" in env:
        problems.append(("environment.p_max", lines.get("environment.p_max_W"), "given both in dBm and in watts"))
    bounds = []
    for k in LINKS:
        b = env["bounds"][k]
        if len(b) != 2 or not all(_check_type(x, _NUM) for x in b) or not 0 < b[0] <= b[1]:
            problems.append((f"environment.bounds.{k}", lines.get(f"environment.bounds.{k}"),
                             "expected [low, high] with 0 < low <= high"))
        else:
            bounds.append((float(b[0]), float(b[1])))
    if problems:
        raise ConfigError(problems)

    def section(name, fn):
        try:
            return fn()
        except (ValueError, TypeError) as exc:
            problems.append((name, lines.get(name), str(exc)))
            return None

    params = section("system", lambda: SystemParams(**{k: (int(v) if k == "N" else float(v))
                                                        for k, v in sysd.items()}))
    m = values["montecarlo"]
    mc = section("montecarlo", lambda: McConfig(m["samples"], m["seed"], m["batch"], 1, m["mode"]))
    if m["mode"] not in ("distribution", "exact"):
        problems.append(("montecarlo.mode", lines.get("montecarlo.mode"), "must be 'distribution' or 'exact'"))
    q = values["qoe"]
    weights = section("qoe", lambda: QoeWeights(q["alpha"], q["varsigma"]))
    target = section("qoe.lambda_cap", lambda: CovertTarget(q["lambda_cap"]))
    t = dict(values["training"])
    extra = {"seeds": t.pop("seeds"), "eval_envs": t.pop("eval_envs")}
    train = section("training", lambda: TrainConfig(**{**t, "hidden": tuple(t["hidden"])}))
    if "p_max_dBm" in env:
        p_max = dbm_to_watts(env["p_max_dBm"])
    elif "p_max_W" in env:
        p_max = float(env["p_max_W"])
    else:
        p_max = None
        if params is not None:
            p_max = params.P_A + params.P_J_max
            log.info("environment.p_max defaults to P_A + P_J_max = %r W", p_max)
    if kind == "optimize-grid" and params is not None and p_max is not None:
        if params.P_A + params.P_J_max > p_max * (1 + 1e-12):
            problems.append(("system.P_A", lines.get("system.P_A_dBm") or lines.get("system.P_A_W"),
                             "total power budget violated: P_A + P_J_max must not exceed P_max"))
    for k, v in values["quadrature"].items():
        if v < 1:
            problems.append((f"quadrature.{k}", lines.get(f"quadrature.{k}"), "must be >= 1"))
    if problems:
        raise ConfigError(problems)
    normalized = {
        "kind": kind, "system": params.to_dict(), "montecarlo": asdict(mc), "qoe": q,
        "training": {**asdict(train), **extra}, "environment": {"bounds": bounds, "p_max": p_max,
                                                               "count": env["count"], "seed": env["seed"]},
        "quadrature": values["quadrature"], "sweep": values["sweep"], "report": values["report"],
    }
    normalized["montecarlo"].pop("workers")
    return ExperimentSpec(kind, params, mc, weights, target, train, tuple(bounds), p_max, env["count"],
                          env["seed"], dict(values["quadrature"]), dict(values["sweep"]), extra,
                          dict(values["report"]), normalized=normalized)


def parse_config(text: str, kind: str) -> ExperimentSpec:
    if kind not in KINDS:
        raise ConfigError([("<kind>", None, f"unknown experiment {kind!r}")])
    data, lines = _parse_text(text)
    problems, defaults_used = [], []
    values = _validate(data, _SCHEMA, lines, "", problems, defaults_used)
    if problems:
        raise ConfigError(problems)
    for key in defaults_used:
        log.info("default applied for %s", key)
    return _build(values, lines, kind, [])


def load_config(path, kind: str) -> ExperimentSpec:
    """Parse the YAML file at ``path`` for experiment ``kind``."""
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), kind)


def params_to_yaml(params: SystemParams) -> str:
    """YAML ``system`` section for ``params`` with powers in watts (exact round trip)."""
    d = params.to_dict()
    for k in _POWER_KEYS:
        d[f"{k}_W"] = d.pop(k)
    return yaml.safe_dump({"system": d}, sort_keys=False)
