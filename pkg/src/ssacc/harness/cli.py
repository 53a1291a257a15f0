"""Command-line entry point: ``ssacc <experiment> --config PATH [--out PATH] ...``."""
import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from importlib import resources

from ssacc.harness.config import KINDS, ConfigError, load_config
from ssacc.harness.csvio import render_csv
from ssacc.harness.experiments import run_experiment

log = logging.getLogger("ssacc")


def reference_config_path() -> str:
    """Path of the bundled reference scenario configuration."""
    return str(resources.files("ssacc") / "configs" / "reference.yaml")


def build_parser():
    ap = argparse.ArgumentParser(prog="ssacc", description="Covert RIS secrecy experiments")
    sub = ap.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", default=None, help="YAML config (default: bundled reference)")
        sp.add_argument("--out", default=None, help="CSV output path (default: stdout)")
        sp.add_argument("--seed", type=int, default=None, help="override montecarlo.seed and training.seed")
        sp.add_argument("--samples", type=int, default=None, help="override montecarlo.samples")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--quiet", action="store_true")
    return ap


def _setup_logging(quiet: bool):
    name = "WARNING" if quiet else os.environ.get("SSACC_LOG", "INFO").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.INFO
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    log.setLevel(level)


def _error(record: dict, code: int) -> int:
    sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")
    return code


def apply_overrides(spec, seed=None, samples=None, workers=1):
    mc, tr, norm = spec.mc, spec.train, dict(spec.normalized)
    if seed is not None:
        mc = replace(mc, seed=seed)
        tr = replace(tr, seed=seed)
        norm["montecarlo"] = {**norm["montecarlo"], "seed": seed}
        norm["training"] = {**norm["training"], "seed": seed}
    if samples is not None:
        mc = replace(mc, samples=samples, batch=min(spec.normalized["montecarlo"]["batch"], samples))
        norm["montecarlo"] = {**norm["montecarlo"], "samples": samples, "batch": mc.batch}
    if workers < 1:
        raise ConfigError([("--workers", None, "must be >= 1")])
    return replace(spec, mc=mc, train=tr, workers=workers, normalized=norm)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.quiet)
    path = args.config or reference_config_path()
    try:
        spec = load_config(path, args.kind)
        spec = apply_overrides(spec, args.seed, args.samples, args.workers)
    except ConfigError as exc:
        return _error({**exc.record(), "config": path}, 2)
    except (OSError, ValueError) as exc:
        return _error({"error": type(exc).__name__, "message": str(exc), "config": path}, 2)
    try:
        cols, rows = run_experiment(spec)
        text = render_csv(cols, rows, {"experiment": spec.kind, "seed": spec.mc.seed,
                                       "config_sha256": spec.digest()})
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            log.info("wrote %d rows to %s", len(rows), args.out)
        else:
            sys.stdout.write(text)
    except Exception as exc:  # noqa: BLE001 - reported as a machine-readable record
        return _error({"error": type(exc).__name__, "message": str(exc)}, 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
