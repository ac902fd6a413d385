"""Command-line front end: ``ragd run | verify-geometry | verify-identities | grad-check``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 a verified inequality or identity was violated. Log verbosity comes
from the ``RAGD_LOG_LEVEL`` environment variable (default WARNING).
"""

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import geometry
from ._accel import backend_name
from .config import build_problem, load_config
from .diagnostics import EstimateSequenceMonitor, check_theorem4, empirical_contraction
from .exceptions import ConfigError, CutLocusError, IterationError, ParameterError
from .objectives import (check_g_smoothness, check_g_strong_convexity, finite_diff_grad_check,
                         sample_domain_point)
from .optimizers import ragd_run, rgd_run

log = logging.getLogger("ragd")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VIOLATION = 0, 2, 3, 4

CSV_HEADER = ("k,f_gap,dist_to_min,grad_norm,alpha,gamma,gamma_bar,phi_star,lambda,"
              "cmp_lhs,cmp_rhs,cmp_held,b_next,bound_factor,in_ball").split(",")

GRAD_TOL = 1e-5
GEOMETRY_CHECKS = ("hyperbolic-sandwich", "spherical-sandwich", "distortion-sphere",
                   "distortion-hyperbolic", "distortion-euclidean")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def trace_rows(trace):
    for r in trace.records:
        s, d = r.state, r.diagnostics
        yield [
            r.k, r.f_gap, r.dist_to_min, r.grad_norm,
            s and s.alpha, s and s.gamma, s and s.gamma_bar,
            d and d.phi_star, d and d.lam,
            d and d.comparison_lhs, d and d.comparison_rhs, d and d.comparison_held,
            d and d.b_next, d and d.bound_factor, r.in_ball,
        ]


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in trace_rows(trace):
            w.writerow([_cell(v) for v in row])


def _finite_or_none(x):
    return x if x is not None and math.isfinite(x) else None


def run_summary(trace, obj, tolerance, monitor=None, local_flags=None):
    gaps = trace.f_gaps
    out = {
        "algorithm": trace.algorithm,
        "iterations": len(trace) - 1,
        "stopped_by": trace.stopped_by,
        "iterations_to_tolerance": trace.iterations_to(tolerance) if tolerance > 0 else None,
        "final_f_gap": _finite_or_none(gaps[-1]),
        "final_grad_norm": trace.final.grad_norm,
        "empirical_contraction": empirical_contraction(gaps),
        "ball_exits": trace.ball_exits,
        "comparison_violations": 0,
        "theorem_bounds": {},
    }
    if monitor is not None:
        mon = monitor.summary()
        recs = monitor.all_records
        out["comparison_violations"] = mon["comparison_violations"]
        out["diagnostics"] = mon
        applicable = [r for r in recs if r.theorem1_held is not None]
        out["theorem_bounds"] = {
            "lower_bound": mon["lower_bound_violations"] == 0,
            "weak_estimate": mon["weak_estimate_violations"] == 0 if applicable else None,
            "global_rate": mon["global_rate_violations"] == 0 if applicable else None,
        }
    if local_flags is not None:
        flags = [f for f in local_flags if f is not None]
        out["theorem_bounds"]["local_rate"] = all(flags) if flags else None
    return out


def _run_one(alg, prob, cfg):
    obj = prob.obj
    if alg == "rgd":
        h = prob.params.h_at(0) if prob.params else (1.0 / obj.lipschitz if obj.lipschitz > 0 else 1.0)
        return rgd_run(obj, prob.x0, h, cfg.max_iters, cfg.tolerance), None
    if prob.params is None:
        raise ConfigError(prob.params_error)
    want = cfg.diagnostics == "on" or (cfg.diagnostics == "auto" and obj.minimizer is not None)
    monitor = EstimateSequenceMonitor(n_probes=cfg.n_probes, seed=cfg.seed) if want else None
    trace = ragd_run(obj, prob.x0, prob.params, constant=(alg == "ragd-constant"), monitor=monitor)
    return trace, monitor


def cmd_run(cfg):
    prob = build_problem(cfg)
    obj = prob.obj
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    algs = ["ragd-general", "rgd"] if cfg.algorithm == "both" else [cfg.algorithm]
    d0 = obj.manifold.dist(prob.x0, obj.minimizer) if obj.minimizer is not None else None
    summary = {
        "schema": 1,
        "backend": backend_name(),
        # the output location is left out so identical experiments give identical summaries
        "config": {k: v for k, v in cfg.as_dict().items() if k != "out"},
        "objective": {"name": obj.name, "mu": obj.mu, "L": obj.lipschitz,
                      "K": obj.manifold.descriptor.K, "domain_radius": _finite_or_none(obj.domain_radius)},
        "x0_radius": _finite_or_none(prob.x0_radius),
        "dist0": d0,
        "local_rate_setting": prob.default_setting,
        "algorithms": {},
    }
    for alg in algs:
        log.info("running %s for %d iterations", alg, cfg.max_iters)
        trace, monitor = _run_one(alg, prob, cfg)
        write_trace_csv(trace, out / f"trace_{alg}.csv")
        t4 = None
        if alg != "rgd" and prob.default_setting and d0 is not None and obj.mu > 0:
            t4 = check_theorem4(trace, obj.mu, obj.lipschitz, d0)
        summary["algorithms"][alg] = run_summary(trace, obj, cfg.tolerance, monitor, t4)
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_OK


def _geometry_report(check, samples, seed, workers):
    if check == "hyperbolic-sandwich":
        return geometry.verify_hyperbolic_sandwich(samples, seed, workers=workers)
    if check == "spherical-sandwich":
        return geometry.verify_spherical_sandwich(samples, seed, workers=workers)
    kind = check.split("-", 1)[1]
    return geometry.verify_distortion(kind, samples, seed, workers=workers)


def cmd_verify_geometry(samples, seed, check, out=None, workers=None):
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    checks = GEOMETRY_CHECKS if check == "all" else (check,)
    reports = [_geometry_report(c, samples, seed, workers).to_dict() for c in checks]
    text = json.dumps({"schema": 1, "seed": seed, "reports": reports}, indent=2, sort_keys=True)
    print(text)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / f"geometry_{check}.json").write_text(text + "\n")
    bad = sum(r["violations"] for r in reports)
    return EXIT_OK if bad == 0 else EXIT_VIOLATION


def cmd_verify_identities(p_max, out=None):
    rep = geometry.verify_identities(p_max)
    text = json.dumps(rep.to_dict(), indent=2, sort_keys=True)
    print(text)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / "identities.json").write_text(text + "\n")
    return EXIT_OK if rep.passed else EXIT_VIOLATION


def grad_check_report(obj, samples, seed):
    rng = np.random.default_rng(seed)
    worst_grad = 0.0
    n_grad = min(samples, 200)
    for _ in range(n_grad):
        x = sample_domain_point(obj, rng)
        worst_grad = max(worst_grad, finite_diff_grad_check(obj, x, directions=4, rng=rng))
    convex_viol = smooth_viol = 0
    for _ in range(samples):
        x = sample_domain_point(obj, rng)
        y = sample_domain_point(obj, rng)
        convex_viol += not check_g_strong_convexity(obj, x, y).holds
        smooth_viol += not check_g_smoothness(obj, x, y).holds
    return {
        "schema": 1,
        "objective": obj.name,
        "mu": obj.mu,
        "L": obj.lipschitz,
        "grad_points": n_grad,
        "max_grad_error": worst_grad,
        "pairs": samples,
        "strong_convexity_violations": convex_viol,
        "smoothness_violations": smooth_viol,
        "passed": worst_grad <= GRAD_TOL and convex_viol == 0 and smooth_viol == 0,
    }


def cmd_grad_check(cfg):
    prob = build_problem(cfg)
    if cfg.samples < 1:
        raise ConfigError("samples must be >= 1")
    rep = grad_check_report(prob.obj, cfg.samples, cfg.seed)
    text = json.dumps(rep, indent=2, sort_keys=True)
    print(text)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "grad_check.json").write_text(text + "\n")
    return EXIT_OK if rep["passed"] else EXIT_VIOLATION


# ---------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="ragd", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def config_args(p):
        p.add_argument("--config", help="INI experiment file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (repeatable), e.g. --set run.max_iters=100")

    config_args(sub.add_parser("run", help="run RAGD / RGD and write CSV traces"))
    config_args(sub.add_parser("grad-check", help="finite differences and convexity checks"))

    g = sub.add_parser("verify-geometry", help="Monte-Carlo comparison-geometry checks")
    g.add_argument("--samples", type=int, default=100_000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--check", choices=GEOMETRY_CHECKS + ("all",), default="all")
    g.add_argument("--workers", type=int)
    g.add_argument("--out")

    i = sub.add_parser("verify-identities", help="exact multinomial identities")
    i.add_argument("--p-max", type=int, default=12)
    i.add_argument("--out")
    return ap


def _config_from_args(args):
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(("seed", str(args.seed)))
    if args.out is not None:
        overrides.append(("out", args.out))
    return load_config(args.config, overrides)


def main(argv=None):
    logging.basicConfig(level=os.environ.get("RAGD_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(_config_from_args(args))
        if args.command == "grad-check":
            return cmd_grad_check(_config_from_args(args))
        if args.command == "verify-geometry":
            return cmd_verify_geometry(args.samples, args.seed, args.check, args.out, args.workers)
        return cmd_verify_identities(args.p_max, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IterationError, CutLocusError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # geometry and identity drivers reject out-of-range arguments this way
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
