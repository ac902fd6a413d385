"""Experiment configuration: INI files with sections problem/algorithm/init/run.

Example::

    [problem]
    manifold = sphere
    dimension = 3
    objective = squared_distance
    radius = 1.0

    [algorithm]
    algorithm = ragd-general
    h = 1/L
    beta = paper
    gamma0 = paper

    [init]
    x0 = ball(D)

    [run]
    max_iters = 500
    seed = 7
    out = runs/sphere

Any key may be overridden from the command line as ``section.key=value``.
"""

import configparser
import math
import re
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .exceptions import ConfigError
from .manifolds import MANIFOLDS, Euclidean, make_manifold
from .objectives import (constant_objective, euclidean_quadratic, frechet_mean_objective,
                         solve_frechet_mean, squared_distance_objective)
from .optimizers import RagdParams, constant_params, default_beta, radius_D

OBJECTIVES = ("squared_distance", "frechet_mean", "quadratic", "constant")
ALGORITHMS = ("ragd-constant", "ragd-general", "rgd", "both")

# key -> (section, caster, default); default None means "required or computed"
_SCHEMA = {
    "manifold": ("problem", str, "sphere"),
    "dimension": ("problem", int, 3),
    "objective": ("problem", str, "squared_distance"),
    "radius": ("problem", float, 1.0),
    "n_points": ("problem", int, 5),
    "anchor_file": ("problem", str, ""),
    "condition": ("problem", float, 100.0),
    "mu_scale": ("problem", float, 1.0),
    "algorithm": ("algorithm", str, "ragd-general"),
    "h": ("algorithm", str, "1/L"),
    "beta": ("algorithm", str, "paper"),
    "gamma0": ("algorithm", str, "paper"),
    "x0": ("init", str, ""),
    "max_iters": ("run", int, 500),
    "tolerance": ("run", float, 0.0),
    "seed": ("run", int, None),
    "out": ("run", str, "out"),
    "samples": ("run", int, 10_000),
    "n_probes": ("run", int, 20),
    "diagnostics": ("run", str, "auto"),
}


@dataclass
class ExperimentConfig:
    manifold: str
    dimension: int
    objective: str
    radius: float
    n_points: int
    anchor_file: str
    condition: float
    mu_scale: float
    algorithm: str
    h: str
    beta: str
    gamma0: str
    x0: str
    max_iters: int
    tolerance: float
    seed: int
    out: str
    samples: int
    n_probes: int
    diagnostics: str

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def parse_override(text):
    """'section.key=value' or 'key=value' -> (key, value)."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, value = text.split("=", 1)
    key = key.strip().split(".")[-1]
    if key not in _SCHEMA:
        raise ConfigError(f"unknown configuration key {key!r}")
    return key, value.strip()


def load_config(path=None, overrides=()):
    """Read ``path`` (optional) and apply ``overrides``; flags win over the file."""
    raw = {}
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {path} does not exist")
        cp = configparser.ConfigParser()
        try:
            cp.read(p)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
        for section in cp.sections():
            for key, value in cp.items(section):
                if key not in _SCHEMA:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                if _SCHEMA[key][0] != section:
                    raise ConfigError(f"key {key!r} belongs in [{_SCHEMA[key][0]}], not [{section}]")
                raw[key] = value
    for item in overrides:
        k, v = item if isinstance(item, tuple) else parse_override(item)
        raw[k] = v
    values = {}
    for key, (section, cast, default) in _SCHEMA.items():
        if key in raw and raw[key] is not None:
            try:
                values[key] = cast(raw[key])
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: cannot read {raw[key]!r}") from exc
        elif default is None:
            raise ConfigError(f"[{section}] {key} is required")
        else:
            values[key] = default
    cfg = ExperimentConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg.manifold.lower() not in MANIFOLDS:
        raise ConfigError(f"manifold must be one of {sorted(MANIFOLDS)}")
    if cfg.objective not in OBJECTIVES:
        raise ConfigError(f"objective must be one of {OBJECTIVES}")
    if cfg.algorithm not in ALGORITHMS:
        raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
    if cfg.dimension < 1 or cfg.max_iters < 0 or cfg.tolerance < 0:
        raise ConfigError("dimension >= 1, max_iters >= 0 and tolerance >= 0 are required")
    if cfg.radius <= 0 or cfg.mu_scale <= 0 or cfg.condition < 1 or cfg.n_points < 1:
        raise ConfigError("radius, mu_scale > 0, condition >= 1 and n_points >= 1 are required")
    if cfg.anchor_file and not Path(cfg.anchor_file).is_file():
        raise ConfigError(f"anchor file {cfg.anchor_file} does not exist")
    if cfg.diagnostics not in ("auto", "on", "off"):
        raise ConfigError("diagnostics must be auto, on or off")


# ---------------------------------------------------------------------------
# problem construction


@dataclass
class Problem:
    obj: object
    x0: object
    params: RagdParams
    x0_radius: float
    default_setting: bool
    params_error: str = ""


def _load_anchors(m, path):
    rows = np.atleast_2d(np.loadtxt(path, dtype=float))
    try:
        return [m.point(r.reshape(m.n, m.n) if m.kind == "spd" else r) for r in rows]
    except ValueError as exc:
        raise ConfigError(f"anchor file {path}: {exc}") from exc


def build_objective(cfg, rng):
    m = make_manifold(cfg.manifold, cfg.dimension)
    try:
        if cfg.objective == "squared_distance":
            p = m.random_point(rng)
            obj = squared_distance_objective(m, p, cfg.radius)
        elif cfg.objective == "frechet_mean":
            if cfg.anchor_file:
                pts = _load_anchors(m, cfg.anchor_file)
                far = max(m.dist(pts[0], q) for q in pts)
                obj = frechet_mean_objective(m, pts, radius=max(far, cfg.radius))
            else:
                c = m.random_point(rng)
                pts = [m.random_ball_point(c, cfg.radius, rng) for _ in range(cfg.n_points)]
                obj = frechet_mean_objective(m, pts, radius=cfg.radius, center=c)
            obj = solve_frechet_mean(obj)
        elif cfg.objective == "quadratic":
            if not isinstance(m, Euclidean):
                raise ConfigError("the quadratic objective lives on the euclidean manifold")
            n = cfg.dimension
            q, _ = np.linalg.qr(rng.standard_normal((n, n)))
            evals = np.geomspace(1.0, cfg.condition, n) if n > 1 else np.array([1.0])
            obj = euclidean_quadratic(q @ np.diag(evals) @ q.T, rng.standard_normal(n))
        else:
            obj = constant_objective(m, 0.0, m.random_point(rng))
    except (ValueError, RuntimeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot build {cfg.objective} on {m!r}: {exc}") from exc
    if cfg.mu_scale != 1.0:
        obj = obj.with_constants(mu=min(obj.mu * cfg.mu_scale, obj.lipschitz))
    return obj


_BALL = re.compile(r"^ball\((.+)\)$")


def _x0_radius(spec, obj):
    K = obj.manifold.descriptor.K
    if not spec:
        spec = "ball(D)" if K > 0 and obj.mu > 0 else "ball(1)"
    m = _BALL.match(spec.replace(" ", ""))
    if not m:
        raise ConfigError(f"x0 must look like ball(r) or ball(D), got {spec!r}")
    arg = m.group(1)
    if arg in ("D", "d"):
        if obj.mu <= 0:
            raise ConfigError("ball(D) needs mu > 0")
        r = radius_D(obj.mu, obj.lipschitz, K)
        if math.isinf(r):
            raise ConfigError("ball(D) is unbounded when K = 0; give an explicit radius")
        return r
    if arg in ("r", "R"):
        return obj.domain_radius
    try:
        r = float(arg)
    except ValueError as exc:
        raise ConfigError(f"bad x0 radius {arg!r}") from exc
    if r < 0:
        raise ConfigError("x0 radius must be non-negative")
    return r


def _number_or(text, default, name):
    if text in ("paper", "1/L"):
        return default
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"{name} must be a number or {'1/L' if name == 'h' else 'paper'}") from exc


def build_params(cfg, obj):
    if obj.mu <= 0:
        raise ConfigError("the accelerated schemes need mu > 0")
    h = _number_or(cfg.h, 1.0 / obj.lipschitz, "h")
    beta = _number_or(cfg.beta, default_beta(obj.mu, obj.lipschitz), "beta")
    if h <= 0 or h > (1 + 1e-12) / obj.lipschitz or h * obj.mu >= 1:
        raise ConfigError(f"h = {h} must lie in (0, 1/L] with h * mu < 1")
    if beta < 0:
        raise ConfigError("beta must be non-negative")
    gamma0 = _number_or(cfg.gamma0, constant_params(h, beta, obj.mu).gamma, "gamma0")
    if gamma0 <= 0:
        raise ConfigError("gamma0 must be positive")
    return RagdParams(h, beta, gamma0, cfg.max_iters, cfg.tolerance)


def build_problem(cfg):
    """Objective, start point and parameters, all drawn from ``cfg.seed``."""
    rng = np.random.default_rng(cfg.seed)
    obj = build_objective(cfg, rng)
    r = _x0_radius(cfg.x0, obj)
    base = obj.minimizer if obj.minimizer is not None else obj.center
    x0 = obj.manifold.random_ball_point(base, r, rng)
    # parameter problems only matter to the accelerated runs, so defer them
    try:
        params, err = build_params(cfg, obj), ""
    except ConfigError as exc:
        params, err = None, str(exc)
    standard = (cfg.h == "1/L" and cfg.beta == "paper" and cfg.gamma0 == "paper"
             and obj.mu > 0
             and r <= radius_D(obj.mu, obj.lipschitz, obj.manifold.descriptor.K))
    return Problem(obj, x0, params, r, standard, err)


def write_config(cfg, path):
    cp = configparser.ConfigParser()
    for key, (section, _, _) in _SCHEMA.items():
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, str(getattr(cfg, key)))
    with open(path, "w") as fh:
        cp.write(fh)
