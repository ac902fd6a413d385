"""Runtime checks of the estimate-sequence argument behind the accelerated scheme.

The standalone ``check_*`` functions each test one inequality or identity.
:class:`EstimateSequenceMonitor` strings them together during a run.
``ragd_run`` calls its ``observe`` hook once per iteration. The run then
carries one :class:`DiagnosticsRecord` per index k.

Tolerances are scale-relative: a side ``a <= b`` holds when
``a <= b + 1e-9 * max(1, |a|, |b|)``.
"""

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .optimizers import theoretical_rate

SLACK_TOL = 1e-9


def tolerance(*sides):
    return SLACK_TOL * max(1.0, *(abs(s) for s in sides))


def leq(a, b):
    """a <= b up to the scale-relative slack."""
    return a <= b + tolerance(a, b)


@dataclass(frozen=True)
class EstimateSeqState:
    phi_star: float
    lam: float
    k: int = 0

    def advance(self, phi_star_next, alpha):
        return EstimateSeqState(phi_star_next, (1.0 - alpha) * self.lam, self.k + 1)


@dataclass
class DiagnosticsRecord:
    """Measurements at index k.

    The comparison fields describe the move from ``y_k`` to ``y_{k+1}``.
    They are None on the final record of a run, as is
    ``complete_square_residual``. ``weak_es_held`` and ``theorem1_held``
    are None once an earlier comparison has failed.
    """

    k: int
    phi_star: float
    lam: float
    f_x: float
    lower_bound_held: bool
    phi_at_xstar: float
    weak_es_held: Optional[bool]
    theorem1_rhs: float
    theorem1_held: Optional[bool]
    comparison_lhs: Optional[float] = None
    comparison_rhs: Optional[float] = None
    comparison_held: Optional[bool] = None
    b_next: Optional[float] = None
    bound_factor: Optional[float] = None
    sufficient: Optional[bool] = None
    complete_square_residual: Optional[float] = None

    def to_dict(self):
        return asdict(self)


# ---------------------------------------------------------------------------
# individual checks


def update_phi_star(prev, alpha, gamma, gamma_bar, f_yk, grad_norm_sq, inner_grad_logv,
                    logv_norm_sq, mu):
    """Next minimum value Phi*_{k+1} of the estimate function."""
    phi = prev.phi_star if isinstance(prev, EstimateSeqState) else float(prev)
    return ((1.0 - alpha) * phi
            + alpha * f_yk
            - alpha * alpha / (2.0 * gamma_bar) * grad_norm_sq
            + alpha * (1.0 - alpha) * gamma / gamma_bar
            * (0.5 * mu * logv_norm_sq + inner_grad_logv))


def check_lower_bound(phi_star, f_xk):
    return phi_star >= f_xk - SLACK_TOL * max(1.0, abs(f_xk))


@dataclass(frozen=True)
class ComparisonCheck:
    lhs: float
    rhs: float
    held: bool
    b_next: float
    bound_factor: float
    sufficient: bool


def sufficient_condition(K, b, beta):
    """5 K b^2 <= beta together with b <= 1 / (4 sqrt K)."""
    if K == 0:
        return True
    return 5.0 * K * b * b <= beta and b <= 0.25 / math.sqrt(K)


def check_comparison(manifold, y_k, y_next, v_next, x_star, gamma_next, gamma_bar_next, K,
                     beta=None):
    """Both sides of the tangent-space comparison inequality at one step.

    lhs = gamma_{k+1} |log_{y_{k+1}} x* - log_{y_{k+1}} v_{k+1}|^2 and
    rhs = gamma_bar_{k+1} |log_{y_k} x* - log_{y_k} v_{k+1}|^2.
    ``sufficient`` is None when ``beta`` is not supplied.
    """
    m = manifold
    r = m.log(y_k, x_star) - m.log(y_k, v_next)
    q = m.log(y_next, x_star) - m.log(y_next, v_next)
    lhs = gamma_next * m.inner(y_next, q, q)
    rhs = gamma_bar_next * m.inner(y_k, r, r)
    b = max(m.dist(y_k, x_star), m.dist(y_next, x_star))
    suff = None if beta is None else sufficient_condition(K, b, beta)
    return ComparisonCheck(lhs, rhs, leq(lhs, rhs), b, 1.0 + 5.0 * K * b * b, suff)


def check_complete_square(manifold, y_k, v_k, v_next, alpha, gamma, gamma_bar, mu, f_yk, grad_yk,
                          phi_star_k, phi_star_next, x_probe):
    """Relative gap between the recursive and completed-square forms of the next estimate function at ``x_probe``."""
    m = manifold
    w = m.log(y_k, x_probe)
    lv = m.log(y_k, v_k)
    lvn = m.log(y_k, v_next)
    d_old = w - lv
    d_new = w - lvn
    phi_k = phi_star_k + 0.5 * gamma * m.inner(y_k, d_old, d_old)
    model = f_yk + m.inner(y_k, grad_yk, w) + 0.5 * mu * m.inner(y_k, w, w)
    recursive = (1.0 - alpha) * phi_k + alpha * model
    closed = phi_star_next + 0.5 * gamma_bar * m.inner(y_k, d_new, d_new)
    return abs(recursive - closed) / max(1.0, abs(recursive), abs(closed))


def check_weak_estimate(phi_at_xstar, lam, phi0_at_xstar, f_xstar):
    return leq(phi_at_xstar, (1.0 - lam) * f_xstar + lam * phi0_at_xstar)


def theorem1_bound(lam_T, f_x0, f_xstar, gamma0, dist0):
    return lam_T * (f_x0 - f_xstar + 0.5 * gamma0 * dist0 * dist0)


def check_theorem1(f_xT, f_xstar, lambda_T, f_x0, gamma0, dist0):
    return leq(f_xT - f_xstar, theorem1_bound(lambda_T, f_x0, f_xstar, gamma0, dist0))


def theorem4_bounds(n, mu, L, f_gap0, dist0):
    rate = theoretical_rate(mu, L)
    c = f_gap0 + 0.5 * mu * dist0 * dist0
    return [rate ** k * c for k in range(n)]


def check_theorem4(trace, mu, L, dist0):
    """Per-k flags for the local accelerated bound.

    Entries after the first failed comparison are None (not applicable).
    """
    gaps = trace.f_gaps
    bounds = theorem4_bounds(len(gaps), mu, L, gaps[0], dist0)
    out = []
    broken = False
    for rec, gap, bnd in zip(trace.records, gaps, bounds):
        out.append(None if broken else leq(gap, bnd))
        d = rec.diagnostics
        if d is not None and d.comparison_held is False:
            broken = True
    return out


def induction_radius(mu, L, K):
    """Radius (mu/L)^(1/4) / (10 sqrt K) that every b_{k+1} stays within under the local theorem."""
    if K == 0:
        return math.inf
    return (mu / L) ** 0.25 / (10.0 * math.sqrt(K))


def empirical_contraction(f_gaps, floor=1e-300):
    """Geometric mean of successive f_gap ratios over the last half of a run.

    Ratios are taken only while both gaps exceed ``floor``. Returns None
    when fewer than two usable gaps remain.
    """
    gaps = [g for g in f_gaps if g is not None]
    tail = gaps[len(gaps) // 2:]
    logs = [math.log(b / a) for a, b in zip(tail, tail[1:]) if a > floor and b > floor]
    if not logs:
        return None
    return math.exp(sum(logs) / len(logs))


# ---------------------------------------------------------------------------
# run monitor


class EstimateSequenceMonitor:
    """Collects a :class:`DiagnosticsRecord` per iteration of ``ragd_run``.

    Parameters
    ----------
    n_probes : int
        Random points per iteration at which the complete-square identity is
        evaluated.
    probe_radius : float
        Probes are drawn uniformly from the geodesic ball of this radius
        around ``y_k`` (capped at half the injectivity radius).
    seed : int
        Seed for the probe generator.
    """

    def __init__(self, n_probes=20, probe_radius=1.0, seed=0):
        self.n_probes = n_probes
        self.probe_radius = probe_radius
        self.rng = np.random.default_rng(seed)
        self.records = {}

    # -- hooks called by ragd_run

    def start(self, obj, state, params):
        if obj.minimizer is None:
            raise ValueError("diagnostics need a known minimizer")
        self.obj = obj
        self.m = obj.manifold
        self.x_star = obj.minimizer
        self.f_star = obj.f_star
        self.K = self.m.descriptor.K
        self.f0 = obj.value(state.x)
        self.gamma0 = state.gamma
        self.dist0 = self.m.dist(state.x, self.x_star)
        self.phi0_at_xstar = self.f0 + 0.5 * self.gamma0 * self.dist0 ** 2
        self.es = EstimateSeqState(self.f0, 1.0, 0)
        self.violated = False
        self.violations = 0
        self.insufficient = 0
        self.records = {}
        inj = self.m.descriptor.injectivity_radius
        self._probe_r = min(self.probe_radius, 0.5 * inj)

    def _base_record(self, state):
        m, xs = self.m, self.x_star
        f_x = self.obj.value(state.x)
        d = m.log(state.y, xs) - m.log(state.y, state.v)
        phi_x = self.es.phi_star + 0.5 * state.gamma * m.inner(state.y, d, d)
        applicable = not self.violated
        t1 = theorem1_bound(self.es.lam, self.f0, self.f_star, self.gamma0, self.dist0)
        return DiagnosticsRecord(
            k=state.k,
            phi_star=self.es.phi_star,
            lam=self.es.lam,
            f_x=f_x,
            lower_bound_held=check_lower_bound(self.es.phi_star, f_x),
            phi_at_xstar=phi_x,
            weak_es_held=check_weak_estimate(phi_x, self.es.lam, self.phi0_at_xstar, self.f_star)
            if applicable else None,
            theorem1_rhs=t1,
            theorem1_held=leq(f_x - self.f_star, t1) if applicable else None,
        )

    def observe(self, state, info, new):
        m = self.m
        rec = self._base_record(state)
        y = state.y
        g = info.grad_y
        lv = info.log_v
        phi_next = update_phi_star(self.es, state.alpha, state.gamma, state.gamma_bar, info.f_y,
                                   m.inner(y, g, g), m.inner(y, g, lv), m.inner(y, lv, lv),
                                   self.obj.mu)
        worst = 0.0
        for _ in range(self.n_probes):
            p = m.random_ball_point(y, self._probe_r, self.rng)
            r = check_complete_square(m, y, state.v, new.v, state.alpha, state.gamma,
                                      state.gamma_bar, self.obj.mu, info.f_y, g,
                                      self.es.phi_star, phi_next, p)
            worst = max(worst, r)
        cmp = check_comparison(m, y, new.y, new.v, self.x_star, new.gamma, state.gamma_bar,
                               self.K, info.beta)
        rec.comparison_lhs = cmp.lhs
        rec.comparison_rhs = cmp.rhs
        rec.comparison_held = cmp.held
        rec.b_next = cmp.b_next
        rec.bound_factor = cmp.bound_factor
        rec.sufficient = cmp.sufficient
        rec.complete_square_residual = worst
        self.records[state.k] = rec
        if not cmp.held:
            self.violated = True
            self.violations += 1
        if not cmp.sufficient:
            self.insufficient += 1
        self.es = self.es.advance(phi_next, state.alpha)

    def finish(self, state):
        self.records[state.k] = self._base_record(state)

    def record(self, k):
        return self.records.get(k)

    # -- summaries

    @property
    def all_records(self):
        return [self.records[k] for k in sorted(self.records)]

    def summary(self):
        recs = self.all_records
        steps = [r for r in recs if r.comparison_held is not None]
        return {
            "comparison_violations": self.violations,
            "sufficient_condition_failures": self.insufficient,
            "lower_bound_violations": sum(not r.lower_bound_held for r in recs),
            "weak_estimate_violations": sum(r.weak_es_held is False for r in recs),
            "global_rate_violations": sum(r.theorem1_held is False for r in recs),
            "max_complete_square_residual": max((r.complete_square_residual for r in steps), default=0.0),
            "max_b_next": max((r.b_next for r in steps), default=0.0),
        }
