"""Riemannian gradient descent and the Riemannian Nesterov schemes.

``ragd_step`` implements the general scheme (per-iteration ``h_k``,
``beta_k``, with ``alpha_k`` solved from its quadratic each step);
``constant_step`` implements the constant-parameter instantiation with
closed-form ``alpha``, ``gamma``, ``gamma_bar``.

State convention: ``RagdState`` at index k holds ``x_k``, ``v_k``, ``y_k``,
``alpha_k``, ``gamma_k`` and ``gamma_bar = gamma_bar_{k+1} =
(1 - alpha_k) gamma_k + alpha_k mu``, i.e. everything that is fixed
before the gradient at ``y_k`` is evaluated.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .exceptions import CutLocusError, IterationError, ParameterError

Schedule = Union[float, Sequence[float], Callable[[int], float]]

ALPHA_RESIDUAL_TOL = 1e-14


# ---------------------------------------------------------------------------
# parameter formulas


def solve_alpha(h, gamma, mu):
    """Root in (0, 1) of alpha^2 = h ((1 - alpha) gamma + alpha mu).

    Uses the cancellation-free branch of the quadratic formula for
    alpha^2 - (mu - gamma) h alpha - gamma h = 0.
    """
    if not (h > 0 and gamma > 0 and mu > 0):
        raise ParameterError(f"need h, gamma, mu > 0 (got h={h}, gamma={gamma}, mu={mu})")
    p = (mu - gamma) * h
    disc = math.sqrt(p * p + 4.0 * gamma * h)
    alpha = 0.5 * (p + disc) if p >= 0 else 2.0 * gamma * h / (disc - p)
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"no root in (0, 1): h * mu = {h * mu} must be < 1")
    return alpha


def alpha_residual(alpha, h, gamma, mu):
    return abs(alpha * alpha - h * ((1.0 - alpha) * gamma + alpha * mu))


@dataclass(frozen=True)
class ConstantParams:
    alpha: float
    gamma: float
    gamma_bar: float


def constant_params(h, beta, mu):
    """Closed-form (alpha, gamma, gamma_bar) of the constant-step scheme."""
    if h <= 0 or mu <= 0 or beta < 0:
        raise ParameterError("need h > 0, mu > 0, beta >= 0")
    s = math.sqrt(beta * beta + 4.0 * (1.0 + beta) * mu * h)
    alpha = 0.5 * (s - beta)
    gamma = mu * (s - beta) / (s + beta)
    return ConstantParams(alpha, gamma, (1.0 + beta) * gamma)


def default_beta(mu, L):
    """Shrinkage (1/5) sqrt(mu / L)."""
    return 0.2 * math.sqrt(mu / L)


def theoretical_rate(mu, L):
    """Contraction factor 1 - 0.9 sqrt(mu / L) of the local accelerated bound."""
    if not 0 < mu <= L:
        raise ValueError("need 0 < mu <= L")
    return 1.0 - 0.9 * math.sqrt(mu / L)


def radius_D(mu, L, K):
    """Initialization radius (mu/L)^(3/4) / (20 sqrt K); infinite when K = 0."""
    if K == 0:
        return math.inf
    if K < 0:
        raise ValueError("K is a bound on |curvature| and must be >= 0")
    return (mu / L) ** 0.75 / (20.0 * math.sqrt(K))


def mixing_weight(alpha, gamma, mu):
    """Fraction of the geodesic from x_k to v_k at which y_k sits."""
    return alpha * gamma / (gamma + alpha * mu)


# ---------------------------------------------------------------------------
# parameters / state / trace


def _schedule_at(s, k):
    if callable(s):
        return float(s(k))
    if isinstance(s, (int, float)):
        return float(s)
    return float(s[min(k, len(s) - 1)])  # sequences hold their last value


@dataclass(frozen=True)
class RagdParams:
    """Step sizes ``h`` and shrinkage ``beta`` (constants, sequences or callables of k)."""

    h: Schedule
    beta: Schedule
    gamma0: float
    max_iters: int = 100
    tolerance: float = 0.0

    def h_at(self, k):
        return _schedule_at(self.h, k)

    def beta_at(self, k):
        return _schedule_at(self.beta, k)

    @property
    def is_constant(self):
        return isinstance(self.h, (int, float)) and isinstance(self.beta, (int, float))

    @classmethod
    def default(cls, obj, max_iters=500, tolerance=0.0):
        """h = 1/L, beta = sqrt(mu/L)/5 and the matching constant gamma0."""
        h = 1.0 / obj.lipschitz
        beta = default_beta(obj.mu, obj.lipschitz)
        return cls(h, beta, constant_params(h, beta, obj.mu).gamma, max_iters, tolerance)

    def validate(self, obj):
        if self.gamma0 <= 0:
            raise ParameterError("gamma0 must be positive")
        if self.max_iters < 0:
            raise ParameterError("max_iters must be non-negative")
        for k in range(1 if self.is_constant else self.max_iters + 1):
            if self.h_at(k) > 1.0 / obj.lipschitz * (1 + 1e-12):
                raise ParameterError(f"h_{k} = {self.h_at(k)} exceeds 1/L = {1.0 / obj.lipschitz}")
            if self.beta_at(k) < 0:
                raise ParameterError("beta must be non-negative")


@dataclass(frozen=True)
class RagdState:
    k: int
    x: object
    v: object
    y: object
    alpha: float
    gamma: float
    gamma_bar: float


@dataclass(frozen=True)
class StepInfo:
    """Intermediate quantities of iteration k, kept for the diagnostics."""

    k: int
    f_y: float
    grad_y: object  # Tangent at y_k
    log_v: object  # log_{y_k}(v_k)
    v_dir: object  # tangent at y_k whose exp is v_{k+1}
    h: float
    beta: float


@dataclass
class TraceRecord:
    k: int
    f_value: float
    f_gap: float
    dist_to_min: float
    grad_norm: float
    in_ball: bool
    state: Optional[RagdState] = None
    x: object = None
    diagnostics: object = None


@dataclass
class Trace:
    algorithm: str
    records: list = field(default_factory=list)
    stopped_by: str = "max_iters"
    ball_exits: int = 0

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def f_gaps(self):
        return [r.f_gap for r in self.records]

    @property
    def final(self):
        return self.records[-1]

    def iterations_to(self, f_gap_tol):
        """First k with f_gap <= tol, or None."""
        for r in self.records:
            if r.f_gap is not None and r.f_gap <= f_gap_tol:
                return r.k
        return None


def _record(obj, k, x, state=None, in_ball=None):
    m = obj.manifold
    try:
        f = obj.value(x)
        f_star = obj.f_star
        g = obj.grad(x)
    except CutLocusError as exc:
        raise IterationError(k, exc) from exc
    return TraceRecord(
        k=k,
        f_value=f,
        f_gap=None if f_star is None else f - f_star,
        dist_to_min=None if obj.minimizer is None else m.dist(x, obj.minimizer),
        grad_norm=m.norm(x, g),
        in_ball=obj.in_domain(x) if in_ball is None else in_ball,
        state=state,
        x=x,
    )


def _should_stop(rec, tol):
    if tol <= 0:
        return None
    if rec.grad_norm <= tol:
        return "grad_norm"
    if rec.f_gap is not None and rec.f_gap <= tol:
        return "f_gap"
    return None


# ---------------------------------------------------------------------------
# general scheme


def initial_state(obj, x0, gamma0, h0):
    """State at k = 0: v_0 = x_0, so y_0 = x_0."""
    alpha = solve_alpha(h0, gamma0, obj.mu)
    gamma_bar = (1.0 - alpha) * gamma0 + alpha * obj.mu
    return RagdState(0, x0, x0, x0, alpha, gamma0, gamma_bar)


def _next_y(m, x, v, alpha, gamma, mu):
    if x is v:
        return x
    return m.exp(x, mixing_weight(alpha, gamma, mu) * m.log(x, v))


def ragd_step(obj, state, h, beta, h_next=None):
    """One iteration of the general scheme; returns ``(next_state, info)``.

    ``h`` must be the step size that produced ``state.alpha``;
    ``h_next`` (default ``h``) is used to solve for alpha_{k+1} and place
    y_{k+1} in the returned state.
    """
    m = obj.manifold
    mu = obj.mu
    k = state.k
    a, g, gb = state.alpha, state.gamma, state.gamma_bar
    y = state.y
    try:
        f_y = obj.value(y)
        grad = obj.grad(y)
        x_next = m.exp(y, -h * grad)
        log_v = m.zero(y) if state.v is y else m.log(y, state.v)
        v_dir = ((1.0 - a) * g / gb) * log_v - (a / gb) * grad
        v_next = m.exp(y, v_dir)
        gamma_next = gb / (1.0 + beta)
        h_next = h if h_next is None else h_next
        a_next = solve_alpha(h_next, gamma_next, mu)
        gb_next = (1.0 - a_next) * gamma_next + a_next * mu
        y_next = _next_y(m, x_next, v_next, a_next, gamma_next, mu)
    except (CutLocusError, ParameterError) as exc:
        raise IterationError(k, exc) from exc
    new = RagdState(k + 1, x_next, v_next, y_next, a_next, gamma_next, gb_next)
    return new, StepInfo(k, f_y, grad, log_v, v_dir, h, beta)


# ---------------------------------------------------------------------------
# constant-step scheme


def constant_initial_state(obj, x0, h, beta):
    cp = constant_params(h, beta, obj.mu)
    return RagdState(0, x0, x0, x0, cp.alpha, cp.gamma, cp.gamma_bar)


def constant_step(obj, state, h, beta):
    """One iteration with the closed-form constants (alpha, gamma, gamma_bar carried unchanged)."""
    m = obj.manifold
    a, g, gb = state.alpha, state.gamma, state.gamma_bar
    y = state.y
    try:
        f_y = obj.value(y)
        grad = obj.grad(y)
        x_next = m.exp(y, -h * grad)
        log_v = m.zero(y) if state.v is y else m.log(y, state.v)
        v_dir = ((1.0 - a) * g / gb) * log_v - (a / gb) * grad
        v_next = m.exp(y, v_dir)
        y_next = _next_y(m, x_next, v_next, a, g, obj.mu)
    except CutLocusError as exc:
        raise IterationError(state.k, exc) from exc
    new = RagdState(state.k + 1, x_next, v_next, y_next, a, g, gb)
    return new, StepInfo(state.k, f_y, grad, log_v, v_dir, h, beta)


def _iterates_in_ball(obj, state):
    return obj.in_domain(state.x) and obj.in_domain(state.y) and obj.in_domain(state.v)


def ragd_run(obj, x0, params, constant=False, monitor=None):
    """Run the general (default) or constant-step scheme from ``x0``.

    ``monitor`` is any object with ``start(obj, state, params)``,
    ``observe(state, info, next_state)`` and ``finish(state)`` methods,
    typically :class:`ragd.diagnostics.EstimateSequenceMonitor`; its
    per-iteration records are attached to the trace.
    """
    params.validate(obj)
    if constant:
        if not params.is_constant:
            raise ParameterError("the constant-step scheme needs constant h and beta")
        state = constant_initial_state(obj, x0, params.h, params.beta)
    else:
        state = initial_state(obj, x0, params.gamma0, params.h_at(0))
    trace = Trace("ragd-constant" if constant else "ragd-general")
    if monitor is not None:
        monitor.start(obj, state, params)
    ball = _iterates_in_ball(obj, state)
    trace.records.append(_record(obj, 0, state.x, state, ball))
    for k in range(params.max_iters):
        reason = _should_stop(trace.records[-1], params.tolerance)
        if reason:
            trace.stopped_by = reason
            break
        h, beta = params.h_at(k), params.beta_at(k)
        if constant:
            new, info = constant_step(obj, state, h, beta)
        else:
            new, info = ragd_step(obj, state, h, beta, params.h_at(k + 1))
        if monitor is not None:
            monitor.observe(state, info, new)
        state = new
        ball = _iterates_in_ball(obj, state)
        trace.ball_exits += not ball
        trace.records.append(_record(obj, state.k, state.x, state, ball))
    else:
        trace.stopped_by = _should_stop(trace.records[-1], params.tolerance) or "max_iters"
    if monitor is not None:
        monitor.finish(state)
        for rec in trace.records:
            rec.diagnostics = monitor.record(rec.k)
    return trace


# ---------------------------------------------------------------------------
# baseline


def rgd_step(obj, x, h):
    """x+ = exp_x(-h grad f(x))."""
    return obj.manifold.exp(x, -h * obj.grad(x))


def rgd_run(obj, x0, h=None, max_iters=100, tolerance=0.0):
    h = 1.0 / obj.lipschitz if h is None else h
    trace = Trace("rgd")
    x = x0
    trace.records.append(_record(obj, 0, x))
    for k in range(max_iters):
        reason = _should_stop(trace.records[-1], tolerance)
        if reason:
            trace.stopped_by = reason
            break
        try:
            x = rgd_step(obj, x, h)
        except CutLocusError as exc:
            raise IterationError(k, exc) from exc
        rec = _record(obj, k + 1, x)
        trace.ball_exits += not rec.in_ball
        trace.records.append(rec)
    else:
        trace.stopped_by = _should_stop(trace.records[-1], tolerance) or "max_iters"
    return trace
