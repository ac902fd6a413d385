"""Geodesically strongly convex test objectives and definitional checkers."""

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .manifolds import Euclidean, Manifold, Point, Tangent

INEQ_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Objective:
    """Value/gradient oracle with curvature-aware constants.

    ``mu`` and ``lipschitz`` are valid on the geodesic ball of radius
    ``domain_radius`` around ``center`` (the minimizer, when known).
    """

    manifold: Manifold
    value: Callable[[Point], float]
    grad: Callable[[Point], Tangent]
    mu: float
    lipschitz: float
    minimizer: Optional[Point] = None
    domain_radius: float = math.inf
    center: Optional[Point] = None
    name: str = "objective"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mu < 0 or self.lipschitz < self.mu:
            raise ValueError(f"need 0 <= mu <= L, got mu={self.mu}, L={self.lipschitz}")
        if self.center is None and self.minimizer is not None:
            object.__setattr__(self, "center", self.minimizer)

    @property
    def condition_number(self):
        return self.lipschitz / self.mu

    @property
    def f_star(self):
        return self.value(self.minimizer) if self.minimizer is not None else None

    def in_domain(self, x, slack=0.0):
        if math.isinf(self.domain_radius) or self.center is None:
            return True
        return self.manifold.dist(self.center, x) <= self.domain_radius + slack

    def with_minimizer(self, x_star):
        return replace(self, minimizer=x_star, center=self.center or x_star)

    def with_constants(self, mu=None, lipschitz=None):
        return replace(
            self,
            mu=self.mu if mu is None else mu,
            lipschitz=self.lipschitz if lipschitz is None else lipschitz,
        )


def squared_distance_constants(manifold, radius):
    """(mu, L) for 1/2 d(., p)^2 on a ball of the given radius around p.

    Hessian comparison: eigenvalues lie between sqrt(k) r cot(sqrt(k) r)
    (upper curvature k > 0) and sqrt(k') r coth(sqrt(k') r) (lower
    curvature -k' < 0).
    """
    lo, hi = manifold.descriptor.curvature_lower, manifold.descriptor.curvature_upper
    if radius <= 0:
        raise ValueError("radius must be positive")
    mu, L = 1.0, 1.0
    if hi > 0:
        s = math.sqrt(hi) * radius
        if s >= math.pi / 2:
            raise ValueError(
                f"radius {radius} too large: need radius < pi / (2 sqrt(K)) = {math.pi / (2 * math.sqrt(hi))}"
            )
        mu = s / math.tan(s)
    if lo < 0:
        if math.isinf(radius):
            raise ValueError("an infinite radius has no finite smoothness constant")
        s = math.sqrt(-lo) * radius
        L = s / math.tanh(s)
    return mu, L


def squared_distance_objective(manifold, p, radius):
    """f(x) = 1/2 d(x, p)^2 with gradient -log_x(p)."""
    if isinstance(manifold, Euclidean):
        mu = L = 1.0
    else:
        mu, L = squared_distance_constants(manifold, radius)

    def value(x):
        return 0.5 * manifold.dist(x, p) ** 2

    def grad(x):
        return -manifold.log(x, p)

    return Objective(manifold, value, grad, mu, L, minimizer=p, domain_radius=radius,
                     center=p, name="squared_distance")


def frechet_mean_objective(manifold, points, weights=None, radius=None, center=None):
    """f(x) = 1/2 sum_i w_i d(x, p_i)^2 on the ball B(center, radius).

    ``center`` defaults to ``points[0]``; every anchor must lie in the ball.
    Distances from a point of the ball to any anchor are at most
    ``2 * radius``, which fixes the constants. The minimizer is left
    unset; see :func:`solve_frechet_mean`.
    """
    points = list(points)
    if not points:
        raise ValueError("frechet mean needs at least one point")
    if weights is None:
        weights = np.full(len(points), 1.0 / len(points))
    weights = np.asarray(weights, float)
    if weights.shape != (len(points),) or np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be non-negative, one per point, and sum to 1")
    center = points[0] if center is None else center
    far = max(manifold.dist(center, p) for p in points)
    if radius is None:
        radius = far
    if far > radius + 1e-12:
        raise ValueError(f"anchor at distance {far} lies outside the ball of radius {radius}")
    if isinstance(manifold, Euclidean):
        mu = L = 1.0
    else:
        mu, L = squared_distance_constants(manifold, 2.0 * radius)
    w = [float(a) for a in weights]

    def value(x):
        return 0.5 * sum(wi * manifold.dist(x, p) ** 2 for wi, p in zip(w, points))

    def grad(x):
        g = np.zeros_like(x.coords)
        for wi, p in zip(w, points):
            g -= wi * manifold.log(x, p).coords
        return Tangent(x, g)

    return Objective(manifold, value, grad, mu, L, domain_radius=radius, center=center,
                     name="frechet_mean", params={"anchors": points, "weights": weights})


def solve_frechet_mean(obj, x0=None, grad_tol=1e-12, max_iter=100_000):
    """Riemannian gradient descent at h = 1/L to gradient norm ``grad_tol``.

    Returns the objective with ``minimizer`` filled in.
    """
    m = obj.manifold
    x = obj.center if x0 is None else x0
    h = 1.0 / obj.lipschitz
    best, best_norm = x, math.inf
    for _ in range(max_iter):
        g = obj.grad(x)
        gn = m.norm(x, g)
        if gn < best_norm:
            best, best_norm = x, gn
        if gn <= grad_tol:
            break
        x = m.exp(x, -h * g)
    else:
        if best_norm > grad_tol:
            raise RuntimeError(f"frechet mean solve stalled at |grad| = {best_norm:.3e}")
    return obj.with_minimizer(best)


def euclidean_quadratic(A, b=None):
    """f(x) = 1/2 x^T A x - b^T x on R^n, with mu, L the extreme eigenvalues of A."""
    A = np.array(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n) or not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("A must be a symmetric square matrix")
    A = 0.5 * (A + A.T)
    evals = np.linalg.eigvalsh(A)
    if evals[0] <= 0:
        raise ValueError("A must be positive definite")
    b = np.zeros(n) if b is None else np.asarray(b, float)
    m = Euclidean(n)
    x_star = m.point(np.linalg.solve(A, b))

    def value(x):
        xc = x.coords
        return 0.5 * float(xc @ A @ xc) - float(b @ xc)

    def grad(x):
        return Tangent(x, A @ x.coords - b)

    return Objective(m, value, grad, float(evals[0]), float(evals[-1]), minimizer=x_star,
                     name="quadratic", params={"A": A, "b": b})


def constant_objective(manifold, c=0.0, center=None):
    """Constant function; its constants are mu = L = 0."""
    center = manifold.origin() if center is None else center
    return Objective(manifold, lambda x: c, manifold.zero, 0.0, 0.0, minimizer=center,
                     name="constant")


# ---------------------------------------------------------------------------
# definitional inequalities


@dataclass(frozen=True)
class InequalityCheck:
    slack: float
    holds: bool
    lipschitz_slack: float = math.inf


def _scale(*vals):
    return INEQ_TOL * max(1.0, *(abs(v) for v in vals))


def check_g_strong_convexity(obj, x, y):
    """Slack of f(y) >= f(x) + <g_x, log_x y> + mu/2 |log_x y|^2."""
    m = obj.manifold
    g = obj.grad(x)
    w = m.log(x, y)
    fx, fy = obj.value(x), obj.value(y)
    rhs = fx + m.inner(x, g, w) + 0.5 * obj.mu * m.inner(x, w, w)
    slack = fy - rhs
    return InequalityCheck(slack, slack >= -_scale(fy, rhs))


def check_g_smoothness(obj, x, y):
    """Slack of the quadratic upper bound and of the transported-gradient Lipschitz bound."""
    m = obj.manifold
    gx = obj.grad(x)
    w = m.log(x, y)
    fx, fy = obj.value(x), obj.value(y)
    rhs = fx + m.inner(x, gx, w) + 0.5 * obj.lipschitz * m.inner(x, w, w)
    slack = rhs - fy
    gy_back = m.transport(y, x, obj.grad(y))
    diff = m.norm(x, gx - gy_back)
    reach = obj.lipschitz * m.norm(x, w)
    lip_slack = reach - diff
    ok = slack >= -_scale(fy, rhs) and lip_slack >= -_scale(diff, reach)
    return InequalityCheck(slack, ok, lip_slack)


def finite_diff_grad_check(obj, x, directions=16, step=1e-5, rng=None):
    """Largest error between central differences along geodesics and <grad, u>."""
    if step <= 0:
        raise ValueError("step must be positive")
    rng = np.random.default_rng(0) if rng is None else rng
    m = obj.manifold
    g = obj.grad(x)
    worst = 0.0
    for _ in range(directions):
        u = m.random_direction(x, rng)
        fp = obj.value(m.exp(x, step * u))
        fm = obj.value(m.exp(x, -step * u))
        err = abs((fp - fm) / (2.0 * step) - m.inner(x, g, u))
        worst = max(worst, err)
    return worst


def sample_domain_point(obj, rng, radius=None):
    """Random point in the objective's valid ball (or ``radius`` around its center)."""
    m = obj.manifold
    r = obj.domain_radius if radius is None else radius
    center = obj.center if obj.center is not None else m.origin()
    if math.isinf(r):
        r = 3.0
    return m.random_ball_point(center, r, rng)
