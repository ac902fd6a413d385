import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ragd.manifolds import SPD, Euclidean, Hyperbolic, Sphere
from ragd.objectives import (check_g_smoothness, check_g_strong_convexity, constant_objective,
                             euclidean_quadratic, finite_diff_grad_check, frechet_mean_objective,
                             sample_domain_point, solve_frechet_mean, squared_distance_constants,
                             squared_distance_objective)

from conftest import MODELS


def second_derivative(obj, x, u, t=1e-4):
    m = obj.manifold
    f0 = obj.value(x)
    return (obj.value(m.exp(x, t * u)) - 2 * f0 + obj.value(m.exp(x, -t * u))) / (t * t)


def test_euclidean_squared_distance():
    E = Euclidean(3)
    p = E.point([1.0, -2.0, 0.5])
    obj = squared_distance_objective(E, p, 10.0)
    x = E.point([0.0, 0.0, 0.0])
    assert obj.mu == obj.lipschitz == 1.0
    assert obj.value(x) == pytest.approx(0.5 * (1 + 4 + 0.25))
    np.testing.assert_allclose(obj.grad(x).coords, x.coords - p.coords)


@pytest.mark.parametrize("m", MODELS, ids=repr)
def test_minimizer_is_stationary(m, rng):
    p = m.random_point(rng)
    obj = squared_distance_objective(m, p, 1.0)
    assert obj.value(p) == 0.0
    assert m.norm(p, obj.grad(p)) == 0.0
    assert obj.mu <= obj.lipschitz


def test_constants_closed_form():
    mu, L = squared_distance_constants(Sphere(3), 1.0)
    assert mu == pytest.approx(1.0 / math.tan(1.0)) and L == 1.0
    mu, L = squared_distance_constants(Hyperbolic(3), 2.0)
    assert mu == 1.0 and L == pytest.approx(2.0 / math.tanh(2.0))
    assert L == pytest.approx(2.0746, abs=1e-4)
    s = math.sqrt(0.5) * 1.5
    assert squared_distance_constants(SPD(3), 1.5) == pytest.approx((1.0, s / math.tanh(s)))
    with pytest.raises(ValueError):
        squared_distance_objective(Sphere(2), Sphere(2).origin(), math.pi / 2)
    with pytest.raises(ValueError):
        squared_distance_constants(Hyperbolic(2), -1.0)


def test_hyperbolic_radius_two_smoothness_is_sharp():
    H = Hyperbolic(3)
    r = np.random.default_rng(1)
    p = H.random_point(r)
    obj = squared_distance_objective(H, p, 2.0)
    # at distance 2 the Hessian eigenvalue orthogonal to the radial direction is 2 coth 2
    direction = H.random_direction(p, r)
    x = H.exp(p, (2.0 - 1e-9) * direction)
    radial = H.log(x, p)
    u = H.random_direction(x, r)
    u = u - (H.inner(x, u, radial) / H.inner(x, radial, radial)) * radial
    u = u / H.norm(x, u)
    assert second_derivative(obj, x, u) == pytest.approx(obj.lipschitz, rel=1e-5)
    for _ in range(2000):
        a, b = sample_domain_point(obj, r), sample_domain_point(obj, r)
        assert check_g_smoothness(obj, a, b).holds


@pytest.mark.parametrize("m,radius", [(Sphere(3), 1.0), (Hyperbolic(3), 1.5), (SPD(3), 1.0)], ids=repr)
def test_hessian_extremes_within_constants(m, radius):
    r = np.random.default_rng(2)
    obj = squared_distance_objective(m, m.random_point(r), radius)
    for _ in range(200):
        x = sample_domain_point(obj, r)
        u = m.random_direction(x, r)
        d2 = second_derivative(obj, x, u)
        assert obj.mu - 1e-4 <= d2 <= obj.lipschitz + 1e-4


def test_frechet_single_point_matches_squared_distance(rng):
    S = Sphere(3)
    p = S.random_point(rng)
    fm = frechet_mean_objective(S, [p], radius=0.5)
    sd = squared_distance_objective(S, p, 1.0)
    x = S.random_ball_point(p, 0.5, rng)
    assert fm.value(x) == pytest.approx(sd.value(x), rel=1e-14)
    np.testing.assert_allclose(fm.grad(x).coords, sd.grad(x).coords, atol=1e-15)
    # constants use the doubled radius on a ball around the anchors
    assert (fm.mu, fm.lipschitz) == squared_distance_constants(S, 1.0)


def test_frechet_euclidean_minimizer_is_weighted_mean(rng):
    E = Euclidean(4)
    pts = [E.random_point(rng) for _ in range(6)]
    w = rng.random(6)
    w /= w.sum()
    obj = solve_frechet_mean(frechet_mean_objective(E, pts, w))
    expected = sum(wi * p.coords for wi, p in zip(w, pts))
    np.testing.assert_allclose(obj.minimizer.coords, expected, atol=1e-12)


def test_frechet_sphere_mean_is_stationary():
    S = Sphere(3)
    r = np.random.default_rng(3)
    c = S.random_point(r)
    pts = [S.random_ball_point(c, 0.3, r) for _ in range(10)]
    obj = solve_frechet_mean(frechet_mean_objective(S, pts, radius=0.3, center=c))
    x = obj.minimizer
    assert S.norm(x, obj.grad(x)) <= 1e-9
    assert obj.in_domain(x)


def test_frechet_errors(rng):
    S = Sphere(2)
    p = S.random_point(rng)
    with pytest.raises(ValueError):
        frechet_mean_objective(S, [])
    with pytest.raises(ValueError):
        frechet_mean_objective(S, [p, p], weights=[0.7, 0.7])
    far = S.exp(p, 1.0 * S.random_direction(p, rng))
    with pytest.raises(ValueError):
        frechet_mean_objective(S, [p, far], radius=0.5)


def test_quadratic_examples():
    obj = euclidean_quadratic(np.eye(3))
    assert not np.any(obj.minimizer.coords)
    obj = euclidean_quadratic(np.diag([1.0, 100.0]), [1.0, 1.0])
    assert (obj.mu, obj.lipschitz) == (1.0, 100.0)
    np.testing.assert_allclose(obj.minimizer.coords, [1.0, 0.01])
    assert obj.condition_number == 100.0
    x = obj.manifold.point([0.3, -0.7])
    assert finite_diff_grad_check(obj, x, step=1e-5) <= 1e-7
    with pytest.raises(ValueError):
        euclidean_quadratic([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(ValueError):
        euclidean_quadratic([[1.0, 0.5], [0.0, 1.0]])


def test_constant_objective_gradient_check(rng):
    S = Sphere(2)
    obj = constant_objective(S, 3.0)
    assert finite_diff_grad_check(obj, S.random_point(rng)) == 0.0
    assert obj.mu == obj.lipschitz == 0.0


def test_finite_difference_on_hyperbolic(rng):
    H = Hyperbolic(3)
    obj = squared_distance_objective(H, H.random_point(rng), 2.0)
    assert finite_diff_grad_check(obj, sample_domain_point(obj, rng)) <= 1e-6
    with pytest.raises(ValueError):
        finite_diff_grad_check(obj, obj.minimizer, step=0.0)


@pytest.mark.parametrize("m", [Sphere(3), Hyperbolic(3), SPD(2)], ids=repr)
def test_same_point_slack_is_zero(m, rng):
    obj = squared_distance_objective(m, m.random_point(rng), 1.0)
    x = sample_domain_point(obj, rng)
    assert check_g_strong_convexity(obj, x, x).slack == pytest.approx(0.0, abs=1e-15)
    assert check_g_smoothness(obj, x, x).slack == pytest.approx(0.0, abs=1e-15)


@given(st.integers(0, 2**32 - 1))
def test_negative_gradient_decreases(seed):
    r = np.random.default_rng(seed)
    for m in (Sphere(3), Hyperbolic(3)):
        obj = squared_distance_objective(m, m.random_point(r), 1.0)
        x = sample_domain_point(obj, r)
        g = obj.grad(x)
        if m.norm(x, g) > 1e-8:
            assert obj.value(m.exp(x, -1e-3 * g)) < obj.value(x)


def test_wrong_mu_is_caught(rng):
    obj = euclidean_quadratic(np.diag([1.0, 4.0, 9.0]))
    bad = obj.with_constants(mu=2.0)
    viol = 0
    for _ in range(500):
        a, b = sample_domain_point(bad, rng), sample_domain_point(bad, rng)
        viol += not check_g_strong_convexity(bad, a, b).holds
    assert viol > 0


def test_objective_validation(rng):
    E = Euclidean(2)
    with pytest.raises(ValueError):
        squared_distance_objective(E, E.origin(), 1.0).with_constants(mu=2.0)
