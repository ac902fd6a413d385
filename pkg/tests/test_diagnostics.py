import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ragd.diagnostics import (EstimateSeqState, EstimateSequenceMonitor, check_comparison,
                              check_complete_square, check_lower_bound, check_theorem1,
                              check_theorem4, check_weak_estimate, empirical_contraction,
                              induction_radius, leq, sufficient_condition, update_phi_star)
from ragd.manifolds import Euclidean, Hyperbolic, Sphere
from ragd.objectives import (euclidean_quadratic, frechet_mean_objective, solve_frechet_mean,
                             squared_distance_objective)
from ragd.optimizers import (RagdParams, constant_params, initial_state, radius_D, ragd_run,
                             ragd_step)


def quadratic_run(iters=200, cond=100.0, seed=0, n_probes=20):
    r = np.random.default_rng(seed)
    n = 5
    q, _ = np.linalg.qr(r.standard_normal((n, n)))
    obj = euclidean_quadratic(q @ np.diag(np.geomspace(1, cond, n)) @ q.T, r.standard_normal(n))
    x0 = obj.manifold.point(r.standard_normal(n))
    mon = EstimateSequenceMonitor(n_probes=n_probes, seed=seed)
    tr = ragd_run(obj, x0, RagdParams.default(obj, iters), monitor=mon)
    return obj, tr, mon


def local_run(m, radius=1.0, iters=500, seed=0, frechet=False):
    r = np.random.default_rng(seed)
    if frechet:
        c = m.random_point(r)
        pts = [m.random_ball_point(c, 0.3, r) for _ in range(6)]
        obj = solve_frechet_mean(frechet_mean_objective(m, pts, radius=0.3, center=c))
    else:
        obj = squared_distance_objective(m, m.random_point(r), radius)
    K = m.descriptor.K
    D = radius_D(obj.mu, obj.lipschitz, K)
    x0 = m.random_ball_point(obj.minimizer, D, r)
    mon = EstimateSequenceMonitor(seed=seed)
    tr = ragd_run(obj, x0, RagdParams.default(obj, iters), monitor=mon)
    return obj, x0, tr, mon


# -- estimate-function algebra -------------------------------------------------


def test_phi_star_small_alpha_limit():
    prev = EstimateSeqState(2.5, 1.0)
    nxt = update_phi_star(prev, 1e-12, 0.7, 0.7, 4.0, 3.0, -1.2, 0.9, 0.5)
    assert nxt == pytest.approx(2.5, abs=1e-9)


def test_phi_star_without_corrections():
    nxt = update_phi_star(EstimateSeqState(1.0, 1.0), 0.3, 0.8, 0.9, 5.0, 0.0, 0.0, 0.0, 0.5)
    assert nxt == pytest.approx(0.7 * 1.0 + 0.3 * 5.0, rel=1e-15)


def test_lambda_recursion():
    s = EstimateSeqState(0.0, 1.0)
    for a in (0.1, 0.2, 0.3):
        s = s.advance(0.0, a)
    assert s.lam == pytest.approx(0.9 * 0.8 * 0.7) and s.k == 3


def test_tolerance_is_scale_relative():
    assert leq(1.0 + 5e-10, 1.0)
    assert not leq(1.0 + 5e-9, 1.0)
    assert leq(1e6 * (1 + 5e-10), 1e6)
    assert check_lower_bound(1.0, 1.0)
    assert check_weak_estimate(1.0, 1.0, 1.0, 0.0)
    assert check_theorem1(0.3, 0.0, 1.0, 0.3, 1.0, 0.0)


def test_complete_square_at_next_v():
    obj, _, _, _ = local_run(Sphere(3), iters=0)
    m = obj.manifold
    r = np.random.default_rng(1)
    x0 = m.random_ball_point(obj.minimizer, 0.1, r)
    prm = RagdParams.default(obj, 2)
    s0 = initial_state(obj, x0, prm.gamma0, prm.h)
    s1, info = ragd_step(obj, s0, prm.h, prm.beta)
    s2, info2 = ragd_step(obj, s1, prm.h, prm.beta)
    y, g, lv = s1.y, info2.grad_y, info2.log_v
    phi1 = 0.123  # any value works: the identity is affine in Phi*_k
    phi2 = update_phi_star(phi1, s1.alpha, s1.gamma, s1.gamma_bar, info2.f_y, m.inner(y, g, g),
                           m.inner(y, g, lv), m.inner(y, lv, lv), obj.mu)
    res = check_complete_square(m, y, s1.v, s2.v, s1.alpha, s1.gamma, s1.gamma_bar, obj.mu,
                                info2.f_y, g, phi1, phi2, s2.v)
    assert res <= 1e-12
    for _ in range(20):
        p = m.random_ball_point(y, 1.0, r)
        assert check_complete_square(m, y, s1.v, s2.v, s1.alpha, s1.gamma, s1.gamma_bar, obj.mu,
                                     info2.f_y, g, phi1, phi2, p) <= 1e-12


# -- comparison inequality -----------------------------------------------------


def test_comparison_euclidean():
    E = Euclidean(3)
    r = np.random.default_rng(0)
    y0, y1, v, xs = (E.random_point(r) for _ in range(4))
    c = check_comparison(E, y0, y1, v, xs, 0.5, 0.6, 0.0, beta=0.2)
    assert c.held and c.sufficient and c.bound_factor == 1.0
    assert c.lhs / 0.5 == pytest.approx(c.rhs / 0.6, rel=1e-14)


def test_comparison_same_base():
    S = Sphere(3)
    r = np.random.default_rng(0)
    y = S.random_point(r)
    v, xs = S.random_ball_point(y, 1.0, r), S.random_ball_point(y, 0.2, r)
    c = check_comparison(S, y, y, v, xs, 0.5, 0.6, 1.0)
    assert c.held and c.lhs / 0.5 == pytest.approx(c.rhs / 0.6, rel=1e-14)
    assert c.sufficient is None


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_sufficient_condition_matches_definition(b, beta):
    assert sufficient_condition(1.0, b, beta) == (5 * b * b <= beta and b <= 0.25)
    assert sufficient_condition(0.0, b, beta)


# -- monitored runs ------------------------------------------------------------


def test_euclidean_run_chain_holds():
    obj, tr, mon = quadratic_run()
    recs = mon.all_records
    assert len(recs) == len(tr) == 201
    assert all(r.comparison_held for r in recs[:-1])
    assert recs[-1].comparison_held is None and recs[-1].complete_square_residual is None
    assert max(r.complete_square_residual for r in recs[:-1]) <= 1e-10
    for r in recs:
        assert r.lower_bound_held and r.weak_es_held and r.theorem1_held


def test_initial_record_is_tight():
    obj, tr, mon = quadratic_run(iters=3)
    d0 = mon.record(0)
    assert d0.phi_star == d0.f_x and d0.lam == 1.0
    assert d0.phi_at_xstar == pytest.approx(mon.phi0_at_xstar, rel=1e-15)
    assert d0.theorem1_rhs >= d0.f_x - mon.f_star


def test_lambda_matches_product():
    obj, tr, mon = quadratic_run(iters=100)
    prod = 1.0
    for rec in tr.records:
        assert rec.diagnostics.lam == pytest.approx(prod, rel=1e-14)
        prod *= 1.0 - rec.state.alpha
    lams = [r.diagnostics.lam for r in tr.records]
    assert all(b < a for a, b in zip(lams, lams[1:]))


@pytest.mark.parametrize("m", [Sphere(3), Hyperbolic(3)], ids=repr)
def test_chain_of_bounds(m):
    obj, x0, tr, mon = local_run(m, iters=200)
    lam_ok = []
    for r in mon.all_records:
        upper = (1 - r.lam) * mon.f_star + r.lam * mon.phi0_at_xstar
        assert leq(r.f_x, r.phi_star)
        assert leq(r.phi_star, r.phi_at_xstar)
        assert leq(r.phi_at_xstar, upper)
        lam_ok.append(r.comparison_held is not False)
    assert all(lam_ok)


@pytest.mark.parametrize("frechet", [False, True])
@pytest.mark.parametrize("m", [Sphere(3), Hyperbolic(3)], ids=repr)
def test_local_theorem_runs(m, frechet):
    obj, x0, tr, mon = local_run(m, iters=500, frechet=frechet)
    flags = check_theorem4(tr, obj.mu, obj.lipschitz, m.dist(x0, obj.minimizer))
    assert flags[0] and all(flags)
    s = mon.summary()
    assert s["comparison_violations"] == 0 and s["sufficient_condition_failures"] == 0
    assert s["max_b_next"] <= induction_radius(obj.mu, obj.lipschitz, m.descriptor.K)


@pytest.mark.parametrize("seed", range(4))
def test_sufficiency_implies_comparison(seed):
    # wider starts so that some steps fall outside the sufficient region
    H = Hyperbolic(3)
    r = np.random.default_rng(seed)
    obj = squared_distance_objective(H, H.random_point(r), 2.0)
    x0 = H.random_ball_point(obj.minimizer, 1.5, r)
    mon = EstimateSequenceMonitor(n_probes=2, seed=seed)
    ragd_run(obj, x0, RagdParams.default(obj, 80), monitor=mon)
    for rec in mon.all_records[:-1]:
        if rec.sufficient:
            assert rec.comparison_held


def test_violation_downgrades_theorem_checks():
    H = Hyperbolic(3)
    r = np.random.default_rng(0)
    c = H.random_point(r)
    pts = [H.random_ball_point(c, 1.5, r) for _ in range(6)]
    obj = solve_frechet_mean(frechet_mean_objective(H, pts, radius=1.5, center=c))
    h = 1.0 / obj.lipschitz
    prm = RagdParams(h, 0.0, constant_params(h, 0.0, obj.mu).gamma, 30)
    x0 = H.exp(obj.minimizer, 1.5 * H.random_direction(obj.minimizer, r))
    mon = EstimateSequenceMonitor(n_probes=2)
    tr = ragd_run(obj, x0, prm, monitor=mon)
    recs = mon.all_records
    first = next(rec.k for rec in recs if rec.comparison_held is False)
    assert all(rec.theorem1_held is not None for rec in recs[: first + 1])
    assert all(rec.theorem1_held is None and rec.weak_es_held is None for rec in recs[first + 1:])
    flags = check_theorem4(tr, obj.mu, obj.lipschitz, H.dist(x0, obj.minimizer))
    assert all(f is None for f in flags[first + 1:])
    assert mon.violations >= 1


def test_monitor_needs_minimizer():
    S = Sphere(2)
    r = np.random.default_rng(0)
    obj = frechet_mean_objective(S, [S.random_point(r)], radius=0.1)
    with pytest.raises(ValueError):
        ragd_run(obj, obj.center, RagdParams(0.5, 0.1, 1.0, 2), monitor=EstimateSequenceMonitor())


def test_probes_are_seeded():
    _, _, a = quadratic_run(iters=20, seed=4)
    _, _, b = quadratic_run(iters=20, seed=4)
    assert [r.to_dict() for r in a.all_records] == [r.to_dict() for r in b.all_records]


def test_empirical_contraction():
    assert empirical_contraction([0.5 ** k for k in range(20)]) == pytest.approx(0.5)
    assert empirical_contraction([1.0, 0.0, 0.0]) is None
    assert induction_radius(1.0, 1.0, 0.0) == math.inf
