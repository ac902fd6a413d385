"""Batched numeric kernels for the Monte-Carlo geometry checks.

Each kernel has two implementations with identical signatures:

* ``*_np``   -- vectorised numpy, always available;
* ``*_nb``   -- an explicit per-row loop compiled with numba.

The module-level names without suffix point at the numba version when
``ragd._accel.USE_NUMBA`` is true and at the numpy version otherwise.
Inputs are float64 arrays; point batches have shape (N, D) with one
ambient point per row.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# laws of cosines (numerically stable half-angle forms)


def euclid_side_sq_np(b, c, A):
    s = np.sin(0.5 * A)
    return (b - c) ** 2 + 4.0 * b * c * s * s


def hyper_side_np(b, c, A):
    s = np.sin(0.5 * A)
    h = np.sinh(0.5 * (b - c))
    return 2.0 * np.arcsinh(np.sqrt(h * h + np.sinh(b) * np.sinh(c) * s * s))


def sphere_side_np(b, c, A):
    s = np.sin(0.5 * A)
    h = np.sin(0.5 * (b - c))
    q = h * h + np.sin(b) * np.sin(c) * s * s
    return 2.0 * np.arcsin(np.sqrt(np.clip(q, 0.0, 1.0)))


@njit
def _euclid_side_sq(b, c, A):
    s = math.sin(0.5 * A)
    return (b - c) ** 2 + 4.0 * b * c * s * s


@njit
def _hyper_side(b, c, A):
    s = math.sin(0.5 * A)
    h = math.sinh(0.5 * (b - c))
    return 2.0 * math.asinh(math.sqrt(h * h + math.sinh(b) * math.sinh(c) * s * s))


@njit
def _sphere_side(b, c, A):
    s = math.sin(0.5 * A)
    h = math.sin(0.5 * (b - c))
    q = h * h + math.sin(b) * math.sin(c) * s * s
    q = min(max(q, 0.0), 1.0)
    return 2.0 * math.asin(math.sqrt(q))


def _tol(scale):
    # absolute 1e-12 on O(1) squared lengths, relative 1e-10 above that
    return np.where(scale > 1.0, 1e-10 * scale, 1e-12)


# ---------------------------------------------------------------------------
# sandwich checks: return (a_sq, abar_sq, lower_ok, upper_ok)


def hyper_sandwich_np(b, c, A):
    a = hyper_side_np(b, c, A)
    a2 = a * a
    e2 = euclid_side_sq_np(b, c, A)
    tol = _tol(np.maximum(a2, e2))
    lower = e2 <= a2 + tol
    upper = a2 <= (1.0 + 2.0 * b * b) * e2 + tol
    return a2, e2, lower, upper


def sphere_sandwich_np(b, c, A):
    a = sphere_side_np(b, c, A)
    a2 = a * a
    e2 = euclid_side_sq_np(b, c, A)
    tol = _tol(np.maximum(a2, e2))
    lower = a2 <= e2 + tol
    upper = e2 <= (1.0 + 2.0 * b * b) * a2 + tol
    return a2, e2, lower, upper


@njit
def _tol_scalar(scale):
    if scale > 1.0:
        return 1e-10 * scale
    return 1e-12


@njit
def hyper_sandwich_nb(b, c, A):
    n = b.shape[0]
    a2 = np.empty(n)
    e2 = np.empty(n)
    lower = np.empty(n, dtype=np.bool_)
    upper = np.empty(n, dtype=np.bool_)
    for i in range(n):
        a = _hyper_side(b[i], c[i], A[i])
        a2[i] = a * a
        e2[i] = _euclid_side_sq(b[i], c[i], A[i])
        tol = _tol_scalar(max(a2[i], e2[i]))
        lower[i] = e2[i] <= a2[i] + tol
        upper[i] = a2[i] <= (1.0 + 2.0 * b[i] * b[i]) * e2[i] + tol
    return a2, e2, lower, upper


@njit
def sphere_sandwich_nb(b, c, A):
    n = b.shape[0]
    a2 = np.empty(n)
    e2 = np.empty(n)
    lower = np.empty(n, dtype=np.bool_)
    upper = np.empty(n, dtype=np.bool_)
    for i in range(n):
        a = _sphere_side(b[i], c[i], A[i])
        a2[i] = a * a
        e2[i] = _euclid_side_sq(b[i], c[i], A[i])
        tol = _tol_scalar(max(a2[i], e2[i]))
        lower[i] = a2[i] <= e2[i] + tol
        upper[i] = e2[i] <= (1.0 + 2.0 * b[i] * b[i]) * a2[i] + tol
    return a2, e2, lower, upper


# ---------------------------------------------------------------------------
# batched sphere / hyperboloid maps (rows are points)


def _mdot_np(u, v):
    return np.sum(u[:, 1:] * v[:, 1:], axis=1) - u[:, 0] * v[:, 0]


def sphere_log_np(X, Y):
    d = Y - X
    xd = np.sum(X * d, axis=1)
    u = d - xd[:, None] * X
    s = np.linalg.norm(u, axis=1)
    t = np.arctan2(s, 1.0 + xd)
    small = t < 1e-4
    t2 = t * t
    ratio = np.where(small, 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0, t / np.where(small, 1.0, np.sin(t)))
    return ratio[:, None] * u, t


def hyper_log_np(X, Y):
    d = Y - X
    u = d + _mdot_np(X, d)[:, None] * X
    s = np.sqrt(np.maximum(_mdot_np(u, u), 0.0))
    t = np.arcsinh(s)
    small = t < 1e-4
    t2 = t * t
    ratio = np.where(small, 1.0 - t2 / 6.0 + 7.0 * t2 * t2 / 360.0, t / np.where(small, 1.0, np.sinh(t)))
    return ratio[:, None] * u, t


def distortion_np(kind, Xs, V, Y0, Y1):
    """Squared tangent-space distances |log_y(x*) - log_y(v)|^2 at y0 and y1.

    Returns (lhs, rhs, b_max, max_pair_dist): lhs is measured at y1, rhs at y0.
    """
    if kind == "sphere":
        log, dot = sphere_log_np, lambda u, v: np.sum(u * v, axis=1)
    else:
        log, dot = hyper_log_np, _mdot_np
    l0x, t0x = log(Y0, Xs)
    l0v, t0v = log(Y0, V)
    l1x, t1x = log(Y1, Xs)
    l1v, t1v = log(Y1, V)
    r = l0x - l0v
    q = l1x - l1v
    rhs = np.maximum(dot(r, r), 0.0)
    lhs = np.maximum(dot(q, q), 0.0)
    return lhs, rhs, np.maximum(t0x, t1x), np.maximum(np.maximum(t0v, t1v), np.maximum(t0x, t1x))


@njit
def _log_row(kind_sphere, x, y, out):
    n = x.shape[0]
    d = y - x
    if kind_sphere:
        xd = 0.0
        for j in range(n):
            xd += x[j] * d[j]
    else:
        xd = -x[0] * d[0]
        for j in range(1, n):
            xd += x[j] * d[j]
        xd = -xd  # u = d + <x,d>_M x  ==  d - (-<x,d>_M) x
    s2 = 0.0
    for j in range(n):
        out[j] = d[j] - xd * x[j]
    if kind_sphere:
        for j in range(n):
            s2 += out[j] * out[j]
        s = math.sqrt(s2)
        t = math.atan2(s, 1.0 + xd)
        if t < 1e-4:
            t2 = t * t
            ratio = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0
        else:
            ratio = t / math.sin(t)
    else:
        s2 = -out[0] * out[0]
        for j in range(1, n):
            s2 += out[j] * out[j]
        s = math.sqrt(max(s2, 0.0))
        t = math.asinh(s)
        if t < 1e-4:
            t2 = t * t
            ratio = 1.0 - t2 / 6.0 + 7.0 * t2 * t2 / 360.0
        else:
            ratio = t / math.sinh(t)
    for j in range(n):
        out[j] *= ratio
    return t


@njit
def _sqnorm(kind_sphere, u, v):
    n = u.shape[0]
    acc = 0.0
    for j in range(n):
        w = u[j] - v[j]
        if j == 0 and not kind_sphere:
            acc -= w * w
        else:
            acc += w * w
    return max(acc, 0.0)


@njit
def _distortion_loop(kind_sphere, Xs, V, Y0, Y1):
    N, D = Xs.shape
    lhs = np.empty(N)
    rhs = np.empty(N)
    bmax = np.empty(N)
    pmax = np.empty(N)
    a = np.empty(D)
    b = np.empty(D)
    for i in range(N):
        t0x = _log_row(kind_sphere, Y0[i], Xs[i], a)
        t0v = _log_row(kind_sphere, Y0[i], V[i], b)
        rhs[i] = _sqnorm(kind_sphere, a, b)
        t1x = _log_row(kind_sphere, Y1[i], Xs[i], a)
        t1v = _log_row(kind_sphere, Y1[i], V[i], b)
        lhs[i] = _sqnorm(kind_sphere, a, b)
        bmax[i] = max(t0x, t1x)
        pmax[i] = max(max(t0v, t1v), bmax[i])
    return lhs, rhs, bmax, pmax


def distortion_nb(kind, Xs, V, Y0, Y1):
    return _distortion_loop(kind == "sphere", Xs, V, Y0, Y1)


# ---------------------------------------------------------------------------
# batched samplers (numpy only; all randomness stays on the numpy Generator)


def sphere_exp_np(X, U):
    t = np.linalg.norm(U, axis=1)
    small = t < 1e-4
    t2 = t * t
    sc = np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(t) / np.where(small, 1.0, t))
    Y = np.cos(t)[:, None] * X + sc[:, None] * U
    return Y / np.linalg.norm(Y, axis=1)[:, None]


def hyper_exp_np(X, U):
    t = np.sqrt(np.maximum(_mdot_np(U, U), 0.0))
    small = t < 1e-4
    t2 = t * t
    sc = np.where(small, 1.0 + t2 / 6.0 + t2 * t2 / 120.0, np.sinh(t) / np.where(small, 1.0, t))
    Y = np.cosh(t)[:, None] * X + sc[:, None] * U
    Y[:, 0] = np.sqrt(1.0 + np.sum(Y[:, 1:] ** 2, axis=1))
    return Y


def random_points(kind, rng, N, D, spread=1.0):
    if kind == "sphere":
        G = rng.standard_normal((N, D))
        return G / np.linalg.norm(G, axis=1)[:, None]
    S = spread * rng.standard_normal((N, D - 1))
    return np.column_stack((np.sqrt(1.0 + np.sum(S * S, axis=1)), S))


def random_tangents(kind, rng, X, r_max, r_min=0.0):
    """Tangent vectors at the rows of X, norms uniform in [r_min, r_max]."""
    N, D = X.shape
    G = rng.standard_normal((N, D))
    if kind == "sphere":
        G -= np.sum(G * X, axis=1)[:, None] * X
        nrm = np.linalg.norm(G, axis=1)
    else:
        G += _mdot_np(X, G)[:, None] * X
        nrm = np.sqrt(np.maximum(_mdot_np(G, G), 0.0))
    r = r_min + (r_max - r_min) * rng.random(N)
    return G * (r / nrm)[:, None]


def exp_batch(kind, X, U):
    return sphere_exp_np(X, U) if kind == "sphere" else hyper_exp_np(X, U)


if USE_NUMBA:
    hyper_sandwich = hyper_sandwich_nb
    sphere_sandwich = sphere_sandwich_nb
    distortion = distortion_nb
else:
    hyper_sandwich = hyper_sandwich_np
    sphere_sandwich = sphere_sandwich_np
    distortion = distortion_np
