"""Comparison-geometry checks for geodesic triangles and tangent-space distortion.

The scalar functions work on a single :class:`GeodesicTriangle` or a
single quadruple of manifold points; the ``verify_*`` drivers run the
same inequalities over large seeded Monte-Carlo samples using the
batched kernels in :mod:`ragd._kernels`.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from math import factorial

import numpy as np

from . import _kernels as kern
from .exceptions import CutLocusError

SANDWICH_B_MAX = 0.25
CHUNK = 1 << 16


def _py(fn):
    return getattr(fn, "py_func", fn)


_euclid_sq = _py(kern._euclid_side_sq)
_hyper = _py(kern._hyper_side)
_sphere = _py(kern._sphere_side)


@dataclass(frozen=True)
class GeodesicTriangle:
    """Two sides ``b``, ``c`` and the included angle ``A`` in a model space.

    ``curvature`` is the constant sectional curvature (-1, 0 or +1 for the
    standard models; any real value is accepted by :func:`side_in_curvature`).
    """

    b: float
    c: float
    A: float
    curvature: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.b) and math.isfinite(self.c)):
            raise ValueError("side lengths must be finite")
        if self.b < 0 or self.c < 0:
            raise ValueError("side lengths must be non-negative")
        if not 0.0 <= self.A <= math.pi:
            raise ValueError("angle must lie in [0, pi]")


def euclidean_side(t):
    """Third side of the flat triangle with sides b, c and included angle A."""
    return math.sqrt(_euclid_sq(t.b, t.c, t.A))


def hyperbolic_side(t):
    """Third side in curvature -1 (hyperbolic law of cosines).

    Evaluated in the half-angle form
    sinh^2(a/2) = sinh^2((b-c)/2) + sinh b sinh c sin^2(A/2),
    which has no cancellation for thin triangles.
    """
    return _hyper(t.b, t.c, t.A)


def spherical_side(t):
    """Third side in curvature +1; requires b + c <= pi."""
    if t.b + t.c > math.pi + 1e-12:
        raise ValueError("spherical_side requires b + c <= pi")
    return _sphere(t.b, t.c, t.A)


def side_in_curvature(b, c, A, kappa):
    """Third side of a triangle in the model space of constant curvature ``kappa``.

    Uses the rescaling a_kappa(b, c) = a_1(sqrt|kappa| b, sqrt|kappa| c) / sqrt|kappa|.
    """
    if kappa == 0:
        return math.sqrt(_euclid_sq(b, c, A))
    r = math.sqrt(abs(kappa))
    side = _hyper if kappa < 0 else _sphere
    return side(r * b, r * c, A) / r


@dataclass(frozen=True)
class SandwichResult:
    a_sq: float
    abar_sq: float
    holds: bool
    admissible: bool = True


def _tol(scale):
    return 1e-10 * scale if scale > 1.0 else 1e-12


def check_hyperbolic_sandwich(t):
    """abar^2 <= a^2 <= (1 + 2 b^2) abar^2 for b <= 1/4 in curvature -1.

    Triangles with b > 1/4 are returned with ``admissible=False`` and
    ``holds=False``; they fall outside the inequality's hypothesis.
    """
    a2 = hyperbolic_side(t) ** 2
    e2 = euclidean_side(t) ** 2
    if t.b > SANDWICH_B_MAX:
        return SandwichResult(a2, e2, False, admissible=False)
    tol = _tol(max(a2, e2))
    ok = e2 <= a2 + tol and a2 <= (1.0 + 2.0 * t.b**2) * e2 + tol
    return SandwichResult(a2, e2, ok)


def check_spherical_sandwich(t):
    """a^2 <= abar^2 <= (1 + 2 b^2) a^2 for b <= 1/4, c <= pi/2 in curvature +1."""
    if t.b > SANDWICH_B_MAX or t.c > math.pi / 2:
        a2 = e2 = math.nan
        if t.b + t.c <= math.pi:
            a2, e2 = spherical_side(t) ** 2, euclidean_side(t) ** 2
        return SandwichResult(a2, e2, False, admissible=False)
    a2 = spherical_side(t) ** 2
    e2 = euclidean_side(t) ** 2
    tol = _tol(max(a2, e2))
    ok = a2 <= e2 + tol and e2 <= (1.0 + 2.0 * t.b**2) * a2 + tol
    return SandwichResult(a2, e2, ok)


@dataclass
class DistortionSample:
    """Both sides of the base-change distortion bound for one quadruple.

    ``lhs = |log_{y1} x* - log_{y1} v|^2``, ``rhs = |log_{y0} x* - log_{y0} v|^2``
    and the claim is ``lhs <= bound_factor * rhs`` with ``bound_factor = 1 + 5 K b_max^2``.
    """

    x_star: object
    v: object
    y0: object
    y1: object
    b_max: float
    lhs: float
    rhs: float
    bound_factor: float
    admissible: bool
    holds: bool | None
    true_dist_sq: float = math.nan


def check_distortion(manifold, x_star, v, y0, y1):
    d = manifold.descriptor
    K = d.K
    inj = d.injectivity_radius
    nan = math.nan
    pairs = ((y0, x_star), (y0, v), (y1, x_star), (y1, v))
    if any(manifold.dist(p, q) >= inj - 1e-6 for p, q in pairs):
        return DistortionSample(x_star, v, y0, y1, nan, nan, nan, nan, False, None)
    try:
        l0x, l0v = manifold.log(y0, x_star), manifold.log(y0, v)
        l1x, l1v = manifold.log(y1, x_star), manifold.log(y1, v)
    except CutLocusError:
        return DistortionSample(x_star, v, y0, y1, nan, nan, nan, nan, False, None)
    b = max(manifold.norm(y0, l0x), manifold.norm(y1, l1x))
    r = l0x - l0v
    q = l1x - l1v
    rhs = max(manifold.inner(y0, r, r), 0.0)
    lhs = max(manifold.inner(y1, q, q), 0.0)
    factor = 1.0 + 5.0 * K * b * b
    admissible = K == 0 or b <= 1.0 / (4.0 * math.sqrt(K))
    holds = None
    if admissible:
        holds = lhs <= factor * rhs + _tol(max(lhs, rhs))
    return DistortionSample(
        x_star, v, y0, y1, b, lhs, rhs, factor, admissible, holds,
        true_dist_sq=manifold.dist(x_star, v) ** 2,
    )


def composed_factor_ok(K, b):
    """(1 + 2 K b^2)^2 <= 1 + 5 K b^2, valid whenever b <= 1/(4 sqrt K)."""
    return (1.0 + 2.0 * K * b * b) ** 2 <= 1.0 + 5.0 * K * b * b


# ---------------------------------------------------------------------------
# exact identities


def multinomial(n, *ks):
    if sum(ks) != n or min(ks) < 0:
        return 0
    out = factorial(n)
    for k in ks:
        out //= factorial(k)
    return out


@dataclass(frozen=True)
class IdentityResult:
    lhs: int
    rhs: int
    equal: bool


def multinomial_identity(p, q, variant="even"):
    """Exact check of the two pair-counting identities.

    even: (2p+2q)! / ((2p)! (2q)!) == sum_k M(p+q; p-k, q-k, 2k) 4^k
    odd:  (2p+2q+2)! / ((2p+1)! (2q+1)!) == sum_k M(p+q+1; p-k, q-k, 2k+1) 2^(2k+1)
    """
    if not (0 <= q <= p <= 20):
        raise ValueError("need 0 <= q <= p <= 20")
    if variant == "even":
        lhs = factorial(2 * p + 2 * q) // (factorial(2 * p) * factorial(2 * q))
        rhs = sum(multinomial(p + q, p - k, q - k, 2 * k) * 2 ** (2 * k) for k in range(q + 1))
    elif variant == "odd":
        lhs = factorial(2 * p + 2 * q + 2) // (factorial(2 * p + 1) * factorial(2 * q + 1))
        rhs = sum(
            multinomial(p + q + 1, p - k, q - k, 2 * k + 1) * 2 ** (2 * k + 1) for k in range(q + 1)
        )
    else:
        raise ValueError("variant must be 'even' or 'odd'")
    return IdentityResult(lhs, rhs, lhs == rhs)


# ---------------------------------------------------------------------------
# Monte-Carlo drivers


@dataclass
class VerificationReport:
    check: str
    samples: int
    rejected: int = 0
    violations: int = 0
    max_ratio_observed: float = 0.0
    details: dict = field(default_factory=dict)
    schema: int = 1

    def to_dict(self):
        return asdict(self)

    @property
    def passed(self):
        return self.violations == 0


def _shards(samples, seed):
    n_chunks = -(-samples // CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [min(CHUNK, samples - i * CHUNK) for i in range(n_chunks)]
    return list(zip(sizes, seqs))


def _run_shards(fn, samples, seed, workers):
    shards = _shards(samples, seed)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(lambda s: fn(*s), shards))
    return [fn(*s) for s in shards]


def _max_ratio(num, den):
    ok = den > 1e-300
    if not np.any(ok):
        return 0.0
    return float(np.max(num[ok] / den[ok]))


def verify_hyperbolic_sandwich(samples, seed=0, c_max=10.0, workers=None):
    """"Check over triangles with b <= 1/4, stratified on c < 1/2 and c >= 1/2."""
    if samples < 1:
        raise ValueError("samples must be >= 1")

    def shard(n, seq):
        rng = np.random.default_rng(seq)
        b = SANDWICH_B_MAX * rng.random(n)
        half = n // 2
        c = np.concatenate((0.5 * rng.random(half), 0.5 + (c_max - 0.5) * rng.random(n - half)))
        A = math.pi * rng.random(n)
        a2, e2, lower, upper = kern.hyper_sandwich(b, c, A)
        small = c < 0.5
        return {
            "n": n,
            "small_c": int(np.sum(small)),
            "lower_viol": int(np.sum(~lower)),
            "upper_viol": int(np.sum(~upper)),
            "viol": int(np.sum(~(lower & upper))),
            # c <= 1/2 admits the tighter factor (1 + b^2)
            "small_c_tight_viol": int(np.sum(a2[small] > (1 + b[small] ** 2) * e2[small] + 1e-12)),
            "ratio": _max_ratio(a2, (1.0 + 2.0 * b * b) * e2),
            "lower_ratio": _max_ratio(e2, a2),
        }

    parts = _run_shards(shard, samples, seed, workers)
    return _merge("hyperbolic_sandwich", samples, parts)


def verify_spherical_sandwich(samples, seed=0, workers=None):
    """Check over triangles with b <= 1/4, c <= pi/2 in curvature +1."""
    if samples < 1:
        raise ValueError("samples must be >= 1")

    def shard(n, seq):
        rng = np.random.default_rng(seq)
        b = SANDWICH_B_MAX * rng.random(n)
        c = 0.5 * math.pi * rng.random(n)
        A = math.pi * rng.random(n)
        a2, e2, lower, upper = kern.sphere_sandwich(b, c, A)
        return {
            "n": n,
            "small_c": int(np.sum(c < 0.5)),
            "lower_viol": int(np.sum(~lower)),
            "upper_viol": int(np.sum(~upper)),
            "viol": int(np.sum(~(lower & upper))),
            "ratio": _max_ratio(e2, (1.0 + 2.0 * b * b) * a2),
            "lower_ratio": _max_ratio(a2, e2),
        }

    parts = _run_shards(shard, samples, seed, workers)
    return _merge("spherical_sandwich", samples, parts)


def _dist_batch(kind, X, Y):
    if kind == "sphere":
        d = Y - X
        xd = np.sum(X * d, axis=1)
        s = np.linalg.norm(d - xd[:, None] * X, axis=1)
        return np.arctan2(s, 1.0 + xd)
    d = Y - X
    m = np.sum(d[:, 1:] ** 2, axis=1) - d[:, 0] ** 2
    return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(m, 0.0)))


def sample_quadruples(kind, rng, n, dim=3):
    """Random (x*, v, y0, y1) with d(y_i, x*) <= 1/4.

    Sphere: v within pi/2 - 1/4 of x*, so all four points lie in a ball of
    radius < pi/2 (geodesically convex, uniquely geodesic). Hyperboloid:
    half the v's within 1/2 of x*, half out to distance 5.
    """
    D = dim + 1
    b_cap = 0.25  # 1 / (4 sqrt K) with K = 1
    X = kern.random_points(kind, rng, n, D)
    Y0 = kern.exp_batch(kind, X, kern.random_tangents(kind, rng, X, b_cap))
    Y1 = kern.exp_batch(kind, X, kern.random_tangents(kind, rng, X, b_cap))
    if kind == "sphere":
        V = kern.exp_batch(kind, X, kern.random_tangents(kind, rng, X, math.pi / 2 - b_cap))
    else:
        half = n // 2
        Vn = kern.random_tangents(kind, rng, X[:half], 0.5)
        Vf = kern.random_tangents(kind, rng, X[half:], 5.0, 0.5)
        V = kern.exp_batch(kind, X, np.vstack((Vn, Vf)))
    return X, V, Y0, Y1


def verify_distortion(kind, samples, seed=0, dim=3, workers=None):
    """Monte-Carlo check of lhs <= (1 + 5 K b^2) rhs on Sphere(dim) / Hyperbolic(dim).

    ``kind`` is ``"sphere"``, ``"hyperbolic"`` or ``"euclidean"``; the flat
    case reports the largest relative gap between the two sides, which
    should sit at rounding level.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if kind == "euclidean":
        return _verify_distortion_flat(samples, seed, dim)
    if kind not in ("sphere", "hyperbolic"):
        raise ValueError(f"unknown model {kind!r}")
    K = 1.0
    inj = math.pi if kind == "sphere" else math.inf

    def shard(n, seq):
        rng = np.random.default_rng(seq)
        X, V, Y0, Y1 = sample_quadruples(kind, rng, n, dim)
        lhs, rhs, bmax, pmax = kern.distortion(kind, X, V, Y0, Y1)
        ok = (bmax <= 1.0 / (4.0 * math.sqrt(K))) & (pmax < inj - 1e-6)
        factor = 1.0 + 5.0 * K * bmax * bmax
        scale = np.maximum(lhs, rhs)
        tol = np.where(scale > 1.0, 1e-10 * scale, 1e-12)
        viol = ok & (lhs > factor * rhs + tol)
        # model spaces satisfy the tighter 1 + 2 K b^2 (one comparison per vertex)
        tight = 1.0 + 2.0 * K * bmax * bmax
        dxv2 = _dist_batch(kind, X, V) ** 2
        if kind == "sphere":
            one_sided_viol = ok & ((dxv2 > rhs + tol) | (lhs > tight * dxv2 + tol))
        else:
            one_sided_viol = ok & ((lhs > dxv2 + tol) | (dxv2 > tight * rhs + tol))
        return {
            "n": n,
            "rejected": int(np.sum(~ok)),
            "viol": int(np.sum(viol)),
            "tight_viol": int(np.sum(ok & (lhs > tight * rhs + tol))),
            "one_sided_viol": int(np.sum(one_sided_viol)),
            "ratio": _max_ratio(lhs[ok], (factor * rhs)[ok]),
            "max_b": float(np.max(bmax)),
        }

    parts = _run_shards(shard, samples, seed, workers)
    return _merge(f"distortion_{kind}", samples, parts)


def _verify_distortion_flat(samples, seed, dim):
    rng = np.random.default_rng(seed)
    X, V, Y0, Y1 = (rng.standard_normal((samples, dim)) for _ in range(4))
    r = (X - Y0) - (V - Y0)
    q = (X - Y1) - (V - Y1)
    rhs = np.sum(r * r, axis=1)
    lhs = np.sum(q * q, axis=1)
    gap = np.abs(lhs - rhs) / np.maximum(rhs, 1e-300)
    viol = int(np.sum(lhs > rhs + 1e-12 * np.maximum(1.0, rhs)))
    return VerificationReport(
        "distortion_euclidean",
        samples,
        0,
        viol,
        _max_ratio(lhs, rhs),
        {"bound_factor": 1.0, "max_relative_gap": float(np.max(gap)), "exact_equality": bool(np.max(gap) < 1e-12)},
    )


def _merge(name, samples, parts):
    rejected = sum(p.pop("rejected", 0) for p in parts)
    viol = sum(p.pop("viol") for p in parts)
    ratio = max(p.pop("ratio") for p in parts)
    details = {}
    for p in parts:
        p.pop("n")
        for k, v in p.items():
            if isinstance(v, float):
                details[k] = max(details.get(k, -math.inf), v)
            else:
                details[k] = details.get(k, 0) + v
    details["backend"] = "numba" if kern.USE_NUMBA else "numpy"
    return VerificationReport(name, samples, rejected, viol, ratio, details)


def verify_identities(p_max):
    """All q <= p <= p_max, both variants, exact integers."""
    if not 0 <= p_max <= 20:
        raise ValueError("p_max must be in [0, 20]")
    checked = mismatches = 0
    failures = []
    for p in range(p_max + 1):
        for q in range(p + 1):
            for variant in ("even", "odd"):
                res = multinomial_identity(p, q, variant)
                checked += 1
                if not res.equal:
                    mismatches += 1
                    failures.append([p, q, variant])
    return VerificationReport(
        "multinomial_identities", checked, 0, mismatches, 1.0 if checked else 0.0,
        {"p_max": p_max, "failures": failures},
    )
