"""Exact geometric primitives on four model manifolds.

Points and tangent vectors are stored in ambient coordinates:

* ``Euclidean(n)``  -- R^n.
* ``Sphere(n)``     -- unit sphere S^n in R^(n+1), round metric.
* ``Hyperbolic(n)`` -- upper sheet of the hyperboloid <x, x>_M = -1 in
  Minkowski space R^(1,n); coordinate 0 is the time-like one.
* ``SPD(n)``        -- symmetric positive-definite n x n matrices with the
  affine-invariant metric <U, V>_X = tr(X^-1 U X^-1 V).

All maps are the exact exponential/logarithm maps and parallel transport
along the connecting geodesic (no retractions). Every ``exp`` and
``transport`` result is re-projected onto the constraint set so long runs
do not drift off the manifold.

Examples
--------
>>> import numpy as np
>>> S2 = Sphere(2)
>>> north = S2.point([0.0, 0.0, 1.0])
>>> east = S2.exp(north, S2.tangent(north, [np.pi / 2, 0.0, 0.0]))
>>> np.allclose(east.coords, [1.0, 0.0, 0.0])
True
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ContractError, CutLocusError

POINT_TOL = 1e-10
SYM_TOL = 1e-12
SERIES_CUTOFF = 1e-4
CUT_LOCUS_MARGIN = 1e-6
SPD_MAX_DIM = 64


# ---------------------------------------------------------------------------
# scalar helpers


def sinc(t):
    """sin(t)/t, by series below ``SERIES_CUTOFF``."""
    if abs(t) < SERIES_CUTOFF:
        t2 = t * t
        return 1.0 - t2 / 6.0 + t2 * t2 / 120.0
    return math.sin(t) / t


def sinhc(t):
    """sinh(t)/t, by series below ``SERIES_CUTOFF``."""
    if abs(t) < SERIES_CUTOFF:
        t2 = t * t
        return 1.0 + t2 / 6.0 + t2 * t2 / 120.0
    return math.sinh(t) / t


def inv_sinc(t):
    """t/sin(t)."""
    if abs(t) < SERIES_CUTOFF:
        t2 = t * t
        return 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0
    return t / math.sin(t)


def inv_sinhc(t):
    """t/sinh(t)."""
    if abs(t) < SERIES_CUTOFF:
        t2 = t * t
        return 1.0 - t2 / 6.0 + 7.0 * t2 * t2 / 360.0
    return t / math.sinh(t)


def minkowski(u, v):
    """Lorentzian form -u0 v0 + sum_i ui vi."""
    return float(np.dot(u[1:], v[1:]) - u[0] * v[0])


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class ManifoldDescriptor:
    """Static facts about a manifold used by the comparison-geometry bounds."""

    dimension: int
    curvature_lower: float
    curvature_upper: float
    injectivity_radius: float

    def __post_init__(self):
        if self.curvature_lower > self.curvature_upper:
            raise ValueError("curvature_lower must not exceed curvature_upper")
        if not self.injectivity_radius > 0:
            raise ValueError("injectivity_radius must be positive")

    @property
    def K(self):
        """Bound on the absolute sectional curvature."""
        return max(abs(self.curvature_lower), abs(self.curvature_upper))


def curvature_bounds(m):
    """(lower, upper) sectional-curvature bounds of a manifold or descriptor."""
    d = m.descriptor if isinstance(m, Manifold) else m
    return d.curvature_lower, d.curvature_upper


class Point:
    """A point of ``manifold`` given by ambient ``coords``.

    Treat as immutable. Use :meth:`Manifold.point` to build a checked one.
    """

    __slots__ = ("coords", "manifold", "_cache")

    def __init__(self, coords, manifold):
        self.coords = coords
        self.manifold = manifold
        self._cache = None

    def __repr__(self):
        return f"Point({self.manifold!r}, {np.array2string(self.coords, precision=6)})"


class Tangent:
    """A tangent vector at ``base``, in ambient coordinates.

    Supports the vector-space operations of its tangent space; mixing
    vectors from different base points raises :class:`ContractError`.
    """

    __slots__ = ("base", "coords")

    def __init__(self, base, coords):
        self.base = base
        self.coords = coords

    def __repr__(self):
        return f"Tangent(at={self.base.coords!r}, {np.array2string(self.coords, precision=6)})"

    def _other(self, other):
        if not isinstance(other, Tangent):
            return NotImplemented
        if not same_point(self.base, other.base):
            raise ContractError("tangent vectors live at different base points")
        return other.coords

    def __add__(self, other):
        oc = self._other(other)
        if oc is NotImplemented:
            return oc
        return Tangent(self.base, self.coords + oc)

    def __sub__(self, other):
        oc = self._other(other)
        if oc is NotImplemented:
            return oc
        return Tangent(self.base, self.coords - oc)

    def __neg__(self):
        return Tangent(self.base, -self.coords)

    def __mul__(self, s):
        if isinstance(s, Tangent):
            return NotImplemented
        return Tangent(self.base, float(s) * self.coords)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return Tangent(self.base, self.coords / float(s))


def same_point(x, y):
    if x is y:
        return True
    return x.manifold == y.manifold and np.array_equal(x.coords, y.coords)


# ---------------------------------------------------------------------------
# manifold contract


class Manifold:
    """Common interface; subclasses implement the underscore array kernels."""

    kind = "abstract"

    def __init__(self, n):
        n = int(n)
        if n < 1:
            raise ValueError("dimension must be >= 1")
        self.n = n

    def __repr__(self):
        return f"{type(self).__name__}({self.n})"

    def __eq__(self, other):
        return isinstance(other, Manifold) and (self.kind, self.n) == (other.kind, other.n)

    def __hash__(self):
        return hash((self.kind, self.n))

    @property
    def tag(self):
        return self.kind

    @property
    def descriptor(self):
        lo, hi = self._curvature()
        return ManifoldDescriptor(self.dim, lo, hi, self._injectivity_radius())

    @property
    def dim(self):
        """Intrinsic dimension (dimension of each tangent space)."""
        return self.n

    # -- construction -------------------------------------------------------

    def point(self, coords, check=True):
        xc = np.array(coords, dtype=float)
        if check:
            msg = self._check_point(xc)
            if msg:
                raise ContractError(f"{self!r}: {msg}")
        return Point(xc, self)

    def tangent(self, x, coords, check=True):
        self._own(x)
        uc = np.array(coords, dtype=float)
        if check:
            msg = self._check_tangent(x.coords, uc)
            if msg:
                raise ContractError(f"{self!r}: {msg}")
        return Tangent(x, uc)

    def zero(self, x):
        self._own(x)
        return Tangent(x, np.zeros_like(x.coords))

    def project_tangent(self, x, coords):
        """Orthogonal projection of an ambient vector onto T_x M."""
        self._own(x)
        return Tangent(x, self._proj_tangent(x.coords, np.asarray(coords, float)))

    def origin(self):
        """A canonical base point."""
        return Point(self._origin(), self)

    # -- contract checks ----------------------------------------------------

    def _own(self, x):
        if not isinstance(x, Point) or x.manifold != self:
            raise ContractError(f"point does not belong to {self!r}")

    def _at(self, x, u):
        self._own(x)
        if not isinstance(u, Tangent) or not same_point(u.base, x):
            raise ContractError("tangent vector is not based at the given point")

    # -- metric -------------------------------------------------------------

    def inner(self, x, u, v):
        self._at(x, u)
        self._at(x, v)
        return self._inner(x, u.coords, v.coords)

    def norm(self, x, u):
        return math.sqrt(max(self.inner(x, u, u), 0.0))

    def dist(self, x, y):
        self._own(x)
        self._own(y)
        if x is y:
            return 0.0
        return self._dist(x, y)

    # -- maps ---------------------------------------------------------------

    def exp(self, x, v):
        self._at(x, v)
        return Point(self._exp(x, v.coords), self)

    def log(self, x, y):
        self._own(x)
        self._own(y)
        if x is y:
            return self.zero(x)
        return Tangent(x, self._log(x, y))

    def transport(self, x, y, u):
        """Parallel transport of ``u`` from ``x`` to ``y`` along the geodesic."""
        self._at(x, u)
        self._own(y)
        if same_point(x, y):
            return Tangent(y, u.coords.copy())
        return Tangent(y, self._transport(x, y, u.coords))

    # -- sampling -----------------------------------------------------------

    def random_point(self, rng):
        return Point(self._random_point(rng), self)

    def random_direction(self, x, rng):
        """Unit tangent vector at ``x`` with isotropic direction."""
        self._own(x)
        while True:
            g = self._proj_tangent(x.coords, rng.standard_normal(x.coords.shape))
            nrm = math.sqrt(max(self._inner(x, g, g), 0.0))
            if nrm > 1e-12:
                return Tangent(x, g / nrm)

    def random_tangent(self, x, rng, norm_bound):
        """Tangent vector uniform in the metric ball of radius ``norm_bound``."""
        if norm_bound < 0:
            raise ValueError("norm_bound must be non-negative")
        u = self.random_direction(x, rng)
        if norm_bound == 0:
            return self.zero(x)
        r = norm_bound * rng.random() ** (1.0 / self.dim)
        return Tangent(x, r * u.coords)

    def random_ball_point(self, center, radius, rng):
        """Point at geodesic distance <= ``radius`` from ``center``."""
        return self.exp(center, self.random_tangent(center, rng, radius))

    # -- subclass hooks -----------------------------------------------------

    def _injectivity_radius(self):
        return math.inf

    def _inner(self, x, uc, vc):
        return float(np.vdot(uc, vc))


class Euclidean(Manifold):
    """Flat R^n."""

    kind = "euclidean"

    def _curvature(self):
        return 0.0, 0.0

    def _origin(self):
        return np.zeros(self.n)

    def _check_point(self, xc):
        if xc.shape != (self.n,):
            return f"expected shape {(self.n,)}, got {xc.shape}"
        if not np.all(np.isfinite(xc)):
            return "non-finite coordinates"
        return None

    def _check_tangent(self, xc, uc):
        if uc.shape != xc.shape:
            return "tangent shape mismatch"
        return None

    def _proj_tangent(self, xc, uc):
        return uc

    def _exp(self, x, vc):
        return x.coords + vc

    def _log(self, x, y):
        return y.coords - x.coords

    def _dist(self, x, y):
        return float(np.linalg.norm(y.coords - x.coords))

    def _transport(self, x, y, uc):
        return uc.copy()

    def _random_point(self, rng):
        return rng.standard_normal(self.n)


class Sphere(Manifold):
    """Unit sphere S^n embedded in R^(n+1)."""

    kind = "sphere"

    def _curvature(self):
        return 1.0, 1.0

    def _injectivity_radius(self):
        return math.pi

    def _origin(self):
        e = np.zeros(self.n + 1)
        e[-1] = 1.0
        return e

    def _check_point(self, xc):
        if xc.shape != (self.n + 1,):
            return f"expected shape {(self.n + 1,)}, got {xc.shape}"
        if abs(np.linalg.norm(xc) - 1.0) > POINT_TOL:
            return "point is not on the unit sphere"
        return None

    def _check_tangent(self, xc, uc):
        if uc.shape != xc.shape:
            return "tangent shape mismatch"
        if abs(np.dot(xc, uc)) > POINT_TOL * max(1.0, np.linalg.norm(uc)):
            return "vector is not orthogonal to its base point"
        return None

    def _proj_tangent(self, xc, uc):
        return uc - np.dot(xc, uc) * xc

    def _exp(self, x, vc):
        xc = x.coords
        t = float(np.linalg.norm(vc))
        y = math.cos(t) * xc + sinc(t) * vc
        return y / np.linalg.norm(y)

    def _angle_and_dir(self, xc, yc):
        # u = y - <x,y> x written via d = y - x to avoid cancellation when y ~ x
        d = yc - xc
        xd = float(np.dot(xc, d))
        u = d - xd * xc
        s = float(np.linalg.norm(u))
        return math.atan2(s, 1.0 + xd), u

    def _log(self, x, y):
        t, u = self._angle_and_dir(x.coords, y.coords)
        if t > math.pi - CUT_LOCUS_MARGIN:
            raise CutLocusError(f"points are (nearly) antipodal: d = {t!r}")
        return inv_sinc(t) * u

    def _dist(self, x, y):
        return self._angle_and_dir(x.coords, y.coords)[0]

    def _transport(self, x, y, uc):
        xc, yc = x.coords, y.coords
        c = float(np.dot(xc, yc))
        if 1.0 + c < 1e-12:
            raise CutLocusError("transport between antipodal points is not unique")
        w = uc - (np.dot(yc, uc) / (1.0 + c)) * (xc + yc)
        return self._proj_tangent(yc, w)

    def _random_point(self, rng):
        while True:
            g = rng.standard_normal(self.n + 1)
            nrm = np.linalg.norm(g)
            if nrm > 1e-12:
                return g / nrm


class Hyperbolic(Manifold):
    """Hyperbolic space H^n of curvature -1 as the upper hyperboloid."""

    kind = "hyperbolic"

    def _curvature(self):
        return -1.0, -1.0

    def _origin(self):
        e = np.zeros(self.n + 1)
        e[0] = 1.0
        return e

    @staticmethod
    def lift(spatial):
        """Point of the hyperboloid with the given spatial coordinates."""
        s = np.asarray(spatial, float)
        return np.concatenate(([math.sqrt(1.0 + float(np.dot(s, s)))], s))

    def _check_point(self, xc):
        if xc.shape != (self.n + 1,):
            return f"expected shape {(self.n + 1,)}, got {xc.shape}"
        if xc[0] <= 0:
            return "point is on the lower sheet"
        if abs(minkowski(xc, xc) + 1.0) > POINT_TOL * max(1.0, xc[0] ** 2):
            return "point is not on the hyperboloid <x,x>_M = -1"
        return None

    def _check_tangent(self, xc, uc):
        if uc.shape != xc.shape:
            return "tangent shape mismatch"
        scale = max(1.0, float(np.linalg.norm(uc)) * float(np.linalg.norm(xc)))
        if abs(minkowski(xc, uc)) > POINT_TOL * scale:
            return "vector is not Minkowski-orthogonal to its base point"
        return None

    def _proj_point(self, xc):
        out = xc.copy()
        out[0] = math.sqrt(1.0 + float(np.dot(xc[1:], xc[1:])))
        return out

    def _proj_tangent(self, xc, uc):
        return uc + minkowski(xc, uc) * xc

    def _inner(self, x, uc, vc):
        return minkowski(uc, vc)

    def _exp(self, x, vc):
        t = math.sqrt(max(minkowski(vc, vc), 0.0))
        y = math.cosh(t) * x.coords + sinhc(t) * vc
        return self._proj_point(y)

    def _log(self, x, y):
        xc = x.coords
        d = y.coords - xc
        u = d + minkowski(xc, d) * xc
        s = math.sqrt(max(minkowski(u, u), 0.0))
        t = math.asinh(s)
        return inv_sinhc(t) * u

    def _dist(self, x, y):
        d = y.coords - x.coords
        return 2.0 * math.asinh(0.5 * math.sqrt(max(minkowski(d, d), 0.0)))

    def _transport(self, x, y, uc):
        xc, yc = x.coords, y.coords
        alpha = -minkowski(xc, yc)
        w = uc + (minkowski(yc, uc) / (alpha + 1.0)) * (xc + yc)
        return self._proj_tangent(yc, w)

    def _random_point(self, rng):
        return self.lift(rng.standard_normal(self.n))


def _sym(a):
    return 0.5 * (a + a.T)


def _eig_apply(w, q, f):
    return (q * f(w)) @ q.T


class SPD(Manifold):
    """Symmetric positive-definite matrices, affine-invariant metric."""

    kind = "spd"

    def __init__(self, n):
        super().__init__(n)
        if self.n > SPD_MAX_DIM:
            raise ValueError(f"SPD dimension capped at {SPD_MAX_DIM}")

    @property
    def dim(self):
        return self.n * (self.n + 1) // 2

    def _curvature(self):
        return -0.5, 0.0

    def _origin(self):
        return np.eye(self.n)

    def _check_point(self, xc):
        if xc.shape != (self.n, self.n):
            return f"expected shape {(self.n, self.n)}, got {xc.shape}"
        if np.max(np.abs(xc - xc.T)) > SYM_TOL * max(1.0, np.max(np.abs(xc))):
            return "matrix is not symmetric"
        if np.linalg.eigvalsh(_sym(xc))[0] <= 0:
            return "matrix is not positive definite"
        return None

    def _check_tangent(self, xc, uc):
        if uc.shape != xc.shape:
            return "tangent shape mismatch"
        if np.max(np.abs(uc - uc.T)) > SYM_TOL * max(1.0, np.max(np.abs(uc))):
            return "tangent matrix is not symmetric"
        return None

    def _proj_tangent(self, xc, uc):
        return _sym(uc)

    def _roots(self, x):
        """(X^{1/2}, X^{-1/2}), memoised on the point."""
        if x._cache is None:
            w, q = np.linalg.eigh(_sym(x.coords))
            x._cache = (_eig_apply(w, q, np.sqrt), _eig_apply(w, q, lambda t: 1.0 / np.sqrt(t)))
        return x._cache

    def _whiten(self, x, a):
        _, xih = self._roots(x)
        return _sym(xih @ a @ xih)

    def _inner(self, x, uc, vc):
        return float(np.vdot(self._whiten(x, uc), self._whiten(x, vc)))

    def _exp(self, x, vc):
        xh, _ = self._roots(x)
        w, q = np.linalg.eigh(self._whiten(x, vc))
        return _sym(xh @ _eig_apply(w, q, np.exp) @ xh)

    def _log(self, x, y):
        xh, _ = self._roots(x)
        w, q = np.linalg.eigh(self._whiten(x, y.coords))
        return _sym(xh @ _eig_apply(w, q, np.log) @ xh)

    def _dist(self, x, y):
        w = np.linalg.eigvalsh(self._whiten(x, y.coords))
        return float(np.sqrt(np.sum(np.log(w) ** 2)))

    def _transport(self, x, y, uc):
        xh, xih = self._roots(x)
        w, q = np.linalg.eigh(self._whiten(x, y.coords))
        e = xh @ _eig_apply(w, q, np.sqrt) @ xih
        return _sym(e @ uc @ e.T)

    def _random_point(self, rng):
        g = rng.standard_normal((self.n, self.n))
        w, q = np.linalg.eigh(0.25 * (g + g.T))
        return _sym(_eig_apply(w, q, np.exp))


MANIFOLDS = {cls.kind: cls for cls in (Euclidean, Sphere, Hyperbolic, SPD)}


def make_manifold(tag, n):
    """Build a manifold from its tag (``euclidean``, ``sphere``, ``hyperbolic``, ``spd``)."""
    try:
        cls = MANIFOLDS[tag.lower()]
    except KeyError:
        raise ValueError(f"unknown manifold {tag!r}; choose from {sorted(MANIFOLDS)}") from None
    return cls(n)
