"""Hyperbolic geometry in the hyperboloid model of H^n.

Points of H^n are vectors v in R^{n+1} with B(v, v) = 1 and v[0] > 0, where

    B((s, x), (s', x')) = s * s' - <x, x'>

is the Minkowski form. Boundary points are light-cone vectors normalized to
v[0] = 1, so the spatial part is a unit vector. Isometries are (n+1)x(n+1)
matrices M with M^T J M = J preserving the upper sheet, J = diag(1, -1, ..., -1).

All closed forms used below (distance, Busemann function, boundary Gromov
product) are exact in this model; the ray-limit versions are kept as oracles.
"""

import logging
import math

import numpy as np
from scipy import integrate, optimize, stats

logger = logging.getLogger(__name__)

TOL_MODEL = 1e-12
TOL_ISO = 1e-10
TOL_INPUT = 1e-9
RAY_LIMIT_TIMES = (20.0, 30.0, 40.0)


class GeometryError(Exception):
    """Base class for hyperbolic geometry exceptions"""


class DegenerateEndpoints(GeometryError):
    """Raised when a geodesic is requested between coincident points."""


class CoincidentBoundaryPoints(GeometryError):
    """Raised when the Gromov product of a boundary point with itself is requested."""


class NotLorentz(GeometryError):
    """Raised when a matrix does not preserve the Minkowski form or the upper
    sheet."""


class NotHyperbolic(GeometryError):
    """Raised when an isometry has spectral radius 1 (elliptic or parabolic)."""


class InvalidPoint(GeometryError):
    """Raised when a vector is not on the hyperboloid (or the light cone)."""


def minkowski_gram(n):
    return np.diag([1.0] + [-1.0] * n)


def form(u, v):
    """B(u, v) over the last axis; broadcasts over leading axes."""
    u = _vec(u)
    v = _vec(v)
    return u[..., 0] * v[..., 0] - np.sum(u[..., 1:] * v[..., 1:], axis=-1)


class MinkowskiForm:
    def __init__(self, n):
        if n < 1:
            raise GeometryError(f"spatial dimension must be positive, got {n}")
        self.n = n

    def gram(self):
        return minkowski_gram(self.n)

    def __call__(self, u, v):
        return form(u, v)

    def __repr__(self):
        return f"MinkowskiForm(n={self.n})"


class HPoint:
    __slots__ = ("v",)

    def __init__(self, v, check=True):
        v = np.array(v, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise InvalidPoint(f"expected a vector with at least 2 entries, got {v!r}")
        if check:
            b = form(v, v)
            if not v[0] > 0 or abs(b - 1.0) > TOL_INPUT * max(1.0, v[0] ** 2):
                raise InvalidPoint(f"{v!r} is not on the upper sheet (B(v,v) = {b})")
        # re-project onto the sheet from the spatial part
        v[0] = math.sqrt(1.0 + float(v[1:] @ v[1:]))
        v.setflags(write=False)
        self.v = v

    @classmethod
    def project(cls, v):
        v = np.asarray(v, dtype=float)
        b = form(v, v)
        if not (b > 0 and v[0] > 0):
            raise InvalidPoint(f"{v!r} is not a future timelike vector")
        return cls(v / math.sqrt(b), check=False)

    @property
    def n(self):
        return self.v.size - 1

    def __repr__(self):
        return f"HPoint({self.v.tolist()})"


class BoundaryPoint:
    __slots__ = ("v",)

    def __init__(self, v, check=True):
        v = np.array(v, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise InvalidPoint(f"expected a vector with at least 2 entries, got {v!r}")
        if check:
            if not v[0] > 0 or abs(form(v, v)) > TOL_INPUT * v[0] ** 2:
                raise InvalidPoint(f"{v!r} is not on the future light cone")
        spatial = v[1:]
        norm = np.linalg.norm(spatial)
        if norm == 0:
            raise InvalidPoint(f"{v!r} has no spatial direction")
        v = np.concatenate(([1.0], spatial / norm))
        v.setflags(write=False)
        self.v = v

    @classmethod
    def from_direction(cls, direction):
        direction = np.asarray(direction, dtype=float)
        return cls(np.concatenate(([1.0], direction)), check=False)

    @property
    def n(self):
        return self.v.size - 1

    def __repr__(self):
        return f"BoundaryPoint({self.v.tolist()})"


def _vec(p):
    if isinstance(p, (HPoint, BoundaryPoint)):
        return p.v
    return np.asarray(p, dtype=float)


def origin(n):
    v = np.zeros(n + 1)
    v[0] = 1.0
    return HPoint(v, check=False)


def isometry_defect(M):
    J = minkowski_gram(M.shape[0] - 1)
    return float(np.max(np.abs(M.T @ J @ M - J)))


class LorentzIsometry:
    __slots__ = ("M",)

    def __init__(self, M, check=True):
        M = np.array(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 2:
            raise NotLorentz(f"expected a square matrix of size >= 2, got {M.shape}")
        if check:
            # entries of M^T J M carry roundoff proportional to |M|^2
            scale = max(1.0, float(np.max(np.abs(M))) ** 2)
            defect = isometry_defect(M)
            if defect > TOL_ISO * scale:
                raise NotLorentz(f"M^T J M differs from J by {defect}")
            if not M[0, 0] > 0:
                raise NotLorentz("matrix does not preserve the upper sheet")
        M.setflags(write=False)
        self.M = M

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n + 1), check=False)

    @property
    def n(self):
        return self.M.shape[0] - 1

    def apply(self, p):
        return apply(self, p)

    def inverse(self):
        return inverse(self)

    def __matmul__(self, other):
        return compose(self, other)

    def __repr__(self):
        return f"LorentzIsometry({self.M.tolist()})"


def apply(g, p):
    if g.n != p.n:
        raise GeometryError(
            f"dimension mismatch: isometry of H^{g.n}, point of H^{p.n}"
        )
    w = g.M @ p.v
    if isinstance(p, BoundaryPoint):
        return BoundaryPoint(w / w[0], check=False)
    return HPoint(w, check=False)


def compose(g, h):
    """g o h, acting as h first."""
    return LorentzIsometry(g.M @ h.M, check=False)


def inverse(g):
    J = minkowski_gram(g.n)
    return LorentzIsometry(J @ g.M.T @ J, check=False)


def boost(direction, length):
    """Pure translation of length `length` along the geodesic through the
    origin in the given spatial direction."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    n = u.size
    M = np.eye(n + 1)
    M[0, 0] = math.cosh(length)
    M[0, 1:] = math.sinh(length) * u
    M[1:, 0] = math.sinh(length) * u
    M[1:, 1:] += (math.cosh(length) - 1.0) * np.outer(u, u)
    return LorentzIsometry(M, check=False)


def boost_to(p):
    """The pure boost taking the origin to p."""
    v = _vec(p)
    ps = v[1:]
    M = np.empty((v.size, v.size))
    M[0, 0] = v[0]
    M[0, 1:] = ps
    M[1:, 0] = ps
    M[1:, 1:] = np.eye(ps.size) + np.outer(ps, ps) / (1.0 + v[0])
    return LorentzIsometry(M, check=False)


def reflection(normal):
    """Reflection in the hyperplane B(x, normal) = 0 for a spacelike normal."""
    nv = np.asarray(normal, dtype=float)
    b = form(nv, nv)
    if not b < 0:
        raise GeometryError(f"{nv!r} is not spacelike")
    nv = nv / math.sqrt(-b)
    J = minkowski_gram(nv.size - 1)
    return LorentzIsometry(np.eye(nv.size) + 2.0 * np.outer(nv, J @ nv), check=False)


def disk_to_hyperboloid(z):
    """Poincare disk (complex coordinate) to H^2."""
    z = complex(z)
    r2 = abs(z) ** 2
    if r2 >= 1:
        raise InvalidPoint(f"{z} is not in the open unit disk")
    return HPoint.project([1.0 + r2, 2.0 * z.real, 2.0 * z.imag])


def hyperboloid_to_disk(x):
    v = _vec(x)
    if v.size != 3:
        raise GeometryError("the disk model is only available for H^2")
    return complex(v[1], v[2]) / (1.0 + v[0])


# Distances. Close pairs go through 2 asinh(sqrt(-B(x-y, x-y)) / 2), which is
# arccosh(B(x, y)) without the cancellation near 1.
def _dist_arrays(x, y):
    b = form(x, y)
    diff = x - y
    q = np.maximum(-form(diff, diff), 0.0)
    near = 2.0 * np.arcsinh(np.sqrt(q) / 2.0)
    far = np.arccosh(np.maximum(b, 1.0))
    return np.where(b < 2.0, near, far)


def dist(x, y):
    return float(_dist_arrays(_vec(x), _vec(y)))


def dist_many(X, Y):
    """Row-wise distances between two stacks of hyperboloid vectors."""
    return _dist_arrays(np.asarray(X, dtype=float), np.asarray(Y, dtype=float))


def cosh_dist_matrix(points):
    """Matrix of B(x_i, x_j) = cosh d(x_i, x_j), clamped to >= 1 with unit
    diagonal."""
    P = np.array([_vec(p) for p in points])
    G = P @ minkowski_gram(P.shape[1] - 1) @ P.T
    G = np.maximum((G + G.T) / 2.0, 1.0)
    np.fill_diagonal(G, 1.0)
    return G


def dist_matrix(points):
    return np.arccosh(cosh_dist_matrix(points))


def geodesic_tangent(x, y):
    """Unit tangent vector at x pointing to y, and d(x, y)."""
    xv, yv = _vec(x), _vec(y)
    d = dist(xv, yv)
    if d < TOL_MODEL:
        raise DegenerateEndpoints(f"points {xv.tolist()} and {yv.tolist()} coincide")
    return (yv - math.cosh(d) * xv) / math.sinh(d), d


def geodesic_point(x, y, t):
    tangent, _ = geodesic_tangent(x, y)
    return HPoint(math.cosh(t) * _vec(x) + math.sinh(t) * tangent, check=False)


def midpoint(x, y):
    s = _vec(x) + _vec(y)
    return HPoint.project(s)


def ray_direction(o, xi):
    """Unit tangent at o pointing to the boundary point xi."""
    ov, xv = _vec(o), _vec(xi)
    return xv / form(ov, xv) - ov


def geodesic_ray(o, xi, t):
    w = ray_direction(o, xi)
    return HPoint(math.cosh(t) * _vec(o) + math.sinh(t) * w, check=False)


def ray_endpoint(o, w):
    """Boundary point reached from o in the unit tangent direction w."""
    v = _vec(o) + np.asarray(w, dtype=float)
    return BoundaryPoint(v / v[0], check=False)


def busemann(x, y, xi):
    """B(x, y, xi) = lim d(x, z) - d(y, z) as z -> xi."""
    xv = _vec(xi)
    return float(np.log(form(x, xv) / form(y, xv)))


def busemann_ray_limit(x, y, xi, o=None, t=RAY_LIMIT_TIMES[-1]):
    if o is None:
        o = origin(_vec(xi).size - 1)
    z = geodesic_ray(o, xi, t)
    return dist(x, z) - dist(y, z)


def _boundary_gromov(xi, zeta, z):
    xv, zv, pv = _vec(xi), _vec(zeta), _vec(z)
    b = form(xv, zv)
    if b <= TOL_MODEL:
        raise CoincidentBoundaryPoints(f"{xv.tolist()} and {zv.tolist()} coincide")
    return -0.5 * math.log(b / (2.0 * form(pv, xv) * form(pv, zv)))


def gromov_product(x, y, z):
    """<x, y>_z for points of H^n or of its boundary."""
    x_inf = isinstance(x, BoundaryPoint)
    y_inf = isinstance(y, BoundaryPoint)
    if x_inf and y_inf:
        value = _boundary_gromov(x, y, z)
    elif x_inf or y_inf:
        xi, p = (x, y) if x_inf else (y, x)
        value = 0.5 * (dist(p, z) + busemann(z, p, xi))
    else:
        value = 0.5 * (dist(x, z) + dist(y, z) - dist(x, y))
    return max(value, 0.0)


def _richardson(values):
    # Aitken extrapolation of a geometrically converging triple; the last
    # value is kept when the differences do not shrink.
    a, b, c = values
    d1, d2 = b - a, c - b
    if d1 == 0 or d2 == 0 or d1 == d2 or abs(d2) >= abs(d1) or d1 * d2 < 0:
        return c
    return c - d2 * d2 / (d2 - d1)


def gromov_product_ray_limit(x, y, z, times=RAY_LIMIT_TIMES):
    """Boundary Gromov product as the limit of interior products along rays
    from z."""

    def interior(p, t):
        return geodesic_ray(z, p, t) if isinstance(p, BoundaryPoint) else p

    values = [gromov_product(interior(x, t), interior(y, t), z) for t in times]
    return _richardson(values)


def visual_dist(xi, zeta, o):
    xv, zv, ov = _vec(xi), _vec(zeta), _vec(o)
    b = max(form(xv, zv), 0.0)
    return math.sqrt(b / (2.0 * form(ov, xv) * form(ov, zv)))


# Geodesic length of the projective segment between x and y, integrated
# numerically. The parametrization s -> ((1-s)x + sy)/|.|_B is not unit speed.
def geodesic_length_quadrature(x, y):
    xv, yv = _vec(x), _vec(y)
    step = yv - xv

    def speed(s):
        p = (1.0 - s) * xv + s * yv
        q = form(p, p)
        dq = 2.0 * form(p, step)
        velocity = step / math.sqrt(q) - p * dq / (2.0 * q**1.5)
        return math.sqrt(max(-form(velocity, velocity), 0.0))

    value, _ = integrate.quad(speed, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    return value


def _plane_frame(o, z):
    """Orthonormal tangent pair (w_z, e) at o with w_z pointing to z."""
    ov = _vec(o)
    w_z, _ = geodesic_tangent(o, z)
    for k in range(1, ov.size):
        candidate = np.zeros(ov.size)
        candidate[k] = 1.0
        # project to the tangent space at o and off w_z
        candidate = candidate - form(candidate, ov) * ov
        candidate = candidate + form(candidate, w_z) * w_z
        norm2 = -form(candidate, candidate)
        if norm2 > 1e-8:
            return w_z, candidate / math.sqrt(norm2)
    raise GeometryError("could not complete a tangent frame")


def shadow_diameter(z, r, o, n_dirs=64):
    """Visual diameter, seen from o, of the shadow of the ball B(z, r).

    The shadow is a cap symmetric about the direction of z, so it is scanned
    on a grid of n_dirs directions in the plane of o and z and its edge is
    refined by root finding.
    """
    if r <= 0:
        raise GeometryError(f"radius must be positive, got {r}")
    if n_dirs < 8:
        raise GeometryError(f"need at least 8 directions, got {n_dirs}")
    d = dist(o, z)
    if d <= r:
        return 1.0
    w_z, e = _plane_frame(o, z)
    ov = _vec(o)
    horizon = d + r + 1.0

    def gap(phi):
        w = math.cos(phi) * w_z + math.sin(phi) * e
        res = optimize.minimize_scalar(
            lambda t: dist(math.cosh(t) * ov + math.sinh(t) * w, z),
            bounds=(0.0, horizon),
            method="bounded",
            options={"xatol": 1e-12},
        )
        return res.fun - r

    grid = np.linspace(0.0, math.pi, n_dirs)
    last_hit = 0.0
    for phi in grid[1:]:
        if gap(phi) > 0:
            edge = optimize.brentq(gap, last_hit, phi, xtol=1e-14)
            break
        last_hit = phi
    else:
        return 1.0
    if edge >= math.pi / 2:
        return 1.0
    side_a = ray_endpoint(o, math.cos(edge) * w_z + math.sin(edge) * e)
    side_b = ray_endpoint(o, math.cos(edge) * w_z - math.sin(edge) * e)
    return visual_dist(side_a, side_b, o)


def translation_length(g):
    return axis_endpoints(g)[2]


def axis_endpoints(g, sl2_lift=None):
    """Attracting and repelling fixed points and the translation length.

    If `sl2_lift` (a 2x2 matrix acting on the disk or half-plane) is given
    for an isometry of H^2, the translation length is cross-checked against
    2 cosh(l / 2) = |trace| of the normalized lift.
    """
    values, vectors = np.linalg.eig(g.M)
    moduli = np.abs(values)
    top = int(np.argmax(moduli))
    bottom = int(np.argmin(moduli))
    radius = float(moduli[top])
    if radius <= 1.0 + 1e-9:
        raise NotHyperbolic(f"spectral radius {radius} does not exceed 1")
    attracting = np.real(vectors[:, top])
    repelling = np.real(vectors[:, bottom])
    length = math.log(radius)
    if sl2_lift is not None:
        A = np.asarray(sl2_lift, dtype=complex)
        det = abs(np.linalg.det(A))
        half_trace = abs(np.trace(A)) / (2.0 * math.sqrt(det))
        lift_length = 2.0 * math.acosh(max(half_trace, 1.0))
        if abs(lift_length - length) > 1e-8 * max(1.0, length):
            raise GeometryError(
                f"translation length {length} disagrees with the trace of the lift "
                f"({lift_length})"
            )
    return (
        BoundaryPoint(attracting / attracting[0], check=False),
        BoundaryPoint(repelling / repelling[0], check=False),
        length,
    )


# Seeded samplers for the property suites.
def random_point(rng, n, scale=2.0):
    spatial = rng.normal(size=n) * scale / math.sqrt(n)
    return HPoint(np.concatenate(([0.0], spatial)), check=False)


def random_boundary_point(rng, n):
    direction = rng.normal(size=n)
    return BoundaryPoint.from_direction(direction)


def random_rotation(rng, n):
    R = np.eye(n + 1)
    if n == 1:
        R[1, 1] = rng.choice([-1.0, 1.0])
    else:
        R[1:, 1:] = stats.ortho_group.rvs(n, random_state=rng)
    return LorentzIsometry(R, check=False)


def random_isometry(rng, n, scale=2.0):
    return compose(boost_to(random_point(rng, n, scale)), random_rotation(rng, n))
