"""Realizing kernel matrices as point configurations in hyperboloid
coordinates, and matching configurations by isometries."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import polar

from hyperbolic.geometry import (
    HPoint,
    LorentzIsometry,
    boost_to,
    compose,
    dist_many,
    inverse,
)

from .kernels import (
    DegenerateFrame,
    KernelMatrix,
    KernelRankMismatch,
    NotHyperbolicType,
)

logger = logging.getLogger(__name__)

TOL_PSD = 1e-9
RANK_CUTOFF = 1e-9
TOL_REALIZE = 1e-10
TOL_PIVOT = 1e-9
QI_SLACK = 1e-9
METHODS = ("gram_schmidt", "procrustes")


@dataclass(frozen=True, eq=False)
class Realization:
    # one hyperboloid vector per row, u_0 = (1, 0, ..., 0)
    points: np.ndarray
    residual: float

    @property
    def dim(self):
        return self.points.shape[1] - 1

    def hpoints(self):
        return [HPoint(u, check=False) for u in self.points]


def pivoted_cholesky(G, cutoff):
    """Lower-triangular-up-to-permutation L with G ~ L L^T, stopping once the
    largest remaining pivot is below cutoff. Returns L with rank columns."""
    m = G.shape[0]
    L = np.zeros((m, m))
    remaining = np.diag(G).astype(float).copy()
    active = np.ones(m, dtype=bool)
    rank = 0
    for k in range(m):
        candidates = np.where(active, remaining, -np.inf)
        p = int(np.argmax(candidates))
        if candidates[p] <= cutoff:
            break
        pivot = math.sqrt(candidates[p])
        column = (G[:, p] - L[:, :k] @ L[p, :k]) / pivot
        column[~active] = 0.0
        column[p] = pivot
        L[:, k] = column
        active[p] = False
        remaining -= column**2
        rank = k + 1
    return L[:, :rank]


def gram_realize(K, tol_realize=TOL_REALIZE):
    """Points u_i with B(u_i, u_j) = K_ij, based at u_0 = e_0.

    The spatial Gram G_ij = K_0i K_0j - K_ij must be positive semidefinite;
    its pivoted Cholesky factor gives the spatial coordinates, so the
    realized dimension is the numerical rank of G."""
    if not isinstance(K, KernelMatrix):
        K = KernelMatrix(K)
    k0 = K.K[0]
    G = np.outer(k0, k0) - K.K
    G = (G + G.T) / 2.0
    norm = float(np.linalg.norm(G, 2))
    # entries of G carry cancellation error of order eps * max K^2
    scale = max(norm, float(np.max(K.K)) ** 2)
    lowest = float(np.linalg.eigvalsh(G)[0])
    if lowest < -TOL_PSD * scale:
        raise NotHyperbolicType(
            f"spatial Gram has eigenvalue {lowest} (norm {norm}); "
            "the kernel is not of hyperbolic type"
        )
    L = pivoted_cholesky(G, RANK_CUTOFF * float(np.trace(G)))
    points = np.column_stack([k0, L])
    residual = float(np.max(np.abs(G - L @ L.T)))
    if residual > tol_realize:
        logger.warning(f"realization residual {residual} exceeds {tol_realize}")
    logger.debug(f"realized {K.size} points in H^{L.shape[1]}")
    return Realization(points=points, residual=residual)


def realization_distances(R):
    X = R.points
    return dist_many(X[:, None, :], X[None, :, :])


def _as_vectors(points):
    return [np.asarray(getattr(p, "v", p), dtype=float) for p in points]


def _pad(vectors, n):
    return np.array([np.concatenate((v, np.zeros(n + 1 - v.size))) for v in vectors])


def _spatial_frame(A, tol_pivot):
    """Gram-Schmidt over the rows of A, skipping rows dependent on earlier ones.
    Returns (frame rows, indices of the rows that entered the frame)."""
    frame, used = [], []
    for i, a in enumerate(A):
        residual = a - sum((e @ a) * e for e in frame) if frame else a.copy()
        norm = float(np.linalg.norm(residual))
        if norm > tol_pivot * max(1.0, float(np.linalg.norm(a))):
            frame.append(residual / norm)
            used.append(i)
    return np.array(frame).reshape(len(frame), A.shape[1]), used


def _frame_at(B, used, tol_pivot):
    """Gram-Schmidt over the rows of B listed in `used`; every pivot must
    clear tol_pivot."""
    frame = []
    for i in used:
        b = B[i]
        residual = b - sum((e @ b) * e for e in frame) if frame else b.copy()
        norm = float(np.linalg.norm(residual))
        if norm <= tol_pivot * max(1.0, float(np.linalg.norm(b))):
            raise DegenerateFrame(f"Gram-Schmidt pivot {norm} at point {i + 1}")
        frame.append(residual / norm)
    return np.array(frame).reshape(len(frame), B.shape[1])


def match_isometry(U, V, tol=TOL_PIVOT, method="gram_schmidt"):
    """An isometry F with F(u_0) = v_0 carrying the configuration U onto V.

    Both configurations are moved so that u_0 and v_0 sit at the origin, and
    the spatial parts are matched frame to frame (Gram-Schmidt, which needs
    spans of equal rank) or by the best orthogonal fit (Procrustes). The
    complement of the source span goes to the complement of the target span by
    the polar factor of the orthogonal projection, which is the identity when
    the spans coincide.

    Returns (F, worst) with worst = max_i d(F u_i, v_i)."""
    if method not in METHODS:
        raise KernelRankMismatch(f"unknown matching method {method!r}")
    if len(U) != len(V) or not len(U):
        raise KernelRankMismatch(f"{len(U)} source points for {len(V)} targets")
    u, v = _as_vectors(U), _as_vectors(V)
    n = max(x.size for x in u + v) - 1
    u, v = _pad(u, n), _pad(v, n)
    Tu = boost_to(HPoint(u[0], check=False))
    Tv = boost_to(HPoint(v[0], check=False))
    A = (inverse(Tu).M @ u[1:].T).T[:, 1:]
    B = (inverse(Tv).M @ v[1:].T).T[:, 1:]

    frame_u, used = _spatial_frame(A, tol)
    if method == "gram_schmidt":
        _, used_v = _spatial_frame(B, tol)
        if len(used_v) != len(used):
            raise KernelRankMismatch(
                f"spans have dimensions {len(used)} and {len(used_v)}"
            )
        frame_v = _frame_at(B, used, tol)
        Q = frame_v.T @ frame_u
    else:
        # best orthogonal fit of the rows of A onto the rows of B
        frame_v, _ = _spatial_frame(B, tol)
        Q = B.T @ A
    complement_u = np.eye(n) - frame_u.T @ frame_u
    complement_v = np.eye(n) - frame_v.T @ frame_v
    Q, _ = polar(Q + complement_v @ complement_u)

    rotation = np.eye(n + 1)
    rotation[1:, 1:] = Q
    F = compose(compose(Tv, LorentzIsometry(rotation)), inverse(Tu))
    images = u @ F.M.T
    worst = float(np.max(dist_many(images, v)))
    logger.debug(f"matched {len(U)} points ({method}); worst error {worst}")
    return F, worst


def qi_bounds_check(D_src, R, mode, param):
    """Checks the quasi-isometry bounds of the realized embedding.

    power (t):  t d <= d' <= min(t d + ln 2, d), with D_src hyperbolic distances
    exp (s):    s d <= d' <= s d + ln 2, and for d <= ln 2 / s also
                sqrt(2 s d) <= d' <= sqrt(2 s d / ln 2), with D_src tree distances

    Returns a report with the worst slack and every violation beyond QI_SLACK.
    """
    d = np.asarray(D_src, dtype=float)
    image = realization_distances(R)
    if d.shape != image.shape:
        raise KernelRankMismatch(f"{d.shape} source distances for {image.shape} images")
    iu = np.triu_indices_from(d, k=1)
    d, image = d[iu], image[iu]
    log2 = math.log(2.0)
    if mode == "power":
        checks = {
            "lower": image - param * d,
            "upper": np.minimum(param * d + log2, d) - image,
        }
    elif mode == "exp":
        near = d <= log2 / param
        checks = {
            "lower": image - param * d,
            "upper": param * d + log2 - image,
            "near_lower": np.where(near, image - np.sqrt(2.0 * param * d), np.inf),
            "near_upper": np.where(
                near, np.sqrt(2.0 * param * d / log2) - image, np.inf
            ),
        }
    else:
        raise KernelRankMismatch(f"unknown embedding mode {mode!r}")

    violations = []
    worst = math.inf
    for kind, slack in checks.items():
        if slack.size:
            worst = min(worst, float(np.min(slack)))
        for k in np.flatnonzero(slack < -QI_SLACK):
            violations.append(
                {
                    "i": int(iu[0][k]),
                    "j": int(iu[1][k]),
                    "bound": kind,
                    "slack": float(slack[k]),
                }
            )
    if violations:
        logger.warning(f"{len(violations)} quasi-isometry bound violations")
    return {
        "mode": mode,
        "param": param,
        "pairs": int(d.size),
        "worst_slack": worst,
        "violations": violations,
    }
