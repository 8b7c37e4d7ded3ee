"""Kernels of hyperbolic type on finite point sets.

A kernel matrix K is realizable when K_ij = cosh d(u_i, u_j) for points u_i
of some hyperbolic space. Powers (cosh d)^t of hyperbolic kernels with
0 < t <= 1 and exponentials e^{s d} of tree metrics are realizable.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from trees.graph import four_point_violation

logger = logging.getLogger(__name__)

TOL_KERNEL = 1e-9
TOL_TREE = 1e-9

SOURCES = ("power", "exp", "raw")


class KernelError(Exception):
    """Base class for kernel and realization exceptions"""


class BadT(KernelError):
    """Raised when a kernel exponent is outside its range."""


class NotTreeMetric(KernelError):
    """Raised when a distance matrix breaks the four-point condition."""


class NotHyperbolicType(KernelError):
    """Raised when a kernel cannot be realized in a hyperbolic space."""


class KernelRankMismatch(KernelError):
    """Raised when matrices or point sets have incompatible sizes or spans."""


class DegenerateFrame(KernelError):
    """Raised when Gram-Schmidt meets a pivot below tolerance."""


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    K: np.ndarray
    source: str = "raw"
    # t for power kernels, s for exponential kernels
    param: Optional[float] = None

    def __post_init__(self):
        K = np.array(self.K, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] == 0:
            raise KernelRankMismatch(
                f"expected a non-empty square matrix, got {K.shape}"
            )
        if self.source not in SOURCES:
            raise KernelError(f"unknown kernel source {self.source!r}")
        scale = max(1.0, float(np.max(np.abs(K))))
        if np.max(np.abs(K - K.T)) > TOL_KERNEL * scale:
            raise NotHyperbolicType("kernel matrix is not symmetric")
        if np.max(np.abs(np.diag(K) - 1.0)) > TOL_KERNEL:
            raise NotHyperbolicType("kernel diagonal must be 1")
        if np.min(K) < 1.0 - TOL_KERNEL:
            raise NotHyperbolicType(
                f"kernel entry {np.min(K)} is below 1, which no cosh d can be"
            )
        K = (K + K.T) / 2.0
        np.fill_diagonal(K, 1.0)
        K.setflags(write=False)
        object.__setattr__(self, "K", K)

    @property
    def size(self):
        return self.K.shape[0]


def kernel_power(D, t):
    """Entrywise (cosh d)^t of a matrix D of cosh-distances."""
    if not 0.0 < t <= 1.0:
        raise BadT(f"t must lie in (0, 1], got {t}")
    D = np.asarray(D, dtype=float)
    return KernelMatrix(np.power(np.maximum(D, 1.0), t), source="power", param=t)


def kernel_tree(Dtree, s):
    """Entrywise e^{s d} of a tree metric."""
    if not s > 0.0:
        raise BadT(f"s must be positive, got {s}")
    Dtree = np.asarray(Dtree, dtype=float)
    violation = four_point_violation(Dtree)
    tolerance = TOL_TREE * max(1.0, float(np.max(Dtree)))
    if violation > tolerance:
        raise NotTreeMetric(f"four-point condition fails by {violation}")
    return KernelMatrix(np.exp(s * Dtree), source="exp", param=s)


def hyperbolic_type_violation(K, c):
    """sum_ij c_i c_j K_ij - (sum_k c_k K_0k)^2, which is <= 0 for kernels of
    hyperbolic type."""
    K = K.K if isinstance(K, KernelMatrix) else np.asarray(K, dtype=float)
    c = np.asarray(c, dtype=float)
    if c.shape != (K.shape[0],):
        raise KernelRankMismatch(f"{c.size} coefficients for {K.shape[0]} points")
    return float(c @ K @ c - (c @ K[0]) ** 2)
