"""Critical exponents of orbit word sums.

For the reduced words of length n, Z_n(delta) = sum exp(-delta d(o, w o)).
delta_n solves Z_n(delta) = Z_{n-1}(delta); the sequence delta_n converges to
the critical exponent, which is the Hausdorff dimension of the limit set of a
Schottky group.
"""

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from schottky.representation import orbit_levels
from schottky.words import NotSchottky

logger = logging.getLogger(__name__)

DELTA_MIN = 1e-6
MAX_DOUBLINGS = 60
MIN_DEPTH = 4


class DimensionError(Exception):
    """Base class for dimension estimation exceptions"""


class DepthTooSmall(DimensionError):
    """Raised when fewer than four word levels are requested."""


class NoBracket(DimensionError):
    """Raised when the word-sum ratio has no sign change on (0, hi]."""


class InsufficientScales(DimensionError):
    """Raised when box counting gets too few scales or too narrow a range."""


class LeftSchottkyRegime(DimensionError):
    """Raised when a perturbed representation fails the Schottky diagnostics."""


@dataclass
class PressureResult:
    delta: float
    depth_used: int
    bracket: tuple
    # rows of (n, delta_n, gap, runtime_ms); gap is None for n = 1
    table: list = field(default_factory=list)
    gap: float = math.nan
    accelerated: bool = False

    @property
    def width(self):
        return self.bracket[1] - self.bracket[0]


def _aitken(deltas):
    if len(deltas) < 3:
        return deltas[-1], False
    a, b, c = deltas[-3:]
    d1, d2 = b - a, c - b
    monotone = d1 * d2 > 0 and abs(d2) < abs(d1)
    if not monotone:
        logger.debug("Aitken acceleration rejected: iterates are not monotone")
        return c, False
    return c - d2 * d2 / (d2 - d1), True


def _root(log_zn, log_zprev, n, branching, min_dist, tol):
    def ratio(delta):
        return log_zn(delta) - log_zprev(delta)

    if ratio(DELTA_MIN) <= 0:
        # Z_n does not outgrow Z_{n-1}: no exponential growth
        return 0.0
    hi = max(n * math.log(branching) / min_dist, 2 * DELTA_MIN)
    doublings = 0
    while ratio(hi) > 0:
        hi *= 2.0
        doublings += 1
        if doublings > MAX_DOUBLINGS:
            raise NoBracket(f"no sign change of log Z_{n} - log Z_{n - 1} below {hi}")
    if doublings:
        logger.debug(f"depth {n}: bracket expanded {doublings} times to {hi}")
    return optimize.brentq(ratio, DELTA_MIN, hi, xtol=min(tol, 1e-12) * 1e-2)


def critical_exponent(distance_levels, C_K, max_depth, tol):
    """Estimates the critical exponent from an iterable of distance arrays,
    level 0 (the empty word) first. Levels are consumed lazily and iteration
    stops once the Cauchy gap falls below tol."""
    if max_depth < MIN_DEPTH:
        raise DepthTooSmall(f"max_depth must be at least {MIN_DEPTH}, got {max_depth}")
    levels = iter(distance_levels)
    previous = np.asarray(next(levels), dtype=float)
    deltas, table = [], []
    min_dist = math.nan
    branching = None
    for n in range(1, max_depth + 1):
        start = time.perf_counter()
        current = np.asarray(next(levels), dtype=float)
        if branching is None:
            branching = max(current.size - 1, 1)
        min_dist = float(np.min(current))
        prev = previous

        def log_zn(delta, d=current):
            return logsumexp(-delta * d)

        def log_zprev(delta, d=prev):
            return logsumexp(-delta * d)

        delta_n = _root(log_zn, log_zprev, n, branching, min_dist, tol)
        gap = abs(delta_n - deltas[-1]) if deltas else None
        deltas.append(delta_n)
        runtime_ms = (time.perf_counter() - start) * 1000.0
        table.append((n, delta_n, gap, runtime_ms))
        logger.info(f"depth {n}: delta_n = {delta_n} (gap {gap})")
        previous = current
        if gap is not None and gap < tol and n >= MIN_DEPTH:
            break

    delta, accelerated = _aitken(deltas)
    last = deltas[-1]
    gap = abs(last - deltas[-2]) if len(deltas) > 1 else math.inf
    width = gap + 2.0 * C_K * last / min_dist if min_dist > 0 else math.inf
    width += abs(delta - last)
    return PressureResult(
        delta=delta,
        depth_used=len(deltas),
        bracket=(delta - width, delta + width),
        table=table,
        gap=gap,
        accelerated=accelerated,
    )


def orbit_distance_stream(rep, max_depth):
    for _, vectors in orbit_levels(rep, max_depth):
        yield np.arccosh(np.maximum(vectors[:, 0], 1.0))


def hdim_pressure(rep, max_depth, tol):
    if rep.diagnostics is None:
        raise NotSchottky("dimension estimates need a representation with diagnostics")
    result = critical_exponent(
        orbit_distance_stream(rep, max_depth), rep.diagnostics.C_K, max_depth, tol
    )
    logger.info(
        f"hdim = {result.delta} in [{result.bracket[0]}, {result.bracket[1]}] "
        f"at depth {result.depth_used}"
    )
    return result
