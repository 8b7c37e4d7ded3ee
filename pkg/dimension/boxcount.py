"""Box-counting dimension of a sampled limit set, as a cross-check on the
pressure estimate.

The sample is one limit point per cylinder of the given depth,
w . (last letter of w)^oo. Visual distances come from common prefixes (see
potential.log_visual_distance), so scales far below machine epsilon are
resolved.
"""

import logging
import math

import numpy as np

from schottky.words import NotSchottky, level_codes

from .potential import Potential, cylinder_tails
from .pressure import InsufficientScales

logger = logging.getLogger(__name__)

MIN_SAMPLE_DEPTH = 8
MIN_SCALES = 4
MIN_DECADES = 1.5


def default_log_scales(r_joint, sample_depth):
    """log eps_m = -(m + 1/2) r / 2 for m = 1 .. 2 (D - 2): half-steps of the
    joint displacement, offset from the cylinder boundaries."""
    m = np.arange(1, 2 * (sample_depth - 2) + 1)
    return -(m + 0.5) * r_joint / 2.0


def _check_scales(log_scales):
    if log_scales.size < MIN_SCALES:
        raise InsufficientScales(
            f"{log_scales.size} scales given, at least {MIN_SCALES} are needed"
        )
    decades = (log_scales.max() - log_scales.min()) / math.log(10.0)
    if decades < MIN_DECADES:
        raise InsufficientScales(
            f"scales span {decades:.2f} decades, at least {MIN_DECADES} are needed"
        )


class _SampledLimitSet:
    def __init__(self, rep, sample_depth):
        self.codes = level_codes(rep.r, sample_depth).astype(np.int64)
        self.tails, self.sums = cylinder_tails(Potential(rep), self.codes)
        self.size = self.codes.shape[0]
        self._columns = np.arange(self.size)

    def log_distances(self, i):
        """log d_o from sample i to every sample."""
        differs = self.codes != self.codes[i]
        k = np.argmax(differs, axis=1)
        t_j = self.tails[k, self._columns]
        t_i = self.tails[k, i]
        b = t_j[:, 0] * t_i[:, 0] - np.sum(t_j[:, 1:] * t_i[:, 1:], axis=1)
        s = self.sums[k, self._columns] + self.sums[k, i]
        with np.errstate(divide="ignore"):
            logs = 0.5 * (np.log(np.maximum(b, 0.0) / 2.0) + s)
        logs[i] = -np.inf
        return logs


def greedy_cover_counts(sample, log_scales):
    """Centres of greedy covers taken in lexicographic order, at every scale
    at once. A sample becomes a centre at scale eps when no earlier centre is
    within eps of it."""
    covered = np.zeros((log_scales.size, sample.size), dtype=bool)
    counts = np.zeros(log_scales.size, dtype=int)
    for i in range(sample.size):
        needed = ~covered[:, i]
        if not needed.any():
            continue
        row = sample.log_distances(i)
        for m in np.flatnonzero(needed):
            counts[m] += 1
            covered[m] |= row <= log_scales[m]
    return counts


def _fit(x, y):
    if np.ptp(y) == 0:
        return 0.0, 1.0
    slope, intercept = np.polyfit(x, y, 1)
    residual = y - (slope * x + intercept)
    r2 = 1.0 - float(np.sum(residual**2) / np.sum((y - y.mean()) ** 2))
    return float(slope), r2


def hdim_boxcount(rep, sample_depth=8, scales=None):
    """Slope of log N(eps) against -log eps. Returns (delta, fit_r2)."""
    if rep.diagnostics is None:
        raise NotSchottky("box counting needs a representation with diagnostics")
    if sample_depth < MIN_SAMPLE_DEPTH:
        raise InsufficientScales(
            f"sample_depth must be at least {MIN_SAMPLE_DEPTH}, got {sample_depth}"
        )
    if scales is None:
        log_scales = default_log_scales(rep.diagnostics.r_joint, sample_depth)
    else:
        log_scales = np.log(np.asarray(scales, dtype=float))
    _check_scales(log_scales)

    sample = _SampledLimitSet(rep, sample_depth)
    counts = greedy_cover_counts(sample, log_scales)
    logger.debug(f"box counts {counts.tolist()} over {sample.size} samples")
    delta, r2 = _fit(-log_scales, np.log(counts))
    logger.info(f"box-counting dimension {delta} (r^2 = {r2})")
    return delta, r2
