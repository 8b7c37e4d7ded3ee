"""Randomized property suites run by `manage.py schottkydim check`.

Every property draws from its own generator, seeded by (seed, index), so the
outcome of one property does not depend on which others run before it.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from django.conf import settings

from hyperbolic.geometry import (
    apply,
    busemann,
    busemann_ray_limit,
    cosh_dist_matrix,
    dist,
    dist_matrix,
    gromov_product,
    gromov_product_ray_limit,
    inverse,
    random_boundary_point,
    random_isometry,
    random_point,
    visual_dist,
)
from kernels.kernels import NotHyperbolicType, kernel_power
from kernels.realize import gram_realize, match_isometry, realization_distances
from schottky.mcmullen import mcmullen_family
from schottky.representation import orbit_point
from schottky.words import ReducedWord
from trees.graph import four_point_violation, tree_orbit_dist, tree_translation_length
from trees.presets import mcmullen_limit_tree

logger = logging.getLogger(__name__)

WORD_LENGTH = 5
GEOMETRY_TRIALS = 10_000
KERNEL_TRIALS = 1_000
COMBINATORIAL_TRIALS = 1_000


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    limit: float
    trials: int

    @property
    def passed(self):
        return self.worst <= self.limit

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status} {self.name}: worst {self.worst:.3e} (limit {self.limit:.0e}) "
            f"over {self.trials} trials"
        )


@lru_cache(maxsize=None)
def _mcmullen():
    return mcmullen_family(1.0, ball_radius=2)


def _dimension(rng):
    return int(rng.integers(2, 6))


def _random_word(rng, r, max_length=WORD_LENGTH):
    letters = []
    length = int(rng.integers(0, max_length + 1))
    while len(letters) < length:
        x = int(rng.integers(1, r + 1)) * int(rng.choice([-1, 1]))
        if not letters or letters[-1] != -x:
            letters.append(x)
    return ReducedWord(letters)


def busemann_cocycle(rng, trials):
    worst = 0.0
    for _ in range(trials):
        n = _dimension(rng)
        x, y, z = (random_point(rng, n) for _ in range(3))
        xi = random_boundary_point(rng, n)
        b = busemann(x, y, xi) - busemann(x, z, xi) - busemann(z, y, xi)
        worst = max(worst, abs(b))
    return worst


def busemann_isometry_invariance(rng, trials):
    worst = 0.0
    for _ in range(trials):
        n = _dimension(rng)
        x, y = random_point(rng, n), random_point(rng, n)
        xi = random_boundary_point(rng, n)
        g = random_isometry(rng, n)
        moved = busemann(apply(g, x), apply(g, y), apply(g, xi))
        worst = max(worst, abs(busemann(x, y, xi) - moved))
    return worst


def strong_triangle_inequality(rng, trials):
    # largest lhs - rhs; positive values are violations
    worst = -math.inf
    for _ in range(trials):
        n = _dimension(rng)
        w = random_point(rng, n)
        x, y, z = (random_point(rng, n, scale=3.0) for _ in range(3))
        lhs = math.exp(-gromov_product(x, z, w))
        rhs = math.exp(-gromov_product(x, y, w)) + math.exp(-gromov_product(y, z, w))
        worst = max(worst, lhs - rhs)
    return worst


def busemann_oracle(rng, trials):
    worst = 0.0
    for _ in range(trials):
        n = _dimension(rng)
        x, y = random_point(rng, n), random_point(rng, n)
        xi = random_boundary_point(rng, n)
        worst = max(worst, abs(busemann(x, y, xi) - busemann_ray_limit(x, y, xi)))
    return worst


def visual_dist_oracle(rng, trials):
    worst = 0.0
    for _ in range(trials):
        n = _dimension(rng)
        xi, zeta = random_boundary_point(rng, n), random_boundary_point(rng, n)
        o = random_point(rng, n, scale=1.0)
        limit = math.exp(-gromov_product_ray_limit(xi, zeta, o))
        worst = max(worst, abs(visual_dist(xi, zeta, o) - limit))
    return worst


def lorentz_round_trip(rng, trials):
    worst = 0.0
    for _ in range(trials):
        n = _dimension(rng)
        g = random_isometry(rng, n)
        x, y = random_point(rng, n), random_point(rng, n)
        back = apply(inverse(g), apply(g, x)).v
        worst = max(
            worst,
            float(np.max(np.abs(back - x.v)) / np.max(np.abs(x.v))),
            abs(dist(apply(g, x), apply(g, y)) - dist(x, y)),
        )
    return worst


def word_group_laws(rng, trials):
    failures = 0
    for _ in range(trials):
        r = int(rng.integers(1, 4))
        u, v = _random_word(rng, r), _random_word(rng, r)
        uv = u.concat(v)
        failures += u.concat(u.inverse()) != ReducedWord()
        failures += uv.inverse() != v.inverse().concat(u.inverse())
        failures += len(uv) > len(u) + len(v)
    return float(failures)


def orbit_equivariance(rng, trials):
    rep = _mcmullen()
    worst = 0.0
    for _ in range(trials):
        u, v = _random_word(rng, rep.r), _random_word(rng, rep.r)
        direct = orbit_point(rep, u.concat(v)).v
        moved = apply(rep.element(u), orbit_point(rep, v)).v
        worst = max(worst, float(np.max(np.abs(direct - moved)) / direct[0]))
    return worst


def kernel_power_realizable(rng, trials):
    worst = 0.0
    for _ in range(trials):
        n = _dimension(rng)
        points = [random_point(rng, n) for _ in range(int(rng.integers(2, 11)))]
        t = float(rng.uniform(1e-3, 1.0))
        try:
            R = gram_realize(kernel_power(cosh_dist_matrix(points), t))
        except NotHyperbolicType:
            return math.inf
        worst = max(worst, R.residual)
    return worst


def gram_round_trip(rng, trials):
    worst = 0.0
    for _ in range(trials):
        n = _dimension(rng)
        points = [random_point(rng, n) for _ in range(int(rng.integers(2, 11)))]
        R = gram_realize(cosh_dist_matrix(points))
        error = np.max(np.abs(realization_distances(R) - dist_matrix(points)))
        worst = max(worst, R.residual, float(error))
    return worst


def isometry_recovery(rng, trials):
    worst = 0.0
    for _ in range(trials):
        U = [random_point(rng, 3) for _ in range(6)]
        L = random_isometry(rng, 3)
        _, error = match_isometry(U, [apply(L, u) for u in U])
        worst = max(worst, error)
    return worst


def tree_four_point(rng, trials):
    A = mcmullen_limit_tree()
    worst = 0.0
    for _ in range(trials):
        words = [_random_word(rng, A.r) for _ in range(6)]
        D = np.array(
            [[tree_orbit_dist(A, u.inverse().concat(v)) for v in words] for u in words]
        )
        worst = max(worst, four_point_violation(D))
    return worst


def tree_translation_conjugation(rng, trials):
    A = mcmullen_limit_tree()
    worst = 0.0
    for _ in range(trials):
        w, g = _random_word(rng, A.r), _random_word(rng, A.r)
        conjugated = g.concat(w).concat(g.inverse())
        gap = tree_translation_length(A, conjugated) - tree_translation_length(A, w)
        worst = max(worst, abs(gap))
    return worst


PROPERTIES = (
    ("geometry.busemann_cocycle", busemann_cocycle, 1e-9, GEOMETRY_TRIALS),
    (
        "geometry.busemann_isometry_invariance",
        busemann_isometry_invariance,
        1e-9,
        GEOMETRY_TRIALS,
    ),
    (
        "geometry.strong_triangle_inequality",
        strong_triangle_inequality,
        1e-12,
        GEOMETRY_TRIALS,
    ),
    ("geometry.busemann_ray_limit", busemann_oracle, 1e-6, GEOMETRY_TRIALS),
    ("geometry.visual_dist_ray_limit", visual_dist_oracle, 1e-6, GEOMETRY_TRIALS),
    ("geometry.lorentz_round_trip", lorentz_round_trip, 1e-10, GEOMETRY_TRIALS),
    ("freegroup.group_laws", word_group_laws, 0.0, COMBINATORIAL_TRIALS),
    ("freegroup.orbit_equivariance", orbit_equivariance, 1e-9, COMBINATORIAL_TRIALS),
    ("kernels.power_realizable", kernel_power_realizable, 1e-9, KERNEL_TRIALS),
    ("kernels.gram_round_trip", gram_round_trip, 1e-9, KERNEL_TRIALS),
    ("kernels.isometry_recovery", isometry_recovery, 1e-8, KERNEL_TRIALS),
    ("trees.four_point", tree_four_point, 1e-12, COMBINATORIAL_TRIALS),
    (
        "trees.translation_conjugation",
        tree_translation_conjugation,
        1e-12,
        COMBINATORIAL_TRIALS,
    ),
)


def run_checks(seed=0, trials=None, prefix=""):
    """Runs every property whose name starts with `prefix`. `trials`, or the
    SCHOTTKYDIM_CHECK_TRIALS setting when given, replaces the per-property
    trial counts."""
    if trials is None:
        trials = settings.SCHOTTKYDIM_CHECK_TRIALS
    results = []
    for index, (name, check, limit, default) in enumerate(PROPERTIES):
        if not name.startswith(prefix):
            continue
        count = default if trials is None else trials
        worst = float(check(np.random.default_rng([seed, index]), count))
        results.append(CheckResult(name, worst, limit, count))
        logger.debug(f"{name}: worst {worst} over {count} trials")
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.warning(f"{len(failed)} properties failed: {', '.join(failed)}")
    return results
