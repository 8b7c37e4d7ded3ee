"""Finite-depth checks of the Gibbs picture: cylinder weights against
Birkhoff sums, the visual-distance bounds on pairs of limit points and the
cylinder/ball sandwich."""

import logging
import math

import numpy as np
from scipy.special import logsumexp

from hyperbolic.geometry import dist
from schottky.representation import _as_infinite, orbit_point
from schottky.words import (
    InfiniteWord,
    NotSchottky,
    ReducedWord,
    cylinder_contains,
    level_codes,
)

from .potential import Potential, birkhoff_sum, cylinder_tails, log_visual_distance
from .pressure import orbit_distance_stream

logger = logging.getLogger(__name__)


def _level(rep, n):
    for k, d in enumerate(orbit_distance_stream(rep, n)):
        if k == n:
            return d


def _require_diagnostics(rep):
    if rep.diagnostics is None:
        raise NotSchottky("Gibbs checks need a representation with diagnostics")


def cylinder_weights(rep, n, delta):
    """e^{-delta d(o, w o)} / Z_n(delta) over the words of length n, in
    lexicographic order."""
    log_w = -delta * _level(rep, n)
    return np.exp(log_w - logsumexp(log_w))


def gibbs_consistency(rep, depths, delta):
    """Per depth n, the largest |log weight(w) - delta S_n f(w(last)^oo) - c_n|
    with c_n = -log Z_n(delta). The bound 2 delta C_K comes from comparing
    S_n f with -d(o, g_n o)."""
    _require_diagnostics(rep)
    P = Potential(rep)
    rows = []
    for n in depths:
        d = _level(rep, n)
        log_z = logsumexp(-delta * d)
        log_weight = -delta * d - log_z
        _, sums = cylinder_tails(P, level_codes(rep.r, n))
        deviation = np.abs(log_weight - delta * sums[n] + log_z)
        rows.append(
            {
                "n": n,
                "max_deviation": float(deviation.max()),
                "bound": 2.0 * delta * rep.diagnostics.C_K,
            }
        )
        logger.debug(f"Gibbs consistency at depth {n}: {rows[-1]['max_deviation']}")
    return rows


def _random_word(rng, r, length, avoid=None):
    letters = []
    while len(letters) < length:
        x = int(rng.integers(1, r + 1)) * int(rng.choice([-1, 1]))
        previous = letters[-1] if letters else avoid
        if previous is None or x != -previous:
            letters.append(x)
    return letters


def _branching_pair(rng, r, n):
    """Two eventually periodic words with a common prefix of length exactly n."""
    prefix = _random_word(rng, r, n)
    first = _random_word(rng, r, 1, avoid=prefix[-1] if prefix else None)[0]
    second = first
    while second == first or (prefix and second == -prefix[-1]):
        second = _random_word(rng, r, 1)[0]
    tails = [
        [first] + _random_word(rng, r, int(rng.integers(0, 5)), avoid=first),
        [second] + _random_word(rng, r, int(rng.integers(0, 5)), avoid=second),
    ]
    return prefix, [InfiniteWord.repeating_last(ReducedWord(prefix + t)) for t in tails]


def lemma_bounds(rep, pairs=200, seed=0, n_range=(2, 10)):
    """Worst slacks of

        e^{-3C} <= d_o(tau xi, tau zeta) e^{d(o, g_n o)} <= e^{3C}
        d_o(tau xi, tau zeta) <= e^{3C + K} d_1(xi, zeta)^{1/K}

    over random pairs with a common prefix of length n. Non-negative slacks
    mean the bounds hold."""
    _require_diagnostics(rep)
    if rep.r < 2:
        raise NotSchottky("pairs of branching words need rank at least 2")
    K, C = rep.diagnostics.K, rep.diagnostics.C_K
    P = Potential(rep)
    rng = np.random.default_rng(seed)
    two_sided = holder = math.inf
    for _ in range(pairs):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        prefix, (xi, zeta) = _branching_pair(rng, rep.r, n)
        log_d = log_visual_distance(P, xi, zeta)
        d_n = dist(rep.o, orbit_point(rep, prefix))
        two_sided = min(two_sided, 3.0 * C - abs(log_d + d_n))
        holder = min(holder, 3.0 * C + K - n / K - log_d)
    logger.info(f"lemma bounds: worst slacks {two_sided} and {holder}")
    return {"pairs": pairs, "two_sided": two_sided, "holder": holder}


def cylinder_ball_sandwich(rep, zeta, n, sample_depth=None):
    """Checks, on the limit points w . (last letter)^oo with |w| = sample_depth,
    that the ball of radius e^{-7C} e^{S_n f(zeta)} about tau zeta lies in the
    image of the depth-n cylinder of zeta, and that the image lies in the ball
    of radius e^{7C} e^{S_n f(zeta)}. Slacks are in log scale."""
    _require_diagnostics(rep)
    if sample_depth is None:
        sample_depth = n + 2
    P = Potential(rep)
    C = rep.diagnostics.C_K
    s_n = birkhoff_sum(P, zeta, n)
    inner, outer = s_n - 7.0 * C, s_n + 7.0 * C
    zeta = _as_infinite(zeta)
    cylinder = zeta.letters(n)
    inner_slack = outer_slack = math.inf
    for row in level_codes(rep.r, sample_depth):
        w = ReducedWord.from_codes(row, rep.r)
        point = InfiniteWord.repeating_last(w)
        log_d = log_visual_distance(P, point, zeta)
        if cylinder_contains(cylinder, point):
            outer_slack = min(outer_slack, outer - log_d)
        else:
            inner_slack = min(inner_slack, log_d - inner)
    return {
        "inner_holds": inner_slack >= 0,
        "outer_holds": outer_slack >= 0,
        "inner_slack": inner_slack,
        "outer_slack": outer_slack,
    }
