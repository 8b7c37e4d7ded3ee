"""The Busemann potential f(zeta) = B(rep(zeta_1) o, o, tau(zeta)) and its
Birkhoff sums.

Everything is evaluated in coordinates centred at the base point (o = e0),
on boundary vectors normalized to v[0] = 1. With t^k = tau(S^k zeta),

    f(S^k zeta) = -log (G[zeta_{k+1}] t^{k+1})[0]
    S_n f(zeta) = -log (rep(g_n(zeta)) t^n)[0],

and the second product is accumulated one generator at a time with the
logarithm of the scale factored out, so long words never overflow.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from hyperbolic.geometry import boost_to, form, inverse
from schottky.representation import _as_infinite, limit_point_exact
from schottky.words import (
    InfiniteWord,
    NotSchottky,
    ReducedWord,
    code_to_letter,
    common_prefix_length,
    letter_to_code,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Potential:
    rep: object

    def __post_init__(self):
        if self.rep.diagnostics is None:
            raise NotSchottky("the potential needs a representation with diagnostics")

    @cached_property
    def to_centered(self):
        return inverse(boost_to(self.rep.o)).M

    def codes(self, letters):
        return [letter_to_code(x, self.rep.r) for x in letters]


def _normalized_product(G, codes, v):
    """(v', log scale) with G[codes[0]] ... G[codes[-1]] v = scale * v' and
    v'[0] = 1."""
    log_scale = 0.0
    for c in reversed(codes):
        v = G[c] @ v
        log_scale += math.log(v[0])
        v = v / v[0]
    return v, log_scale


def tail(P, zeta):
    """tau(zeta) in centred coordinates, as a light-cone vector with v[0] = 1."""
    v = P.to_centered @ limit_point_exact(P.rep, _as_infinite(zeta)).v
    return v / v[0]


def potential_eval(P, zeta):
    zeta = _as_infinite(zeta)
    first = P.codes(zeta.letters(1))
    _, log_scale = _normalized_product(
        *P.rep.factor_sequence(first, centered=True), tail(P, zeta.shift(1))
    )
    return -log_scale


def birkhoff_sum(P, zeta, n):
    """S_n f(zeta) = B(rep(g_n(zeta)) o, o, tau(zeta)), from a single tail."""
    zeta = _as_infinite(zeta)
    if n == 0:
        return 0.0
    codes = P.codes(zeta.letters(n))
    _, log_scale = _normalized_product(
        *P.rep.factor_sequence(codes, centered=True), tail(P, zeta.shift(n))
    )
    return -log_scale


def birkhoff_sum_by_shifts(P, zeta, n):
    zeta = _as_infinite(zeta)
    return math.fsum(potential_eval(P, zeta.shift(j)) for j in range(n))


def log_visual_distance(P, xi, zeta):
    """log d_o(tau xi, tau zeta) from the common prefix of length k:

        -<xi, zeta>_o = (log(B(t_xi^k, t_zeta^k) / 2) + S_k f(xi) + S_k f(zeta)) / 2

    which stays accurate far below machine epsilon."""
    xi, zeta = _as_infinite(xi), _as_infinite(zeta)
    k = common_prefix_length(xi, zeta)
    if k is None:
        return -math.inf
    b = form(tail(P, xi.shift(k)), tail(P, zeta.shift(k)))
    return 0.5 * (math.log(b / 2.0) + birkhoff_sum(P, xi, k) + birkhoff_sum(P, zeta, k))


def _periodic_tail(P, code):
    letter = code_to_letter(code, P.rep.r)
    return tail(P, InfiniteWord(ReducedWord(), ReducedWord((letter,))))


def cylinder_tails(P, codes):
    """Tails and Birkhoff sums for the points w . (last letter)^oo, one per row
    of an (N, D) code array.

    Returns (tails, sums): tails[k] holds t^k for k < D and sums[k] holds
    S_k f for k <= D."""
    codes = np.asarray(codes)
    count, depth = codes.shape
    G = P.rep.centered
    fixed = np.array([_periodic_tail(P, c) for c in range(2 * P.rep.r)])
    t = fixed[codes[:, -1]] if depth else np.zeros((count, P.rep.n + 1))
    tails = np.zeros((depth, count, P.rep.n + 1))
    logs = np.zeros((depth, count))
    for k in range(depth - 1, -1, -1):
        v = np.einsum("nij,nj->ni", G[codes[:, k]], t)
        logs[k] = np.log(v[:, 0])
        t = v / v[:, :1]
        tails[k] = t
    sums = np.vstack([np.zeros((1, count)), -np.cumsum(logs, axis=0)])
    return tails, sums
