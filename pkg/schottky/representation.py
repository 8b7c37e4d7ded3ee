import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional

import numpy as np

from hyperbolic.geometry import (
    BoundaryPoint,
    HPoint,
    LorentzIsometry,
    apply,
    axis_endpoints,
    boost_to,
    compose,
    form,
    inverse,
    origin,
)

from .words import (
    InfiniteWord,
    InvalidWord,
    NotSchottky,
    RankMismatch,
    ReducedWord,
    letter_to_code,
    level_codes,
    word_rank,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Diagnostics:
    K: float
    C_K: float
    r_joint: float
    ball_radius: int


@dataclass(frozen=True, eq=False)
class SchottkyRep:
    gens: tuple
    o: HPoint
    diagnostics: Optional[Diagnostics] = None
    # set once ping_pong_check has certified a set of disks
    schottky: bool = False
    disks: Optional[object] = None
    certificate: Optional[dict] = None
    descriptor: dict = field(default_factory=dict)
    # optional generators as words in involutions: gens[j] is the product of
    # reflections[i] for i in factors[j], see letter_factors
    reflections: tuple = ()
    factors: tuple = ()

    def __post_init__(self):
        gens = tuple(self.gens)
        if not gens:
            raise RankMismatch("a representation needs at least one generator")
        for g in gens:
            if not isinstance(g, LorentzIsometry):
                raise TypeError(f"generator {g!r} is not a LorentzIsometry")
            if g.n != self.o.n:
                raise RankMismatch(
                    f"generator acts on H^{g.n} but the base point is in H^{self.o.n}"
                )
        object.__setattr__(self, "gens", gens)
        reflections = tuple(self.reflections)
        factors = tuple(tuple(int(i) for i in word) for word in self.factors)
        object.__setattr__(self, "reflections", reflections)
        object.__setattr__(self, "factors", factors)
        if factors:
            check_factorization(gens, reflections, factors)

    @property
    def factored(self):
        return bool(self.factors)

    @property
    def r(self):
        return len(self.gens)

    @property
    def n(self):
        return self.o.n

    @cached_property
    def inverses(self):
        return tuple(inverse(g) for g in self.gens)

    # generators then inverses, indexed by letter code
    @cached_property
    def matrices(self):
        return np.array([g.M for g in self.gens + self.inverses])

    @cached_property
    def centered(self):
        """Generator matrices conjugated so that the base point is the origin."""
        T = boost_to(self.o)
        Tinv = inverse(T)
        return np.array([Tinv.M @ M @ T.M for M in self.matrices])

    @cached_property
    def letter_factors(self):
        """Involution words indexed by letter code; an inverse reads its
        generator's word backwards."""
        return tuple(self.factors) + tuple(word[::-1] for word in self.factors)

    @cached_property
    def reflection_matrices(self):
        return np.array([s.M for s in self.reflections])

    @cached_property
    def centered_reflections(self):
        T = boost_to(self.o)
        Tinv = inverse(T)
        return np.array([Tinv.M @ S @ T.M for S in self.reflection_matrices])

    def factor_sequence(self, codes, centered=False):
        """(matrices, indices) whose product in order is rep(codes).

        With a factorization the letters expand into involutions and adjacent
        repeats cancel, so a product never subtracts two large vectors that
        agree."""
        if not self.factored:
            return (self.centered if centered else self.matrices), list(codes)
        stack = reduce_involutions(self.letter_factors[c] for c in codes)
        matrices = self.centered_reflections if centered else self.reflection_matrices
        return matrices, stack

    def generator(self, letter):
        return self.gens[letter - 1] if letter > 0 else self.inverses[-letter - 1]

    def element(self, word):
        word = ReducedWord(word, rank=self.r)
        result = LorentzIsometry.identity(self.n)
        for letter in word:
            result = compose(result, self.generator(letter))
        return result

    def with_base_point(self, o):
        return replace(self, o=o, diagnostics=None, schottky=False, certificate=None)

    def with_diagnostics(self, diagnostics):
        return replace(self, diagnostics=diagnostics)

    def certified(self, disks, certificate):
        return replace(
            self, disks=disks, certificate=certificate, schottky=certificate["passed"]
        )


FACTOR_TOL = 1e-8


def reduce_involutions(words):
    """Concatenates involution words, cancelling adjacent repeats."""
    stack = []
    for word in words:
        for i in word:
            if stack and stack[-1] == i:
                stack.pop()
            else:
                stack.append(i)
    return stack


def _junction_states(factors):
    # (first letter, leading involution, next involution) over all reduced
    # words; prepending a letter may cancel one involution at the junction
    # and never two
    r = len(factors)
    words = tuple(factors) + tuple(word[::-1] for word in factors)
    frontier = {(c, words[c][0], words[c][1]) for c in range(2 * r)}
    seen = set(frontier)
    while frontier:
        found = set()
        for first, lead, second in frontier:
            for c in range(2 * r):
                if c == (first + r) % (2 * r):
                    continue
                word = words[c]
                if word[-1] != lead:
                    state = (c, word[0], word[1])
                elif word[-2] == second:
                    raise InvalidWord(
                        f"involution words {factors} cancel more than one factor "
                        f"when letter {c} meets a word led by {lead}, {second}"
                    )
                else:
                    state = (c, word[0], word[1] if len(word) > 2 else second)
                if state not in seen:
                    seen.add(state)
                    found.add(state)
        frontier = found
    return seen


def check_factorization(gens, reflections, factors):
    if len(factors) != len(gens):
        raise RankMismatch(
            f"{len(factors)} involution words for {len(gens)} generators"
        )
    for s in reflections:
        if not isinstance(s, LorentzIsometry):
            raise TypeError(f"reflection {s!r} is not a LorentzIsometry")
        if s.n != gens[0].n:
            raise RankMismatch(
                f"reflection acts on H^{s.n}, generators on H^{gens[0].n}"
            )
        scale = max(1.0, float(np.max(np.abs(s.M)))) ** 2
        if np.max(np.abs(s.M @ s.M - np.eye(s.n + 1))) > FACTOR_TOL * scale:
            raise InvalidWord(f"{s!r} is not an involution")
    for g, word in zip(gens, factors):
        if len(word) < 2 or any(a == b for a, b in zip(word, word[1:])):
            raise InvalidWord(f"{word} is not a reduced word of length >= 2")
        if not all(0 <= i < len(reflections) for i in word):
            raise InvalidWord(f"{word} indexes outside {len(reflections)} reflections")
        product = np.eye(g.n + 1)
        scale = 1.0
        for i in word:
            product = product @ reflections[i].M
            scale *= max(1.0, float(np.max(np.abs(reflections[i].M))))
        if np.max(np.abs(product - g.M)) > FACTOR_TOL * scale:
            raise InvalidWord(f"involution word {word} does not multiply to {g!r}")
    _junction_states(factors)


def _projective_apply(matrices, codes, v):
    # rightmost letter first; the vector is kept at v[0] = 1
    for c in reversed(codes):
        v = matrices[c] @ v
        v = v / v[0]
    return v


def orbit_point(rep, word):
    """rep(word) . o, renormalized to the sheet after every generator."""
    word = ReducedWord(word, rank=rep.r)
    p = rep.o
    for letter in reversed(word):
        p = apply(rep.generator(letter), p)
    return p


def _endpoint_through(o, v):
    # boundary point of the ray from o through the (projective) timelike v
    ov = o.v
    b = form(ov, v)
    u = v - b * ov
    norm2 = b * b - form(v, v)
    w = u / math.sqrt(norm2)
    end = ov + w
    return BoundaryPoint(end / end[0], check=False)


def _as_infinite(xi):
    if isinstance(xi, InfiniteWord):
        return xi
    return InfiniteWord.repeating_last(xi)


def limit_point(rep, xi, depth):
    """tau_rep(xi) approximated by the endpoint of the ray from o through
    rep(g_depth(xi)) . o."""
    if rep.diagnostics is None:
        raise NotSchottky("limit points need a representation with diagnostics")
    xi = _as_infinite(xi)
    if depth < len(xi.prefix):
        raise InvalidWord(f"depth {depth} is shorter than the prefix {xi.prefix}")
    codes = [letter_to_code(x, rep.r) for x in xi.letters(depth)]
    v = _projective_apply(*rep.factor_sequence(codes), rep.o.v.copy())
    return _endpoint_through(rep.o, v)


def limit_point_exact(rep, xi):
    """tau_rep(prefix . period^oo) = rep(prefix) . attracting point of
    rep(period)."""
    xi = _as_infinite(xi)
    attracting, _, _ = axis_endpoints(rep.element(xi.period))
    codes = [letter_to_code(x, rep.r) for x in xi.prefix]
    v = _projective_apply(*rep.factor_sequence(codes), attracting.v.copy())
    return BoundaryPoint(v, check=False)


def orbit_levels(rep, max_depth):
    """Yields (n, vectors) for n = 0..max_depth, where row i of `vectors` is
    T^-1 rep(w_i) o for the i-th reduced word of length n (lexicographic) and
    T the boost taking the origin to o. Row 0 entries are cosh d(o, rep(w) o).

    Level n + 1 is built by prepending letters, which keeps the lexicographic
    order."""
    if rep.factored:
        yield from _factored_orbit_levels(rep, max_depth)
        return
    G = rep.centered
    r = rep.r
    dim = rep.n + 1
    vectors = np.zeros((1, dim))
    vectors[0, 0] = 1.0
    first = np.array([-1])
    yield 0, vectors
    for n in range(1, max_depth + 1):
        blocks, firsts = [], []
        for s in range(2 * r):
            keep = first != (s + r) % (2 * r)
            blocks.append(vectors[keep] @ G[s].T)
            firsts.append(np.full(int(keep.sum()), s))
        vectors = np.vstack(blocks)
        first = np.concatenate(firsts)
        yield n, vectors


def _factored_orbit_levels(rep, max_depth):
    """orbit_levels through the involution words. Every row also keeps its
    vector without the leading involution; a letter whose last involution is
    that lead is applied to the kept vector, so the cancellation is exact."""
    S = rep.centered_reflections
    words = rep.letter_factors
    leads = np.array([word[0] for word in words])
    r = rep.r
    vectors = np.zeros((1, rep.n + 1))
    vectors[0, 0] = 1.0
    tails = vectors
    first = np.array([-1])
    lead = np.array([-1])
    yield 0, vectors
    for n in range(1, max_depth + 1):
        blocks, tail_blocks, firsts = [], [], []
        for s in range(2 * r):
            keep = first != (s + r) % (2 * r)
            word = words[s]
            v = vectors[keep] @ S[word[-1]].T
            cancel = lead[keep] == word[-1]
            v[cancel] = tails[keep][cancel]
            for i in reversed(word[1:-1]):
                v = v @ S[i].T
            tail_blocks.append(v)
            blocks.append(v @ S[word[0]].T)
            firsts.append(np.full(int(keep.sum()), s))
        vectors = np.vstack(blocks)
        tails = np.vstack(tail_blocks)
        first = np.concatenate(firsts)
        lead = leads[first]
        yield n, vectors


def orbit_distance_levels(rep, max_depth):
    return [
        np.arccosh(np.maximum(vectors[:, 0], 1.0))
        for _, vectors in orbit_levels(rep, max_depth)
    ]


def triangle_heights(a, b, c):
    """Distance from the vertex between sides a and b to the opposite side c,
    for hyperbolic triangles with side lengths a, b, c (arrays)."""
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    ca, cb, cc = np.cosh(a), np.cosh(b), np.cosh(c)
    with np.errstate(divide="ignore", invalid="ignore"):
        # 1 + 2 ca cb cc - ca^2 - cb^2 - cc^2, divided by cc^2
        scaled = (
            1.0 / cc**2 + 2.0 * (ca / cc) * cb - (ca / cc) ** 2 - (cb / cc) ** 2 - 1.0
        )
        sinh_h = np.sqrt(np.maximum(scaled, 0.0)) * cc / np.sinh(c)
        h = np.where(c > 0, np.arcsinh(sinh_h), 0.0)
    # the foot of the perpendicular falls outside the segment
    outside = (cb > ca * cc) | (ca > cb * cc)
    return np.where(outside, np.minimum(a, b), h)


def qi_constants_from_levels(distances, r, ball_radius, heights=triangle_heights):
    """(K, C_K) from exact orbit distances per level.

    K is the smallest constant with |w|/K - K <= d(o, w o) <= K |w| + K over
    the ball; C_K is the largest distance from an intermediate orbit point
    g_k o to the geodesic [o, w o], as given by `heights` for the side
    lengths d(o, g_k o), d(g_k o, w o), d(o, w o)."""
    K = 1.0
    C = 0.0
    for n in range(1, ball_radius + 1):
        d = distances[n]
        K = max(K, float(np.max(d / (n + 1))))
        K = max(K, float(np.max((-d + np.sqrt(d * d + 4 * n)) / 2)))
        if n < 2:
            continue
        codes = level_codes(r, n)
        for k in range(1, n):
            a = distances[k][word_rank(codes[:, :k], r)]
            b = distances[n - k][word_rank(codes[:, k:], r)]
            C = max(C, float(np.max(heights(a, b, d))))
    return K, C


def estimate_qi_constants(rep, ball_radius):
    distances = orbit_distance_levels(rep, ball_radius)
    K, C = qi_constants_from_levels(distances, rep.r, ball_radius)
    logger.debug(f"QI constants over the ball of radius {ball_radius}: K={K}, C_K={C}")
    return K, C


def qi_violations(rep, K, ball_radius):
    """Words in the ball breaking (1/K)|w| - K <= d(o, w o) <= K|w| + K."""
    distances = orbit_distance_levels(rep, ball_radius)
    bad = []
    for n in range(ball_radius + 1):
        d = distances[n]
        broken = (d < n / K - K - 1e-12) | (d > K * n + K + 1e-12)
        for i in np.flatnonzero(broken):
            bad.append((n, int(i), float(d[i])))
    return bad
