"""Free group actions on metric trees presented by finite metric graphs.

The tree is the universal cover of the graph, based at a lift of
`base_vertex`. Generator s_i acts as the deck transformation of the closed
edge path loops[i], so d_T(o, w o) is the length of the tight path obtained
by concatenating loops along w and cancelling backtracks.

Edge i traversed from u to v has code 2i, traversed backwards 2i + 1; the
reverse of code c is c ^ 1.
"""

import itertools
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from dimension.pressure import critical_exponent
from hyperbolic.geometry import translation_length
from schottky.representation import qi_constants_from_levels
from schottky.words import InfiniteWord, ReducedWord, common_prefix_length

logger = logging.getLogger(__name__)

EXHAUSTIVE_FOUR_POINT = 40
SAMPLED_QUADRUPLES = 20000
K_LIMIT = 50.0


class TreeError(Exception):
    """Base class for metric tree exceptions"""


class InvalidGraph(TreeError):
    """Raised when a graph or its generator loops are malformed."""


class NotTreeSchottky(TreeError):
    """Raised when the orbit map of a tree action is not a quasi-isometric
    embedding on the tested ball."""


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    length: float
    label: str


@dataclass(frozen=True)
class MetricGraph:
    vertices: tuple
    edges: tuple
    base_vertex: str

    def __post_init__(self):
        vertices = set(self.vertices)
        if len(vertices) != len(self.vertices):
            raise InvalidGraph("vertex names must be unique")
        if self.base_vertex not in vertices:
            raise InvalidGraph(f"base vertex {self.base_vertex!r} is not a vertex")
        labels = [e.label for e in self.edges]
        if len(set(labels)) != len(labels):
            raise InvalidGraph("edge labels must be unique")
        for e in self.edges:
            if e.u not in vertices or e.v not in vertices:
                raise InvalidGraph(f"edge {e.label!r} has an unknown endpoint")
            if not e.length > 0:
                raise InvalidGraph(f"edge {e.label!r} has non-positive length")
        if not self._connected():
            raise InvalidGraph("graph is not connected")

    def _connected(self):
        seen = {self.base_vertex}
        frontier = [self.base_vertex]
        while frontier:
            x = frontier.pop()
            for e in self.edges:
                for a, b in ((e.u, e.v), (e.v, e.u)):
                    if a == x and b not in seen:
                        seen.add(b)
                        frontier.append(b)
        return len(seen) == len(self.vertices)

    @property
    def betti(self):
        return len(self.edges) - len(self.vertices) + 1

    def code(self, signed_label):
        """'+gamma' -> forward code of edge gamma, '-gamma' -> backward."""
        sign, label = signed_label[0], signed_label[1:]
        if sign not in "+-":
            raise InvalidGraph(f"edge reference {signed_label!r} needs a sign")
        for i, e in enumerate(self.edges):
            if e.label == label:
                return 2 * i + (sign == "-")
        raise InvalidGraph(f"no edge labelled {label!r}")

    def start(self, code):
        e = self.edges[code // 2]
        return e.v if code & 1 else e.u

    def end(self, code):
        return self.start(code ^ 1)

    def lengths(self):
        """Length per edge code."""
        return np.repeat([e.length for e in self.edges], 2)


def reduce_path(codes):
    stack = []
    for c in codes:
        if stack and stack[-1] == c ^ 1:
            stack.pop()
        else:
            stack.append(c)
    return stack


@dataclass(frozen=True, eq=False)
class TreeAction:
    graph: MetricGraph
    loops: tuple
    descriptor: dict = None

    def __post_init__(self):
        graph = self.graph
        if len(self.loops) != graph.betti:
            raise InvalidGraph(
                f"{len(self.loops)} loops given for a graph of first Betti number "
                f"{graph.betti}"
            )
        loops = tuple(tuple(int(c) for c in loop) for loop in self.loops)
        for i, loop in enumerate(loops):
            if not loop:
                raise InvalidGraph(f"loop {i + 1} is empty")
            if graph.start(loop[0]) != graph.base_vertex:
                raise InvalidGraph(f"loop {i + 1} does not start at the base vertex")
            if graph.end(loop[-1]) != graph.base_vertex:
                raise InvalidGraph(f"loop {i + 1} does not end at the base vertex")
            for a, b in zip(loop, loop[1:]):
                if graph.end(a) != graph.start(b):
                    raise InvalidGraph(f"loop {i + 1} is not an edge path")
                if b == a ^ 1:
                    raise InvalidGraph(f"loop {i + 1} backtracks")
        object.__setattr__(self, "loops", loops)

    @classmethod
    def from_labels(cls, graph, loops, descriptor=None):
        codes = tuple(tuple(graph.code(x) for x in loop) for loop in loops)
        return cls(graph, codes, descriptor)

    @property
    def r(self):
        return len(self.loops)

    def letter_path(self, letter):
        loop = self.loops[abs(letter) - 1]
        if letter > 0:
            return loop
        return tuple(c ^ 1 for c in reversed(loop))

    def path(self, word):
        """Tight edge path from o to w o."""
        word = ReducedWord(word, rank=self.r)
        return reduce_path(c for x in word for c in self.letter_path(x))

    def path_length(self, codes):
        lengths = self.graph.lengths()
        return float(sum(lengths[c] for c in codes))


def tree_orbit_dist(A, w):
    return A.path_length(A.path(w))


def tree_translation_length(A, w):
    """Length of the cyclically reduced edge path of w."""
    codes = A.path(w)
    i, j = 0, len(codes) - 1
    while i < j and codes[i] == codes[j] ^ 1:
        i += 1
        j -= 1
    return A.path_length(codes[i : j + 1])


def tree_distance_levels(A, max_depth):
    """Yields d_T(o, w o) for the reduced words of each length n = 0..max_depth,
    in lexicographic order.

    Level n + 1 is built by prepending letters. Tight paths are stored
    reversed and right-padded, so prepending a letter appends its reversed
    loop after cancelling against the stored tail."""
    r = A.r
    lengths = A.graph.lengths()
    loops = [np.array(A.letter_path(x), dtype=np.int16) for x in range(1, r + 1)]
    loops += [np.array(A.letter_path(-x), dtype=np.int16) for x in range(1, r + 1)]
    width = max(loop.size for loop in loops)
    paths = np.zeros((1, 0), dtype=np.int16)
    sizes = np.zeros(1, dtype=np.int64)
    dists = np.zeros(1)
    first = np.array([-1])
    yield dists
    for _ in range(max_depth):
        new_paths, new_sizes, new_dists, firsts = [], [], [], []
        for s in range(2 * r):
            keep = first != (s + r) % (2 * r)
            P, k, d = paths[keep], sizes[keep], dists[keep]
            loop = loops[s]
            m = loop.size
            rows = np.arange(len(k))
            # cancel the end of the loop against the start of the path
            j = np.zeros(len(k), dtype=np.int64)
            alive = np.ones(len(k), dtype=bool)
            for t in range(min(m, P.shape[1])):
                alive &= t < k
                col = np.clip(k - 1 - t, 0, None)
                alive &= P[rows, col] == (loop[m - 1 - t] ^ 1)
                j += alive
            cancelled = np.array([lengths[loop[m - 1 - t]] for t in range(m)])
            removed = np.concatenate(([0.0], np.cumsum(cancelled)))[j]
            out = np.zeros((len(k), P.shape[1] + width), dtype=np.int16)
            out[:, : P.shape[1]] = P
            kept = k - j
            for i in range(m):
                # reversed path gets loop[m - j - 1 - i] at column k - j + i
                put = i < m - j
                src = np.clip(m - j - 1 - i, 0, m - 1)
                out[rows[put], kept[put] + i] = loop[src[put]]
            new_paths.append(out)
            new_sizes.append(kept + (m - j))
            new_dists.append(d + lengths[loop].sum() - 2.0 * removed)
            firsts.append(np.full(len(k), s))
        sizes = np.concatenate(new_sizes)
        width_now = int(sizes.max())
        paths = np.vstack([p[:, :width_now] for p in new_paths])
        dists = np.concatenate(new_dists)
        first = np.concatenate(firsts)
        yield dists


def tree_heights(a, b, c):
    """Distance from a vertex to the opposite side of a tripod: the Gromov
    product (a + b - c) / 2."""
    return (np.asarray(a) + np.asarray(b) - np.asarray(c)) / 2.0


def estimate_tree_qi_constants(A, ball_radius):
    distances = list(tree_distance_levels(A, ball_radius))
    for n in range(1, ball_radius + 1):
        if np.min(distances[n]) <= 0:
            raise NotTreeSchottky(f"a word of length {n} fixes the base point")
    K, C = qi_constants_from_levels(distances, A.r, ball_radius, heights=tree_heights)
    if K > K_LIMIT:
        raise NotTreeSchottky(f"orbit growth is too slow on the ball (K = {K})")
    logger.debug(f"tree QI constants at radius {ball_radius}: K={K}, C={C}")
    return K, C


def hdim_tree_boundary(A, max_depth, tol, ball_radius=4):
    _, C = estimate_tree_qi_constants(A, min(ball_radius, max_depth))
    result = critical_exponent(tree_distance_levels(A, max_depth), C, max_depth, tol)
    logger.info(f"tree boundary dimension {result.delta} at depth {result.depth_used}")
    return result


def tree_gromov_product(A, u, v):
    """<u, v>_o for orbit points (finite words) or boundary points
    (infinite words)."""
    if isinstance(u, InfiniteWord) and isinstance(v, InfiniteWord):
        k = common_prefix_length(u, v)
        if k is None:
            return math.inf
        depth = k + 1 + max(len(loop) for loop in A.loops)
        pu, pv = A.path(u.letters(depth)), A.path(v.letters(depth))
        common = 0
        for a, b in zip(pu, pv):
            if a != b:
                break
            common += 1
        return A.path_length(pu[:common])
    u, v = ReducedWord(u), ReducedWord(v)
    duv = tree_orbit_dist(A, u.inverse().concat(v))
    return (tree_orbit_dist(A, u) + tree_orbit_dist(A, v) - duv) / 2.0


def tree_visual_dist(A, xi, zeta):
    return math.exp(-tree_gromov_product(A, xi, zeta))


def _four_point(D, quads):
    i, j, k, m = quads.T
    sums = np.sort(
        np.stack([D[i, j] + D[k, m], D[i, k] + D[j, m], D[i, m] + D[j, k]]), axis=0
    )
    return float(np.max(sums[2] - sums[1])) if len(quads) else 0.0


def four_point_violation(D, seed=0):
    """Largest gap between the two largest of the three pair sums over
    quadruples; zero for tree metrics."""
    D = np.asarray(D, dtype=float)
    m = D.shape[0]
    if m < 4:
        return 0.0
    if m <= EXHAUSTIVE_FOUR_POINT:
        quads = np.array(list(itertools.combinations(range(m), 4)))
    else:
        rng = np.random.default_rng(seed)
        quads = np.array(
            [rng.choice(m, size=4, replace=False) for _ in range(SAMPLED_QUADRUPLES)]
        )
    return _four_point(D, quads)


def relabeled(A, mapping=None, reverse=()):
    """Renames edges by `mapping` and reverses the orientation of the edges
    labelled in `reverse`; the action is unchanged."""
    mapping = mapping or {}
    reverse = set(reverse)
    edges = []
    for e in A.graph.edges:
        u, v = (e.v, e.u) if e.label in reverse else (e.u, e.v)
        edges.append(Edge(u, v, e.length, mapping.get(e.label, e.label)))
    graph = replace(A.graph, edges=tuple(edges))
    flipped = {2 * i for i, e in enumerate(A.graph.edges) if e.label in reverse}
    loops = tuple(
        tuple(c ^ 1 if (c & ~1) in flipped else c for c in loop) for loop in A.loops
    )
    return TreeAction(graph, loops, A.descriptor)


def scaled(A, c):
    """Every edge length multiplied by c."""
    if not c > 0:
        raise InvalidGraph(f"scale must be positive, got {c}")
    edges = tuple(replace(e, length=e.length * c) for e in A.graph.edges)
    return TreeAction(replace(A.graph, edges=edges), A.loops, A.descriptor)


def rescaled_length_convergence(members, A, words):
    """Per (theta, rep) and word: l(rep(w)) / r_theta against l_T(w).

    Rows carry theta, word, ratio, tree_length and gap = |ratio - tree_length|,
    in input order."""
    rows = []
    targets = {ReducedWord(w): tree_translation_length(A, w) for w in words}
    for theta, rep in members:
        r = rep.diagnostics.r_joint
        for w, target in targets.items():
            ratio = translation_length(rep.element(w)) / r
            rows.append(
                {
                    "theta": theta,
                    "word": str(w),
                    "ratio": ratio,
                    "tree_length": target,
                    "gap": abs(ratio - target),
                }
            )
    return rows
