"""Finite subtrees of a limit tree and their lifts into hyperbolic space.

A tree point is stored as (path, offset): `path` is the tight edge path from
the base vertex to a vertex v of the universal cover, and the point lies on the
last edge of the path at distance `offset` before v. Vertices have offset 0,
the base vertex is ((), 0).

Lifted points are stored as rep(anchor) . y with y on the geodesic from o
towards rep(s) o, at most half a segment away from o. Pairings are evaluated
after stripping the common prefix of the two anchors, so nearby points far from
o never go through the cancellation of two huge hyperboloid vectors.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from hyperbolic.geometry import dist, geodesic_tangent, minkowski_gram
from schottky.representation import orbit_point
from schottky.words import (
    NotSchottky,
    RankMismatch,
    ReducedWord,
    enumerate_reduced,
)
from trees.graph import reduce_path

logger = logging.getLogger(__name__)

# pair entries per block when comparing paths
BLOCK_ENTRIES = 2_000_000


class DegenerationError(Exception):
    """Base class for degeneration pipeline exceptions"""


class TOutOfRange(DegenerationError):
    """Raised when t = s / r_joint leaves (0, 1]."""


class BaseJointMismatch(DegenerationError):
    """Raised when a generator moves the base point much further than the joint
    displacement."""


@dataclass(frozen=True)
class TreePoint:
    path: tuple
    offset: float = 0.0

    @property
    def is_vertex(self):
        return self.offset == 0.0


def act(A, word, x):
    """w . x for a tree point x."""
    prefix = list(A.path(word))
    far = tuple(reduce_path(prefix + list(x.path)))
    if x.is_vertex:
        return TreePoint(far)
    near = tuple(reduce_path(prefix + list(x.path[:-1])))
    if len(far) > len(near):
        return TreePoint(far, x.offset)
    # the edge now points back towards the base vertex
    return TreePoint(near, float(A.graph.lengths()[x.path[-1]]) - x.offset)


def _encode(A, points):
    lengths = A.graph.lengths()
    width = max(1, max(len(p.path) for p in points))
    codes = np.full((len(points), width), -1, dtype=np.int32)
    cum = np.zeros((len(points), width + 1))
    heights = np.empty(len(points))
    for i, p in enumerate(points):
        k = len(p.path)
        if k:
            codes[i, :k] = p.path
            cum[i, 1 : k + 1] = np.cumsum(lengths[list(p.path)])
        cum[i, k + 1 :] = cum[i, k]
        heights[i] = cum[i, k] - p.offset
    return codes, cum, heights


def _pad_columns(a, width, fill):
    if a.shape[1] >= width:
        return a
    extra = np.full((a.shape[0], width - a.shape[1]), fill, dtype=a.dtype)
    return np.hstack([a, extra])


def _common_prefix(codes, others):
    same = (codes[:, None, :] == others[None, :, :]) & (codes[:, None, :] >= 0)
    return np.cumprod(same, axis=2).sum(axis=2)


def tree_point_distances(A, points, others=None):
    """Distances between tree points: h(x) + h(y) - 2 h(meet), with h the
    distance from the base vertex and the meet read off the common prefix of
    the two paths."""
    others = points if others is None else others
    cx, sx, hx = _encode(A, points)
    cy, _, hy = _encode(A, others)
    width = max(cx.shape[1], cy.shape[1])
    cx, cy = _pad_columns(cx, width, -1), _pad_columns(cy, width, -1)
    sx = np.maximum.accumulate(_pad_columns(sx, width + 1, 0.0), axis=1)
    D = np.empty((len(points), len(others)))
    block = max(1, BLOCK_ENTRIES // max(1, len(others) * width))
    for start in range(0, len(points), block):
        rows = slice(start, start + block)
        prefix = _common_prefix(cx[rows], cy)
        shared = sx[rows][np.arange(prefix.shape[0])[:, None], prefix]
        meet = np.minimum(np.minimum(hx[rows, None], hy[None, :]), shared)
        D[rows] = hx[rows, None] + hy[None, :] - 2.0 * meet
    return np.maximum(D, 0.0)


@dataclass(frozen=True, eq=False)
class AnchoredPoints:
    """Points rep(anchor) . y, one hyperboloid vector y per row of Y."""

    rep: object
    anchors: tuple
    Y: np.ndarray

    def __len__(self):
        return len(self.anchors)

    @cached_property
    def _stack(self):
        # V[i, k] = rep(anchor_i[k:]) . y_i
        r = self.rep.r
        depth = max(len(a) for a in self.anchors)
        codes = np.full((len(self), max(1, depth)), -1, dtype=np.int32)
        V = np.repeat(self.Y[:, None, :], depth + 1, axis=1)
        matrices = self.rep.matrices
        for i, a in enumerate(self.anchors):
            c = a.codes(r)
            codes[i, : len(c)] = c
            v = self.Y[i]
            for k in range(len(c) - 1, -1, -1):
                v = matrices[c[k]] @ v
                V[i, k] = v
        return codes, V

    @property
    def vectors(self):
        return self._stack[1][:, 0]

    def cosh_block(self, rows):
        """cosh d between the points in `rows` and all points."""
        codes, V = self._stack
        prefix = _common_prefix(codes[rows], codes)
        Vi = V[rows][np.arange(prefix.shape[0])[:, None], prefix]
        Vj = V[np.arange(len(self))[None, :], prefix]
        signature = np.diag(minkowski_gram(self.rep.n))
        return np.maximum(np.einsum("ijc,c,ijc->ij", Vi, signature, Vj), 1.0)

    def cosh_distances(self, block=512):
        return np.vstack(
            [
                self.cosh_block(slice(start, start + block))
                for start in range(0, len(self), block)
            ]
        )


def _segment(P, Q, subdivision):
    """Keys (path, step) of the tree points on the geodesic between the
    vertices P and Q; step k sits k / (subdivision + 1) of the edge before the
    end of path."""
    c = 0
    while c < min(len(P), len(Q)) and P[c] == Q[c]:
        c += 1
    keys = [(P[:c], 0)]
    for path in (P, Q):
        for j in range(c + 1, len(path) + 1):
            keys.append((path[:j], 0))
            keys.extend((path[:j], k) for k in range(1, subdivision + 1))
    return keys


@dataclass(frozen=True, eq=False)
class LiftPlan:
    tree: object
    rep: object
    l: int
    points: tuple
    lifted: AnchoredPoints
    # word -> index into points, for the orbit vertices
    orbit: dict
    gamma: tuple

    @property
    def theta(self):
        return self.rep.descriptor.get("theta")

    @property
    def size(self):
        return len(self.points)

    @property
    def lifts(self):
        return self.lifted.vectors

    def lift_of(self, word):
        return self.lifts[self.orbit[ReducedWord(word)]]

    @cached_property
    def tree_distances(self):
        return tree_point_distances(self.tree, self.points)

    def cosh_distances(self):
        return self.lifted.cosh_distances()

    def extended(self):
        """Gamma_l . E_l as (tree points, anchored lifts), one entry per
        (gamma, x) pair, gamma-major."""
        tree, anchors = [], []
        for g in self.gamma:
            tree.extend(act(self.tree, g, x) for x in self.points)
            anchors.extend(g.concat(a) for a in self.lifted.anchors)
        Y = np.tile(self.lifted.Y, (len(self.gamma), 1))
        return tree, AnchoredPoints(self.rep, tuple(anchors), Y)


def check_base_point(rep, slack=1.0):
    """max_j d(o, rep(s_j) o) <= r_joint + slack."""
    if rep.diagnostics is None:
        raise NotSchottky("the representation carries no joint displacement")
    reach = max(dist(rep.o, orbit_point(rep, (j,))) for j in range(1, rep.r + 1))
    if reach > rep.diagnostics.r_joint + slack:
        raise BaseJointMismatch(
            f"generators move the base point by {reach}, beyond the joint "
            f"displacement {rep.diagnostics.r_joint}"
        )
    return reach


def build_lift(A, rep, l, subdivision=2, gamma_cap=1):
    """Lifts the subtree spanned by the orbit vertices w . o_tree, |w| <= l.

    Orbit vertices go to rep(w) . o. Every other tree point is lifted once,
    along the first segment [parent(w) . o_tree, w . o_tree] in word order that
    contains it, to the point of [rep(parent(w)) o, rep(w) o] dividing it in
    the same ratio, and anchored at the nearer end of the segment."""
    if A.r != rep.r:
        raise RankMismatch(f"tree of rank {A.r} for a representation of rank {rep.r}")
    if l < 0 or subdivision < 0 or gamma_cap < 0:
        raise DegenerationError("l, subdivision and gamma_cap must be non-negative")
    check_base_point(rep)
    o = rep.o.v
    letters = [x for j in range(1, rep.r + 1) for x in (j, -j)]
    tangents = {x: geodesic_tangent(rep.o, orbit_point(rep, (x,))) for x in letters}

    def along(letter, tau):
        tangent, _ = tangents[letter]
        return np.cosh(tau) * o + np.sinh(tau) * tangent

    lengths = A.graph.lengths()
    index = {((), 0): 0}
    points, anchors, Y = [TreePoint(())], [ReducedWord()], [o]
    orbit = {ReducedWord(): 0}

    for n in range(1, l + 1):
        for w in enumerate_reduced(rep.r, n):
            parent, s = ReducedWord(w[:-1]), w[-1]
            P, Q = tuple(A.path(parent)), tuple(A.path(w))
            start = TreePoint(P)
            span = tree_point_distances(A, [start], [TreePoint(Q)])[0, 0]
            d = tangents[s][1]
            for key in _segment(P, Q, subdivision):
                if key in index or key == (Q, 0):
                    continue
                path, k = key
                offset = lengths[path[-1]] * k / (subdivision + 1) if k else 0.0
                point = TreePoint(path, float(offset))
                f = tree_point_distances(A, [start], [point])[0, 0] / span
                index[key] = len(points)
                points.append(point)
                if f <= 0.5:
                    anchors.append(parent)
                    Y.append(along(s, f * d))
                else:
                    anchors.append(w)
                    Y.append(along(-s, (1.0 - f) * d))
            # orbit vertices always carry the orbit point
            if (Q, 0) not in index:
                index[(Q, 0)] = len(points)
                points.append(TreePoint(Q))
                anchors.append(w)
                Y.append(o)
            else:
                anchors[index[(Q, 0)]] = w
                Y[index[(Q, 0)]] = o
            orbit[w] = index[(Q, 0)]

    radius = min(l, gamma_cap)
    gamma = tuple(w for n in range(radius + 1) for w in enumerate_reduced(rep.r, n))
    logger.info(
        f"lifted {len(points)} tree points ({len(orbit)} orbit vertices) at l={l}; "
        f"|Gamma_l| = {len(gamma)}"
    )
    return LiftPlan(
        tree=A,
        rep=rep,
        l=l,
        points=tuple(points),
        lifted=AnchoredPoints(rep, tuple(anchors), np.array(Y)),
        orbit=orbit,
        gamma=gamma,
    )
