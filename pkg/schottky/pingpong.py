import logging
import math
from dataclasses import dataclass

import numpy as np

from hyperbolic.geometry import BoundaryPoint, minkowski_gram

from .words import DisjointnessViolated, RankMismatch

logger = logging.getLogger(__name__)

DEFAULT_MARGIN = 1e-9


def _angle(u, v):
    return math.acos(max(-1.0, min(1.0, float(u @ v))))


@dataclass(frozen=True)
class Cap:
    """Open ball of the boundary sphere for the visual metric at the origin.

    Stored as centre and visual radius; the visual distance at the origin
    between directions at angle a is sin(a / 2)."""

    center: BoundaryPoint
    radius: float

    @classmethod
    def from_angle(cls, direction, angle):
        direction = np.asarray(direction, dtype=float)
        return cls(BoundaryPoint.from_direction(direction), math.sin(angle / 2.0))

    @classmethod
    def from_normal(cls, normal):
        """The cap {xi : B(xi, normal) < 0} cut out by a hyperplane."""
        normal = np.asarray(normal, dtype=float)
        spatial = normal[1:]
        norm = np.linalg.norm(spatial)
        angle = math.acos(max(-1.0, min(1.0, normal[0] / norm)))
        return cls.from_angle(spatial / norm, angle)

    @property
    def direction(self):
        return self.center.v[1:]

    @property
    def angle(self):
        return 2.0 * math.asin(min(1.0, self.radius))

    def normal(self):
        a = self.angle
        return np.concatenate(([math.cos(a)], self.direction)) / math.sin(a)

    def image(self, g):
        return Cap.from_normal(g.M @ self.normal())

    def enlarged(self, eta):
        return Cap.from_angle(self.direction, self.angle + eta)

    def slack(self, xi):
        """Angular depth of xi inside the cap (negative outside)."""
        return self.angle - _angle(np.asarray(xi)[1:], self.direction)

    def contains(self, xi):
        return self.slack(xi) > 0

    def boundary_samples(self, n_samples):
        """Points of the boundary sphere of the cap (two points in H^2)."""
        u = self.direction
        a = self.angle
        n = u.size
        # orthonormal basis of the complement of u
        basis = np.linalg.svd(np.eye(n) - np.outer(u, u))[0][:, : n - 1]
        if n == 2:
            ts = np.array([[1.0], [-1.0]])
        else:
            rng = np.random.default_rng(0)
            ts = rng.normal(size=(max(n_samples, 2), n - 1))
            ts /= np.linalg.norm(ts, axis=1, keepdims=True)
        dirs = math.cos(a) * u + math.sin(a) * (ts @ basis.T)
        return np.column_stack([np.ones(len(dirs)), dirs])


@dataclass(frozen=True)
class SchottkyDisks:
    """Caps (D_i^-, D_i^+) for each generator s_i."""

    pairs: tuple

    def __post_init__(self):
        caps = self.caps()
        for i in range(len(caps)):
            for j in range(i + 1, len(caps)):
                gap = self.gap(caps[i], caps[j])
                if gap <= 0:
                    raise DisjointnessViolated(
                        f"disks {i} and {j} overlap (angular gap {gap})"
                    )

    @staticmethod
    def gap(a, b):
        return _angle(a.direction, b.direction) - a.angle - b.angle

    def caps(self):
        return [cap for pair in self.pairs for cap in pair]

    def min_gap(self):
        caps = self.caps()
        return min(
            self.gap(caps[i], caps[j])
            for i in range(len(caps))
            for j in range(i + 1, len(caps))
        )

    def enlarged(self, eta):
        return SchottkyDisks(
            tuple(
                (minus.enlarged(eta), plus.enlarged(eta)) for minus, plus in self.pairs
            )
        )

    def image(self, g):
        return SchottkyDisks(
            tuple((minus.image(g), plus.image(g)) for minus, plus in self.pairs)
        )


def _images(M, points):
    images = points @ M.T
    return images / images[:, :1]


def ping_pong_check(rep, disks, n_samples=64, margin=DEFAULT_MARGIN):
    """Checks s_i(closure of the exterior of D_i^-) in D_i^+ and
    s_i^-1(closure of the exterior of D_i^+) in D_i^- on samples.

    Returns (passed, certificate); the certificate records the worst angular
    slack per generator."""
    if len(disks.pairs) != rep.r:
        raise RankMismatch(f"{len(disks.pairs)} disk pairs for rank {rep.r}")
    J = minkowski_gram(rep.n)
    per_generator = []
    for i, (minus, plus) in enumerate(disks.pairs):
        worst = math.inf
        for M, source, target in (
            (rep.gens[i].M, minus, plus),
            (rep.inverses[i].M, plus, minus),
        ):
            images = _images(M, source.boundary_samples(n_samples))
            worst = min(worst, min(target.slack(x) for x in images))
            if target.angle < math.pi / 2:
                # the exterior side: pull back the antipode of the target
                antipode = np.concatenate(([1.0], -target.direction))
                pulled = (J @ M.T @ J) @ antipode
                worst = min(worst, source.slack(pulled / pulled[0]))
        per_generator.append(worst)
    worst_margin = min(per_generator)
    passed = bool(worst_margin > margin)
    if not passed:
        logger.info(f"ping-pong check failed: worst margin {worst_margin}")
    certificate = {
        "passed": passed,
        "worst_margin": worst_margin,
        "margin": margin,
        "n_samples": n_samples,
        "per_generator": per_generator,
        "min_disk_gap": disks.min_gap(),
    }
    return passed, certificate


def assert_disks_in_sphere(disks, n):
    for cap in disks.caps():
        if cap.center.n != n:
            raise RankMismatch(f"disk centre in the boundary of H^{cap.center.n}")
        if not 0 < cap.radius < 1:
            raise DisjointnessViolated(f"visual radius {cap.radius} is out of (0, 1)")
