"""Continuity of the dimension under small perturbations of a Schottky
representation.

Generators are perturbed as rep_eps(s_j) = expm(eps X_j) rep_0(s_j) with X_j in
the Lie algebra of O(1, n), given as X_j = J A_j for antisymmetric A_j. The
conjugation mode replaces this by rep_eps = h_eps rep_0 h_eps^-1 with
h_eps = expm(eps X_1), which must leave the dimension unchanged.
"""

import logging

import numpy as np
from django.conf import settings
from scipy.linalg import expm

from hyperbolic.geometry import LorentzIsometry, NotLorentz, minkowski_gram
from schottky.families import conjugate, with_diagnostics
from schottky.pingpong import ping_pong_check
from schottky.representation import SchottkyRep
from schottky.words import RankMismatch

from .pressure import LeftSchottkyRegime, hdim_pressure

logger = logging.getLogger(__name__)

K_LIMIT = 50.0
MODES = ("generators", "conjugation")


def boost_generator(n):
    """The antisymmetric A whose Lie algebra element J A generates boosts
    along the first spatial axis."""
    A = np.zeros((n + 1, n + 1))
    A[0, 1], A[1, 0] = 1.0, -1.0
    return A


def lie_algebra_elements(rep, directions=None):
    if directions is None:
        directions = [boost_generator(rep.n)] * rep.r
    if len(directions) != rep.r:
        raise RankMismatch(f"{len(directions)} directions for rank {rep.r}")
    J = minkowski_gram(rep.n)
    elements = []
    for A in directions:
        A = np.asarray(A, dtype=float)
        if A.shape != (rep.n + 1, rep.n + 1) or not np.allclose(A, -A.T, atol=1e-12):
            raise NotLorentz("perturbation directions must be antisymmetric matrices")
        elements.append(J @ A)
    return elements


def perturbed(rep0, eps, directions=None, mode="generators", k_limit=K_LIMIT):
    """rep_eps with diagnostics; LeftSchottkyRegime when the perturbed
    representation fails ping-pong or its QI constant exceeds k_limit."""
    if mode not in MODES:
        raise ValueError(f"unknown perturbation mode {mode!r}")
    if eps == 0:
        return rep0
    X = lie_algebra_elements(rep0, directions)
    if mode == "conjugation":
        return conjugate(rep0, LorentzIsometry(expm(eps * X[0])))

    gens = tuple(
        LorentzIsometry(expm(eps * Xj) @ g.M) for Xj, g in zip(X, rep0.gens)
    )
    rep = SchottkyRep(
        gens=gens, o=rep0.o, descriptor={**rep0.descriptor, "perturbation": eps}
    )
    ball_radius = rep0.diagnostics.ball_radius if rep0.diagnostics else None
    rep = with_diagnostics(rep, ball_radius=ball_radius)
    if rep.diagnostics.K > k_limit:
        raise LeftSchottkyRegime(
            f"eps={eps}: QI constant {rep.diagnostics.K} exceeds {k_limit}"
        )
    if rep0.disks is not None:
        passed, certificate = ping_pong_check(rep, rep0.disks)
        if not passed:
            raise LeftSchottkyRegime(
                f"eps={eps}: ping-pong fails with margin {certificate['worst_margin']}"
            )
        rep = rep.certified(rep0.disks, certificate)
    return rep


def continuity_point(
    rep0, eps, directions=None, mode="generators", max_depth=None, tol=None
):
    max_depth = settings.SCHOTTKYDIM_DEPTH if max_depth is None else max_depth
    tol = settings.SCHOTTKYDIM_TOL if tol is None else tol
    result = hdim_pressure(perturbed(rep0, eps, directions, mode), max_depth, tol)
    return {
        "eps": eps,
        "delta": result.delta,
        "lo": result.bracket[0],
        "hi": result.bracket[1],
        "depth_used": result.depth_used,
    }


def continuity_table(baseline, rows):
    """Adds |delta(eps) - delta(0)| to every row."""
    return [{**row, "deviation": abs(row["delta"] - baseline["delta"])} for row in rows]


def bowen_continuity_probe(
    rep0, eps_list, directions=None, mode="generators", max_depth=None, tol=None
):
    baseline = continuity_point(rep0, 0.0, directions, mode, max_depth, tol)
    rows = []
    for eps in eps_list:
        rows.append(continuity_point(rep0, eps, directions, mode, max_depth, tol))
        logger.info(f"eps={eps}: delta={rows[-1]['delta']}")
    return continuity_table(baseline, rows)
