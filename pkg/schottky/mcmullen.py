"""The McMullen family.

Three circles in the Poincare disk, orthogonal to the unit circle, each
cutting out an arc of length theta centred at angles 0, 2pi/3, 4pi/3. With
sigma_i the reflection in circle i, rho_theta(s_1) = sigma_1 sigma_2 and
rho_theta(s_2) = sigma_1 sigma_3 generate a Schottky group.

On the hyperboloid, circle i is the plane B(x, n_i) = 0 with
n_i = (cot a, cos phi_i / sin a, sin phi_i / sin a) and a = theta / 2.

The representation carries the factorization into sigma_i, so orbit points are
built reflection by reflection and the sigma_1 sigma_1 at a junction such as
s_1^-1 s_2 cancels symbolically.
"""

import logging
import math

import numpy as np
from django.conf import settings

from hyperbolic.geometry import HPoint, origin, reflection

from .pingpong import Cap, SchottkyDisks, ping_pong_check
from .representation import Diagnostics, SchottkyRep, estimate_qi_constants
from .words import ThetaOutOfRange

logger = logging.getLogger(__name__)

THETA_MAX = 2.0 * math.pi / 3.0
CENTER_ANGLES = (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)


def _check_theta(theta):
    if not 0.0 < theta < THETA_MAX:
        raise ThetaOutOfRange(f"theta must be in (0, 2pi/3), got {theta}")


def mirror_normals(theta):
    _check_theta(theta)
    a = theta / 2.0
    return [
        np.array([math.cos(a), math.cos(phi), math.sin(phi)]) / math.sin(a)
        for phi in CENTER_ANGLES
    ]


def mcmullen_reflections(theta):
    return [reflection(n) for n in mirror_normals(theta)]


def joint_displacement_closed_form(theta):
    """r_theta = 2 asinh(1.5 cos a / sin^2 a), attained at x_star."""
    _check_theta(theta)
    a = theta / 2.0
    return 2.0 * math.asinh(1.5 * math.cos(a) / math.sin(a) ** 2)


def x_star(theta):
    """Where the mirror of sigma_1 crosses the real axis."""
    _check_theta(theta)
    a = theta / 2.0
    return HPoint([1.0 / math.sin(a), 1.0 / math.tan(a), 0.0])


def mcmullen_disks(theta):
    """D_1^- = disk of circle 2, D_1^+ = sigma_1(disk 2); likewise for s_2
    with circle 3. Every cap is enlarged by a quarter of the smallest gap
    between the exact caps."""
    sigma1, _, _ = mcmullen_reflections(theta)
    caps = [Cap.from_normal(n) for n in mirror_normals(theta)]
    exact = SchottkyDisks(
        ((caps[1], caps[1].image(sigma1)), (caps[2], caps[2].image(sigma1)))
    )
    return exact.enlarged(exact.min_gap() / 4.0)


def generator_disk_matrices(theta):
    """Matrices of rho_theta(s_1), rho_theta(s_2) acting on the disk.

    The inversion in circle i is z -> A_i . conj(z) with
    A_i = [[c_i, -1], [1, -conj(c_i)]], c_i = e^{i phi_i} / cos a, so
    sigma_1 sigma_j acts by A_1 conj(A_j)."""
    _check_theta(theta)
    a = theta / 2.0
    A = []
    for phi in CENTER_ANGLES:
        c = complex(math.cos(phi), math.sin(phi)) / math.cos(a)
        A.append(np.array([[c, -1.0], [1.0, -c.conjugate()]]))
    return [A[0] @ np.conj(A[1]), A[0] @ np.conj(A[2])]


def disk_matrix(theta, word):
    """Disk-model matrix of rho_theta(word), for trace cross-checks."""
    lifts = generator_disk_matrices(theta)
    result = np.eye(2, dtype=complex)
    for letter in word:
        g = lifts[abs(letter) - 1]
        result = result @ (g if letter > 0 else np.linalg.inv(g))
    return result


def mcmullen_family(theta, n_samples=64, ball_radius=None):
    """Rank-2 representation based at the disk centre, with QI diagnostics
    and certified ping-pong disks."""
    sigma1, sigma2, sigma3 = mcmullen_reflections(theta)
    rep = SchottkyRep(
        gens=(sigma1 @ sigma2, sigma1 @ sigma3),
        o=origin(2),
        reflections=(sigma1, sigma2, sigma3),
        factors=((0, 1), (0, 2)),
        descriptor={"family": "mcmullen", "theta": theta},
    )
    if ball_radius is None:
        ball_radius = settings.SCHOTTKYDIM_QI_BALL_RADIUS
    K, C = estimate_qi_constants(rep, ball_radius)
    rep = rep.with_diagnostics(
        Diagnostics(K, C, joint_displacement_closed_form(theta), ball_radius)
    )
    disks = mcmullen_disks(theta)
    _, certificate = ping_pong_check(rep, disks, n_samples)
    logger.debug(
        f"McMullen theta={theta}: ping-pong worst margin {certificate['worst_margin']}"
    )
    return rep.certified(disks, certificate)
