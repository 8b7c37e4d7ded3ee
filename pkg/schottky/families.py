"""Building representations from JSON descriptors.

Descriptors are either

    {"rank": r, "generators": [matrix, ...], "base_point": vector, "disks": [...]}

with optional rank, base point and disks, or {"family": "mcmullen", "theta": t}.
Disks are given per generator as {"minus": cap, "plus": cap} with
cap = {"center": boundary vector, "radius": visual radius at the origin}.
Sweeps over user-supplied families use
{"family": "generic", "members": [{"theta": t, "generators": ..., ...}, ...]}.
"""

import logging
from dataclasses import replace

import numpy as np
from django.conf import settings

from hyperbolic.geometry import (
    BoundaryPoint,
    HPoint,
    LorentzIsometry,
    apply,
    compose,
    inverse,
    origin,
)

from .displacement import joint_displacement
from .mcmullen import mcmullen_family
from .pingpong import Cap, SchottkyDisks, assert_disks_in_sphere, ping_pong_check
from .representation import Diagnostics, SchottkyRep, estimate_qi_constants
from .words import RankMismatch, SchottkyError

logger = logging.getLogger(__name__)


def _cap(data):
    return Cap(BoundaryPoint(data["center"]), float(data["radius"]))


def disks_from_descriptor(pairs):
    return SchottkyDisks(tuple((_cap(p["minus"]), _cap(p["plus"])) for p in pairs))


def with_diagnostics(rep, r_joint=None, ball_radius=None):
    if ball_radius is None:
        ball_radius = settings.SCHOTTKYDIM_QI_BALL_RADIUS
    if r_joint is None:
        r_joint, _ = joint_displacement(rep)
    K, C = estimate_qi_constants(rep, ball_radius)
    return rep.with_diagnostics(Diagnostics(K, C, r_joint, ball_radius))


def _generic(descriptor, ball_radius=None):
    gens = tuple(
        LorentzIsometry(np.asarray(m, dtype=float)) for m in descriptor["generators"]
    )
    rank = descriptor.get("rank")
    if rank is not None and rank != len(gens):
        raise RankMismatch(f"rank {rank} given with {len(gens)} generators")
    rep = SchottkyRep(gens=gens, o=origin(gens[0].n), descriptor=dict(descriptor))
    r_joint, x_star = joint_displacement(rep)
    base_point = descriptor.get("base_point")
    o = x_star if base_point is None else HPoint(base_point)
    rep = with_diagnostics(rep.with_base_point(o), r_joint, ball_radius)
    if descriptor.get("disks"):
        disks = disks_from_descriptor(descriptor["disks"])
        assert_disks_in_sphere(disks, rep.n)
        _, certificate = ping_pong_check(rep, disks)
        rep = rep.certified(disks, certificate)
    return rep


def build_representation(descriptor, ball_radius=None):
    family = descriptor.get("family")
    if family == "mcmullen":
        return mcmullen_family(float(descriptor["theta"]), ball_radius=ball_radius)
    if family is None:
        return _generic(descriptor, ball_radius)
    raise SchottkyError(f"descriptor of family {family!r} describes several members")


def family_members(descriptor, thetas=(), ball_radius=None):
    """(theta, representation) pairs of a family, in input order."""
    family = descriptor.get("family")
    if family == "mcmullen":
        return [(t, mcmullen_family(t, ball_radius=ball_radius)) for t in thetas]
    if family == "generic":
        return [
            (float(member["theta"]), _generic(member, ball_radius))
            for member in descriptor["members"]
        ]
    raise SchottkyError(f"unknown family {family!r}")


def conjugate(rep, h):
    """h rep h^-1, based at h . o. Diagnostics are isometry invariants and
    carry over; disks move with h."""
    h_inv = inverse(h)
    gens = tuple(compose(compose(h, g), h_inv) for g in rep.gens)
    reflections = tuple(compose(compose(h, s), h_inv) for s in rep.reflections)
    disks = rep.disks.image(h) if rep.disks is not None else None
    return replace(
        rep,
        gens=gens,
        reflections=reflections,
        o=apply(h, rep.o),
        disks=disks,
        descriptor={**rep.descriptor, "conjugated": True},
    )


def divergence_table(members):
    """r_theta along a sweep of (theta, rep) pairs.

    Returns (rows, diverging) where `diverging` says that r_theta increases
    as theta decreases."""
    rows = [
        {"theta": theta, "r_joint": rep.diagnostics.r_joint} for theta, rep in members
    ]
    return rows, is_diverging(rows)


def is_diverging(rows):
    """r_joint increases as theta decreases, over rows with both keys."""
    by_theta = sorted(rows, key=lambda row: row["theta"], reverse=True)
    diverging = all(
        a["r_joint"] < b["r_joint"] for a, b in zip(by_theta, by_theta[1:])
    )
    if not diverging:
        logger.warning("joint displacement does not increase along the sweep")
    return diverging
