"""Comparing lifted subtrees with the limit tree, and the McMullen sweep.

For a representation with joint displacement r the rescaled space (H^n, d / r)
carries the kernel (cosh d)^t with t = s / r, which is compared with the tree
kernel e^{s d_T}. Both kernels are realized and matched by an isometry; the
worst mismatch decides whether the lift of E_l passes at eps_l.
"""

import logging
import math
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np
from django.conf import settings

from dimension.pressure import hdim_pressure
from kernels.kernels import kernel_power, kernel_tree
from kernels.realize import gram_realize, match_isometry
from schottky.families import build_representation

from .lift import DegenerationError, TOutOfRange, build_lift, tree_point_distances

logger = logging.getLogger(__name__)

S_DEFAULT = 1.0
EPS0 = 0.5
L_MAX = 4
SUBDIVISION = 2
GAMMA_CAP = 1
BLOCK_ROWS = 256

LOG2 = math.log(2.0)
HEADLINE_TARGET = LOG2 / 2.0


@dataclass(frozen=True)
class AlignmentReport:
    theta: Optional[float]
    l: int
    s: float
    t: float
    kernel_gap: float
    alignment_error: float
    eps: float
    passes: bool
    points: int
    # realized dimensions, hyperbolic side then tree side
    dims: tuple
    ell_index: Optional[int] = None

    def as_dict(self):
        return asdict(self)


def epsilon(l, eps0=EPS0):
    return eps0 * 2.0**-l


def exponent(plan, s):
    t = s / plan.rep.diagnostics.r_joint
    if not 0.0 < t <= 1.0:
        raise TOutOfRange(
            f"t = s / r_joint = {t} for s={s}, r_joint={plan.rep.diagnostics.r_joint}"
        )
    return t


def kernel_gap(plan, s):
    """max |(cosh d_H)^t - e^{s d_T}| over pairs of Gamma_l . E_l."""
    t = exponent(plan, s)
    tree, lifted = plan.extended()
    gap = 0.0
    for start in range(0, len(tree), BLOCK_ROWS):
        rows = slice(start, start + BLOCK_ROWS)
        D = tree_point_distances(plan.tree, tree[rows], tree)
        C = lifted.cosh_block(rows)
        gap = max(gap, float(np.max(np.abs(C**t - np.exp(s * D)))))
    logger.debug(f"kernel gap {gap} over {len(tree)} points (l={plan.l}, s={s})")
    return gap


def align(plan, s=S_DEFAULT, eps=None, method="procrustes"):
    t = exponent(plan, s)
    gap = kernel_gap(plan, s)
    eps = epsilon(plan.l) if eps is None else eps
    if plan.size == 1:
        error, dims = 0.0, (0, 0)
    else:
        tree_side = gram_realize(kernel_tree(plan.tree_distances, s))
        hyperbolic_side = gram_realize(kernel_power(plan.cosh_distances(), t))
        _, error = match_isometry(
            hyperbolic_side.hpoints(), tree_side.hpoints(), method=method
        )
        dims = (hyperbolic_side.dim, tree_side.dim)
    return AlignmentReport(
        theta=plan.theta,
        l=plan.l,
        s=s,
        t=t,
        kernel_gap=gap,
        alignment_error=error,
        eps=eps,
        passes=error <= eps,
        points=plan.size,
        dims=dims,
    )


def ell_search(
    A,
    rep,
    l_max=L_MAX,
    eps0=EPS0,
    s=S_DEFAULT,
    subdivision=SUBDIVISION,
    gamma_cap=GAMMA_CAP,
    method="procrustes",
):
    """Largest l <= l_max such that every l' <= l aligns within eps_l'.

    Returns a row with theta, ell and the kernel gaps and alignment errors of
    every l tried."""
    if not eps0 > 0:
        raise DegenerationError(f"eps0 must be positive, got {eps0}")
    ell, reports = 0, []
    for l in range(1, l_max + 1):
        plan = build_lift(A, rep, l, subdivision, gamma_cap)
        report = align(plan, s, epsilon(l, eps0), method)
        reports.append(report)
        if not report.passes:
            break
        ell = l
    if reports:
        reports[-1] = replace(reports[-1], ell_index=ell)
    theta = rep.descriptor.get("theta")
    logger.info(f"theta={theta}: ell={ell}")
    return {
        "theta": theta,
        "ell": ell,
        "gaps": [report.kernel_gap for report in reports],
        "errors": [report.alignment_error for report in reports],
    }


def ell_schedule(members, A, l_max=L_MAX, eps0=EPS0, s=S_DEFAULT, **options):
    """ell(theta) for (theta, rep) pairs, in input order, with
    eps_l = eps0 2^-l."""
    return [ell_search(A, rep, l_max, eps0, s, **options) for _, rep in members]


def distance_table(plan):
    """Rescaled hyperbolic against tree distances of the lifted orbit
    vertices."""
    r = plan.rep.diagnostics.r_joint
    words = list(plan.orbit)
    index = [plan.orbit[w] for w in words]
    tree = plan.tree_distances[np.ix_(index, index)]
    cosh = plan.cosh_distances()[np.ix_(index, index)]
    rows = []
    for i in range(len(words)):
        for j in range(i + 1, len(words)):
            rescaled = float(np.arccosh(cosh[i, j])) / r
            rows.append(
                {
                    "u": str(words[i]),
                    "v": str(words[j]),
                    "tree": float(tree[i, j]),
                    "rescaled": rescaled,
                    "gap": abs(rescaled - float(tree[i, j])),
                }
            )
    return rows


def headline_row(member, max_depth=None, tol=None):
    """One sweep row for a member descriptor: {"family": "mcmullen", "theta": t}
    or a generic member carrying its own theta."""
    max_depth = settings.SCHOTTKYDIM_DEPTH if max_depth is None else max_depth
    tol = settings.SCHOTTKYDIM_TOL if tol is None else tol
    theta = float(member["theta"])
    rep = build_representation(member)
    r = rep.diagnostics.r_joint
    result = hdim_pressure(rep, max_depth, tol)
    delta = result.delta
    return {
        "theta": theta,
        "r_joint": r,
        "delta": delta,
        "lo": result.bracket[0],
        "hi": result.bracket[1],
        "depth_used": result.depth_used,
        "r_delta": r * delta,
        "deviation": abs(r * delta - 2.0 * LOG2),
        "two_log_delta": 2.0 * abs(math.log(theta)) * delta,
    }


def check_sweep(theta_list):
    thetas = [float(t) for t in theta_list]
    if not thetas:
        raise DegenerationError("the sweep needs at least one theta")
    if any(a <= b for a, b in zip(thetas, thetas[1:])):
        raise DegenerationError(f"theta_list must be strictly decreasing: {thetas}")
    return thetas


def headline_summary(rows):
    """Plot data x = 1/|log theta|, y = delta |log theta| and the intercept of
    y at x = 0 from the fit 1/y = a + b x, reported as 1/a."""
    if any(row["theta"] >= 1.0 for row in rows):
        raise DegenerationError("the extrapolation needs every theta below 1")
    logs = np.array([abs(math.log(row["theta"])) for row in rows])
    x = 1.0 / logs
    y = np.array([row["delta"] for row in rows]) * logs
    intercept = None
    if len(rows) >= 2 and np.all(y > 0):
        _, a = np.polyfit(x, 1.0 / y, 1)
        intercept = float(1.0 / a)
    deviations = [row["deviation"] for row in rows]
    return {
        "intercept": intercept,
        "target": HEADLINE_TARGET,
        "relative_error": (
            abs(intercept - HEADLINE_TARGET) / HEADLINE_TARGET
            if intercept is not None
            else None
        ),
        "deviation_decreasing": all(
            a > b for a, b in zip(deviations, deviations[1:])
        ),
        "plot": [{"x": float(a), "y": float(b)} for a, b in zip(x, y)],
    }


def headline_experiment(theta_list, max_depth=None, tol=None):
    rows = []
    for theta in check_sweep(theta_list):
        member = {"family": "mcmullen", "theta": theta}
        rows.append(headline_row(member, max_depth, tol))
        logger.info(f"theta={theta}: r*delta={rows[-1]['r_delta']}")
    return rows, headline_summary(rows)
