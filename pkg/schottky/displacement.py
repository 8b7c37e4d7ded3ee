import itertools
import logging
import math

import numpy as np
from scipy import optimize

from hyperbolic.geometry import HPoint, boost_to, dist, dist_many

from .words import Diverged

logger = logging.getLogger(__name__)

MAX_DRIFT = 50.0
MAX_ROUNDS = 200


def _search_directions(n):
    eye = np.eye(n)
    directions = [eye[k] for k in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        directions.append((eye[i] + eye[j]) / math.sqrt(2.0))
        directions.append((eye[i] - eye[j]) / math.sqrt(2.0))
    return directions


def _exp(x, frame, u):
    # exponential map at x, tangent vectors in the coordinates of frame
    norm = float(np.linalg.norm(u))
    if norm == 0.0:
        return x.v
    w = frame @ (u / norm)
    v = math.cosh(norm) * x.v + math.sinh(norm) * w
    return HPoint(v, check=False).v


class _Displacement:
    def __init__(self, rep):
        self.matrices = [g.M for g in rep.gens]

    def each(self, v):
        images = np.array([M @ v for M in self.matrices])
        return dist_many(np.broadcast_to(v, images.shape), images)

    def __call__(self, v):
        return float(np.max(self.each(v)))


def _line_search(h, step):
    """Golden-section search when [-step, step] brackets a minimum of h,
    otherwise the better endpoint if it improves on h(0)."""
    f0, fm, fp = h(0.0), h(-step), h(step)
    if f0 < fm and f0 < fp:
        result = optimize.minimize_scalar(
            h, bracket=(-step, 0.0, step), method="golden"
        )
        return float(result.x), float(result.fun)
    t, ft = (step, fp) if fp < fm else (-step, fm)
    if ft < f0:
        return t, ft
    return 0.0, f0


def _coordinate_search(f, x, tol, start, step=1.0):
    value = f(x.v)
    directions = _search_directions(x.n)
    for round_ in range(MAX_ROUNDS):
        before = value
        moved_far = False
        for direction in directions:
            frame = boost_to(x).M[:, 1:]
            t, ft = _line_search(lambda s: f(_exp(x, frame, s * direction)), step)
            if ft < value:
                x = HPoint(_exp(x, frame, t * direction), check=False)
                value = ft
                moved_far = moved_far or abs(t) == step
            if dist(x, start) > MAX_DRIFT:
                raise Diverged(
                    f"displacement search left the ball of radius {MAX_DRIFT} "
                    f"(value {value})"
                )
        if moved_far:
            step *= 2.0
            continue
        if before - value < tol:
            logger.debug(f"coordinate search settled after {round_ + 1} rounds")
            break
        step = max(step / 2.0, 1e-3)
    else:
        logger.warning(f"coordinate search stopped after {MAX_ROUNDS} rounds")
    return x, value


def _epigraph_polish(displacement, x, value, tol):
    """min t subject to t >= d(y, g_j y), y = exp_x(u), solved by SLSQP."""
    frame = boost_to(x).M[:, 1:]
    n = x.n

    def objective(z):
        return z[-1]

    def constraints(z):
        return z[-1] - displacement.each(_exp(x, frame, z[:-1]))

    result = optimize.minimize(
        objective,
        np.concatenate((np.zeros(n), [value])),
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": constraints}],
        options={"ftol": tol * tol, "maxiter": 500},
    )
    y = HPoint(_exp(x, frame, result.x[:-1]), check=False)
    return y, displacement(y.v)


def joint_displacement(rep, tol=1e-8, start=None):
    """r = inf_x max_j d(x, rep(s_j) x) and a minimizer x_star.

    Inverses need no separate terms: d(x, g^-1 x) = d(g x, x)."""
    displacement = _Displacement(rep)
    start = rep.o if start is None else start
    x, value = _coordinate_search(displacement, start, tol, start)
    try:
        y, polished = _epigraph_polish(displacement, x, value, tol)
    except (ValueError, FloatingPointError) as e:
        logger.warning(f"epigraph polish failed with error: {e}")
    else:
        if polished < value:
            x, value = y, polished
    if dist(x, start) > MAX_DRIFT:
        raise Diverged(f"minimizer drifted beyond {MAX_DRIFT} from the start")
    logger.debug(f"joint displacement {value} at {x.v.tolist()}")
    return value, x
