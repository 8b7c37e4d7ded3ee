import math

import numpy as np
from django.test import SimpleTestCase

from hyperbolic.geometry import (
    HPoint,
    apply,
    cosh_dist_matrix,
    dist_matrix,
    isometry_defect,
    origin,
    random_isometry,
    random_point,
)

from .kernels import (
    BadT,
    KernelMatrix,
    KernelRankMismatch,
    NotHyperbolicType,
    NotTreeMetric,
    hyperbolic_type_violation,
    kernel_power,
    kernel_tree,
)
from .realize import (
    gram_realize,
    match_isometry,
    qi_bounds_check,
    realization_distances,
)


def configuration(rng, m, n=3):
    return [random_point(rng, n) for _ in range(m)]


def star(leg, leaves=3):
    D = np.full((leaves + 1, leaves + 1), 2.0 * leg)
    D[0, :] = D[:, 0] = leg
    np.fill_diagonal(D, 0.0)
    return D


class TestKernels(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(29)

    def test_power_endpoints(self):
        D = cosh_dist_matrix(configuration(self.rng, 5))
        np.testing.assert_allclose(kernel_power(D, 1.0).K, D)
        np.testing.assert_allclose(kernel_power(D, 1e-12).K, np.ones_like(D), atol=1e-9)
        for t in (0.0, -0.5, 1.5):
            with self.assertRaises(BadT):
                kernel_power(D, t)

    def test_powers_are_realizable(self):
        for _ in range(30):
            points = configuration(self.rng, int(self.rng.integers(2, 9)))
            for t in (0.25, 0.5, 0.9):
                K = kernel_power(cosh_dist_matrix(points), t)
                R = gram_realize(K)
                self.assertLessEqual(R.residual, 1e-9)

    def test_hyperbolic_type_inequality(self):
        for _ in range(200):
            points = configuration(self.rng, int(self.rng.integers(2, 8)))
            t = float(self.rng.uniform(0.05, 1.0))
            K = kernel_power(cosh_dist_matrix(points), t)
            c = self.rng.normal(size=K.size)
            a = np.abs(c)
            scale = float(a @ K.K @ a + (a @ K.K[0]) ** 2)
            self.assertLessEqual(hyperbolic_type_violation(K, c), 1e-9 * scale)

    def test_tree_kernels(self):
        K = kernel_tree(np.zeros((3, 3)), 2.0)
        np.testing.assert_allclose(K.K, np.ones((3, 3)))
        K = kernel_tree(star(1.0), 0.5)
        self.assertEqual(K.source, "exp")
        self.assertAlmostEqual(K.K[1, 2], math.exp(1.0))
        square = np.array(
            [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]], dtype=float
        )
        with self.assertRaises(NotTreeMetric):
            kernel_tree(square, 1.0)
        with self.assertRaises(BadT):
            kernel_tree(star(1.0), 0.0)

    def test_invalid_kernels(self):
        with self.assertRaises(NotHyperbolicType):
            KernelMatrix([[1.0, 0.5], [0.5, 1.0]])
        with self.assertRaises(NotHyperbolicType):
            KernelMatrix([[1.0, 2.0], [3.0, 1.0]])
        with self.assertRaises(KernelRankMismatch):
            KernelMatrix(np.ones((2, 3)))
        with self.assertRaises(KernelRankMismatch):
            hyperbolic_type_violation(np.ones((2, 2)), [1.0, 2.0, 3.0])


class TestRealize(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(31)

    def test_two_points(self):
        c = math.cosh(1.0)
        R = gram_realize(KernelMatrix([[1.0, c], [c, 1.0]]))
        self.assertLessEqual(R.residual, 1e-14)
        self.assertAlmostEqual(realization_distances(R)[0, 1], 1.0, delta=1e-12)
        np.testing.assert_array_equal(R.points[0], [1.0, 0.0])

    def test_round_trip(self):
        for _ in range(50):
            n = int(self.rng.integers(1, 6))
            m = int(self.rng.integers(2, 11))
            points = configuration(self.rng, m, n)
            R = gram_realize(cosh_dist_matrix(points))
            self.assertLessEqual(R.residual, 1e-10)
            self.assertEqual(R.dim, min(n, m - 1))
            np.testing.assert_allclose(
                realization_distances(R), dist_matrix(points), atol=1e-9
            )

    def test_collapse_as_t_vanishes(self):
        D = cosh_dist_matrix(configuration(self.rng, 6))
        R = gram_realize(kernel_power(D, 1e-10))
        self.assertLess(np.max(realization_distances(R)), 1e-3)

    def test_triangle_inequality_failure(self):
        c = math.cosh(1.0)
        far = math.cosh(5.0)
        K = [[1.0, c, c], [c, 1.0, far], [c, far, 1.0]]
        with self.assertRaises(NotHyperbolicType):
            gram_realize(K)


class TestMatchIsometry(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(37)

    def test_recovers_lorentz_maps(self):
        for method in ("gram_schmidt", "procrustes"):
            for _ in range(20):
                U = configuration(self.rng, 6)
                L = random_isometry(self.rng, 3)
                V = [apply(L, u) for u in U]
                F, worst = match_isometry(U, V, method=method)
                self.assertLessEqual(worst, 1e-8)
                np.testing.assert_allclose(F.M @ U[0].v, V[0].v, atol=1e-9)
                self.assertLess(isometry_defect(F.M), 1e-8 * np.max(np.abs(F.M)) ** 2)

    def test_identity_on_equal_configurations(self):
        U = configuration(self.rng, 5)
        F, worst = match_isometry(U, U)
        np.testing.assert_allclose(F.M, np.eye(4), atol=1e-10)
        self.assertLessEqual(worst, 1e-12)

    def test_error_shrinks_with_perturbation(self):
        U = configuration(self.rng, 5)
        L = random_isometry(self.rng, 3)
        noise = self.rng.normal(size=(5, 3))
        for method in ("gram_schmidt", "procrustes"):
            errors = []
            for eta in (1e-2, 1e-4, 1e-6):
                moved = [
                    HPoint(np.concatenate(([0.0], u.v[1:] + eta * e)), check=False)
                    for u, e in zip(U, noise)
                ]
                V = [apply(L, u) for u in moved]
                errors.append(match_isometry(U, V, method=method)[1])
            self.assertEqual(errors, sorted(errors, reverse=True))
            self.assertLess(errors[-1], 1e-4)

    def test_pads_lower_dimensional_configurations(self):
        U = configuration(self.rng, 4, n=2)
        padded = [HPoint(np.concatenate((u.v, [0.0]))) for u in U]
        L = random_isometry(self.rng, 3)
        V = [apply(L, u) for u in padded]
        F, worst = match_isometry(U, V)
        self.assertEqual(F.n, 3)
        self.assertLessEqual(worst, 1e-8)

    def test_mismatches(self):
        U = configuration(self.rng, 4)
        with self.assertRaises(KernelRankMismatch):
            match_isometry(U, U[:3])
        line = [
            HPoint([math.cosh(x), math.sinh(x), 0.0, 0.0]) for x in (0.0, 1.0, 2.0, 3.0)
        ]
        with self.assertRaises(KernelRankMismatch):
            match_isometry(line, U)
        F, worst = match_isometry(line, U, method="procrustes")
        self.assertTrue(math.isfinite(worst))
        np.testing.assert_allclose(F.M @ line[0].v, U[0].v, atol=1e-9)


class TestQIBounds(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(41)

    def test_unit_power_is_isometric(self):
        points = configuration(self.rng, 6)
        R = gram_realize(kernel_power(cosh_dist_matrix(points), 1.0))
        report = qi_bounds_check(dist_matrix(points), R, "power", 1.0)
        self.assertEqual(report["violations"], [])
        self.assertGreaterEqual(report["worst_slack"], -1e-9)
        self.assertLessEqual(report["worst_slack"], 1e-9)

    def test_power_bounds(self):
        for _ in range(20):
            points = configuration(self.rng, 8)
            R = gram_realize(kernel_power(cosh_dist_matrix(points), 0.3))
            report = qi_bounds_check(dist_matrix(points), R, "power", 0.3)
            self.assertEqual(report["violations"], [])
            self.assertEqual(report["pairs"], 28)

    def test_tree_star_bounds(self):
        for leg, s in ((1.0, 1.0), (0.1, 2.0)):
            D = star(leg)
            R = gram_realize(kernel_tree(D, s))
            report = qi_bounds_check(D, R, "exp", s)
            self.assertEqual(report["violations"], [])

    def test_short_tree_distances_grow_like_a_square_root(self):
        D = star(0.1)
        image = realization_distances(gram_realize(kernel_tree(D, 2.0)))
        off = ~np.eye(4, dtype=bool)
        self.assertTrue(np.all(image[off] >= np.sqrt(4.0 * D[off]) - 1e-9))
        self.assertTrue(np.all(image[off] <= np.sqrt(4.0 * D[off] / math.log(2.0))))

    def test_unknown_mode(self):
        far = HPoint([math.cosh(1.0), 0.0, math.sinh(1.0)])
        R = gram_realize(cosh_dist_matrix([origin(2), far]))
        with self.assertRaises(KernelRankMismatch):
            qi_bounds_check(np.zeros((2, 2)), R, "linear", 1.0)
