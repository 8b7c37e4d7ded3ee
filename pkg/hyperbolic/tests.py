import math

import numpy as np
from django.test import SimpleTestCase

from .geometry import (
    BoundaryPoint,
    CoincidentBoundaryPoints,
    DegenerateEndpoints,
    HPoint,
    InvalidPoint,
    LorentzIsometry,
    MinkowskiForm,
    NotHyperbolic,
    NotLorentz,
    apply,
    axis_endpoints,
    boost,
    boost_to,
    busemann,
    busemann_ray_limit,
    compose,
    cosh_dist_matrix,
    disk_to_hyperboloid,
    dist,
    form,
    geodesic_length_quadrature,
    geodesic_point,
    geodesic_ray,
    gromov_product,
    gromov_product_ray_limit,
    hyperboloid_to_disk,
    inverse,
    midpoint,
    origin,
    random_boundary_point,
    random_isometry,
    random_point,
    reflection,
    shadow_diameter,
    visual_dist,
)


class TestPoints(SimpleTestCase):
    def test_hpoint_renormalizes_spatial_part(self):
        p = HPoint([math.cosh(1.0) + 1e-13, math.sinh(1.0), 0.0])
        self.assertAlmostEqual(form(p, p), 1.0, delta=1e-12)

    def test_hpoint_rejects_off_sheet_vector(self):
        with self.assertRaises(InvalidPoint):
            HPoint([2.0, 0.0, 0.0])
        with self.assertRaises(InvalidPoint):
            HPoint([-1.0, 0.0, 0.0])

    def test_boundary_point_canonical_normalization(self):
        xi = BoundaryPoint([3.0, 0.0, 3.0])
        np.testing.assert_allclose(xi.v, [1.0, 0.0, 1.0])

    def test_boundary_point_rejects_timelike(self):
        with self.assertRaises(InvalidPoint):
            BoundaryPoint([2.0, 1.0, 0.0])

    def test_minkowski_form_signature(self):
        B = MinkowskiForm(3)
        self.assertEqual(B([1, 2, 3, 4], [5, 6, 7, 8]), 5 - 12 - 21 - 32)
        np.testing.assert_array_equal(B.gram(), np.diag([1, -1, -1, -1]))

    def test_disk_round_trip(self):
        for z in [0, 0.3, 0.5j - 0.2, -0.9 + 0.1j]:
            p = disk_to_hyperboloid(z)
            self.assertAlmostEqual(hyperboloid_to_disk(p), z, delta=1e-14)


class TestDistance(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(20240601)

    def test_dist_identity(self):
        o = origin(4)
        self.assertEqual(dist(o, o), 0.0)

    def test_dist_along_axis(self):
        p = HPoint([math.cosh(1.0), math.sinh(1.0), 0.0])
        self.assertAlmostEqual(dist(p, origin(2)), 1.0, delta=1e-14)

    def test_dist_small_separation_is_accurate(self):
        p = HPoint([math.cosh(1e-9), math.sinh(1e-9), 0.0])
        self.assertAlmostEqual(dist(p, origin(2)), 1e-9, delta=1e-20)

    def test_dist_matches_quadrature(self):
        for _ in range(20):
            n = int(self.rng.integers(2, 6))
            x, y = random_point(self.rng, n), random_point(self.rng, n)
            self.assertAlmostEqual(
                dist(x, y), geodesic_length_quadrature(x, y), delta=1e-9
            )

    def test_cosh_dist_matrix(self):
        pts = [random_point(self.rng, 3) for _ in range(5)]
        G = cosh_dist_matrix(pts)
        self.assertAlmostEqual(math.acosh(G[1, 3]), dist(pts[1], pts[3]), delta=1e-9)
        np.testing.assert_array_equal(np.diag(G), np.ones(5))


class TestGeodesics(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(7)

    def test_geodesic_endpoints_and_midpoint(self):
        x, y = random_point(self.rng, 3), random_point(self.rng, 3)
        d = dist(x, y)
        np.testing.assert_allclose(geodesic_point(x, y, 0.0).v, x.v, atol=1e-12)
        np.testing.assert_allclose(geodesic_point(x, y, d).v, y.v, atol=1e-9)
        np.testing.assert_allclose(
            geodesic_point(x, y, d / 2).v, midpoint(x, y).v, atol=1e-10
        )

    def test_geodesic_point_rejects_coincident_endpoints(self):
        x = random_point(self.rng, 2)
        with self.assertRaises(DegenerateEndpoints):
            geodesic_point(x, x, 0.0)

    def test_ray_is_unit_speed(self):
        o = origin(3)
        xi = random_boundary_point(self.rng, 3)
        self.assertAlmostEqual(dist(o, geodesic_ray(o, xi, 3.5)), 3.5, delta=1e-12)

    def test_ray_converges_projectively(self):
        o = origin(3)
        xi = random_boundary_point(self.rng, 3)
        p = geodesic_ray(o, xi, 30.0)
        np.testing.assert_allclose(p.v / p.v[0], xi.v, atol=1e-12)


class TestGromovAndBusemann(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(11)

    def test_interior_gromov_product_degenerate_cases(self):
        x, z = random_point(self.rng, 3), random_point(self.rng, 3)
        self.assertAlmostEqual(gromov_product(x, z, z), 0.0, delta=1e-12)
        self.assertAlmostEqual(gromov_product(x, x, z), dist(x, z), delta=1e-12)

    def test_interior_gromov_product_symmetric_and_nonnegative(self):
        for _ in range(200):
            x, y, z = (random_point(self.rng, 4) for _ in range(3))
            g = gromov_product(x, y, z)
            self.assertGreaterEqual(g, 0.0)
            self.assertAlmostEqual(g, gromov_product(y, x, z), delta=1e-12)

    def test_boundary_gromov_product_matches_ray_limit(self):
        for _ in range(50):
            n = int(self.rng.integers(2, 5))
            xi = random_boundary_point(self.rng, n)
            zeta = random_boundary_point(self.rng, n)
            z = random_point(self.rng, n, scale=1.0)
            self.assertAlmostEqual(
                gromov_product(xi, zeta, z),
                gromov_product_ray_limit(xi, zeta, z),
                delta=1e-6,
            )

    def test_mixed_gromov_product_matches_ray_limit(self):
        xi = random_boundary_point(self.rng, 3)
        y, z = random_point(self.rng, 3), random_point(self.rng, 3)
        self.assertAlmostEqual(
            gromov_product(xi, y, z), gromov_product_ray_limit(xi, y, z), delta=1e-6
        )

    def test_coincident_boundary_points(self):
        xi = random_boundary_point(self.rng, 2)
        with self.assertRaises(CoincidentBoundaryPoints):
            gromov_product(xi, xi, origin(2))

    def test_busemann_trivial_cases(self):
        o = origin(3)
        xi = random_boundary_point(self.rng, 3)
        x = random_point(self.rng, 3)
        self.assertEqual(busemann(x, x, xi), 0.0)
        self.assertAlmostEqual(busemann(geodesic_ray(o, xi, 2.5), o, xi), -2.5, 12)

    def test_busemann_matches_ray_limit(self):
        for _ in range(50):
            x, y = random_point(self.rng, 3), random_point(self.rng, 3)
            xi = random_boundary_point(self.rng, 3)
            self.assertAlmostEqual(
                busemann(x, y, xi), busemann_ray_limit(x, y, xi), delta=1e-6
            )

    def test_busemann_cocycle_invariance_and_lipschitz(self):
        for _ in range(300):
            x, y, z = (random_point(self.rng, 3) for _ in range(3))
            xi = random_boundary_point(self.rng, 3)
            g = random_isometry(self.rng, 3)
            b = busemann(x, y, xi)
            self.assertAlmostEqual(
                b, busemann(x, z, xi) + busemann(z, y, xi), delta=1e-9
            )
            self.assertAlmostEqual(b, -busemann(y, x, xi), delta=1e-12)
            self.assertAlmostEqual(
                b, busemann(apply(g, x), apply(g, y), apply(g, xi)), delta=1e-9
            )
            self.assertLessEqual(abs(b), dist(x, y) + 1e-12)


class TestVisualMetric(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(3)

    def test_visual_dist_trivial_cases(self):
        o = origin(2)
        xi = BoundaryPoint([1.0, 1.0, 0.0])
        self.assertEqual(visual_dist(xi, xi, o), 0.0)
        antipode = BoundaryPoint([1.0, -1.0, 0.0])
        self.assertAlmostEqual(gromov_product(xi, antipode, o), 0.0, delta=1e-15)
        self.assertAlmostEqual(visual_dist(xi, antipode, o), 1.0, delta=1e-15)

    def test_visual_dist_matches_ray_limit(self):
        for _ in range(20):
            xi = random_boundary_point(self.rng, 3)
            zeta = random_boundary_point(self.rng, 3)
            o = random_point(self.rng, 3, scale=1.0)
            self.assertAlmostEqual(
                visual_dist(xi, zeta, o),
                math.exp(-gromov_product_ray_limit(xi, zeta, o)),
                delta=1e-6,
            )

    def test_strong_triangle_inequality(self):
        for _ in range(500):
            n = int(self.rng.integers(2, 6))
            w = random_point(self.rng, n)
            x, y, z = (random_point(self.rng, n, scale=3.0) for _ in range(3))
            lhs = math.exp(-gromov_product(x, z, w))
            rhs = math.exp(-gromov_product(x, y, w)) + math.exp(
                -gromov_product(y, z, w)
            )
            self.assertLessEqual(lhs, rhs + 1e-12)

    def test_change_of_origin_is_bounded(self):
        for _ in range(100):
            o, o2 = random_point(self.rng, 3), random_point(self.rng, 3)
            xi = random_boundary_point(self.rng, 3)
            zeta = random_boundary_point(self.rng, 3)
            ratio = visual_dist(xi, zeta, o2) / visual_dist(xi, zeta, o)
            bound = math.exp(dist(o, o2))
            self.assertLessEqual(ratio, bound * (1 + 1e-12))
            self.assertGreaterEqual(ratio, (1 - 1e-12) / bound)


class TestShadows(SimpleTestCase):
    def test_shadow_of_ball_around_origin_is_everything(self):
        o = origin(2)
        self.assertEqual(shadow_diameter(o, 0.5, o, 16), 1.0)

    def test_shadow_matches_planar_closed_form(self):
        o = origin(2)
        z = HPoint([math.cosh(5.0), math.sinh(5.0), 0.0])
        expected = math.sinh(0.5) / math.sinh(5.0)
        self.assertAlmostEqual(
            shadow_diameter(z, 0.5, o, 32), expected, delta=0.05 * expected
        )

    def test_shadow_diameter_decays_with_distance(self):
        o = origin(3)
        ratios = []
        for d in [2.0, 4.0, 6.0, 8.0]:
            z = HPoint([math.cosh(d), 0.0, math.sinh(d), 0.0])
            ratios.append(shadow_diameter(z, 1.0, o, 16) / math.exp(-d))
        self.assertLess(max(ratios), 2.0 * math.sinh(1.0) + 0.1)


class TestIsometries(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(5)

    def test_identity_fixes_points(self):
        x = random_point(self.rng, 3)
        np.testing.assert_allclose(apply(LorentzIsometry.identity(3), x).v, x.v)

    def test_boost_length(self):
        g = boost([0.0, 1.0, 1.0], 2.25)
        self.assertAlmostEqual(dist(origin(3), apply(g, origin(3))), 2.25, delta=1e-12)

    def test_boost_to_takes_origin_to_target(self):
        p = random_point(self.rng, 4)
        np.testing.assert_allclose(apply(boost_to(p), origin(4)).v, p.v, atol=1e-12)

    def test_rejects_non_lorentz_matrix(self):
        with self.assertRaises(NotLorentz):
            LorentzIsometry(np.diag([1.0, 2.0, 1.0]))
        with self.assertRaises(NotLorentz):
            LorentzIsometry(-np.eye(3))

    def test_random_isometries_preserve_distance(self):
        for _ in range(200):
            g = random_isometry(self.rng, 3)
            LorentzIsometry(g.M)
            x, y = random_point(self.rng, 3), random_point(self.rng, 3)
            self.assertAlmostEqual(
                dist(apply(g, x), apply(g, y)), dist(x, y), delta=1e-10
            )
            back = apply(compose(inverse(g), g), x)
            np.testing.assert_allclose(back.v, x.v, atol=1e-10)

    def test_boundary_images_are_normalized(self):
        g = random_isometry(self.rng, 3)
        image = apply(g, random_boundary_point(self.rng, 3))
        self.assertEqual(image.v[0], 1.0)
        self.assertAlmostEqual(np.linalg.norm(image.v[1:]), 1.0, delta=1e-14)

    def test_reflection_is_an_involution(self):
        s = reflection([0.3, 1.0, 0.2])
        np.testing.assert_allclose((s @ s).M, np.eye(3), atol=1e-12)
        self.assertAlmostEqual(np.linalg.det(s.M), -1.0, delta=1e-12)


class TestAxes(SimpleTestCase):
    def setUp(self):
        self.rng = np.random.default_rng(13)

    def test_boost_translation_length(self):
        _, _, length = axis_endpoints(boost([1.0, 0.0], 1.7))
        self.assertAlmostEqual(length, 1.7, delta=1e-12)

    def test_inverse_swaps_fixed_points(self):
        h = random_isometry(self.rng, 3)
        g = compose(h, compose(boost([1, 0, 0], 2.0), inverse(h)))
        plus, minus, _ = axis_endpoints(g)
        inv_plus, inv_minus, _ = axis_endpoints(inverse(g))
        np.testing.assert_allclose(plus.v, inv_minus.v, atol=1e-8)
        np.testing.assert_allclose(minus.v, inv_plus.v, atol=1e-8)
        np.testing.assert_allclose(apply(g, plus).v, plus.v, atol=1e-8)

    def test_displacement_is_minimal_on_axis(self):
        h = random_isometry(self.rng, 2)
        g = compose(h, compose(boost([1, 0], 1.3), inverse(h)))
        plus, minus, length = axis_endpoints(g)
        on_axis = apply(h, origin(2))
        self.assertAlmostEqual(dist(on_axis, apply(g, on_axis)), length, delta=1e-9)
        off_axis = random_point(self.rng, 2)
        self.assertGreater(dist(off_axis, apply(g, off_axis)), length - 1e-12)

    def test_rotation_is_not_hyperbolic(self):
        c, s = math.cos(0.4), math.sin(0.4)
        with self.assertRaises(NotHyperbolic):
            axis_endpoints(LorentzIsometry([[1, 0, 0], [0, c, -s], [0, s, c]]))

    def test_sl2_trace_cross_check(self):
        # z -> e^l z on the upper half-plane is a translation of length l
        length = 0.8
        lift = np.diag([math.exp(length / 2), math.exp(-length / 2)])
        axis_endpoints(boost([1.0, 0.0], length), sl2_lift=lift)
