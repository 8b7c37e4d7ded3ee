import math

import numpy as np
from django.test import SimpleTestCase

from hyperbolic.geometry import (
    HPoint,
    apply,
    axis_endpoints,
    boost,
    dist,
    form,
    origin,
    random_isometry,
    random_point,
    translation_length,
    visual_dist,
)

from .displacement import joint_displacement
from .families import build_representation, conjugate, divergence_table, family_members
from .mcmullen import (
    disk_matrix,
    joint_displacement_closed_form,
    mcmullen_disks,
    mcmullen_family,
    mcmullen_reflections,
    mirror_normals,
    x_star,
)
from .pingpong import Cap, SchottkyDisks, ping_pong_check
from .representation import (
    SchottkyRep,
    estimate_qi_constants,
    limit_point,
    limit_point_exact,
    orbit_distance_levels,
    orbit_levels,
    orbit_point,
    qi_violations,
)
from .words import (
    DisjointnessViolated,
    InfiniteWord,
    InvalidWord,
    NotSchottky,
    RankMismatch,
    ReducedWord,
    ThetaOutOfRange,
    common_prefix_length,
    cylinder_contains,
    enumerate_reduced,
    level_codes,
    symbolic_dist,
    word_count,
    word_rank,
)


def random_word(rng, r, n):
    letters = []
    while len(letters) < n:
        x = int(rng.integers(1, r + 1)) * int(rng.choice([-1, 1]))
        if not letters or letters[-1] != -x:
            letters.append(x)
    return ReducedWord(letters)


class TestWords(SimpleTestCase):
    def test_counts(self):
        self.assertEqual(len(list(enumerate_reduced(2, 1))), 4)
        self.assertEqual(len(list(enumerate_reduced(2, 3))), 36)
        self.assertEqual(len(list(enumerate_reduced(3, 5))), 3750)
        self.assertEqual(word_count(3, 5), 3750)
        self.assertEqual(list(enumerate_reduced(2, 0)), [ReducedWord()])

    def test_enumeration_is_reduced_and_lexicographic(self):
        codes = level_codes(2, 5)
        rows = [tuple(row) for row in codes]
        self.assertEqual(rows, sorted(rows))
        self.assertEqual(len(set(rows)), len(rows))
        for word in enumerate_reduced(2, 5):
            self.assertTrue(all(a != -b for a, b in zip(word, word[1:])))

    def test_word_rank_is_position(self):
        codes = level_codes(3, 4)
        np.testing.assert_array_equal(word_rank(codes, 3), np.arange(len(codes)))

    def test_rejects_unreduced_and_foreign_letters(self):
        with self.assertRaises(InvalidWord):
            ReducedWord((1, -1))
        with self.assertRaises(InvalidWord):
            ReducedWord((3,), rank=2)
        with self.assertRaises(InvalidWord):
            ReducedWord((0,))
        with self.assertRaises(InvalidWord):
            list(enumerate_reduced(2, -1))

    def test_parse_and_print(self):
        word = ReducedWord.parse("aBa")
        self.assertEqual(word, (1, -2, 1))
        self.assertEqual(str(word), "aBa")
        self.assertEqual(str(ReducedWord()), "1")

    def test_reduce_and_inverse(self):
        self.assertEqual(ReducedWord.reduce((1, 2, -2, -1, 2)), (2,))
        w = ReducedWord((1, -2, 1))
        self.assertEqual(w.concat(w.inverse()), ())
        self.assertEqual(w.power(2), (1, -2, 1, 1, -2, 1))
        self.assertEqual(w.power(-1), w.inverse())

    def test_cyclic_reduction(self):
        u, core = ReducedWord((1, 2, -1, 2, -1)).cyclic_reduction()
        self.assertEqual(u, (1,))
        self.assertEqual(core, (2, -1, 2))
        self.assertTrue(core.is_cyclically_reduced())

    def test_infinite_words(self):
        xi = InfiniteWord(ReducedWord((1, 2)), ReducedWord((-1, 2)))
        self.assertEqual(xi.letters(6), (1, 2, -1, 2, -1, 2))
        self.assertEqual(xi.shift(3).letters(3), (2, -1, 2))
        with self.assertRaises(InvalidWord):
            InfiniteWord(ReducedWord((1,)), ReducedWord((-1,)))
        with self.assertRaises(InvalidWord):
            InfiniteWord(ReducedWord(), ReducedWord((1, 2, -1)))

    def test_symbolic_distance_balls_are_cylinders(self):
        rng = np.random.default_rng(7)
        center = InfiniteWord.repeating_last(random_word(rng, 2, 10))
        for _ in range(50):
            other = InfiniteWord.repeating_last(random_word(rng, 2, 10))
            for n in range(1, 9):
                in_ball = symbolic_dist(center, other) <= math.exp(-n)
                in_cylinder = cylinder_contains(center.letters(n), other)
                self.assertEqual(in_ball, in_cylinder)

    def test_common_prefix_of_equal_words(self):
        xi = InfiniteWord(ReducedWord((1,)), ReducedWord((2, 1)))
        zeta = InfiniteWord(ReducedWord((1, 2, 1)), ReducedWord((2, 1)))
        self.assertIsNone(common_prefix_length(xi, zeta))
        self.assertEqual(symbolic_dist(xi, zeta), 0.0)


class TestMcMullen(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.rep = mcmullen_family(0.3)

    def test_theta_range(self):
        for theta in (0.0, -0.1, 2.0 * math.pi / 3.0, 3.0):
            with self.assertRaises(ThetaOutOfRange):
                mcmullen_family(theta)

    def test_reflections_are_involutions(self):
        for sigma in mcmullen_reflections(0.3):
            np.testing.assert_allclose(sigma.M @ sigma.M, np.eye(3), atol=1e-10)
            self.assertAlmostEqual(np.linalg.det(sigma.M), -1.0, delta=1e-10)

    def test_generators_are_hyperbolic_and_match_disk_matrices(self):
        for theta in (0.3, 1.0, 2.0):
            rep = mcmullen_family(theta, ball_radius=2)
            for letter in (1, 2, -1):
                axis_endpoints(
                    rep.generator(letter), sl2_lift=disk_matrix(theta, (letter,))
                )
            self.assertGreater(np.linalg.det(rep.gens[0].M), 0.0)

    def test_translation_length_is_twice_mirror_distance(self):
        for theta in (0.3, 0.1):
            n1, n2, _ = mirror_normals(theta)
            rep = mcmullen_family(theta, ball_radius=2)
            expected = 2.0 * math.acosh(abs(form(n1, n2)))
            self.assertAlmostEqual(
                translation_length(rep.gens[0]), expected, delta=1e-8 * expected
            )

    def test_translation_length_tracks_joint_displacement(self):
        deviations = []
        for theta in (0.3, 0.1, 0.01):
            rep = mcmullen_family(theta, ball_radius=2)
            ell = translation_length(rep.gens[0])
            r = joint_displacement_closed_form(theta)
            self.assertLessEqual(ell, r + 1e-9)
            deviations.append(1.0 - ell / r)
        self.assertEqual(deviations, sorted(deviations, reverse=True))

    def test_ping_pong_passes(self):
        self.assertTrue(self.rep.schottky)
        self.assertTrue(self.rep.certificate["passed"])
        self.assertGreater(self.rep.certificate["worst_margin"], 1e-9)
        self.assertGreaterEqual(self.rep.diagnostics.K, 1.0)

    def test_ping_pong_fails_as_circles_touch(self):
        theta = 2.0943
        rep = mcmullen_family(theta, ball_radius=2)
        passed, certificate = ping_pong_check(rep, mcmullen_disks(theta), margin=1e-3)
        self.assertFalse(passed)
        self.assertLess(certificate["worst_margin"], 1e-3)

    def test_overlapping_disks(self):
        cap = Cap.from_angle([1.0, 0.0], 0.4)
        near = Cap.from_angle([math.cos(0.5), math.sin(0.5)], 0.3)
        far = Cap.from_angle([-1.0, 0.0], 0.1)
        with self.assertRaises(DisjointnessViolated):
            SchottkyDisks(((cap, near), (far, far.enlarged(0.01))))

    def test_disk_count_must_match_rank(self):
        disks = self.rep.disks
        single = SchottkyDisks(disks.pairs[:1])
        with self.assertRaises(RankMismatch):
            ping_pong_check(self.rep, single)


class TestOrbits(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.rep = mcmullen_family(1.5)
        cls.rng = np.random.default_rng(11)

    def test_empty_word_and_generators(self):
        o = self.rep.o
        self.assertAlmostEqual(dist(orbit_point(self.rep, ()), o), 0.0, delta=1e-12)
        for letter in (1, 2):
            g = self.rep.generator(letter)
            self.assertAlmostEqual(
                dist(orbit_point(self.rep, (letter,)), o), dist(apply(g, o), o)
            )

    def test_inverse_words_are_equidistant(self):
        o = self.rep.o
        for _ in range(20):
            w = random_word(self.rng, 2, 6)
            self.assertAlmostEqual(
                dist(orbit_point(self.rep, w), o),
                dist(orbit_point(self.rep, w.inverse()), o),
                delta=1e-8,
            )

    def test_equivariance(self):
        for _ in range(20):
            u = random_word(self.rng, 2, 3)
            v = random_word(self.rng, 2, 3)
            if u[-1] == -v[0]:
                continue
            left = orbit_point(self.rep, u + v)
            right = apply(self.rep.element(u), orbit_point(self.rep, v))
            self.assertLess(dist(left, right), 1e-8)

    def test_orbit_levels_follow_enumeration(self):
        levels = dict(orbit_levels(self.rep, 4))
        for i, word in enumerate(enumerate_reduced(2, 4)):
            if i % 17:
                continue
            expected = math.cosh(dist(orbit_point(self.rep, word), self.rep.o))
            self.assertAlmostEqual(levels[4][i, 0], expected, delta=1e-9 * expected)

    def test_limit_point_of_generator_power(self):
        attracting, _, _ = axis_endpoints(self.rep.generator(1))
        xi = limit_point(self.rep, ReducedWord((1,)), 30)
        self.assertLess(visual_dist(xi, attracting, self.rep.o), 1e-8)

    def test_limit_point_of_periodic_word(self):
        attracting, _, _ = axis_endpoints(self.rep.element((1, 2)))
        xi = InfiniteWord(ReducedWord(), ReducedWord((1, 2)))
        approx = limit_point(self.rep, xi, 30)
        self.assertLess(visual_dist(approx, attracting, self.rep.o), 1e-8)
        exact = limit_point_exact(self.rep, xi)
        self.assertLess(visual_dist(exact, attracting, self.rep.o), 1e-10)

    def test_limit_point_needs_diagnostics(self):
        bare = SchottkyRep(gens=self.rep.gens, o=self.rep.o)
        with self.assertRaises(NotSchottky):
            limit_point(bare, ReducedWord((1,)), 10)

    def test_agreeing_prefixes_are_visually_close(self):
        C = self.rep.diagnostics.C_K
        for n in (1, 2, 3):
            for _ in range(10):
                prefix = random_word(self.rng, 2, n)
                tails = [x for x in (1, -1, 2, -2) if x != -prefix[-1]]
                a = limit_point(self.rep, ReducedWord(prefix + (tails[0],)), 30)
                b = limit_point(self.rep, ReducedWord(prefix + (tails[1],)), 30)
                d = dist(self.rep.o, orbit_point(self.rep, prefix))
                self.assertLessEqual(
                    visual_dist(a, b, self.rep.o), math.exp(3 * C) * math.exp(-d)
                )


class TestInvolutionWords(SimpleTestCase):
    def test_factored_levels_match_generator_products(self):
        rep = mcmullen_family(0.5, ball_radius=2)
        plain = SchottkyRep(gens=rep.gens, o=rep.o)
        self.assertTrue(rep.factored)
        self.assertFalse(plain.factored)
        for a, b in zip(orbit_distance_levels(rep, 5), orbit_distance_levels(plain, 5)):
            np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)

    def test_backtracking_junction_is_exact_at_small_theta(self):
        rep = mcmullen_family(0.01, ball_radius=2)
        levels = dict(orbit_levels(rep, 2))
        # s_1^-1 s_2 = sigma_2 sigma_1 sigma_1 sigma_3 = sigma_2 sigma_3
        row = word_rank(np.array([[2, 1]]), 2)[0]
        S = [s.M for s in rep.reflections]
        expected = S[1] @ (S[2] @ origin(2).v)
        np.testing.assert_allclose(
            levels[2][row], expected, rtol=1e-12, atol=1e-12 * expected[0]
        )

    def test_limit_points_use_the_factorization(self):
        rep = mcmullen_family(0.5, ball_radius=2)
        plain = SchottkyRep(gens=rep.gens, o=rep.o, diagnostics=rep.diagnostics)
        xi = InfiniteWord(ReducedWord((-1, 2)), ReducedWord((1, 2)))
        self.assertLess(
            visual_dist(limit_point(rep, xi, 20), limit_point(plain, xi, 20), rep.o),
            1e-10,
        )

    def test_conjugation_keeps_the_factorization(self):
        rep = mcmullen_family(0.3, ball_radius=2)
        moved = conjugate(rep, random_isometry(np.random.default_rng(4), 2, scale=1.0))
        self.assertTrue(moved.factored)
        for a, b in zip(orbit_distance_levels(rep, 4), orbit_distance_levels(moved, 4)):
            np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-10)

    def test_rejects_bad_factorizations(self):
        s1, s2, s3 = mcmullen_reflections(0.5)
        gens = (s1 @ s2, s1 @ s3)
        for reflections, factors in (
            ((s1, s2, s3), ((0,), (0, 2))),
            ((s1, s2, s3), ((0, 0), (0, 2))),
            ((s1, s2, s3), ((0, 1), (0, 3))),
            ((s2, s1, s3), ((0, 1), (0, 2))),
        ):
            with self.assertRaises(InvalidWord):
                SchottkyRep(
                    gens=gens, o=origin(2), reflections=reflections, factors=factors
                )
        with self.assertRaises(RankMismatch):
            SchottkyRep(gens=gens, o=origin(2), reflections=(s1, s2), factors=((0, 1),))

    def test_rejects_double_cancellation(self):
        # s_2^-1 s_1 = sigma_2 sigma_1 sigma_1 sigma_2 sigma_3 cancels twice
        s1, s2, s3 = mcmullen_reflections(0.5)
        with self.assertRaises(InvalidWord):
            SchottkyRep(
                gens=(s1 @ s2 @ s3, s1 @ s2),
                o=origin(2),
                reflections=(s1, s2, s3),
                factors=((0, 1, 2), (0, 1)),
            )


class TestQIConstants(SimpleTestCase):
    def test_single_boost(self):
        for length in (2.0, 0.5):
            rep = SchottkyRep(gens=(boost([1.0, 0.0], length),), o=origin(2))
            K, C = estimate_qi_constants(rep, 8)
            self.assertLess(C, 1e-6)
            self.assertLessEqual(K, max(length, 1.0 / length) + 1e-12)
            self.assertEqual(qi_violations(rep, K, 8), [])

    def test_mcmullen_ball(self):
        rep = mcmullen_family(0.3, ball_radius=2)
        K, C = estimate_qi_constants(rep, 8)
        self.assertEqual(qi_violations(rep, K, 8), [])
        self.assertGreaterEqual(C, 0.0)
        step = max(dist(rep.o, apply(g, rep.o)) for g in rep.gens)
        for n, d in enumerate(orbit_distance_levels(rep, 8)):
            self.assertTrue(np.all(d <= n * step + 1e-9 * (1 + n * step)))


class TestJointDisplacement(SimpleTestCase):
    def test_single_generator_attains_translation_length(self):
        rng = np.random.default_rng(3)
        g = boost([1.0, 0.0], 1.7)
        rep = SchottkyRep(gens=(g,), o=random_point(rng, 2, scale=1.0))
        r, x = joint_displacement(rep)
        self.assertAlmostEqual(r, 1.7, delta=1e-6)
        # on the axis, the real line of the disk
        self.assertLess(abs(x.v[2]), 1e-3)

    def test_mcmullen_closed_form(self):
        for theta in (0.3, 1.0):
            rep = mcmullen_family(theta, ball_radius=2)
            r, x = joint_displacement(rep)
            expected = joint_displacement_closed_form(theta)
            self.assertAlmostEqual(r, expected, delta=1e-6)
            self.assertLess(dist(x, x_star(theta)), 5e-3)
            at_star = max(
                dist(x_star(theta), apply(g, x_star(theta))) for g in rep.gens
            )
            self.assertAlmostEqual(at_star, expected, delta=1e-9 * expected)

    def test_degenerating_theta(self):
        theta = 0.01
        rep = mcmullen_family(theta, ball_radius=2)
        r, _ = joint_displacement(rep)
        self.assertAlmostEqual(r, joint_displacement_closed_form(theta), delta=1e-5)
        ratio = r / (4.0 * abs(math.log(theta / 2.0)))
        self.assertTrue(0.8 <= ratio <= 1.2)

    def test_conjugation_invariance(self):
        rng = np.random.default_rng(5)
        rep = mcmullen_family(0.5, ball_radius=2)
        r, _ = joint_displacement(rep)
        for _ in range(3):
            moved = conjugate(rep, random_isometry(rng, 2, scale=1.0))
            r_moved, _ = joint_displacement(moved)
            self.assertAlmostEqual(r_moved, r, delta=1e-6)


class TestFamilies(SimpleTestCase):
    def descriptor(self, length=4.0):
        return {
            "rank": 2,
            "generators": [
                boost([1.0, 0.0], length).M.tolist(),
                boost([0.0, 1.0], length).M.tolist(),
            ],
        }

    def test_generic_descriptor_uses_minimizer(self):
        rep = build_representation(self.descriptor())
        self.assertAlmostEqual(rep.diagnostics.r_joint, 4.0, delta=1e-6)
        self.assertLess(dist(rep.o, origin(2)), 1e-3)
        self.assertGreaterEqual(rep.diagnostics.K, 1.0)

    def test_explicit_base_point(self):
        descriptor = self.descriptor()
        descriptor["base_point"] = [math.cosh(0.5), math.sinh(0.5), 0.0]
        rep = build_representation(descriptor)
        self.assertLess(dist(rep.o, HPoint(descriptor["base_point"])), 1e-12)

    def test_rank_mismatch(self):
        descriptor = self.descriptor()
        descriptor["rank"] = 3
        with self.assertRaises(RankMismatch):
            build_representation(descriptor)

    def test_disks_must_live_in_the_same_sphere(self):
        def cap(*v):
            return {"center": [1.0, *v], "radius": 0.2}

        descriptor = self.descriptor()
        descriptor["disks"] = [
            {"minus": cap(-1.0, 0.0, 0.0), "plus": cap(1.0, 0.0, 0.0)},
            {"minus": cap(0.0, -1.0, 0.0), "plus": cap(0.0, 1.0, 0.0)},
        ]
        with self.assertRaises(RankMismatch):
            build_representation(descriptor)

    def test_conjugate_moves_disks_with_the_group(self):
        rng = np.random.default_rng(9)
        rep = mcmullen_family(0.3, ball_radius=2)
        moved = conjugate(rep, random_isometry(rng, 2, scale=1.0))
        passed, _ = ping_pong_check(moved, moved.disks)
        self.assertTrue(passed)

    def test_generic_family_members(self):
        members = family_members(
            {
                "family": "generic",
                "members": [
                    {"theta": 0.5, **self.descriptor(3.0)},
                    {"theta": 0.25, **self.descriptor(5.0)},
                ],
            }
        )
        self.assertEqual([theta for theta, _ in members], [0.5, 0.25])
        rows, diverging = divergence_table(members)
        self.assertTrue(diverging)
        self.assertAlmostEqual(rows[1]["r_joint"], 5.0, delta=1e-6)

    def test_mcmullen_divergence(self):
        members = family_members({"family": "mcmullen"}, thetas=(0.5, 0.2, 0.1))
        _, diverging = divergence_table(members)
        self.assertTrue(diverging)
