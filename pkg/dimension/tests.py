import math

import numpy as np
from django.test import SimpleTestCase

from hyperbolic.geometry import (
    NotLorentz,
    apply,
    boost,
    dist,
    origin,
    visual_dist,
)
from schottky.families import with_diagnostics
from schottky.mcmullen import mcmullen_family
from schottky.representation import SchottkyRep, limit_point_exact, orbit_point
from schottky.words import (
    InfiniteWord,
    NotSchottky,
    RankMismatch,
    ReducedWord,
    word_count,
)

from .boxcount import hdim_boxcount
from .continuity import bowen_continuity_probe, perturbed
from .gibbs import (
    cylinder_ball_sandwich,
    cylinder_weights,
    gibbs_consistency,
    lemma_bounds,
)
from .potential import (
    Potential,
    birkhoff_sum,
    birkhoff_sum_by_shifts,
    log_visual_distance,
    potential_eval,
)
from .pressure import (
    DepthTooSmall,
    InsufficientScales,
    LeftSchottkyRegime,
    critical_exponent,
    hdim_pressure,
)


def random_infinite_word(rng, r, n):
    letters = []
    while len(letters) < n:
        x = int(rng.integers(1, r + 1)) * int(rng.choice([-1, 1]))
        if not letters or letters[-1] != -x:
            letters.append(x)
    return InfiniteWord.repeating_last(ReducedWord(letters))


def single_boost(length=2.0):
    rep = SchottkyRep(gens=(boost([1.0, 0.0], length),), o=origin(2))
    return with_diagnostics(rep, ball_radius=4)


class TestPressure(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.rep = mcmullen_family(0.3)

    def test_word_length_metric_closed_form(self):
        for r, c in ((2, 1.0), (2, 0.5), (3, 2.0)):
            levels = [np.full(word_count(r, n), c * n) for n in range(9)]
            result = critical_exponent(levels, 0.0, 8, 1e-12)
            self.assertAlmostEqual(result.delta, math.log(2 * r - 1) / c, delta=1e-10)
            self.assertEqual(result.depth_used, 4)

    def test_depth_too_small(self):
        with self.assertRaises(DepthTooSmall):
            critical_exponent([np.zeros(1)] * 4, 0.0, 3, 1e-10)

    def test_cyclic_group_has_dimension_zero(self):
        result = hdim_pressure(single_boost(), 6, 1e-10)
        self.assertEqual(result.delta, 0.0)

    def test_requires_diagnostics(self):
        with self.assertRaises(NotSchottky):
            rep = SchottkyRep(gens=(boost([1.0, 0.0], 1.0),), o=origin(2))
            hdim_pressure(rep, 6, 1e-10)

    def test_mcmullen_result(self):
        result = hdim_pressure(self.rep, 9, 1e-10)
        self.assertLessEqual(result.bracket[0], result.delta)
        self.assertLessEqual(result.delta, result.bracket[1])
        self.assertGreater(result.delta, 0.0)
        self.assertLess(result.delta, 1.0)
        self.assertEqual(len(result.table), result.depth_used)
        self.assertIsNone(result.table[0][2])
        self.assertLess(result.table[-1][2], result.table[1][2])

    def test_dimension_decreases_as_theta_shrinks(self):
        wide = hdim_pressure(self.rep, 8, 1e-10).delta
        narrow = hdim_pressure(mcmullen_family(0.1), 8, 1e-10).delta
        self.assertLess(narrow, wide)

    def test_base_point_invariance(self):
        moved = apply(boost([0.6, 0.8], 0.2), self.rep.o)
        other = with_diagnostics(
            self.rep.with_base_point(moved), r_joint=self.rep.diagnostics.r_joint
        )
        a = hdim_pressure(self.rep, 8, 1e-10)
        b = hdim_pressure(other, 8, 1e-10)
        self.assertLessEqual(abs(a.delta - b.delta), a.width + b.width)


class TestPotential(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.rep = mcmullen_family(1.0)
        cls.P = Potential(cls.rep)

    def test_fixed_point_of_a_boost(self):
        P = Potential(single_boost(2.0))
        zeta = InfiniteWord(ReducedWord(), ReducedWord((1,)))
        self.assertAlmostEqual(potential_eval(P, zeta), -2.0, delta=1e-9)
        self.assertAlmostEqual(birkhoff_sum(P, zeta, 5), -10.0, delta=1e-8)

    def test_potential_is_bounded_by_generator_displacement(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            zeta = random_infinite_word(rng, 2, 6)
            first = dist(self.rep.o, orbit_point(self.rep, zeta.letters(1)))
            self.assertLessEqual(abs(potential_eval(self.P, zeta)), first + 1e-9)

    def test_birkhoff_sum_matches_shifted_sum(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            zeta = random_infinite_word(rng, 2, 7)
            for n in (1, 4, 10):
                self.assertAlmostEqual(
                    birkhoff_sum(self.P, zeta, n),
                    birkhoff_sum_by_shifts(self.P, zeta, n),
                    delta=1e-8,
                )

    def test_birkhoff_sum_tracks_orbit_distance(self):
        rng = np.random.default_rng(11)
        C = self.rep.diagnostics.C_K
        for _ in range(40):
            zeta = random_infinite_word(rng, 2, 5)
            for n in range(1, 5):
                d = dist(self.rep.o, orbit_point(self.rep, zeta.letters(n)))
                self.assertLessEqual(
                    abs(birkhoff_sum(self.P, zeta, n) + d), 2.0 * C + 1e-6
                )

    def test_log_visual_distance_matches_closed_form(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            xi = random_infinite_word(rng, 2, 3)
            zeta = random_infinite_word(rng, 2, 3)
            if xi == zeta:
                continue
            expected = visual_dist(
                limit_point_exact(self.rep, xi),
                limit_point_exact(self.rep, zeta),
                self.rep.o,
            )
            self.assertAlmostEqual(
                log_visual_distance(self.P, xi, zeta), math.log(expected), delta=1e-8
            )
        self.assertEqual(log_visual_distance(self.P, xi, xi), -math.inf)


class TestBoxCount(SimpleTestCase):
    def test_two_point_limit_set(self):
        delta, r2 = hdim_boxcount(single_boost(), 8)
        self.assertAlmostEqual(delta, 0.0, delta=1e-9)
        self.assertEqual(r2, 1.0)

    def test_agrees_with_pressure(self):
        for theta in (0.3, 0.1):
            with self.subTest(theta=theta):
                rep = mcmullen_family(theta)
                delta, r2 = hdim_boxcount(rep, 8)
                pressure = hdim_pressure(rep, 10, 1e-10).delta
                self.assertLessEqual(abs(delta - pressure), 0.05)
                self.assertGreaterEqual(r2, 0.99)

    def test_insufficient_scales(self):
        rep = single_boost()
        with self.assertRaises(InsufficientScales):
            hdim_boxcount(rep, 8, scales=[1e-1, 1e-2, 1e-3])
        with self.assertRaises(InsufficientScales):
            hdim_boxcount(rep, 8, scales=[1e-2, 2e-2, 3e-2, 4e-2])
        with self.assertRaises(InsufficientScales):
            hdim_boxcount(rep, 5)


class TestGibbs(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.rep = mcmullen_family(1.0)
        cls.delta = hdim_pressure(cls.rep, 8, 1e-10).delta

    def test_weights_are_normalized(self):
        weights = cylinder_weights(self.rep, 5, self.delta)
        self.assertEqual(weights.size, word_count(2, 5))
        self.assertAlmostEqual(weights.sum(), 1.0, delta=1e-12)

    def test_consistency_is_uniform_in_depth(self):
        rows = gibbs_consistency(self.rep, range(1, 7), self.delta)
        for row in rows:
            self.assertLessEqual(row["max_deviation"], row["bound"] + 1e-6)

    def test_lemma_bounds_hold(self):
        slacks = lemma_bounds(self.rep, pairs=60, seed=1)
        self.assertGreaterEqual(slacks["two_sided"], 0.0)
        self.assertGreaterEqual(slacks["holder"], 0.0)

    def test_lemma_bounds_need_two_generators(self):
        with self.assertRaises(NotSchottky):
            lemma_bounds(single_boost(), pairs=1)

    def test_cylinder_ball_sandwich(self):
        zeta = InfiniteWord(ReducedWord((1,)), ReducedWord((2, 1)))
        for n in (1, 3):
            result = cylinder_ball_sandwich(self.rep, zeta, n)
            self.assertTrue(result["inner_holds"])
            self.assertTrue(result["outer_holds"])


class TestContinuity(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.rep = mcmullen_family(0.3)

    def test_zero_perturbation_is_the_identity(self):
        self.assertIs(perturbed(self.rep, 0.0), self.rep)
        rows = bowen_continuity_probe(self.rep, [0.0], max_depth=6)
        self.assertEqual(rows[0]["deviation"], 0.0)

    def test_generator_perturbations_converge(self):
        rows = bowen_continuity_probe(self.rep, [1e-1, 1e-2, 1e-3], max_depth=6)
        deviations = [row["deviation"] for row in rows]
        self.assertEqual(deviations, sorted(deviations, reverse=True))
        self.assertGreater(deviations[0], deviations[-1])

    def test_conjugation_leaves_dimension_unchanged(self):
        rows = bowen_continuity_probe(
            self.rep, [1e-1, 1e-2], mode="conjugation", max_depth=6
        )
        for row in rows:
            self.assertLessEqual(row["deviation"], row["hi"] - row["lo"])

    def test_directions_are_validated(self):
        with self.assertRaises(RankMismatch):
            perturbed(self.rep, 0.1, directions=[np.zeros((3, 3))])
        with self.assertRaises(NotLorentz):
            perturbed(self.rep, 0.1, directions=[np.eye(3), np.eye(3)])

    def test_leaving_the_schottky_regime(self):
        with self.assertRaises(LeftSchottkyRegime):
            perturbed(self.rep, 1e-3, k_limit=1.0)
