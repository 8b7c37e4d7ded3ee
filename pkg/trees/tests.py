import math

import numpy as np
from django.test import SimpleTestCase

from schottky.mcmullen import mcmullen_family
from schottky.words import InfiniteWord, ReducedWord, enumerate_reduced

from .graph import (
    Edge,
    InvalidGraph,
    MetricGraph,
    NotTreeSchottky,
    TreeAction,
    estimate_tree_qi_constants,
    four_point_violation,
    hdim_tree_boundary,
    relabeled,
    rescaled_length_convergence,
    scaled,
    tree_distance_levels,
    tree_gromov_product,
    tree_orbit_dist,
    tree_translation_length,
    tree_visual_dist,
)
from .presets import mcmullen_limit_tree, rose, tree_from_descriptor


def random_word(rng, r, n):
    letters = []
    while len(letters) < n:
        x = int(rng.integers(1, r + 1)) * int(rng.choice([-1, 1]))
        if not letters or letters[-1] != -x:
            letters.append(x)
    return ReducedWord(letters)


class TestOrbitDistances(SimpleTestCase):
    def setUp(self):
        self.tree = mcmullen_limit_tree()
        self.rng = np.random.default_rng(17)

    def test_mcmullen_tree_values(self):
        self.assertEqual(tree_orbit_dist(self.tree, ()), 0.0)
        self.assertEqual(tree_orbit_dist(self.tree, (1,)), 1.0)
        self.assertEqual(tree_orbit_dist(self.tree, (1, 2)), 2.0)
        # gamma cancels: alpha then beta backwards
        self.assertEqual(tree_orbit_dist(self.tree, (-1, 2)), 1.0)

    def test_inverse_and_triangle_inequality(self):
        for _ in range(100):
            u = random_word(self.rng, 2, int(self.rng.integers(1, 8)))
            v = random_word(self.rng, 2, int(self.rng.integers(1, 8)))
            du = tree_orbit_dist(self.tree, u)
            self.assertEqual(du, tree_orbit_dist(self.tree, u.inverse()))
            dv = tree_orbit_dist(self.tree, v)
            duv = tree_orbit_dist(self.tree, u.inverse().concat(v))
            self.assertLessEqual(duv, du + dv)

    def test_rose_distance_is_word_length(self):
        tree = rose(2, 1.0)
        for _ in range(50):
            w = random_word(self.rng, 2, int(self.rng.integers(0, 10)))
            self.assertEqual(tree_orbit_dist(tree, w), len(w))

    def test_levels_match_direct_reduction(self):
        for tree in (self.tree, rose(2, 0.5), rose(3, 1.0)):
            levels = list(tree_distance_levels(tree, 5))
            for n in (1, 3, 5):
                words = enumerate_reduced(tree.r, n)
                direct = [tree_orbit_dist(tree, w) for w in words]
                np.testing.assert_allclose(levels[n], direct, atol=1e-12)

    def test_four_point_condition_on_orbit(self):
        lengths = self.rng.integers(0, 7, size=25)
        words = [random_word(self.rng, 2, int(n)) for n in lengths]
        D = np.array(
            [
                [tree_orbit_dist(self.tree, u.inverse().concat(v)) for v in words]
                for u in words
            ]
        )
        self.assertLess(four_point_violation(D), 1e-12)

    def test_four_point_violation_of_a_square(self):
        D = np.array(
            [[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]], dtype=float
        )
        self.assertAlmostEqual(four_point_violation(D), 2.0)

    def test_gromov_products_are_half_integers(self):
        for _ in range(50):
            u = random_word(self.rng, 2, 5)
            v = random_word(self.rng, 2, 5)
            g = tree_gromov_product(self.tree, u, v)
            self.assertGreaterEqual(g, 0.0)
            self.assertAlmostEqual(2 * g, round(2 * g), delta=1e-12)

    def test_boundary_gromov_product(self):
        a_inf = InfiniteWord.repeating_last(ReducedWord((1,)))
        b_inf = InfiniteWord.repeating_last(ReducedWord((2,)))
        self.assertEqual(tree_gromov_product(self.tree, a_inf, b_inf), 0.5)
        d = tree_visual_dist(self.tree, a_inf, b_inf)
        self.assertAlmostEqual(d, math.exp(-0.5))
        self.assertEqual(tree_visual_dist(self.tree, a_inf, a_inf), 0.0)


class TestTranslationLengths(SimpleTestCase):
    def setUp(self):
        self.tree = mcmullen_limit_tree()
        self.rng = np.random.default_rng(23)

    def test_mcmullen_generators(self):
        self.assertEqual(tree_translation_length(self.tree, (1,)), 1.0)
        self.assertEqual(tree_translation_length(self.tree, (1, 2)), 2.0)

    def test_conjugation_invariance(self):
        for _ in range(30):
            w = random_word(self.rng, 2, 4)
            u = random_word(self.rng, 2, 3)
            conjugated = u.concat(w).concat(u.inverse())
            self.assertEqual(
                tree_translation_length(self.tree, conjugated),
                tree_translation_length(self.tree, w),
            )

    def test_powers(self):
        for _ in range(20):
            w = random_word(self.rng, 2, 4)
            if not w.is_cyclically_reduced():
                continue
            for n in (2, 3):
                self.assertAlmostEqual(
                    tree_translation_length(self.tree, w.power(n)),
                    n * tree_translation_length(self.tree, w),
                )


class TestBoundaryDimension(SimpleTestCase):
    def test_mcmullen_limit_tree(self):
        result = hdim_tree_boundary(mcmullen_limit_tree(), 12, 1e-10)
        self.assertAlmostEqual(result.delta, 2 * math.log(2), delta=1e-3)
        self.assertLessEqual(result.bracket[0], result.delta)
        self.assertLessEqual(result.delta, result.bracket[1])

    def test_rose_closed_form(self):
        for c in (0.5, 1.0, 2.0):
            result = hdim_tree_boundary(rose(2, c), 8, 1e-10)
            self.assertAlmostEqual(result.delta, math.log(3) / c, delta=1e-6)

    def test_relabeling_invariance(self):
        tree = mcmullen_limit_tree()
        moved = relabeled(tree, {"alpha": "a", "gamma": "g"}, reverse=("beta", "gamma"))
        self.assertEqual([e.label for e in moved.graph.edges], ["a", "beta", "g"])
        before = hdim_tree_boundary(tree, 8, 1e-10).delta
        after = hdim_tree_boundary(moved, 8, 1e-10).delta
        self.assertAlmostEqual(before, after, delta=1e-12)

    def test_scaling_divides_dimension(self):
        tree = mcmullen_limit_tree()
        base = hdim_tree_boundary(tree, 8, 1e-10)
        for c in (0.5, 3.0):
            result = hdim_tree_boundary(scaled(tree, c), 8, 1e-10)
            self.assertAlmostEqual(
                result.delta * c, base.delta, delta=2 * max(base.width, 1e-9)
            )

    def test_qi_constants(self):
        K, C = estimate_tree_qi_constants(mcmullen_limit_tree(), 6)
        self.assertGreaterEqual(K, 1.0)
        self.assertLessEqual(C, 0.5 + 1e-12)

    def test_non_free_action(self):
        graph = MetricGraph(
            vertices=("o",),
            edges=(Edge("o", "o", 1.0, "e"), Edge("o", "o", 1.0, "f")),
            base_vertex="o",
        )
        tree = TreeAction.from_labels(graph, [["+e"], ["+e"]])
        with self.assertRaises(NotTreeSchottky):
            estimate_tree_qi_constants(tree, 3)


class TestGraphs(SimpleTestCase):
    def test_descriptor_and_presets(self):
        tree = tree_from_descriptor(
            {
                "vertices": ["p", "q"],
                "edges": [
                    {"u": "p", "v": "q", "len": 0.5, "label": "alpha"},
                    {"u": "p", "v": "q", "len": 0.5, "label": "beta"},
                    {"u": "p", "v": "q", "len": 0.5, "label": "gamma"},
                ],
                "loops": [["+gamma", "-alpha"], ["+gamma", "-beta"]],
            }
        )
        self.assertEqual(tree.loops, mcmullen_limit_tree().loops)
        self.assertEqual(tree_from_descriptor({"preset": "rose", "petals": 3}).r, 3)
        with self.assertRaises(InvalidGraph):
            tree_from_descriptor({"preset": "tripod"})

    def test_invalid_graphs(self):
        edge = Edge("p", "q", 1.0, "e")
        with self.assertRaises(InvalidGraph):
            MetricGraph(("p", "q", "x"), (edge,), "p")
        with self.assertRaises(InvalidGraph):
            MetricGraph(("p", "q"), (Edge("p", "q", 0.0, "e"),), "p")
        graph = mcmullen_limit_tree().graph
        with self.assertRaises(InvalidGraph):
            TreeAction.from_labels(graph, [["+gamma", "-alpha"]])
        with self.assertRaises(InvalidGraph):
            TreeAction.from_labels(graph, [["+gamma", "-gamma"], ["+gamma", "-beta"]])
        with self.assertRaises(InvalidGraph):
            TreeAction.from_labels(graph, [["-alpha", "+gamma"], ["+gamma", "-beta"]])
        with self.assertRaises(InvalidGraph):
            TreeAction.from_labels(graph, [["gamma", "-alpha"], ["+gamma", "-beta"]])


class TestRescaledLengths(SimpleTestCase):
    def test_mcmullen_lengths_approach_tree_lengths(self):
        thetas = (0.3, 0.1, 0.03, 0.01)
        members = [(t, mcmullen_family(t, ball_radius=2)) for t in thetas]
        rows = rescaled_length_convergence(
            members, mcmullen_limit_tree(), [(1,), (1, 2)]
        )
        gaps_a = [row["gap"] for row in rows if row["word"] == "a"]
        gaps_ab = [row["gap"] for row in rows if row["word"] == "ab"]
        self.assertEqual(gaps_a, sorted(gaps_a, reverse=True))
        self.assertLess(gaps_ab[-1], gaps_ab[0])
        self.assertEqual({row["tree_length"] for row in rows}, {1.0, 2.0})
