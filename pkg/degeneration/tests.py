import math

import numpy as np
from django.test import SimpleTestCase

from hyperbolic.geometry import boost
from schottky.families import conjugate
from schottky.mcmullen import mcmullen_family
from schottky.representation import orbit_point
from schottky.words import RankMismatch, ReducedWord
from trees.presets import mcmullen_limit_tree, rose

from .lift import (
    BaseJointMismatch,
    DegenerationError,
    TOutOfRange,
    TreePoint,
    act,
    build_lift,
    tree_point_distances,
)
from .pipeline import (
    HEADLINE_TARGET,
    align,
    distance_table,
    ell_schedule,
    headline_experiment,
    headline_summary,
    kernel_gap,
)

SWEEP = (0.2, 0.1, 0.05, 0.02)


class TestLift(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tree = mcmullen_limit_tree()
        cls.rep = mcmullen_family(0.3)

    def test_single_point(self):
        plan = build_lift(self.tree, self.rep, 0)
        self.assertEqual(plan.size, 1)
        np.testing.assert_array_equal(plan.lifts[0], self.rep.o.v)
        self.assertEqual(kernel_gap(plan, 1.0), 0.0)
        report = align(plan)
        self.assertEqual(report.alignment_error, 0.0)
        self.assertTrue(report.passes)

    def test_first_ball(self):
        plan = build_lift(self.tree, self.rep, 1)
        self.assertEqual(len(plan.orbit), 5)
        # 8 vertices and 7 edges with two interior points each
        self.assertEqual(plan.size, 22)
        self.assertEqual(len(plan.gamma), 5)
        for w in plan.orbit:
            expected = orbit_point(self.rep, w).v
            np.testing.assert_allclose(plan.lift_of(w), expected, rtol=1e-9)

    def test_orbit_lifts_are_equivariant(self):
        plan = build_lift(self.tree, self.rep, 2)
        for g in plan.gamma:
            M = self.rep.element(g).M
            for w in plan.orbit:
                gw = g.concat(w)
                if len(gw) > 2:
                    continue
                x = plan.points[plan.orbit[w]]
                self.assertEqual(act(self.tree, g, x), plan.points[plan.orbit[gw]])
                expected = M @ plan.lift_of(w)
                np.testing.assert_allclose(
                    plan.lift_of(gw),
                    expected,
                    rtol=1e-9,
                    atol=1e-9 * np.max(np.abs(expected)),
                )

    def test_tree_distances(self):
        A = self.tree
        s1, s2, s1_inv = (TreePoint(tuple(A.path(w))) for w in ((1,), (2,), (-1,)))
        o = TreePoint(())
        D = tree_point_distances(A, [o, s1, s2, s1_inv])
        np.testing.assert_allclose(
            D, [[0, 1, 1, 1], [1, 0, 1, 2], [1, 1, 0, 2], [1, 2, 2, 0]], atol=1e-15
        )
        inner = TreePoint((A.graph.code("+gamma"),), 1.0 / 6.0)
        self.assertAlmostEqual(tree_point_distances(A, [o], [inner])[0, 0], 1.0 / 3.0)

    def test_translates_flip_edges(self):
        A = self.tree
        inner = TreePoint((A.graph.code("+gamma"),), 1.0 / 6.0)
        image = act(A, (-1,), inner)
        self.assertEqual(image.path, tuple(A.path((-1,))))
        self.assertAlmostEqual(image.offset, 1.0 / 3.0)

    def test_translates_preserve_tree_distances(self):
        plan = build_lift(self.tree, self.rep, 2)
        for g in plan.gamma:
            moved = [act(self.tree, g, x) for x in plan.points]
            np.testing.assert_allclose(
                tree_point_distances(self.tree, moved), plan.tree_distances, atol=1e-12
            )

    def test_rank_mismatch(self):
        with self.assertRaises(RankMismatch):
            build_lift(rose(3), self.rep, 1)

    def test_base_point_far_from_the_minimizer(self):
        far = self.rep.with_base_point(orbit_point(self.rep, (1, 2)))
        far = far.with_diagnostics(self.rep.diagnostics)
        with self.assertRaises(BaseJointMismatch):
            build_lift(self.tree, far, 1)


class TestPipeline(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tree = mcmullen_limit_tree()
        cls.members = [(theta, mcmullen_family(theta)) for theta in SWEEP]

    def test_kernel_gap_decreases_along_the_sweep(self):
        gaps = [
            kernel_gap(build_lift(self.tree, rep, 2), 1.0) for _, rep in self.members
        ]
        for wider, narrower in zip(gaps, gaps[1:]):
            self.assertLess(narrower, wider)

    def test_kernel_gap_is_recomputed(self):
        plan = build_lift(self.tree, self.members[0][1], 1)
        first = kernel_gap(plan, 1.0)
        kernel_gap(plan, 2.0)
        self.assertEqual(kernel_gap(plan, 1.0), first)

    def test_t_out_of_range(self):
        plan = build_lift(self.tree, self.members[0][1], 1)
        r = plan.rep.diagnostics.r_joint
        with self.assertRaises(TOutOfRange):
            kernel_gap(plan, r + 1.0)
        with self.assertRaises(TOutOfRange):
            align(plan, 0.0)

    def test_rescaled_distances_approach_the_tree(self):
        worst = []
        for _, rep in self.members[::3]:
            rows = distance_table(build_lift(self.tree, rep, 2))
            worst.append(max(row["gap"] for row in rows))
        self.assertLess(worst[-1], worst[0])

    def test_alignment_is_conjugation_invariant(self):
        rep = self.members[0][1]
        moved = conjugate(rep, boost([0.6, 0.8], 0.3))
        a = align(build_lift(self.tree, rep, 1))
        b = align(build_lift(self.tree, moved, 1))
        self.assertAlmostEqual(a.kernel_gap, b.kernel_gap, delta=1e-6 * a.kernel_gap)
        self.assertAlmostEqual(a.alignment_error, b.alignment_error, delta=1e-5)

    def test_ell_is_monotone_along_the_sweep(self):
        rows = ell_schedule(self.members, self.tree, l_max=2)
        ells = [row["ell"] for row in rows]
        self.assertEqual(ells, sorted(ells))
        for row in rows:
            self.assertLessEqual(row["ell"], 2)
            self.assertEqual(len(row["errors"]), min(row["ell"] + 1, 2))

    def test_no_search_without_levels(self):
        rows = ell_schedule(self.members[:1], self.tree, l_max=0)
        self.assertEqual(rows[0]["ell"], 0)
        self.assertEqual(rows[0]["errors"], [])


class TestHeadline(SimpleTestCase):
    def test_sweep(self):
        thetas = (0.2, 0.1, 0.05, 0.02, 0.01)
        rows, summary = headline_experiment(thetas, max_depth=12)
        for row in rows:
            self.assertLessEqual(row["lo"], row["delta"])
            self.assertLessEqual(row["delta"], row["hi"])
            self.assertAlmostEqual(row["r_delta"], row["r_joint"] * row["delta"])
        deviations = [row["deviation"] for row in rows]
        for wider, narrower in zip(deviations, deviations[1:]):
            self.assertLess(narrower, wider)
        self.assertTrue(summary["deviation_decreasing"])
        self.assertLessEqual(summary["relative_error"], 1e-3)
        self.assertEqual(len(summary["plot"]), len(thetas))
        self.assertAlmostEqual(summary["plot"][0]["x"], 1.0 / abs(math.log(0.2)))

    def test_reciprocal_fit_is_exact_on_the_first_order_formula(self):
        rows = [
            {
                "theta": theta,
                "delta": math.log(2.0) / (2.0 * abs(math.log(theta)) + math.log(12.0)),
                "deviation": 0.0,
            }
            for theta in (0.1, 0.01, 0.001)
        ]
        summary = headline_summary(rows)
        self.assertAlmostEqual(summary["intercept"], HEADLINE_TARGET, delta=1e-10)

    def test_sweep_must_decrease(self):
        with self.assertRaises(DegenerationError):
            headline_experiment((0.1, 0.2))

    def test_word_order_of_the_first_ball(self):
        plan = build_lift(mcmullen_limit_tree(), mcmullen_family(0.5), 1)
        self.assertEqual(
            list(plan.orbit),
            [ReducedWord(w) for w in ((), (1,), (2,), (-1,), (-2,))],
        )
