import csv
import json
import math
import os
import tempfile
from io import StringIO
from unittest import mock

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from .invariants import PROPERTIES, run_checks
from .output import ResultFiles, config_hash, format_value, header, render_csv
from .serializers import (
    KernelSerializer,
    RepresentationSerializer,
    RunConfigSerializer,
    SweepSerializer,
    TreeSerializer,
)

STAR = [[0, 1, 1, 1], [1, 0, 2, 2], [1, 2, 0, 2], [1, 2, 2, 0]]


def read_csv(path):
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    head = dict(line[2:].split(": ", 1) for line in lines if line.startswith("# "))
    rows = list(csv.DictReader(line for line in lines if not line.startswith("#")))
    return head, rows


def read_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


class TestSerializers(SimpleTestCase):
    def test_unknown_fields_are_rejected(self):
        serializer = RepresentationSerializer(
            data={"family": "mcmullen", "theta": 0.3, "colour": "red"}
        )
        self.assertFalse(serializer.is_valid())
        self.assertIn("colour", serializer.errors)
        serializer = SweepSerializer(
            data={"family": "mcmullen", "theta_list": [0.2], "tree": {"size": 1}}
        )
        self.assertFalse(serializer.is_valid())
        self.assertIn("tree", serializer.errors)

    def test_representations(self):
        def valid(data):
            return RepresentationSerializer(data=data).is_valid()

        self.assertTrue(valid({"family": "mcmullen", "theta": 0.3}))
        self.assertFalse(valid({"family": "mcmullen"}))
        self.assertFalse(valid({"rank": 2}))
        boost = [[1.5430806348, 1.1752011936], [1.1752011936, 1.5430806348]]
        self.assertTrue(valid({"generators": [boost]}))
        for extra in ({"rank": 2}, {"base_point": [1.0, 0.0, 0.0]}):
            self.assertFalse(valid({"generators": [boost], **extra}))
        self.assertFalse(valid({"generators": [[[1.0, 0.0]]]}))

    def test_trees(self):
        self.assertTrue(TreeSerializer(data={"preset": "rose", "petals": 3}).is_valid())
        for data in (
            {"preset": "mcmullen_limit_tree", "petals": 3},
            {"preset": "rose", "vertices": ["o"]},
            {"preset": "tripod"},
            {"vertices": ["o"], "loops": [["+e"]]},
        ):
            self.assertFalse(TreeSerializer(data=data).is_valid(), data)
        edge = {"u": "o", "v": "o", "len": 0.0, "label": "e"}
        serializer = TreeSerializer(
            data={"vertices": ["o"], "edges": [edge], "loops": [["+e"]]}
        )
        self.assertFalse(serializer.is_valid())

    def test_sweeps(self):
        serializer = SweepSerializer(data={"theta_list": [0.2, 0.1]})
        self.assertTrue(serializer.is_valid())
        data = serializer.validated_data
        self.assertEqual(
            (data["family"], data["s"], data["l_max"], data["eps0"]),
            ("mcmullen", 1.0, 4, 0.5),
        )
        self.assertEqual(
            serializer.member_descriptors(),
            [{"family": "mcmullen", "theta": theta} for theta in (0.2, 0.1)],
        )
        for theta_list in ([0.1, 0.2], [0.2, 0.2], [1.5, 0.1], []):
            serializer = SweepSerializer(
                data={"family": "mcmullen", "theta_list": theta_list}
            )
            self.assertFalse(serializer.is_valid(), theta_list)
        member = {"family": "mcmullen", "theta": 0.2}
        generic = SweepSerializer(data={"family": "generic", "members": [member]})
        self.assertFalse(generic.is_valid())

    def test_kernels(self):
        serializer = KernelSerializer(data={"tree_distances": STAR, "s": 1.0})
        self.assertTrue(serializer.is_valid())
        self.assertEqual(serializer.validated_data["source"], "tree_distances")
        for data in (
            {},
            {"tree_distances": STAR},
            {"tree_distances": STAR, "distances": STAR, "s": 1.0},
            {"kernel": [[1.0]], "t": 0.5},
            {"distances": [[0.0, 1.0]]},
        ):
            self.assertFalse(KernelSerializer(data=data).is_valid(), data)

    def test_run_config(self):
        self.assertTrue(RunConfigSerializer(data={"command": "check"}).is_valid())
        self.assertFalse(RunConfigSerializer(data={"command": "dim"}).is_valid())
        serializer = RunConfigSerializer(
            data={"command": "dim", "input": "a.json", "output": "out", "tol": 0.0}
        )
        self.assertFalse(serializer.is_valid())
        self.assertIn("tol", serializer.errors)


class TestOutput(SimpleTestCase):
    def test_values(self):
        self.assertEqual(format_value(0.1), "0.10000000000000001")
        self.assertEqual(float(format_value(math.pi)), math.pi)
        self.assertEqual(format_value(True), "true")
        self.assertEqual(format_value(3), "3")
        self.assertEqual(format_value(None), "")
        self.assertEqual(format_value(math.nan), "nan")

    def test_config_hash_ignores_key_order(self):
        self.assertEqual(
            config_hash({"a": 1, "b": [2.0]}), config_hash({"b": [2.0], "a": 1})
        )
        self.assertNotEqual(config_hash({"a": 1}), config_hash({"a": 2}))

    @override_settings(SCHOTTKYDIM_VERSION="9.9.9")
    def test_csv_header(self):
        text = render_csv(("x", "y"), [{"x": 1, "y": 0.5}], header({"a": 1}, 7))
        lines = text.splitlines()
        self.assertEqual(lines[0], "# tool_version: 9.9.9")
        self.assertEqual(lines[1], f"# config_hash: {config_hash({'a': 1})}")
        self.assertEqual(lines[2], "# seed: 7")
        self.assertEqual(lines[3:], ["x,y", "1,0.5"])

    def test_files_are_written_together(self):
        with tempfile.TemporaryDirectory() as tmp:
            prefix = os.path.join(tmp, "nested", "run")
            files = ResultFiles(prefix, header({}, 0))
            files.add_json(".json", {"b": 1, "a": [0.25]})
            files.add_csv(".csv", ("a",), [{"a": 2}])
            self.assertFalse(os.path.exists(os.path.dirname(prefix)))
            written = files.write()
            self.assertEqual(written, [prefix + ".json", prefix + ".csv"])
            payload = read_json(prefix + ".json")
            self.assertEqual(list(payload), ["a", "b", "header"])
            self.assertEqual(payload["header"]["seed"], 0)


class TestInvariants(SimpleTestCase):
    def test_suite_passes_and_is_reproducible(self):
        first = run_checks(seed=3, trials=4)
        self.assertEqual(len(first), len(PROPERTIES))
        for result in first:
            self.assertTrue(result.passed, result.line())
            self.assertTrue(result.line().startswith("PASS "))
        self.assertEqual(first, run_checks(seed=3, trials=4))

    def test_geometry_suite_at_full_count(self):
        results = run_checks(seed=0, prefix="geometry.")
        self.assertEqual(len(results), 6)
        for result in results:
            self.assertEqual(result.trials, 10_000)
            self.assertTrue(result.passed, result.line())

    def test_kernel_suite_at_full_count(self):
        results = run_checks(seed=0, prefix="kernels.")
        self.assertEqual(len(results), 3)
        for result in results:
            self.assertEqual(result.trials, 1_000)
            self.assertTrue(result.passed, result.line())

    @override_settings(SCHOTTKYDIM_CHECK_TRIALS=2)
    def test_setting_overrides_every_count(self):
        results = run_checks(seed=1, prefix="trees.")
        self.assertEqual([result.trials for result in results], [2, 2])


class TestCommand(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def config(self, data, name="config.json"):
        with open(self.path(name), "w", encoding="utf-8") as f:
            f.write(data if isinstance(data, str) else json.dumps(data))
        return self.path(name)

    def run_command(self, command, config, output="out", *args):
        stdout = StringIO()
        call_command(
            "schottkydim",
            command,
            "--input",
            self.config(config),
            "--output",
            self.path(output),
            *args,
            stdout=stdout,
        )
        return stdout.getvalue()

    def read(self, name):
        with open(self.path(name), encoding="utf-8") as f:
            return f.read()

    def test_dim(self):
        config = {"family": "mcmullen", "theta": 0.3, "depth": 8}
        self.run_command("dim", config, "a")
        self.run_command("dim", config, "b")
        result = read_json(self.path("a.json"))
        delta, (lo, hi) = result["result"]["delta"], result["result"]["bracket"]
        self.assertLessEqual(lo, delta)
        self.assertLessEqual(delta, hi)
        self.assertGreater(result["diagnostics"]["r_joint"], 0.0)
        self.assertEqual(self.read("a.json"), self.read("b.json"))
        self.assertEqual(self.read("a_depths.csv"), self.read("b_depths.csv"))
        head, rows = read_csv(self.path("a_depths.csv"))
        self.assertEqual(head["seed"], "0")
        self.assertEqual(len(rows), result["result"]["depth_used"])
        self.assertTrue(all(row["runtime_ms"] == "" for row in rows))

    def test_timings_fill_runtime_column(self):
        config = {"family": "mcmullen", "theta": 0.3}
        self.run_command("dim", config, "out", "--depth", "5", "--timings")
        _, rows = read_csv(self.path("out_depths.csv"))
        self.assertEqual(len(rows), 5)
        self.assertTrue(all(float(row["runtime_ms"]) >= 0 for row in rows))

    def test_tree_dim(self):
        self.run_command("tree-dim", {"preset": "mcmullen_limit_tree", "depth": 12})
        result = read_json(self.path("out.json"))
        self.assertAlmostEqual(result["result"]["delta"], 2 * math.log(2), delta=1e-3)
        self.assertEqual(result["rank"], 2)

    def test_malformed_input_writes_nothing(self):
        for config in ("{not json", {"family": "mcmullen", "theta": 0.3, "x": 1}):
            with self.assertRaises(CommandError) as cm:
                self.run_command("dim", config)
            self.assertEqual(cm.exception.returncode, 2)
        with self.assertRaises(CommandError) as cm:
            call_command("schottkydim", "dim", "--input", self.path("missing.json"))
        self.assertEqual(cm.exception.returncode, 2)
        self.assertEqual(os.listdir(self.tmp.name), ["config.json"])

    def test_numeric_failures_name_the_app(self):
        with self.assertRaises(CommandError) as cm:
            self.run_command("tree-dim", {"preset": "rose"}, "out", "--depth", "2")
        self.assertEqual(cm.exception.returncode, 3)
        self.assertTrue(str(cm.exception).startswith("dimension: DepthTooSmall"))
        self.assertFalse(os.path.exists(self.path("out.json")))

    def test_linear_algebra_failures_exit_with_3(self):
        failure = np.linalg.LinAlgError("Matrix is not positive definite")
        with mock.patch("kernels.realize.pivoted_cholesky", side_effect=failure):
            with self.assertRaises(CommandError) as cm:
                self.run_command("embed", {"tree_distances": STAR, "s": 1.0})
        self.assertEqual(cm.exception.returncode, 3)
        self.assertTrue(str(cm.exception).startswith("kernels: LinAlgError"))
        self.assertEqual(os.listdir(self.tmp.name), ["config.json"])

    def test_value_errors_exit_with_3(self):
        with mock.patch(
            "runs.management.commands.schottkydim.gram_realize",
            side_effect=ValueError("array must not contain infs or NaNs"),
        ):
            with self.assertRaises(CommandError) as cm:
                self.run_command("embed", {"tree_distances": STAR, "s": 1.0})
        self.assertEqual(cm.exception.returncode, 3)
        self.assertIn("ValueError: array must not contain infs", str(cm.exception))
        self.assertEqual(os.listdir(self.tmp.name), ["config.json"])

    def test_embed(self):
        self.run_command("embed", {"tree_distances": STAR, "s": 1.0})
        _, rows = read_csv(self.path("out.csv"))
        self.assertEqual(len(rows), 4)
        self.assertEqual(rows[0]["x0"], "1")
        payload = read_json(self.path("out.json"))
        self.assertLessEqual(payload["realization"]["residual"], 1e-9)
        self.assertEqual(payload["realization"]["size"], 4)
        self.assertEqual(payload["qi_bounds"]["violations"], [])
        self.run_command("embed", {"kernel": [[1.0, 2.0], [2.0, 1.0]]}, "raw")
        self.assertNotIn("qi_bounds", read_json(self.path("raw.json")))

    def test_align(self):
        config = {"representation": {"family": "mcmullen", "theta": 0.2}, "l": 1}
        self.run_command("align", config)
        report = read_json(self.path("out.json"))["report"]
        self.assertEqual(report["points"], 22)
        self.assertEqual(report["eps"], 0.25)
        self.assertEqual(report["passes"], report["alignment_error"] <= report["eps"])
        _, rows = read_csv(self.path("out_distances.csv"))
        self.assertEqual(len(rows), 10)

    def test_sweep_is_independent_of_threads(self):
        config = {"family": "mcmullen", "theta_list": [0.2, 0.1], "l_max": 1}
        self.run_command("mcmullen-sweep", config, "one", "--depth", "6")
        self.run_command(
            "mcmullen-sweep", config, "two", "--depth", "6", "--threads", "2"
        )
        for suffix in (".csv", "_plot.csv", "_divergence.csv", "_ell.csv", ".json"):
            self.assertEqual(self.read("one" + suffix), self.read("two" + suffix))
        _, rows = read_csv(self.path("one.csv"))
        self.assertEqual([float(row["theta"]) for row in rows], [0.2, 0.1])
        _, ell = read_csv(self.path("one_ell.csv"))
        self.assertEqual(list(ell[0]), ["theta", "ell", "gap_1", "error_1"])
        summary = read_json(self.path("one.json"))["summary"]
        self.assertTrue(summary["diverging"])

    def test_sweep_without_levels_skips_ell(self):
        config = {"family": "mcmullen", "theta_list": [0.2], "l_max": 0}
        self.run_command("mcmullen-sweep", config, "out", "--depth", "5")
        self.assertFalse(os.path.exists(self.path("out_ell.csv")))
        self.assertIsNone(read_json(self.path("out.json"))["summary"]["intercept"])

    def test_probe_continuity(self):
        config = {
            "representation": {"family": "mcmullen", "theta": 0.3},
            "eps_list": [0.1, 0.01],
            "mode": "conjugation",
            "depth": 6,
        }
        self.run_command("probe-continuity", config)
        _, rows = read_csv(self.path("out.csv"))
        self.assertEqual([float(row["eps"]) for row in rows], [0.1, 0.01])
        for row in rows:
            width = float(row["hi"]) - float(row["lo"])
            self.assertLessEqual(float(row["deviation"]), width)

    @override_settings(SCHOTTKYDIM_CHECK_TRIALS=3)
    def test_check(self):
        stdout = StringIO()
        call_command("schottkydim", "check", "--seed", "5", stdout=stdout)
        lines = stdout.getvalue().splitlines()
        self.assertEqual(len(lines), len(PROPERTIES) + 1)
        self.assertTrue(all(line.startswith("PASS ") for line in lines[:-1]))
        self.assertEqual(lines[-1], f"all {len(PROPERTIES)} properties passed")
