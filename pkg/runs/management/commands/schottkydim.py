"""`manage.py schottkydim <command> --input config.json --output prefix`

Commands and the files they write under the output prefix:

    dim               <prefix>.json (result, diagnostics), <prefix>_depths.csv
    tree-dim          <prefix>.json, <prefix>_depths.csv
    mcmullen-sweep    <prefix>.csv, <prefix>_plot.csv, <prefix>.json (summary),
                      <prefix>_divergence.csv and, when l_max > 0, <prefix>_ell.csv
    embed             <prefix>.csv (realized points), <prefix>.json
    align             <prefix>.json (alignment report), <prefix>_distances.csv
    probe-continuity  <prefix>.csv
    check             one PASS/FAIL line per property, no files

Exits with 2 on invalid input and 3 when a computation fails, including
numpy and arithmetic errors; nothing is written in either case.
"""

import json
import logging

import numpy as np
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from degeneration.lift import DegenerationError, build_lift
from degeneration.pipeline import align, distance_table, headline_summary
from degeneration.tasks import (
    continuity_point_task,
    ell_search_task,
    headline_row_task,
)
from dimension.continuity import continuity_table
from dimension.pressure import DimensionError, hdim_pressure
from hyperbolic.geometry import GeometryError, HPoint, cosh_dist_matrix, dist_matrix
from kernels.kernels import KernelError, KernelMatrix, kernel_power, kernel_tree
from kernels.realize import gram_realize, qi_bounds_check
from runs.dispatch import run_tasks
from runs.invariants import run_checks
from runs.output import ResultFiles, header
from runs.serializers import (
    COMMANDS,
    AlignmentReportSerializer,
    AlignSerializer,
    ContinuitySerializer,
    DiagnosticsSerializer,
    KernelSerializer,
    PressureResultSerializer,
    QIReportSerializer,
    RealizationSerializer,
    RepresentationSerializer,
    RunConfigSerializer,
    SweepSerializer,
    TreeSerializer,
    descriptor,
)
from schottky.families import build_representation, is_diverging
from schottky.words import SchottkyError
from trees.graph import TreeError, hdim_tree_boundary
from trees.presets import tree_from_descriptor

logger = logging.getLogger(__name__)

APP_ERRORS = (
    GeometryError,
    SchottkyError,
    DimensionError,
    TreeError,
    KernelError,
    DegenerationError,
)
RUN_OPTIONS = (
    "command",
    "input",
    "output",
    "seed",
    "depth",
    "tol",
    "threads",
    "timings",
)
DEFAULT_TREE = {"preset": "mcmullen_limit_tree"}
SWEEP_OPTIONS = ("l_max", "eps0", "s", "subdivision", "gamma_cap", "method")

DEPTH_COLUMNS = ("n", "delta_n", "gap", "runtime_ms")
HEADLINE_COLUMNS = (
    "theta",
    "r_joint",
    "delta",
    "lo",
    "hi",
    "depth_used",
    "r_delta",
    "deviation",
    "two_log_delta",
)
CONTINUITY_COLUMNS = ("eps", "delta", "lo", "hi", "depth_used", "deviation")
DISTANCE_COLUMNS = ("u", "v", "tree", "rescaled", "gap")


def ell_table(rows, l_max):
    levels = range(1, l_max + 1)
    columns = (
        ("theta", "ell")
        + tuple(f"gap_{l}" for l in levels)
        + tuple(f"error_{l}" for l in levels)
    )
    table = []
    for row in rows:
        entry = {"theta": row["theta"], "ell": row["ell"]}
        for l, (gap, error) in enumerate(zip(row["gaps"], row["errors"]), start=1):
            entry[f"gap_{l}"], entry[f"error_{l}"] = gap, error
        table.append(entry)
    return columns, table


def build_kernel(data):
    """Kernel of a validated kernel descriptor, with the source distances, the
    embedding mode and its parameter for the quasi-isometry check (None for
    raw kernels)."""
    source = data["source"]
    if source == "kernel":
        return KernelMatrix(data["kernel"]), None, None, None
    if source == "tree_distances":
        D = np.asarray(data["tree_distances"], dtype=float)
        return kernel_tree(D, data["s"]), D, "exp", data["s"]
    t = data.get("t", 1.0)
    if source == "points":
        points = [HPoint(p) for p in data["points"]]
        cosh, D = cosh_dist_matrix(points), dist_matrix(points)
    else:
        D = np.asarray(data["distances"], dtype=float)
        cosh = np.cosh(D)
    return kernel_power(cosh, t), D, "power", t


def raising_app(e):
    """The app of the innermost traceback frame that belongs to one of ours."""
    apps = set(settings.INSTALLED_APPS)
    app = type(e).__module__.split(".")[0]
    tb = e.__traceback__
    while tb is not None:
        top = tb.tb_frame.f_globals.get("__name__", "").split(".")[0]
        if top in apps:
            app = top
        tb = tb.tb_next
    return app


class Command(BaseCommand):
    help = "Hausdorff dimensions, kernel realizations and degeneration sweeps"

    def add_arguments(self, parser):
        parser.add_argument("command", choices=COMMANDS)
        parser.add_argument("--input", help="JSON descriptor of the run")
        parser.add_argument("--output", help="path prefix of the result files")
        parser.add_argument("--seed", type=int, default=0)
        parser.add_argument("--depth", type=int, help="overrides the descriptor")
        parser.add_argument("--tol", type=float, help="overrides the descriptor")
        parser.add_argument(
            "--threads", type=int, help="SCHOTTKYDIM_THREADS by default"
        )
        parser.add_argument(
            "--timings", action="store_true", help="fill the runtime_ms columns"
        )

    def handle(self, *args, **options):
        run = self.validate(
            RunConfigSerializer, {name: options[name] for name in RUN_OPTIONS}
        ).validated_data
        if run["command"] == "check":
            return self.run_check(run)
        config = self.load(run["input"])
        handler = getattr(self, "run_" + run["command"].replace("-", "_"))
        try:
            files = handler(config, run)
        except APP_ERRORS as e:
            app = type(e).__module__.split(".")[0]
            logger.debug(f"{run['command']} failed", exc_info=True)
            raise CommandError(f"{app}: {type(e).__name__}: {e}", returncode=3)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
            logger.debug(f"{run['command']} failed", exc_info=True)
            raise CommandError(
                f"{raising_app(e)}: {type(e).__name__}: {e}", returncode=3
            )
        for path in files.write():
            self.stdout.write(f"wrote {path}")

    def validate(self, serializer_class, data):
        serializer = serializer_class(data=data)
        if not serializer.is_valid():
            errors = json.dumps(serializer.errors, sort_keys=True)
            raise CommandError(f"invalid configuration: {errors}", returncode=2)
        return serializer

    def load(self, path):
        try:
            with open(path, encoding="utf-8") as f:
                return json.load(f)
        except (OSError, ValueError) as e:
            raise CommandError(f"cannot read {path}: {e}", returncode=2)

    def numerics(self, run, data):
        depth, tol = run.get("depth"), run.get("tol")
        if depth is None:
            depth = data.get("depth", settings.SCHOTTKYDIM_DEPTH)
        if tol is None:
            tol = data.get("tol", settings.SCHOTTKYDIM_TOL)
        return depth, tol

    def threads(self, run):
        return run.get("threads") or settings.SCHOTTKYDIM_THREADS

    def files(self, run, data, depth=None, tol=None):
        config = {"command": run["command"], "config": data, "depth": depth, "tol": tol}
        return ResultFiles(run["output"], header(config, run["seed"]))

    def pressure_files(self, run, data, depth, tol, result, extra):
        files = self.files(run, data, depth, tol)
        rendered = PressureResultSerializer(result).data
        files.add_json(".json", {"result": rendered, **extra})
        rows = [dict(zip(DEPTH_COLUMNS, row)) for row in result.table]
        if not run["timings"]:
            for row in rows:
                row["runtime_ms"] = None
        files.add_csv("_depths.csv", DEPTH_COLUMNS, rows)
        return files

    def run_dim(self, config, run):
        data = self.validate(RepresentationSerializer, config).validated_data
        depth, tol = self.numerics(run, data)
        rep = build_representation(descriptor(data))
        result = hdim_pressure(rep, depth, tol)
        diagnostics = DiagnosticsSerializer(rep.diagnostics).data
        return self.pressure_files(
            run, data, depth, tol, result, {"diagnostics": diagnostics}
        )

    def run_tree_dim(self, config, run):
        data = self.validate(TreeSerializer, config).validated_data
        depth, tol = self.numerics(run, data)
        A = tree_from_descriptor(descriptor(data))
        result = hdim_tree_boundary(A, depth, tol)
        return self.pressure_files(run, data, depth, tol, result, {"rank": A.r})

    def run_mcmullen_sweep(self, config, run):
        serializer = self.validate(SweepSerializer, config)
        data = serializer.validated_data
        depth, tol = self.numerics(run, data)
        threads = self.threads(run)
        members = serializer.member_descriptors()

        rows = run_tasks(
            [headline_row_task.s(m, depth, tol) for m in members], threads
        )
        summary = headline_summary(rows)
        plot = summary.pop("plot")
        divergence = [{k: row[k] for k in ("theta", "r_joint")} for row in rows]
        summary["diverging"] = is_diverging(divergence)

        files = self.files(run, data, depth, tol)
        files.add_csv(".csv", HEADLINE_COLUMNS, rows)
        files.add_csv("_plot.csv", ("x", "y"), plot)
        files.add_csv("_divergence.csv", ("theta", "r_joint"), divergence)
        files.add_json(".json", {"summary": summary})
        if data["l_max"] > 0:
            tree = descriptor(data.get("tree", DEFAULT_TREE))
            options = {name: data[name] for name in SWEEP_OPTIONS}
            ell_rows = run_tasks(
                [ell_search_task.s(m, tree, options) for m in members], threads
            )
            files.add_csv("_ell.csv", *ell_table(ell_rows, data["l_max"]))
        return files

    def run_embed(self, config, run):
        data = self.validate(KernelSerializer, config).validated_data
        K, D, mode, param = build_kernel(data)
        R = gram_realize(K)
        payload = {"realization": RealizationSerializer(R).data}
        if D is not None:
            report = qi_bounds_check(D, R, mode, param)
            payload["qi_bounds"] = QIReportSerializer(report).data
        coordinates = [f"x{k}" for k in range(R.dim + 1)]
        rows = [
            {"point": i, **dict(zip(coordinates, u))} for i, u in enumerate(R.points)
        ]
        files = self.files(run, data)
        files.add_csv(".csv", ["point"] + coordinates, rows)
        files.add_json(".json", payload)
        return files

    def run_align(self, config, run):
        data = self.validate(AlignSerializer, config).validated_data
        rep = build_representation(descriptor(data["representation"]))
        tree = tree_from_descriptor(descriptor(data.get("tree", DEFAULT_TREE)))
        plan = build_lift(tree, rep, data["l"], data["subdivision"], data["gamma_cap"])
        report = align(plan, data["s"], data.get("eps"), data["method"])
        files = self.files(run, data)
        files.add_json(".json", {"report": AlignmentReportSerializer(report).data})
        files.add_csv("_distances.csv", DISTANCE_COLUMNS, distance_table(plan))
        return files

    def run_probe_continuity(self, config, run):
        data = self.validate(ContinuitySerializer, config).validated_data
        depth, tol = self.numerics(run, data)
        rep = descriptor(data["representation"])
        directions, mode = data.get("directions"), data["mode"]
        points = run_tasks(
            [
                continuity_point_task.s(rep, eps, directions, mode, depth, tol)
                for eps in [0.0] + list(data["eps_list"])
            ],
            self.threads(run),
        )
        files = self.files(run, data, depth, tol)
        rows = continuity_table(points[0], points[1:])
        files.add_csv(".csv", CONTINUITY_COLUMNS, rows)
        return files

    def run_check(self, run):
        results = run_checks(seed=run["seed"])
        for result in results:
            self.stdout.write(result.line())
        failed = [result.name for result in results if not result.passed]
        if failed:
            raise CommandError(
                f"{len(failed)} of {len(results)} properties failed", returncode=3
            )
        self.stdout.write(f"all {len(results)} properties passed")
