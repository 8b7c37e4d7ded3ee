import math

from rest_framework import serializers

from dimension.continuity import MODES
from trees.presets import PRESETS

COMMANDS = (
    "dim",
    "tree-dim",
    "mcmullen-sweep",
    "embed",
    "align",
    "probe-continuity",
    "check",
)
METHODS = ("gram_schmidt", "procrustes")
NUMERIC_FIELDS = ("depth", "tol")


class StrictSerializer(serializers.Serializer):
    """Serializer that refuses fields it does not declare."""

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError(
                    {name: ["Unknown field."] for name in unknown}
                )
        return super().to_internal_value(data)


class FiniteFloatField(serializers.FloatField):
    """Floats that render NaN and infinities as null."""

    def to_representation(self, value):
        value = super().to_representation(value)
        return value if math.isfinite(value) else None


def vector_field(**kwargs):
    return serializers.ListField(child=serializers.FloatField(), **kwargs)


def matrix_field(**kwargs):
    return serializers.ListField(child=vector_field(min_length=1), **kwargs)


def check_square(matrix, name):
    if any(len(row) != len(matrix) for row in matrix):
        raise serializers.ValidationError(f"{name} must be a square matrix")
    return matrix


def descriptor(data):
    """The descriptor part of validated data, without depth and tol."""
    return {k: v for k, v in data.items() if k not in NUMERIC_FIELDS}


class NumericsSerializer(StrictSerializer):
    depth = serializers.IntegerField(min_value=1, required=False)
    tol = serializers.FloatField(min_value=0.0, required=False)

    def validate_tol(self, value):
        if not value > 0:
            raise serializers.ValidationError("tol must be positive")
        return value


class RunConfigSerializer(StrictSerializer):
    command = serializers.ChoiceField(choices=COMMANDS)
    input = serializers.CharField(required=False, allow_null=True)
    output = serializers.CharField(required=False, allow_null=True)
    seed = serializers.IntegerField(min_value=0, default=0)
    depth = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    tol = serializers.FloatField(required=False, allow_null=True)
    threads = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    timings = serializers.BooleanField(default=False)

    def validate_tol(self, value):
        if value is not None and not value > 0:
            raise serializers.ValidationError("tol must be positive")
        return value

    def validate(self, data):
        if data["command"] != "check":
            for name in ("input", "output"):
                if not data.get(name):
                    raise serializers.ValidationError(
                        {name: [f"required by {data['command']}"]}
                    )
        return data


class CapSerializer(StrictSerializer):
    """A light-cone vector and the visual radius at the origin."""

    center = vector_field(min_length=2)
    radius = serializers.FloatField()

    def validate_radius(self, value):
        if not 0 < value < 1:
            raise serializers.ValidationError("visual radius must lie in (0, 1)")
        return value


class DiskPairSerializer(StrictSerializer):
    minus = CapSerializer()
    plus = CapSerializer()


class RepresentationSerializer(NumericsSerializer):
    family = serializers.ChoiceField(choices=["mcmullen"], required=False)
    theta = serializers.FloatField(required=False)
    rank = serializers.IntegerField(min_value=1, required=False)
    generators = serializers.ListField(
        child=matrix_field(), min_length=1, required=False
    )
    base_point = vector_field(min_length=2, required=False)
    disks = DiskPairSerializer(many=True, required=False)

    def validate_generators(self, value):
        for matrix in value:
            check_square(matrix, "every generator")
            if len(matrix) != len(value[0]):
                raise serializers.ValidationError("generators differ in size")
        if len(value[0]) < 2:
            raise serializers.ValidationError("generators act on at least H^1")
        return value

    def validate(self, data):
        if data.get("family") == "mcmullen":
            if "theta" not in data:
                raise serializers.ValidationError({"theta": ["required by mcmullen"]})
            extra = {"rank", "generators", "base_point", "disks"} & set(data)
            if extra:
                raise serializers.ValidationError(
                    {name: ["not allowed with a family"] for name in sorted(extra)}
                )
            return data
        if "generators" not in data:
            raise serializers.ValidationError(
                {"generators": ["required without a family"]}
            )
        size = len(data["generators"][0])
        if "rank" in data and data["rank"] != len(data["generators"]):
            raise serializers.ValidationError(
                {"rank": [f"{len(data['generators'])} generators given"]}
            )
        if "base_point" in data and len(data["base_point"]) != size:
            raise serializers.ValidationError(
                {"base_point": [f"needs {size} coordinates"]}
            )
        if "disks" in data and len(data["disks"]) != len(data["generators"]):
            raise serializers.ValidationError({"disks": ["one pair per generator"]})
        return data


class EdgeSerializer(StrictSerializer):
    u = serializers.CharField()
    v = serializers.CharField()
    label = serializers.CharField()

    def get_fields(self):
        fields = super().get_fields()
        fields["len"] = serializers.FloatField()
        return fields

    def validate(self, data):
        if not data["len"] > 0:
            raise serializers.ValidationError({"len": ["must be positive"]})
        return data


class TreeSerializer(NumericsSerializer):
    preset = serializers.ChoiceField(choices=sorted(PRESETS), required=False)
    length = serializers.FloatField(required=False)
    petals = serializers.IntegerField(min_value=1, required=False)
    vertices = serializers.ListField(
        child=serializers.CharField(), min_length=1, required=False
    )
    edges = EdgeSerializer(many=True, required=False)
    loops = serializers.ListField(
        child=serializers.ListField(child=serializers.CharField(), min_length=1),
        min_length=1,
        required=False,
    )
    base_vertex = serializers.CharField(required=False)

    def validate_length(self, value):
        if not value > 0:
            raise serializers.ValidationError("length must be positive")
        return value

    def validate(self, data):
        graph = {"vertices", "edges", "loops", "base_vertex"} & set(data)
        if "preset" in data:
            extra = set(graph)
            if data["preset"] != "rose" and "petals" in data:
                extra.add("petals")
            if extra:
                raise serializers.ValidationError(
                    {name: ["not a parameter of the preset"] for name in sorted(extra)}
                )
            return data
        for name in ("vertices", "edges", "loops"):
            if name not in data:
                raise serializers.ValidationError({name: ["required without a preset"]})
        for name in ("length", "petals"):
            if name in data:
                raise serializers.ValidationError({name: ["only valid with a preset"]})
        return data


def check_decreasing(thetas, name):
    if any(a <= b for a, b in zip(thetas, thetas[1:])):
        raise serializers.ValidationError({name: ["must be strictly decreasing"]})
    if any(not 0 < theta < 1 for theta in thetas):
        raise serializers.ValidationError({name: ["every theta must lie in (0, 1)"]})


class SweepSerializer(NumericsSerializer):
    family = serializers.ChoiceField(
        choices=["mcmullen", "generic"], default="mcmullen"
    )
    theta_list = vector_field(min_length=1, required=False)
    members = RepresentationSerializer(many=True, required=False)
    s = serializers.FloatField(default=1.0)
    l_max = serializers.IntegerField(min_value=0, default=4)
    eps0 = serializers.FloatField(default=0.5)
    subdivision = serializers.IntegerField(min_value=0, default=2)
    gamma_cap = serializers.IntegerField(min_value=0, default=1)
    method = serializers.ChoiceField(choices=METHODS, default="procrustes")
    tree = TreeSerializer(required=False)

    def validate_eps0(self, value):
        if not value > 0:
            raise serializers.ValidationError("eps0 must be positive")
        return value

    def validate(self, data):
        if data["family"] == "mcmullen":
            if "theta_list" not in data or "members" in data:
                raise serializers.ValidationError(
                    {"theta_list": ["the mcmullen family is swept over theta_list"]}
                )
            check_decreasing(data["theta_list"], "theta_list")
            return data
        if "members" not in data or "theta_list" in data:
            raise serializers.ValidationError(
                {"members": ["a generic family lists its members"]}
            )
        for member in data["members"]:
            if "family" in member or "theta" not in member:
                raise serializers.ValidationError(
                    {"members": ["every member needs a theta and its generators"]}
                )
        check_decreasing([m["theta"] for m in data["members"]], "members")
        return data

    def member_descriptors(self):
        data = self.validated_data
        if data["family"] == "mcmullen":
            return [{"family": "mcmullen", "theta": t} for t in data["theta_list"]]
        return [descriptor(m) for m in data["members"]]


class KernelSerializer(StrictSerializer):
    """One source for the kernel: a raw kernel matrix, hyperboloid points,
    hyperbolic distances, or tree distances."""

    kernel = matrix_field(min_length=1, required=False)
    points = serializers.ListField(
        child=vector_field(min_length=2), min_length=1, required=False
    )
    distances = matrix_field(min_length=1, required=False)
    tree_distances = matrix_field(min_length=1, required=False)
    t = serializers.FloatField(required=False)
    s = serializers.FloatField(required=False)

    SOURCES = ("kernel", "points", "distances", "tree_distances")

    def validate(self, data):
        given = [name for name in self.SOURCES if name in data]
        if len(given) != 1:
            raise serializers.ValidationError(
                f"exactly one of {', '.join(self.SOURCES)} is needed, got {given}"
            )
        source = given[0]
        if source == "points":
            if any(len(p) != len(data["points"][0]) for p in data["points"]):
                raise serializers.ValidationError({"points": ["points differ in size"]})
        else:
            check_square(data[source], source)
        if source == "tree_distances":
            if "s" not in data or "t" in data:
                raise serializers.ValidationError({"s": ["tree kernels take s only"]})
        elif "s" in data:
            raise serializers.ValidationError({"s": ["only tree kernels take s"]})
        elif source == "kernel" and "t" in data:
            raise serializers.ValidationError({"t": ["a raw kernel takes no t"]})
        data["source"] = source
        return data


class AlignSerializer(StrictSerializer):
    representation = RepresentationSerializer()
    tree = TreeSerializer(required=False)
    l = serializers.IntegerField(min_value=0)
    s = serializers.FloatField(default=1.0)
    eps = serializers.FloatField(required=False)
    subdivision = serializers.IntegerField(min_value=0, default=2)
    gamma_cap = serializers.IntegerField(min_value=0, default=1)
    method = serializers.ChoiceField(choices=METHODS, default="procrustes")


class ContinuitySerializer(NumericsSerializer):
    representation = RepresentationSerializer()
    eps_list = vector_field(min_length=1)
    directions = serializers.ListField(child=matrix_field(), required=False)
    mode = serializers.ChoiceField(choices=MODES, default="generators")

    def validate_eps_list(self, value):
        if any(eps < 0 for eps in value):
            raise serializers.ValidationError("perturbation sizes are non-negative")
        return value

    def validate_directions(self, value):
        for matrix in value:
            check_square(matrix, "every direction")
        return value


# Output serializers


class DiagnosticsSerializer(serializers.Serializer):
    K = FiniteFloatField()
    C_K = FiniteFloatField()
    r_joint = FiniteFloatField()
    ball_radius = serializers.IntegerField()


class PressureResultSerializer(serializers.Serializer):
    delta = FiniteFloatField()
    depth_used = serializers.IntegerField()
    bracket = serializers.ListField(child=FiniteFloatField())
    width = FiniteFloatField()
    gap = FiniteFloatField()
    accelerated = serializers.BooleanField()


class AlignmentReportSerializer(serializers.Serializer):
    theta = FiniteFloatField()
    l = serializers.IntegerField()
    s = FiniteFloatField()
    t = FiniteFloatField()
    kernel_gap = FiniteFloatField()
    alignment_error = FiniteFloatField()
    eps = FiniteFloatField()
    passes = serializers.BooleanField()
    points = serializers.IntegerField()
    dims = serializers.ListField(child=serializers.IntegerField())
    ell_index = serializers.IntegerField()


class RealizationSerializer(serializers.Serializer):
    size = serializers.SerializerMethodField()
    dim = serializers.IntegerField()
    residual = FiniteFloatField()

    def get_size(self, obj):
        return len(obj.points)


class QIViolationSerializer(serializers.Serializer):
    i = serializers.IntegerField()
    j = serializers.IntegerField()
    bound = serializers.CharField()
    slack = FiniteFloatField()


class QIReportSerializer(serializers.Serializer):
    mode = serializers.CharField()
    param = FiniteFloatField()
    pairs = serializers.IntegerField()
    worst_slack = FiniteFloatField()
    violations = QIViolationSerializer(many=True)
