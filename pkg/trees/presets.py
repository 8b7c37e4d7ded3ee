"""Named tree actions and JSON tree descriptors.

A descriptor is either {"preset": name, ...parameters} or

    {"vertices": [...], "edges": [{"u", "v", "len", "label"}, ...],
     "loops": [["+alpha", "+gamma"], ...], "base_vertex": name}

with the base vertex defaulting to the first vertex.
"""

from .graph import Edge, InvalidGraph, MetricGraph, TreeAction


def mcmullen_limit_tree(length=0.5):
    """Two vertices joined by edges alpha, beta, gamma, all oriented from p
    to q. Generator s_1 runs along gamma and back along alpha, s_2 along
    gamma and back along beta. The universal cover is the trivalent tree
    with edges of length 1/2."""
    graph = MetricGraph(
        vertices=("p", "q"),
        edges=tuple(
            Edge("p", "q", length, label) for label in ("alpha", "beta", "gamma")
        ),
        base_vertex="p",
    )
    loops = (("+gamma", "-alpha"), ("+gamma", "-beta"))
    descriptor = {"preset": "mcmullen_limit_tree", "length": length}
    return TreeAction.from_labels(graph, loops, descriptor)


def rose(petals=2, length=1.0):
    """One vertex with `petals` loops of the same length: the Cayley tree of
    the free group on `petals` generators."""
    labels = [f"e{i + 1}" for i in range(petals)]
    graph = MetricGraph(
        vertices=("o",),
        edges=tuple(Edge("o", "o", length, label) for label in labels),
        base_vertex="o",
    )
    descriptor = {"preset": "rose", "petals": petals, "length": length}
    return TreeAction.from_labels(graph, [[f"+{x}"] for x in labels], descriptor)


PRESETS = {
    "mcmullen_limit_tree": mcmullen_limit_tree,
    "rose": rose,
}


def tree_from_descriptor(descriptor):
    descriptor = dict(descriptor)
    preset = descriptor.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise InvalidGraph(f"unknown preset {preset!r}")
        return PRESETS[preset](**descriptor)
    vertices = tuple(descriptor["vertices"])
    edges = tuple(
        Edge(e["u"], e["v"], float(e["len"]), e["label"]) for e in descriptor["edges"]
    )
    graph = MetricGraph(
        vertices=vertices,
        edges=edges,
        base_vertex=descriptor.get("base_vertex") or vertices[0],
    )
    return TreeAction.from_labels(graph, descriptor["loops"], descriptor)
