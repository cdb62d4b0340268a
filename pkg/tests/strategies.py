"""Hypothesis strategies and builders for random valid GSN graphs."""

from __future__ import annotations

from hypothesis import strategies as st

from gsn_forge.core import (
    AnnotationKind,
    CardinalityLabel,
    Decorator,
    Element,
    ElementKind,
    GsnGraph,
    KIND_PREFIX,
    PatternAnnotation,
    RelationKind,
    Relationship,
    assign_depths,
)

K = ElementKind
WORDS = st.text(
    alphabet=st.sampled_from("abcdefghijklmnopqrstuvwxyzABCXYZ0123456789'\",;.()/%&-\\"),
    min_size=1,
    max_size=10,
)
SENTENCE = st.lists(WORDS, min_size=1, max_size=8).map(" ".join)

# Which kinds may sit below which, and through which relationship.
SUPPORT_CHILDREN = {K.GOAL: [K.GOAL, K.STRATEGY, K.SOLUTION], K.STRATEGY: [K.GOAL]}
CONTEXT_CHILDREN = [K.CONTEXT, K.ASSUMPTION, K.JUSTIFICATION]


@st.composite
def tree_shapes(draw, max_nodes: int = 14):
    """(kind, parent index, relation) triples; node 0 is the root Goal."""
    nodes = [(K.GOAL, None, None)]
    size = draw(st.integers(1, max_nodes))
    while len(nodes) < size:
        open_parents = [i for i, (kind, _, _) in enumerate(nodes) if kind in SUPPORT_CHILDREN]
        parent = draw(st.sampled_from(open_parents))
        pkind = nodes[parent][0]
        if draw(st.integers(0, 3)) == 0:
            nodes.append((draw(st.sampled_from(CONTEXT_CHILDREN)), parent, RelationKind.IN_CONTEXT_OF))
        else:
            nodes.append((draw(st.sampled_from(SUPPORT_CHILDREN[pkind])), parent, RelationKind.SUPPORTED_BY))
    return nodes


def _ids(shape) -> list[str]:
    counters: dict[ElementKind, int] = {}
    out = []
    for kind, _, _ in shape:
        counters[kind] = counters.get(kind, 0) + 1
        out.append(f"{KIND_PREFIX[kind]}{counters[kind]}")
    return out


def _relationships(shape, ids) -> list[Relationship]:
    grouped: dict[tuple, list[str]] = {}
    for i, (_, parent, rel) in enumerate(shape):
        if parent is not None:
            grouped.setdefault((rel, ids[parent]), []).append(ids[i])
    return [Relationship(rel, source, tuple(targets), 1) for (rel, source), targets in grouped.items()]


@st.composite
def case_graphs(draw, max_nodes: int = 14):
    """A valid instantiated assurance case: single-root tree, no pattern markers."""
    shape = draw(tree_shapes(max_nodes))
    ids = _ids(shape)
    has_kids = {p for _, p, r in shape if r is RelationKind.SUPPORTED_BY}
    elements = []
    for i, (kind, _, _) in enumerate(shape):
        decorators = frozenset()
        if kind in (K.GOAL, K.STRATEGY) and i not in has_kids and draw(st.booleans()):
            decorators = frozenset({Decorator.UNDEVELOPED})
        elements.append(Element(ids[i], kind, draw(SENTENCE), decorators))
    return assign_depths(GsnGraph(elements, _relationships(shape, ids)))


@st.composite
def pattern_graphs(draw, max_nodes: int = 14):
    """A valid pattern: placeholders, Uninstantiated markers and annotations."""
    shape = draw(tree_shapes(max_nodes))
    ids = _ids(shape)
    elements = []
    for i, (kind, _, _) in enumerate(shape):
        text = draw(SENTENCE)
        decorators = set()
        if draw(st.booleans()):
            text += " {" + draw(st.sampled_from(["System", "Hazard", "X"])) + "}"
            decorators.add(Decorator.UNINSTANTIATED)
        elements.append(Element(ids[i], kind, text, frozenset(decorators)))
    if not any(e.decorators for e in elements):
        root = elements[0]
        elements[0] = Element(root.id, root.kind, root.description, frozenset({Decorator.UNINSTANTIATED}))
    annotations = []
    for i, (_, parent, rel) in enumerate(shape):
        if parent is None or rel is not RelationKind.SUPPORTED_BY or not draw(st.integers(0, 2)) == 0:
            continue
        kind = draw(st.sampled_from([AnnotationKind.MULTIPLICITY, AnnotationKind.OPTIONAL]))
        label = CardinalityLabel(draw(st.sampled_from([0, 1, None])), None) if kind is AnnotationKind.MULTIPLICITY else None
        annotations.append(PatternAnnotation(kind, ids[parent], (ids[i],), label))
    return assign_depths(GsnGraph(elements, _relationships(shape, ids), annotations))


@st.composite
def multiplicity_patterns(draw, max_nodes: int = 10):
    """(pattern, counts) with multiplicities on SupportedBy edges, counts 1..3."""
    shape = draw(tree_shapes(max_nodes))
    ids = _ids(shape)
    elements = [Element(ids[i], kind, f"node {ids[i]}") for i, (kind, _, _) in enumerate(shape)]
    annotations, counts = [], {}
    for i, (_, parent, rel) in enumerate(shape):
        if parent is None or not draw(st.booleans()):
            continue
        ann = PatternAnnotation(AnnotationKind.MULTIPLICITY, ids[parent], (ids[i],), CardinalityLabel(1, None))
        annotations.append(ann)
        counts[ann.key] = draw(st.integers(1, 3))
    graph = assign_depths(GsnGraph(elements, _relationships(shape, ids), annotations))
    return graph, counts


def brute_force_size(pattern: GsnGraph, counts: dict[str, int]) -> int:
    """Count nodes by literally cloning the tree, one copy at a time."""
    per_edge = {}
    for ann in pattern.annotations:
        for target in ann.targets:
            per_edge[(ann.source, target)] = counts[ann.key]

    def clone(node: str) -> int:
        total = 1
        for child in pattern.children(node):
            for _ in range(per_edge.get((node, child), 1)):
                total += clone(child)
        return total

    return sum(clone(root) for root in pattern.roots())
