"""One canonical mutation per validator rule, shared by the unit and acceptance suites."""

from __future__ import annotations

from dataclasses import replace

from gsn_forge.core import (
    AnnotationKind,
    CardinalityLabel,
    Decorator,
    Element,
    ElementKind,
    GsnGraph,
    PatternAnnotation,
    RelationKind,
    Relationship,
    compute_depths,
)

CASE_FIXTURE = "acas_xu"
PATTERN_FIXTURE = "bluerov2"


def _add(graph: GsnGraph, elements=(), relationships=(), annotations=()) -> GsnGraph:
    return graph.evolve(
        elements=graph.elements + tuple(elements),
        relationships=graph.relationships + tuple(relationships),
        annotations=graph.annotations + tuple(annotations),
    )


def _first(graph: GsnGraph, kind: ElementKind, pred=lambda e: True) -> Element:
    return next(e for e in graph.elements if e.kind is kind and pred(e))


def _depth(graph: GsnGraph, element_id: str) -> int:
    return compute_depths(graph)[element_id]


def r1(case: GsnGraph) -> GsnGraph:
    root = case.root
    return _add(case, relationships=[Relationship(RelationKind.IN_CONTEXT_OF, root, ("C999",), 1)])


def r2(case: GsnGraph) -> GsnGraph:
    s = _first(case, ElementKind.STRATEGY)
    return _add(
        case,
        [Element("Sn999", ElementKind.SOLUTION, "stray evidence")],
        [Relationship(RelationKind.SUPPORTED_BY, s.id, ("Sn999",), _depth(case, s.id))],
    )


def r3(case: GsnGraph) -> GsnGraph:
    sn = _first(case, ElementKind.SOLUTION)
    return _add(
        case,
        [Element("C999", ElementKind.CONTEXT, "context hung off evidence")],
        [Relationship(RelationKind.IN_CONTEXT_OF, sn.id, ("C999",), _depth(case, sn.id))],
    )


def r4(case: GsnGraph) -> GsnGraph:
    root = case.root
    return _add(
        case,
        [Element("C999", ElementKind.CONTEXT, "context used as support")],
        [Relationship(RelationKind.SUPPORTED_BY, root, ("C999",), 1)],
    )


def r5(case: GsnGraph) -> GsnGraph:
    goal = _first(
        case,
        ElementKind.GOAL,
        lambda e: any(case.element(c).kind is ElementKind.SOLUTION for c in case.children(e.id)),
    )
    return _add(case, relationships=[Relationship(RelationKind.SUPPORTED_BY, goal.id, (case.root,), _depth(case, goal.id))])


def r6(case: GsnGraph) -> GsnGraph:
    rels = list(case.relationships)
    rels[-1] = replace(rels[-1], depth=rels[-1].depth + 1)
    return case.evolve(relationships=tuple(rels))


def r7(case: GsnGraph) -> GsnGraph:
    elements = list(case.elements)
    elements[1] = replace(elements[1], description=elements[1].description + " {unclosed")
    return case.evolve(elements=tuple(elements))


def r8(pattern: GsnGraph) -> GsnGraph:
    anns = list(pattern.annotations)
    anns[0] = replace(anns[0], label=CardinalityLabel(3, 2))
    return pattern.evolve(annotations=tuple(anns))


def r9(pattern: GsnGraph) -> GsnGraph:
    sn = _first(pattern, ElementKind.SOLUTION)
    return _add(
        pattern,
        annotations=[PatternAnnotation(AnnotationKind.OPTIONAL, pattern.root, (sn.id,))],
    )


def r10(case: GsnGraph) -> GsnGraph:
    elements = list(case.elements)
    i = next(i for i, e in enumerate(elements) if e.kind is ElementKind.SOLUTION)
    elements[i] = replace(elements[i], decorators=frozenset({Decorator.UNDEVELOPED}))
    return case.evolve(elements=tuple(elements))


def r11(case: GsnGraph) -> GsnGraph:
    elements = list(case.elements)
    elements[0] = replace(elements[0], decorators=elements[0].decorators | {Decorator.UNINSTANTIATED})
    return case.evolve(elements=tuple(elements))


# rule -> (mutation, fixture kind, profile)
MUTATIONS = {
    "R1": (r1, "case", "case"),
    "R2": (r2, "case", "case"),
    "R3": (r3, "case", "case"),
    "R4": (r4, "case", "case"),
    "R5": (r5, "case", "case"),
    "R6": (r6, "case", "case"),
    "R7": (r7, "case", "case"),
    "R8": (r8, "pattern", "pattern"),
    "R9": (r9, "pattern", "pattern"),
    "R10": (r10, "case", "case"),
    "R11": (r11, "case", "case"),
}


def mutate(dataset, rule: str) -> tuple[GsnGraph, str]:
    fn, which, profile = MUTATIONS[rule]
    if which == "case":
        graph = dataset[CASE_FIXTURE].groundtruth
    else:
        graph = dataset[PATTERN_FIXTURE].pattern
    return fn(graph), profile
