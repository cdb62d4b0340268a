"""Well-formedness rules for GSN assurance cases and patterns.

Rule registry:

====  ===================================================================
R1    identifier integrity: unique ids, relationships reference known ids
R2    a Strategy is SupportedBy Goals only
R3    only Goals and Strategies have outgoing relationships
R4    InContextOf targets are Context/Assumption/Justification, and
      SupportedBy never targets those kinds
R5    SupportedBy is acyclic with a single root Goal, every element is
      connected (error for cases, warning for patterns)
R6    stored relationship depths agree with computed depths
R7    placeholder braces balanced (error); HasPlaceholder flag agrees with
      the ``{}`` spans (warning)
R8    cardinality labels well formed, ``m <= n``
R9    annotations sit on Goal/Strategy sources and decorate existing
      relationships
R10   decorators legal for the element kind
R11   profile purity: ``case`` forbids pattern constructs, ``pattern``
      requires at least one
====  ===================================================================
"""

from __future__ import annotations

import json
from collections import Counter, deque
from dataclasses import asdict, dataclass

from .core import (
    AnnotationKind,
    Decorator,
    ElementKind,
    GsnGraph,
    RelationKind,
    _find_cycle,
    is_pattern,
)

RULES = {
    "R1": "identifier integrity",
    "R2": "strategy support targets",
    "R3": "relationship sources",
    "R4": "relationship target kinds",
    "R5": "single-rooted acyclic structure",
    "R6": "depth consistency",
    "R7": "placeholder consistency",
    "R8": "cardinality labels",
    "R9": "annotation placement",
    "R10": "decorator legality",
    "R11": "profile purity",
}

PROFILES = ("case", "pattern", "either")


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    severity: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule} {self.severity}: {self.subject}: {self.message}"


def errors(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.severity == "error"]


def _brace_balanced(text: str) -> bool:
    depth = 0
    for ch in text:
        if ch == "{":
            depth += 1
            if depth > 1:
                return False
        elif ch == "}":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def _depths(graph: GsnGraph) -> dict[str, int]:
    """Breadth-first depths from every root; unreachable ids are absent."""
    depths: dict[str, int] = {}
    queue = deque()
    for root in graph.roots():
        depths[root] = 1
        queue.append(root)
    while queue:
        node = queue.popleft()
        for child in graph.children(node, RelationKind.IN_CONTEXT_OF):
            if child in graph and child not in depths:
                depths[child] = depths[node]
                queue.append(child)
        for child in graph.children(node, RelationKind.SUPPORTED_BY):
            if child in graph and child not in depths:
                depths[child] = depths[node] + 1
                queue.append(child)
    return depths


def validate(graph: GsnGraph, profile: str = "either") -> list[Diagnostic]:
    """Evaluate R1..R11 in order; an empty result means accepted."""
    if profile not in PROFILES:
        raise ValueError(f"profile must be one of {PROFILES}")
    effective = profile
    if profile == "either":
        effective = "pattern" if is_pattern(graph) else "case"
    structural = "error" if effective == "case" else "warning"

    out: list[Diagnostic] = []

    def add(rule, subject, message, severity="error"):
        out.append(Diagnostic(rule, severity, subject, message))

    # R1
    for element_id, count in Counter(graph.ids).items():
        if count > 1:
            add("R1", element_id, f"id declared {count} times")
    for rel in graph.relationships:
        for ref in (rel.source, *rel.targets):
            if ref not in graph:
                add("R1", ref, f"{rel.kind.value} from {rel.source} references an unknown element")

    kind_of = {e.id: e.kind for e in graph.elements}

    # R2
    for source, target in graph.pairs(RelationKind.SUPPORTED_BY):
        if kind_of.get(source) is ElementKind.STRATEGY and target in kind_of:
            if kind_of[target] is not ElementKind.GOAL:
                add("R2", f"{source}->{target}", f"strategy supported by a {kind_of[target].value}")

    # R3
    for rel in graph.relationships:
        kind = kind_of.get(rel.source)
        if kind is not None and not kind.can_be_developed:
            add("R3", rel.source, f"a {kind.value} cannot be the source of {rel.kind.value}")

    # R4
    for source, target in graph.pairs(RelationKind.IN_CONTEXT_OF):
        if target in kind_of and not kind_of[target].is_contextual:
            add("R4", f"{source}->{target}", f"InContextOf targets a {kind_of[target].value}")
    for source, target in graph.pairs(RelationKind.SUPPORTED_BY):
        if target in kind_of and kind_of[target].is_contextual:
            add("R4", f"{source}->{target}", f"SupportedBy targets a {kind_of[target].value}")

    # R5
    cycle = _find_cycle(graph)
    if cycle:
        add("R5", cycle[0], "SupportedBy cycle " + " -> ".join(cycle))
    elif graph.elements:
        roots = graph.roots()
        if len(roots) != 1:
            add("R5", ",".join(roots) or "-", f"expected a single root, found {len(roots)}", structural)
        for root in roots:
            if kind_of[root] is not ElementKind.GOAL:
                add("R5", root, f"root is a {kind_of[root].value}, not a Goal", structural)
        reached = _depths(graph)
        for element in graph.elements:
            if element.id not in reached:
                add("R5", element.id, "element is not connected to any root", structural)

    # R6 needs an acyclic graph to be meaningful.
    if not cycle:
        depths = _depths(graph)
        for rel in graph.relationships:
            expected = depths.get(rel.source)
            if expected is not None and rel.depth != expected:
                add("R6", rel.source, f"{rel.kind.value} depth {rel.depth}, computed {expected}")

    # R7
    for element in graph.elements:
        if not _brace_balanced(element.description):
            add("R7", element.id, "unbalanced or nested placeholder braces")
        elif element.has_placeholder != element.braces_present:
            add(
                "R7",
                element.id,
                "HasPlaceholder flag without '{}' span"
                if element.has_placeholder
                else "'{}' span without HasPlaceholder flag",
                "warning",
            )

    # R8
    for ann in graph.annotations:
        if ann.label is None:
            continue
        if not ann.label.is_well_formed:
            add("R8", ann.key, f"label '{ann.label}' is not a valid m of n")
        elif (
            ann.kind is AnnotationKind.CHOICE
            and ann.label.n is not None
            and ann.label.n > len(ann.targets)
        ):
            add("R8", ann.key, f"choice label '{ann.label}' exceeds {len(ann.targets)} alternatives", "warning")

    # R9
    existing = set(graph.pairs())
    for ann in graph.annotations:
        if ann.source not in graph:
            add("R9", ann.key, f"annotation source {ann.source} is unknown")
            continue
        if not kind_of[ann.source].can_be_developed:
            add("R9", ann.key, f"annotation source is a {kind_of[ann.source].value}")
        for target in ann.targets:
            if (ann.source, target) not in existing:
                add("R9", ann.key, f"no relationship {ann.source}->{target} to decorate")

    # R10
    for element in graph.elements:
        decorators = element.decorators
        for decorator in (Decorator.UNDEVELOPED, Decorator.UNDEVELOP_STANTIATED):
            if decorator in decorators and not element.kind.can_be_developed:
                add("R10", element.id, f"{decorator.value} on a {element.kind.value}")
        if Decorator.UNDEVELOP_STANTIATED in decorators and (
            decorators & {Decorator.UNDEVELOPED, Decorator.UNINSTANTIATED}
        ):
            add("R10", element.id, "UndevelopStantiated combined with its component decorators")
        if decorators & {Decorator.UNDEVELOPED, Decorator.UNDEVELOP_STANTIATED} and graph.children(
            element.id, RelationKind.SUPPORTED_BY
        ):
            add("R10", element.id, "undeveloped element has supporting children", "warning")

    # R11
    if effective == "case":
        for ann in graph.annotations:
            add("R11", ann.key, f"{ann.kind.value} annotation in an assurance case")
        for element in graph.elements:
            pattern_decorators = element.decorators & {
                Decorator.UNINSTANTIATED,
                Decorator.UNDEVELOP_STANTIATED,
            }
            for decorator in sorted(pattern_decorators, key=lambda d: d.value):
                add("R11", element.id, f"{decorator.value} in an assurance case")
            if element.has_placeholder or element.braces_present:
                add("R11", element.id, "placeholder in an assurance case")
    elif effective == "pattern":
        has_marker = bool(graph.annotations) or any(
            e.has_placeholder
            or e.braces_present
            or e.decorators & {Decorator.UNINSTANTIATED, Decorator.UNDEVELOP_STANTIATED}
            for e in graph.elements
        )
        if not has_marker:
            add("R11", "-", "pattern has no annotations, uninstantiated elements or placeholders")

    return out


def to_json(diagnostics: list[Diagnostic]) -> str:
    return json.dumps([asdict(d) for d in diagnostics], indent=2)


__all__ = ["Diagnostic", "PROFILES", "RULES", "errors", "to_json", "validate"]
