"""In-memory model of GSN assurance cases and assurance case patterns.

A :class:`GsnGraph` holds elements, the two GSN relationship kinds and the
pattern annotations (choice, multiplicity, optionality).  Graphs are
immutable; every transformation in the package returns a new graph.
"""

from __future__ import annotations

import re
from collections import Counter, deque
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator


class GsnError(Exception):
    """Base class for all structural errors raised by the package."""


class CycleDetected(GsnError):
    pass


class MultipleRoots(GsnError):
    pass


class UnreachableElement(GsnError):
    pass


class ElementKind(str, Enum):
    GOAL = "Goal"
    STRATEGY = "Strategy"
    SOLUTION = "Solution"
    CONTEXT = "Context"
    ASSUMPTION = "Assumption"
    JUSTIFICATION = "Justification"

    @classmethod
    def parse(cls, token: str) -> "ElementKind":
        try:
            return cls(token)
        except ValueError:
            raise ValueError(f"{token!r} is not a GSN element kind") from None

    @property
    def is_contextual(self) -> bool:
        return self in CONTEXTUAL_KINDS

    @property
    def can_be_developed(self) -> bool:
        return self in (ElementKind.GOAL, ElementKind.STRATEGY)


CONTEXTUAL_KINDS = frozenset(
    {ElementKind.CONTEXT, ElementKind.ASSUMPTION, ElementKind.JUSTIFICATION}
)

# Conventional id prefixes; only checked by lint_prefixes and the prose parser.
KIND_PREFIX = {
    ElementKind.GOAL: "G",
    ElementKind.STRATEGY: "S",
    ElementKind.SOLUTION: "Sn",
    ElementKind.CONTEXT: "C",
    ElementKind.ASSUMPTION: "A",
    ElementKind.JUSTIFICATION: "J",
}


def prefix_consistent(element_id: str, kind: ElementKind) -> bool:
    """True when ``element_id`` starts with the conventional prefix of ``kind``."""
    head = re.match(r"[A-Za-z]*", element_id).group(0)
    if kind is ElementKind.SOLUTION:
        return head.lower().startswith("sn")
    if kind is ElementKind.STRATEGY:
        return head[:1].upper() == "S" and not head.lower().startswith("sn")
    return head[:1].upper() == KIND_PREFIX[kind]


class Decorator(str, Enum):
    UNDEVELOPED = "Undeveloped"
    UNINSTANTIATED = "Uninstantiated"
    UNDEVELOP_STANTIATED = "UndevelopStantiated"


PLACEHOLDER_RE = re.compile(r"\{[^{}]*\}")


def placeholder_spans(text: str) -> list[tuple[int, int]]:
    return [m.span() for m in PLACEHOLDER_RE.finditer(text)]


@dataclass(frozen=True)
class Element:
    id: str
    kind: ElementKind
    description: str
    decorators: frozenset = frozenset()
    # None means "derive from the description".
    has_placeholder: bool = None  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "kind", ElementKind(self.kind))
        object.__setattr__(
            self, "decorators", frozenset(Decorator(d) for d in self.decorators)
        )
        if self.has_placeholder is None:
            object.__setattr__(self, "has_placeholder", self.placeholder_count > 0)

    @property
    def placeholder_count(self) -> int:
        return len(PLACEHOLDER_RE.findall(self.description))

    @property
    def braces_present(self) -> bool:
        return self.placeholder_count > 0


@dataclass(frozen=True)
class CardinalityLabel:
    """An ``m of n`` label; ``None`` stands for the ``*`` wildcard."""

    m: int | None
    n: int | None

    _RE = re.compile(r"^\s*(\d+|\*)\s+of\s+(\d+|\*)\s*$")

    @classmethod
    def parse(cls, text: str) -> "CardinalityLabel":
        match = cls._RE.match(text)
        if not match:
            raise ValueError(f"malformed cardinality label {text!r}")
        m, n = (None if g == "*" else int(g) for g in match.groups())
        return cls(m, n)

    def __str__(self) -> str:
        show = lambda v: "*" if v is None else str(v)  # noqa: E731
        return f"{show(self.m)} of {show(self.n)}"

    @property
    def is_well_formed(self) -> bool:
        if self.m is not None and self.m < 0:
            return False
        if self.n is not None and self.n < 1:
            return False
        if self.m is not None and self.n is not None and self.m > self.n:
            return False
        return True

    def bounds(self, cap: int) -> tuple[int, int]:
        lower = 0 if self.m is None else self.m
        upper = cap if self.n is None else self.n
        return lower, upper

    def admits(self, count: int, cap: int = 16) -> bool:
        lower, upper = self.bounds(cap)
        return lower <= count <= upper


class RelationKind(str, Enum):
    SUPPORTED_BY = "SupportedBy"
    IN_CONTEXT_OF = "InContextOf"


@dataclass(frozen=True)
class Relationship:
    kind: RelationKind
    source: str
    targets: tuple[str, ...]
    depth: int
    side: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", RelationKind(self.kind))
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.targets:
            raise ValueError(f"{self.kind.value} from {self.source} has no targets")

    def pairs(self) -> Iterator[tuple[str, str]]:
        for target in self.targets:
            yield self.source, target


class AnnotationKind(str, Enum):
    CHOICE = "Choice"
    MULTIPLICITY = "Multiplicity"
    OPTIONAL = "Optional"


@dataclass(frozen=True)
class PatternAnnotation:
    kind: AnnotationKind
    source: str
    targets: tuple[str, ...]
    label: CardinalityLabel | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", AnnotationKind(self.kind))
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.targets:
            raise ValueError(f"{self.kind.value} annotation on {self.source} has no targets")

    @property
    def key(self) -> str:
        """Reference used by binding plans, e.g. ``S1->G3``."""
        return f"{self.source}->{','.join(self.targets)}"


@dataclass(frozen=True)
class Summary:
    elements: int = 0
    relationships: int = 0
    decorators: int = 0
    placeholders: int = 0


def natural_key(text: str) -> tuple:
    """Sort key ordering ``G2`` before ``G10`` and ``G3.2`` before ``G3.10``."""
    return tuple(
        (0, int(part), "") if part.isdigit() else (1, 0, part)
        for part in re.split(r"(\d+)", text)
        if part
    )


@dataclass(frozen=True, eq=False)
class GsnGraph:
    """Element, relationship and annotation store for one AC or ACP.

    Equality is structural: statement order does not matter.
    """

    elements: tuple[Element, ...] = ()
    relationships: tuple[Relationship, ...] = ()
    annotations: tuple[PatternAnnotation, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "relationships", tuple(self.relationships))
        object.__setattr__(self, "annotations", tuple(self.annotations))

    # -- lookup -----------------------------------------------------------

    @cached_property
    def _by_id(self) -> dict[str, Element]:
        index: dict[str, Element] = {}
        for element in self.elements:
            index.setdefault(element.id, element)
        return index

    def __contains__(self, element_id: str) -> bool:
        return element_id in self._by_id

    def __len__(self) -> int:
        return len(self.elements)

    def element(self, element_id: str) -> Element:
        return self._by_id[element_id]

    def get(self, element_id: str) -> Element | None:
        return self._by_id.get(element_id)

    @property
    def ids(self) -> list[str]:
        return [e.id for e in self.elements]

    def pairs(self, kind: RelationKind | None = None) -> list[tuple[str, str]]:
        return [
            pair
            for rel in self.relationships
            if kind is None or rel.kind is kind
            for pair in rel.pairs()
        ]

    @cached_property
    def _children(self) -> dict[str, list[tuple[RelationKind, str]]]:
        out: dict[str, list[tuple[RelationKind, str]]] = {}
        for rel in self.relationships:
            for target in rel.targets:
                out.setdefault(rel.source, []).append((rel.kind, target))
        return out

    @cached_property
    def _parents(self) -> dict[str, list[tuple[RelationKind, str]]]:
        out: dict[str, list[tuple[RelationKind, str]]] = {}
        for rel in self.relationships:
            for target in rel.targets:
                out.setdefault(target, []).append((rel.kind, rel.source))
        return out

    def children(self, element_id: str, kind: RelationKind | None = None) -> list[str]:
        return [t for k, t in self._children.get(element_id, []) if kind is None or k is kind]

    def parents(self, element_id: str, kind: RelationKind | None = None) -> list[str]:
        return [s for k, s in self._parents.get(element_id, []) if kind is None or k is kind]

    def roots(self) -> list[str]:
        """Non-contextual elements without an incoming SupportedBy."""
        return [
            e.id
            for e in self.elements
            if not e.kind.is_contextual and not self.parents(e.id, RelationKind.SUPPORTED_BY)
        ]

    @property
    def root(self) -> str | None:
        roots = self.roots()
        return roots[0] if len(roots) == 1 else None

    def descendants(self, element_id: str) -> list[str]:
        """Everything below ``element_id`` through either relationship kind, pre-order."""
        seen: set[str] = set()
        out: list[str] = []
        stack = list(reversed(self.children(element_id)))
        while stack:
            current = stack.pop()
            if current in seen:
                continue
            seen.add(current)
            out.append(current)
            stack.extend(reversed(self.children(current)))
        return out

    # -- structural equality ----------------------------------------------

    def canonical(self) -> tuple:
        elements = sorted(
            (e.id, e.kind.value, e.description, tuple(sorted(d.value for d in e.decorators)), e.has_placeholder)
            for e in self.elements
        )
        relationships = sorted(
            (r.kind.value, r.source, target, r.depth, r.side or "")
            for r in self.relationships
            for target in r.targets
        )
        annotations = sorted(
            (a.kind.value, a.source, a.targets, str(a.label) if a.label else "")
            for a in self.annotations
        )
        return tuple(elements), tuple(relationships), tuple(annotations)

    def __eq__(self, other):
        if not isinstance(other, GsnGraph):
            return NotImplemented
        return self.canonical() == other.canonical()

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"GsnGraph({len(self.elements)} elements, {len(self.pairs())} relationship pairs, "
            f"{len(self.annotations)} annotations)"
        )

    def evolve(self, **changes) -> "GsnGraph":
        return replace(self, **changes)


def count_summary(graph: GsnGraph) -> Summary:
    """Dataset statistics: per-pair relationships, per-occurrence decorators,
    per-``{}``-span placeholders."""
    return Summary(
        elements=len(graph.elements),
        relationships=len(graph.pairs()),
        decorators=sum(len(e.decorators) for e in graph.elements) + len(graph.annotations),
        placeholders=sum(e.placeholder_count for e in graph.elements),
    )


def _find_cycle(graph: GsnGraph) -> list[str] | None:
    white, grey, black = 0, 1, 2
    colour = {e.id: white for e in graph.elements}
    for start in graph.ids:
        if colour.get(start) != white:
            continue
        path: list[str] = []
        stack: list[tuple[str, Iterator[str]]] = [
            (start, iter(graph.children(start, RelationKind.SUPPORTED_BY)))
        ]
        colour[start] = grey
        path.append(start)
        while stack:
            node, it = stack[-1]
            for child in it:
                state = colour.get(child, black)
                if state == grey:
                    return path[path.index(child):] + [child]
                if state == white:
                    colour[child] = grey
                    path.append(child)
                    stack.append((child, iter(graph.children(child, RelationKind.SUPPORTED_BY))))
                    break
            else:
                colour[node] = black
                path.pop()
                stack.pop()
    return None


def compute_depths(graph: GsnGraph, strict: bool = False) -> dict[str, int]:
    """Depth of every element; roots sit at depth 1.

    SupportedBy children are one level below their parent, InContextOf
    neighbours share the depth of their source.  When an element is
    reachable along several paths the shallowest one wins.
    """
    if not graph.elements:
        return {}
    cycle = _find_cycle(graph)
    if cycle:
        raise CycleDetected(" -> ".join(cycle))
    roots = graph.roots()
    if strict and len(roots) != 1:
        raise MultipleRoots(f"expected a single root, found {roots or 'none'}")
    depths: dict[str, int] = {}
    queue = deque()
    for root in roots:
        depths[root] = 1
        queue.append(root)
    while queue:
        node = queue.popleft()
        for kind, child in graph._children.get(node, []):
            if child not in graph or child in depths:
                continue
            depths[child] = depths[node] + (1 if kind is RelationKind.SUPPORTED_BY else 0)
            queue.append(child)
    missing = [e.id for e in graph.elements if e.id not in depths]
    if missing:
        raise UnreachableElement(", ".join(missing))
    return depths


def assign_depths(graph: GsnGraph) -> GsnGraph:
    """Return ``graph`` with every relationship depth recomputed."""
    depths = compute_depths(graph)
    return graph.evolve(
        relationships=tuple(replace(r, depth=depths[r.source]) for r in graph.relationships)
    )


def is_instantiated_case(graph: GsnGraph) -> bool:
    if graph.annotations:
        return False
    pattern_only = {Decorator.UNINSTANTIATED, Decorator.UNDEVELOP_STANTIATED}
    for element in graph.elements:
        if element.decorators & pattern_only:
            return False
        if element.has_placeholder or element.braces_present:
            return False
    return True


def is_pattern(graph: GsnGraph) -> bool:
    return not is_instantiated_case(graph)


def lint_prefixes(graph: GsnGraph) -> list[str]:
    """Ids whose prefix does not follow the G/S/Sn/C/A/J convention."""
    return [e.id for e in graph.elements if not prefix_consistent(e.id, e.kind)]


def kind_histogram(graph: GsnGraph) -> Counter:
    return Counter(e.kind for e in graph.elements)


def group_relationships(
    kind: RelationKind, pairs: Iterable[tuple[str, str]], depths: dict[str, int]
) -> list[Relationship]:
    """Fold (source, target) pairs into one fan-out relationship per source."""
    grouped: dict[str, list[str]] = {}
    for source, target in pairs:
        grouped.setdefault(source, []).append(target)
    return [
        Relationship(kind, source, tuple(targets), depths.get(source, 1))
        for source, targets in grouped.items()
    ]


__all__ = [
    "AnnotationKind",
    "CardinalityLabel",
    "CONTEXTUAL_KINDS",
    "CycleDetected",
    "Decorator",
    "Element",
    "ElementKind",
    "GsnError",
    "GsnGraph",
    "KIND_PREFIX",
    "MultipleRoots",
    "PatternAnnotation",
    "RelationKind",
    "Relationship",
    "Summary",
    "UnreachableElement",
    "assign_depths",
    "compute_depths",
    "count_summary",
    "is_instantiated_case",
    "is_pattern",
    "kind_histogram",
    "lint_prefixes",
    "natural_key",
    "placeholder_spans",
    "prefix_consistent",
]
