"""Structured-prose hierarchy (``.gsnt``) used for ground truth and LLM output.

Each line holds one element; the number of leading dashes gives its level
and its parent is the nearest shallower line above it::

    Goal G1: ACAS Xu is acceptably secure
    - Context C1 (InContextOf): Operational environment of ACAS Xu
    - Strategy S1: Argument over identified threats
    -- Goal G2 [Undeveloped]: Threat T1 is mitigated

Contexts, Assumptions and Justifications attach to their parent through
InContextOf; every other kind through SupportedBy.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .core import (
    Decorator,
    Element,
    ElementKind,
    GsnError,
    GsnGraph,
    RelationKind,
    Relationship,
    compute_depths,
    prefix_consistent,
)


class AnomalyKind(str, Enum):
    UNKNOWN_ELEMENT_KIND = "UnknownElementKind"
    MISSING_ID = "MissingId"
    DUPLICATE_ID = "DuplicateId"
    INCONSISTENT_PREFIX = "InconsistentPrefix"
    ORPHAN_NODE = "OrphanNode"


@dataclass(frozen=True)
class ProseAnomaly:
    line: int
    kind: AnomalyKind
    detail: str


class ProseError(GsnError):
    pass


class ParseFailed(ProseError):
    def __init__(self, anomalies: list[ProseAnomaly]):
        lines = "; ".join(f"line {a.line}: {a.kind.value} ({a.detail})" for a in anomalies[:5])
        more = f" and {len(anomalies) - 5} more" if len(anomalies) > 5 else ""
        super().__init__(f"{len(anomalies)} anomalies: {lines}{more}")
        self.anomalies = anomalies


class EmptyInput(ProseError):
    pass


class NotATree(ProseError):
    pass


# Rogue kinds seen in LLM output, mapped onto GSN kinds.
ROGUE_KINDS = {
    "evidence": ElementKind.SOLUTION,
    "argument": ElementKind.STRATEGY,
    "inference": ElementKind.STRATEGY,
}

_KINDS = {k.value.lower(): k for k in ElementKind}
_DECORATORS = {d.value.lower(): d for d in Decorator}
_DASHES = "-–—"
_TAG_RE = re.compile(r"\((InContextOf|SupportedBy)\)", re.IGNORECASE)
_DECOR_RE = re.compile(r"\[([^\]]*)\]")
_ID_LIKE = re.compile(r"^[A-Za-z]{1,3}[0-9][\w.#~-]*$")
_PREFIX_KIND = [
    ("sn", ElementKind.SOLUTION),
    ("g", ElementKind.GOAL),
    ("s", ElementKind.STRATEGY),
    ("c", ElementKind.CONTEXT),
    ("a", ElementKind.ASSUMPTION),
    ("j", ElementKind.JUSTIFICATION),
]


@dataclass
class _Line:
    number: int
    level: int
    kind: ElementKind
    element_id: str | None
    description: str
    decorators: frozenset
    anomaly: ProseAnomaly | None = None


def _split_lead(text: str) -> tuple[int, str]:
    i = 0
    level = 0
    while i < len(text) and (text[i] in _DASHES or text[i].isspace()):
        if text[i] in _DASHES:
            level += 1
        i += 1
    return level, text[i:]


def _kind_from_id(token: str) -> ElementKind | None:
    lowered = token.lower()
    for prefix, kind in _PREFIX_KIND:
        if lowered.startswith(prefix):
            return kind
    return None


def _read_line(number: int, raw: str) -> _Line | ProseAnomaly | None:
    """Classify one line: an element, an unusable-but-flagged line, or noise."""
    level, rest = _split_lead(raw.strip())
    rest = rest.replace("**", "").replace("`", "").lstrip("#* ").strip()
    if ":" not in rest:
        return None
    head, description = rest.split(":", 1)
    description = description.strip()

    decorators: set[Decorator] = set()
    for group in _DECOR_RE.findall(head):
        for name in group.split(","):
            decorator = _DECORATORS.get(name.strip().lower())
            if decorator is not None:
                decorators.add(decorator)
    head = _DECOR_RE.sub(" ", _TAG_RE.sub(" ", head))
    tokens = [t.strip("()") for t in head.split()]
    tokens = [t for t in tokens if t]
    if not tokens or len(tokens) > 2:
        return None

    word = tokens[0]
    element_id = tokens[1] if len(tokens) == 2 else None
    anomaly = None
    kind = _KINDS.get(word.lower())
    if kind is None:
        if word.lower() in ROGUE_KINDS:
            kind = ROGUE_KINDS[word.lower()]
            anomaly = ProseAnomaly(
                number, AnomalyKind.UNKNOWN_ELEMENT_KIND, f"{word!r} read as {kind.value}"
            )
        elif element_id is None and _ID_LIKE.match(word) and _kind_from_id(word):
            # "G1: ..." with no kind word.
            kind = _kind_from_id(word)
            element_id = word
            anomaly = ProseAnomaly(
                number, AnomalyKind.UNKNOWN_ELEMENT_KIND, f"kind of {word!r} inferred from its prefix"
            )
        elif element_id is not None and _ID_LIKE.match(element_id):
            return ProseAnomaly(number, AnomalyKind.UNKNOWN_ELEMENT_KIND, f"{word!r} is not a GSN element")
        else:
            return None
    return _Line(number, level, kind, element_id, description, frozenset(decorators), anomaly)


def parse_prose(text: str, mode: str = "strict") -> tuple[GsnGraph, list[ProseAnomaly]]:
    """Parse dash-hierarchy prose.

    ``strict`` raises :class:`ParseFailed` on any anomaly.  ``lenient``
    records at most one anomaly per deviating line and repairs it: missing
    ids become ``X1``, ``X2``...; duplicate ids get a ``#n`` suffix; rogue
    kinds are mapped through :data:`ROGUE_KINDS`.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown mode {mode!r}")
    if not text.strip():
        raise EmptyInput("no prose to parse")

    anomalies: list[ProseAnomaly] = []
    lines: list[_Line] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        item = _read_line(number, raw)
        if item is None:
            if mode == "strict":
                anomalies.append(
                    ProseAnomaly(number, AnomalyKind.UNKNOWN_ELEMENT_KIND, "line is not an element")
                )
            continue
        if isinstance(item, ProseAnomaly):
            anomalies.append(item)
            continue
        lines.append(item)

    seen: dict[str, int] = {}
    synthetic = 0
    elements: list[Element] = []
    # (level, element id, kind) of the current ancestor chain.
    stack: list[tuple[int, str, ElementKind]] = []
    supported: dict[str, list[str]] = {}
    contextual: dict[str, list[str]] = {}
    roots = 0

    for line in lines:
        anomaly = line.anomaly
        element_id = line.element_id
        if element_id is None:
            synthetic += 1
            element_id = f"X{synthetic}"
            while element_id in seen:
                synthetic += 1
                element_id = f"X{synthetic}"
            anomaly = anomaly or ProseAnomaly(line.number, AnomalyKind.MISSING_ID, f"assigned {element_id}")
        elif element_id in seen:
            seen[element_id] += 1
            renamed = f"{element_id}#{seen[element_id]}"
            anomaly = anomaly or ProseAnomaly(
                line.number, AnomalyKind.DUPLICATE_ID, f"{element_id} repeated, renamed {renamed}"
            )
            element_id = renamed
        elif not prefix_consistent(element_id, line.kind):
            anomaly = anomaly or ProseAnomaly(
                line.number, AnomalyKind.INCONSISTENT_PREFIX, f"{element_id} names a {line.kind.value}"
            )
        seen.setdefault(element_id, 1)

        while stack and stack[-1][0] >= line.level:
            stack.pop()
        parent = None
        orphan_reason = None
        if stack:
            if stack[-1][0] != line.level - 1:
                orphan_reason = "skips a level"
            # Only goals and strategies may have children.
            for level, candidate, kind in reversed(stack):
                if kind.can_be_developed:
                    parent = candidate
                    break
                orphan_reason = orphan_reason or f"parent {candidate} cannot have children"
            if parent is None:
                orphan_reason = orphan_reason or "no goal or strategy above it"
        else:
            roots += 1
            if line.level != 0:
                orphan_reason = "indented line without a parent"
            elif roots > 1:
                orphan_reason = "second top-level element"
            elif line.kind.is_contextual:
                orphan_reason = f"{line.kind.value} at the top level"
        if orphan_reason:
            anomaly = anomaly or ProseAnomaly(line.number, AnomalyKind.ORPHAN_NODE, orphan_reason)

        if anomaly is not None:
            anomalies.append(anomaly)
        elements.append(Element(element_id, line.kind, line.description, line.decorators))
        if parent is not None:
            bucket = contextual if line.kind.is_contextual else supported
            bucket.setdefault(parent, []).append(element_id)
        stack.append((line.level, element_id, line.kind))

    if mode == "strict" and anomalies:
        raise ParseFailed(sorted(anomalies, key=lambda a: a.line))

    relationships = [
        Relationship(RelationKind.SUPPORTED_BY, src, tuple(tgts), 1) for src, tgts in supported.items()
    ] + [
        Relationship(RelationKind.IN_CONTEXT_OF, src, tuple(tgts), 1) for src, tgts in contextual.items()
    ]
    graph = GsnGraph(tuple(elements), tuple(relationships))
    try:
        depths = compute_depths(graph)
    except GsnError:
        depths = {}
    graph = graph.evolve(
        relationships=tuple(
            Relationship(r.kind, r.source, r.targets, depths.get(r.source, 1)) for r in relationships
        )
    )
    return graph, sorted(anomalies, key=lambda a: a.line)


def _line(element: Element, level: int) -> str:
    lead = "-" * level + (" " if level else "")
    tag = " (InContextOf)" if element.kind.is_contextual and level else ""
    decorators = [d.value for d in Decorator if d in element.decorators]
    decor = f" [{', '.join(decorators)}]" if decorators else ""
    description = " ".join(element.description.split("\n"))
    return f"{lead}{element.kind.value} {element.id}{tag}{decor}: {description}".rstrip()


def _check_tree(graph: GsnGraph) -> None:
    roots = graph.roots()
    if len(roots) != 1:
        raise NotATree(f"expected one root, found {len(roots)}")
    for element in graph.elements:
        if element.id == roots[0]:
            continue
        parents = graph.parents(element.id)
        if len(parents) != 1:
            raise NotATree(f"{element.id} has {len(parents)} parents")
    try:
        compute_depths(graph, strict=True)
    except GsnError as exc:
        raise NotATree(str(exc)) from None


def render_prose(graph: GsnGraph, strict: bool = True) -> str:
    """Pre-order rendering, contextual children first.

    With ``strict=False`` forests, shared children and unattached elements
    are rendered too (each element once), which the experiment runner needs
    for repaired LLM output.  Pattern annotations are not represented.
    """
    if strict:
        _check_tree(graph)
    out: list[str] = []
    visited: set[str] = set()

    def walk(element_id: str, level: int) -> None:
        visited.add(element_id)
        out.append(_line(graph.element(element_id), level))
        kids = graph.children(element_id, RelationKind.IN_CONTEXT_OF) + graph.children(
            element_id, RelationKind.SUPPORTED_BY
        )
        for child in kids:
            if child not in visited and child in graph:
                walk(child, level + 1)

    for root in graph.roots():
        if root not in visited:
            walk(root, 0)
    for element in graph.elements:
        if element.id not in visited:
            walk(element.id, 0)
    return "\n".join(out) + ("\n" if out else "")


__all__ = [
    "AnomalyKind",
    "EmptyInput",
    "NotATree",
    "ParseFailed",
    "ProseAnomaly",
    "ProseError",
    "ROGUE_KINDS",
    "parse_prose",
    "render_prose",
]
