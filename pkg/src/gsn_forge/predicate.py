"""Reader and writer for the predicate text format (``.gsnp``).

One statement per line::

    Goal (G1, {System} is acceptably secure)
    HasPlaceholder (G1)
    SupportedBy (G1, [S1], 1)
    HasMultiplicity (S1, [G3], 1 of *)

Element descriptions are the last argument and run to the closing
parenthesis; ``\\)`` and ``\\(`` escape literal parentheses.  Lines starting
with ``#`` are comments.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field, replace

from .core import (
    AnnotationKind,
    CardinalityLabel,
    Decorator,
    Element,
    ElementKind,
    GsnError,
    GsnGraph,
    PatternAnnotation,
    RelationKind,
    Relationship,
    compute_depths,
    natural_key,
)


class PredicateError(GsnError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, col {col}: {message}" if line else message)
        self.line = line
        self.col = col


class PredicateSyntaxError(PredicateError):
    def __init__(self, line: int, col: int, expected: str):
        super().__init__(f"expected {expected}", line, col)
        self.expected = expected


class UnknownPredicate(PredicateError):
    def __init__(self, name: str, line: int = 0, col: int = 0):
        super().__init__(f"unknown predicate {name!r}", line, col)
        self.name = name


class DuplicateId(PredicateError):
    def __init__(self, element_id: str, line: int = 0, col: int = 0):
        super().__init__(f"duplicate element id {element_id!r}", line, col)
        self.id = element_id


class DanglingReference(PredicateError):
    def __init__(self, element_id: str, line: int = 0, col: int = 0):
        super().__init__(f"reference to undeclared element {element_id!r}", line, col)
        self.id = element_id


class ArityMismatch(PredicateError):
    pass


class MalformedCardinality(PredicateError):
    def __init__(self, label: str, line: int = 0, col: int = 0):
        super().__init__(f"malformed cardinality label {label!r}", line, col)
        self.label = label


class PlaceholderMismatch(UserWarning):
    """HasPlaceholder declaration and ``{}`` spans disagree for an element."""


ELEMENT_HEADS = {k.value: k for k in ElementKind}
DECORATOR_HEADS = {d.value: d for d in Decorator}
ANNOTATION_HEADS = {
    "HasChoice": AnnotationKind.CHOICE,
    "HasMultiplicity": AnnotationKind.MULTIPLICITY,
    "IsOptional": AnnotationKind.OPTIONAL,
}
RELATION_HEADS = {
    "SupportedBy": RelationKind.SUPPORTED_BY,
    "InContextOf": RelationKind.IN_CONTEXT_OF,
    "IncontextOf": RelationKind.IN_CONTEXT_OF,
}
ANNOTATION_NAMES = {v: k for k, v in ANNOTATION_HEADS.items()}

_HEADS = {
    name.lower(): name
    for name in [*ELEMENT_HEADS, *DECORATOR_HEADS, "HasPlaceholder", *ANNOTATION_HEADS, *RELATION_HEADS]
}

_HEAD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_ID_RE = re.compile(r"[^\s,()\[\]]+")


@dataclass(frozen=True)
class Statement:
    head: str
    args: tuple
    line: int
    col: int


@dataclass
class PredicateDocument:
    statements: list[Statement] = field(default_factory=list)

    @property
    def source_spans(self) -> dict[int, tuple[int, int]]:
        return {i: (s.line, s.col) for i, s in enumerate(self.statements)}


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("(", "\\(")
        .replace(")", "\\)")
        .replace("\n", "\\n")
    )


def _read_description(line: str, start: int, lineno: int) -> tuple[str, int]:
    """Read an escaped description beginning at ``start``; return it and the
    index of the closing parenthesis."""
    out = []
    i = start
    while i < len(line):
        ch = line[i]
        if ch == "\\" and i + 1 < len(line):
            nxt = line[i + 1]
            out.append("\n" if nxt == "n" else nxt)
            i += 2
            continue
        if ch == ")":
            return "".join(out), i
        out.append(ch)
        i += 1
    raise PredicateSyntaxError(lineno, len(line) + 1, "')'")


def _split_args(body: str, lineno: int, offset: int) -> list[tuple[str, int]]:
    """Split on top-level commas; returns (argument, column) pairs."""
    args: list[tuple[str, int]] = []
    depth = 0
    current_start = 0
    for i, ch in enumerate(body):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth < 0:
                raise PredicateSyntaxError(lineno, offset + i + 1, "matching '['")
        elif ch == "," and depth == 0:
            args.append((body[current_start:i], offset + current_start))
            current_start = i + 1
    if depth != 0:
        raise PredicateSyntaxError(lineno, offset + len(body) + 1, "']'")
    args.append((body[current_start:], offset + current_start))
    return [(a.strip(), col + len(a) - len(a.lstrip()) + 1) for a, col in args]


def _parse_id(text: str, lineno: int, col: int) -> str:
    if not _ID_RE.fullmatch(text):
        raise PredicateSyntaxError(lineno, col, "an element identifier")
    return text


def _parse_id_list(text: str, lineno: int, col: int) -> tuple[str, ...]:
    if text.startswith("["):
        if not text.endswith("]"):
            raise PredicateSyntaxError(lineno, col + len(text), "']'")
        inner = text[1:-1]
        items = [(s.strip(), col + 1 + inner.find(s.strip())) for s in inner.split(",")]
        if not inner.strip():
            raise PredicateSyntaxError(lineno, col + 1, "at least one identifier")
        return tuple(_parse_id(item, lineno, c) for item, c in items)
    # Bare-id shorthand: ``HasMultiplicity (S1, G3, 1 of *)``.
    return (_parse_id(text, lineno, col),)


def parse_statements(text: str) -> PredicateDocument:
    doc = PredicateDocument()
    if text.startswith("﻿"):
        text = text[1:]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip())
        head_match = _HEAD_RE.match(raw, indent)
        if not head_match:
            raise PredicateSyntaxError(lineno, indent + 1, "a predicate name")
        name = head_match.group(0)
        head = _HEADS.get(name.lower())
        if head is None:
            raise UnknownPredicate(name, lineno, indent + 1)
        pos = head_match.end()
        while pos < len(raw) and raw[pos] in " \t":
            pos += 1
        if pos >= len(raw) or raw[pos] != "(":
            raise PredicateSyntaxError(lineno, min(pos, len(raw)) + 1, "'('")
        body_start = pos + 1
        if head in ELEMENT_HEADS:
            comma = raw.find(",", body_start)
            close = raw.find(")", body_start)
            if comma < 0 or (0 <= close < comma):
                raise ArityMismatch(f"{head} expects (ID, Description)", lineno, body_start + 1)
            element_id = _parse_id(raw[body_start:comma].strip(), lineno, body_start + 1)
            desc_start = comma + 1
            while desc_start < len(raw) and raw[desc_start] in " \t":
                desc_start += 1
            description, close = _read_description(raw, desc_start, lineno)
            args = (element_id, description.rstrip())
        else:
            close = raw.find(")", body_start)
            if close < 0:
                raise PredicateSyntaxError(lineno, len(raw) + 1, "')'")
            args = tuple(_split_args(raw[body_start:close], lineno, body_start))
        if raw[close + 1 :].strip():
            raise PredicateSyntaxError(lineno, close + 2, "end of line")
        doc.statements.append(Statement(head, args, lineno, indent + 1))
    return doc


def _build_graph(doc: PredicateDocument) -> GsnGraph:
    elements: dict[str, Element] = {}
    first_seen: dict[str, Statement] = {}
    decorators: dict[str, set[Decorator]] = {}
    declared_placeholders: set[str] = set()
    pending_rels: list[tuple[Statement, RelationKind, str, tuple[str, ...], int | None, str | None]] = []
    annotations: list[PatternAnnotation] = []
    references: list[tuple[str, Statement]] = []

    for st in doc.statements:
        if st.head in ELEMENT_HEADS:
            element_id, description = st.args
            if element_id in elements:
                raise DuplicateId(element_id, st.line, st.col)
            elements[element_id] = Element(element_id, ELEMENT_HEADS[st.head], description)
            first_seen[element_id] = st
            continue

        args = st.args
        if st.head in DECORATOR_HEADS or st.head == "HasPlaceholder":
            if len(args) != 1 or not args[0][0]:
                raise ArityMismatch(f"{st.head} expects (ID)", st.line, st.col)
            element_id = _parse_id(args[0][0], st.line, args[0][1])
            references.append((element_id, st))
            if st.head == "HasPlaceholder":
                declared_placeholders.add(element_id)
            else:
                decorators.setdefault(element_id, set()).add(DECORATOR_HEADS[st.head])
        elif st.head in ANNOTATION_HEADS:
            if len(args) not in (2, 3):
                raise ArityMismatch(f"{st.head} expects (X, [Y], Label)", st.line, st.col)
            source = _parse_id(args[0][0], st.line, args[0][1])
            targets = _parse_id_list(args[1][0], st.line, args[1][1])
            label = None
            if len(args) == 3 and args[2][0]:
                try:
                    label = CardinalityLabel.parse(args[2][0])
                except ValueError:
                    raise MalformedCardinality(args[2][0], st.line, args[2][1]) from None
            references.extend((i, st) for i in (source, *targets))
            annotations.append(PatternAnnotation(ANNOTATION_HEADS[st.head], source, targets, label))
        else:
            kind = RELATION_HEADS[st.head]
            max_args = 4 if kind is RelationKind.IN_CONTEXT_OF else 3
            if not 2 <= len(args) <= max_args:
                raise ArityMismatch(f"{st.head} expects (X, [Y], D)", st.line, st.col)
            source = _parse_id(args[0][0], st.line, args[0][1])
            targets = _parse_id_list(args[1][0], st.line, args[1][1])
            depth = None
            if len(args) >= 3 and args[2][0]:
                if not args[2][0].isdigit() or int(args[2][0]) < 1:
                    raise PredicateSyntaxError(st.line, args[2][1], "a positive depth")
                depth = int(args[2][0])
            side = args[3][0] if len(args) == 4 else None
            if side is not None and side not in ("left", "right"):
                raise PredicateSyntaxError(st.line, args[3][1], "'left' or 'right'")
            references.extend((i, st) for i in (source, *targets))
            pending_rels.append((st, kind, source, targets, depth, side))

    for element_id, st in references:
        if element_id not in elements:
            raise DanglingReference(element_id, st.line, st.col)

    for element_id, element in list(elements.items()):
        declared = element_id in declared_placeholders
        if declared != element.braces_present:
            warnings.warn(
                PlaceholderMismatch(
                    f"{element_id}: HasPlaceholder {'declared' if declared else 'missing'} but the "
                    f"description has {'a' if element.braces_present else 'no'} '{{}}' span"
                ),
                stacklevel=3,
            )
        elements[element_id] = replace(
            element,
            decorators=frozenset(decorators.get(element_id, ())),
            has_placeholder=declared or element.braces_present,
        )

    relationships = [
        Relationship(kind, source, targets, depth or 1, side)
        for _, kind, source, targets, depth, side in pending_rels
    ]
    graph = GsnGraph(tuple(elements.values()), tuple(relationships), tuple(annotations))
    if any(depth is None for *_, depth, _side in pending_rels):
        try:
            depths = compute_depths(graph)
        except GsnError:
            depths = {}
        relationships = [
            Relationship(kind, source, targets, depth or depths.get(source, 1), side)
            for _, kind, source, targets, depth, side in pending_rels
        ]
        graph = graph.evolve(relationships=tuple(relationships))
    return graph


def parse_document(text: str) -> GsnGraph:
    """Parse predicate text into a :class:`GsnGraph`."""
    return _build_graph(parse_statements(text))


def _element_order(graph: GsnGraph) -> list[Element]:
    try:
        depths = compute_depths(graph)
    except GsnError:
        return list(graph.elements)
    return sorted(graph.elements, key=lambda e: (depths[e.id], natural_key(e.id)))


def _id_list(ids) -> str:
    return "[" + ", ".join(ids) + "]"


def serialize(graph: GsnGraph) -> str:
    """Canonical predicate text: elements by depth then id, decorators,
    relationships by depth, annotations last."""
    ordered = _element_order(graph)
    lines = [f"{e.kind.value} ({e.id}, {_escape(e.description)})" for e in ordered]
    for element in ordered:
        for decorator in Decorator:
            if decorator in element.decorators:
                lines.append(f"{decorator.value} ({element.id})")
    lines.extend(f"HasPlaceholder ({e.id})" for e in ordered if e.has_placeholder)
    kind_rank = {RelationKind.SUPPORTED_BY: 0, RelationKind.IN_CONTEXT_OF: 1}
    for rel in sorted(
        graph.relationships,
        key=lambda r: (r.depth, natural_key(r.source), kind_rank[r.kind]),
    ):
        extra = f", {rel.side}" if rel.side else ""
        lines.append(f"{rel.kind.value} ({rel.source}, {_id_list(rel.targets)}, {rel.depth}{extra})")
    for ann in graph.annotations:
        label = f", {ann.label}" if ann.label else ""
        lines.append(f"{ANNOTATION_NAMES[ann.kind]} ({ann.source}, {_id_list(ann.targets)}{label})")
    return "\n".join(lines) + ("\n" if lines else "")


__all__ = [
    "ArityMismatch",
    "DanglingReference",
    "DuplicateId",
    "MalformedCardinality",
    "PlaceholderMismatch",
    "PredicateDocument",
    "PredicateError",
    "PredicateSyntaxError",
    "Statement",
    "UnknownPredicate",
    "parse_document",
    "parse_statements",
    "serialize",
]
