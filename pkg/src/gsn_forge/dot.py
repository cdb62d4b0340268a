"""Graphviz DOT emission following GSN shape conventions."""

from __future__ import annotations

import textwrap

from .core import Decorator, ElementKind, GsnGraph, RelationKind, natural_key

SHAPES = {
    ElementKind.GOAL: 'shape=box',
    ElementKind.STRATEGY: 'shape=parallelogram',
    ElementKind.SOLUTION: 'shape=circle',
    ElementKind.CONTEXT: 'shape=box, style=rounded',
    ElementKind.ASSUMPTION: 'shape=ellipse',
    ElementKind.JUSTIFICATION: 'shape=ellipse',
}

# Assumptions and justifications carry their letter next to the ellipse.
SUFFIX = {ElementKind.ASSUMPTION: "A", ElementKind.JUSTIFICATION: "J"}


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _label(element) -> str:
    lines = [element.id] + textwrap.wrap(element.description, 32)
    marks = [d.value for d in Decorator if d in element.decorators]
    if marks:
        lines.append("<" + ", ".join(marks) + ">")
    return "\\n".join(
        line.replace("\\", "\\\\").replace('"', '\\"') for line in lines
    )


def render_dot(graph: GsnGraph, name: str = "gsn") -> str:
    out = [f"digraph {_quote(name)} {{", "  rankdir=TB;", '  node [fontname="Helvetica"];']
    for element in sorted(graph.elements, key=lambda e: natural_key(e.id)):
        attrs = [SHAPES[element.kind], f'label="{_label(element)}"']
        if element.kind in SUFFIX:
            attrs.append(f'xlabel="{SUFFIX[element.kind]}"')
        out.append(f"  {_quote(element.id)} [{', '.join(attrs)}];")
    edges = sorted(
        ((rel.kind, s, t) for rel in graph.relationships for s, t in rel.pairs()),
        key=lambda e: (natural_key(e[1]), natural_key(e[2]), e[0].value),
    )
    for kind, source, target in edges:
        style = "" if kind is RelationKind.SUPPORTED_BY else " [arrowhead=empty]"
        out.append(f"  {_quote(source)} -> {_quote(target)}{style};")
    out.append("}")
    return "\n".join(out) + "\n"


__all__ = ["render_dot"]
