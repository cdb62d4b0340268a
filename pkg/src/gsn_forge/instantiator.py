"""Deterministic pattern instantiation driven by an explicit :class:`BindingPlan`.

Steps run in a fixed order:

1. multiplicity expansion (subtree clones with dotted id suffixes),
2. choice resolution,
3. optional inclusion,
4. development plan (keep-undeveloped pruning, UndevelopStantiated resolution),
5. placeholder substitution,
6. stripping of annotations and pattern decorators, depth recomputation.

Plan lookups accept either the instance reference (``G3.2``, ``S4.2->A1.2``)
or the reference of the pattern element it was cloned from (``G3``,
``S4->A1``); the instance reference wins.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

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
    assign_depths,
    natural_key,
    PLACEHOLDER_RE,
)

DEFAULT_CAP = 16


class InstantiationError(GsnError):
    pass


class MissingBinding(InstantiationError):
    def __init__(self, ref: str, detail: str = ""):
        super().__init__(f"no binding for {ref}" + (f" ({detail})" if detail else ""))
        self.ref = ref


class CountViolatesLabel(InstantiationError):
    pass


class SelectionViolatesLabel(InstantiationError):
    pass


class UnresolvedUndevelopment(InstantiationError):
    def __init__(self, ref: str):
        super().__init__(f"{ref} is UndevelopStantiated but neither kept undeveloped nor developed")
        self.ref = ref


class DanglingAfterDrop(InstantiationError):
    def __init__(self, element_id: str):
        super().__init__(f"{element_id} lost all of its support and is not marked undeveloped")
        self.element_id = element_id


@dataclass
class BindingPlan:
    """Every decision needed to turn a pattern into a case.

    ``bindings`` maps an element reference to the replacement text of each
    ``{}`` span in order (a bare string stands for a one-item list).
    """

    bindings: dict[str, list[str]] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    selections: dict[str, list[str]] = field(default_factory=dict)
    inclusions: dict[str, bool] = field(default_factory=dict)
    undeveloped: list[str] = field(default_factory=list)
    cap: int = DEFAULT_CAP

    @classmethod
    def from_dict(cls, data: dict) -> "BindingPlan":
        bindings = {
            k: [v] if isinstance(v, str) else list(v) for k, v in data.get("bindings", {}).items()
        }
        return cls(
            bindings=bindings,
            counts={k: int(v) for k, v in data.get("counts", {}).items()},
            selections={k: list(v) for k, v in data.get("selections", {}).items()},
            inclusions={k: bool(v) for k, v in data.get("inclusions", {}).items()},
            undeveloped=list(data.get("undeveloped", [])),
            cap=int(data.get("cap", DEFAULT_CAP)),
        )

    @classmethod
    def load(cls, path) -> "BindingPlan":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {
            "bindings": self.bindings,
            "counts": self.counts,
            "selections": self.selections,
            "inclusions": self.inclusions,
            "undeveloped": self.undeveloped,
            "cap": self.cap,
        }


@dataclass
class _Edge:
    kind: RelationKind
    source: str
    target: str
    side: str | None = None


@dataclass
class _Ann:
    kind: AnnotationKind
    source: str
    targets: list[str]
    label: CardinalityLabel | None
    origin_key: str

    @property
    def key(self) -> str:
        return f"{self.source}->{','.join(self.targets)}"


class _Work:
    """Mutable working copy of a pattern with provenance for every id."""

    def __init__(self, pattern: GsnGraph):
        self.elements: dict[str, Element] = {e.id: e for e in pattern.elements}
        self.origin: dict[str, str] = {e.id: e.id for e in pattern.elements}
        self.edges: list[_Edge] = [
            _Edge(r.kind, s, t, r.side) for r in pattern.relationships for s, t in r.pairs()
        ]
        self.anns: list[_Ann] = [
            _Ann(a.kind, a.source, list(a.targets), a.label, a.key) for a in pattern.annotations
        ]
        self.roots = set(pattern.roots())
        self.undeveloped: set[str] = set()

    def children(self, node: str, kind: RelationKind | None = None) -> list[str]:
        return [e.target for e in self.edges if e.source == node and (kind is None or e.kind is kind)]

    def subtree(self, node: str, kind: RelationKind | None = None) -> list[str]:
        """``node`` and everything below it, pre-order."""
        out, seen, stack = [], set(), [node]
        while stack:
            current = stack.pop()
            if current in seen:
                continue
            seen.add(current)
            out.append(current)
            stack.extend(reversed(self.children(current, kind)))
        return out

    def reachable(self) -> set[str]:
        seen: set[str] = set()
        stack = [r for r in self.roots if r in self.elements]
        adjacency: dict[str, list[str]] = {}
        for edge in self.edges:
            adjacency.setdefault(edge.source, []).append(edge.target)
        while stack:
            current = stack.pop()
            if current in seen:
                continue
            seen.add(current)
            stack.extend(adjacency.get(current, []))
        return seen

    def remove(self, ids: set[str]) -> None:
        for element_id in ids:
            self.elements.pop(element_id, None)
        self.edges = [e for e in self.edges if e.source not in ids and e.target not in ids]
        kept = []
        for ann in self.anns:
            if ann.source in ids:
                continue
            ann.targets = [t for t in ann.targets if t not in ids]
            if ann.targets:
                kept.append(ann)
        self.anns = kept

    def drop_branch(self, source: str, target: str) -> None:
        """Cut ``source -> target`` and delete what only that branch reached."""
        candidates = set(self.subtree(target))
        self.edges = [e for e in self.edges if not (e.source == source and e.target == target)]
        for ann in self.anns:
            if ann.source == source and target in ann.targets:
                ann.targets = [t for t in ann.targets if t != target]
        self.anns = [a for a in self.anns if a.targets]
        alive = self.reachable()
        self.remove({c for c in candidates if c not in alive})

    def lookup(self, table: dict, ann: _Ann):
        if ann.key in table:
            return True, table[ann.key]
        if ann.origin_key in table:
            return True, table[ann.origin_key]
        return False, None

    def matches(self, element_id: str, refs: set[str]) -> bool:
        return element_id in refs or self.origin.get(element_id) in refs


def _suffixed(element_id: str, index: int) -> str:
    return f"{element_id}.{index}"


def _expand(work: _Work, ann: _Ann, plan: BindingPlan) -> None:
    found, count = work.lookup(plan.counts, ann)
    if not found:
        raise MissingBinding(ann.key, "multiplicity count")
    label = ann.label or CardinalityLabel(0, None)
    if not label.admits(count, plan.cap):
        raise CountViolatesLabel(f"{ann.key}: count {count} outside '{label}' (cap {plan.cap})")
    for target in list(ann.targets):
        if count == 1:
            continue
        if count == 0:
            work.drop_branch(ann.source, target)
            continue
        nodes = work.subtree(target)
        node_set = set(nodes)
        inner = [e for e in work.edges if e.source in node_set and e.target in node_set]
        inner_anns = [a for a in work.anns if a.source in node_set]
        incoming = [e for e in work.edges if e.target == target and e.source == ann.source]

        new_elements: dict[str, Element] = {}
        for element_id, element in work.elements.items():
            if element_id not in node_set:
                new_elements[element_id] = element
                continue
            if element_id != target:
                continue
            # Clones of the whole subtree are laid out where the target was.
            for i in range(1, count + 1):
                for node in nodes:
                    clone_id = _suffixed(node, i)
                    original = work.elements[node]
                    new_elements[clone_id] = Element(
                        clone_id,
                        original.kind,
                        original.description,
                        original.decorators,
                        original.has_placeholder,
                    )
                    work.origin[clone_id] = work.origin[node]
        work.elements = new_elements

        rename = lambda node, i: _suffixed(node, i) if node in node_set else node  # noqa: E731
        new_edges: list[_Edge] = []
        for edge in work.edges:
            if edge in incoming:
                for i in range(1, count + 1):
                    new_edges.append(_Edge(edge.kind, edge.source, _suffixed(target, i), edge.side))
            elif edge in inner:
                for i in range(1, count + 1):
                    new_edges.append(
                        _Edge(edge.kind, rename(edge.source, i), rename(edge.target, i), edge.side)
                    )
            elif edge.source in node_set or edge.target in node_set:
                # Links from outside into the subtree follow every clone.
                for i in range(1, count + 1):
                    new_edges.append(
                        _Edge(edge.kind, rename(edge.source, i), rename(edge.target, i), edge.side)
                    )
            else:
                new_edges.append(edge)
        work.edges = new_edges

        new_anns: list[_Ann] = []
        for other in work.anns:
            if other in inner_anns:
                for i in range(1, count + 1):
                    new_anns.append(
                        _Ann(
                            other.kind,
                            rename(other.source, i),
                            [rename(t, i) for t in other.targets],
                            other.label,
                            other.origin_key,
                        )
                    )
            elif other is ann:
                new_anns.append(other)
            else:
                other.targets = [
                    t2 for t in other.targets for t2 in ([_suffixed(t, i) for i in range(1, count + 1)] if t in node_set else [t])
                ]
                new_anns.append(other)
        work.anns = new_anns


def _multiplicities(work: _Work, plan: BindingPlan) -> None:
    done: set[int] = set()
    while True:
        pending = [
            a
            for a in work.anns
            if a.kind is AnnotationKind.MULTIPLICITY and id(a) not in done
        ]
        if not pending:
            return
        # Outermost first so nested annotations are cloned with their subtree.
        depth = _depth_map(work)
        pending.sort(key=lambda a: (depth.get(a.source, 0), natural_key(a.source)))
        ann = pending[0]
        done.add(id(ann))
        _expand(work, ann, plan)


def _depth_map(work: _Work) -> dict[str, int]:
    depth: dict[str, int] = {}
    frontier = sorted(r for r in work.roots if r in work.elements)
    level = 1
    while frontier:
        nxt = []
        for node in frontier:
            if node in depth:
                continue
            depth[node] = level
            nxt.extend(work.children(node))
        frontier = nxt
        level += 1
    return depth


def _choices_and_options(work: _Work, plan: BindingPlan) -> None:
    for ann in [a for a in work.anns if a.kind is AnnotationKind.CHOICE]:
        found, selected = work.lookup(plan.selections, ann)
        if not found:
            selected = list(ann.targets)
        unknown = [s for s in selected if s not in ann.targets]
        if unknown:
            raise SelectionViolatesLabel(f"{ann.key}: {unknown} are not alternatives")
        label = ann.label or CardinalityLabel(1, len(ann.targets))
        lower, upper = label.bounds(len(ann.targets))
        if not lower <= len(set(selected)) <= upper:
            raise SelectionViolatesLabel(
                f"{ann.key}: {len(set(selected))} selected outside '{label}'"
            )
        for target in [t for t in ann.targets if t not in selected]:
            work.drop_branch(ann.source, target)

    for ann in [a for a in work.anns if a.kind is AnnotationKind.OPTIONAL]:
        found, include = work.lookup(plan.inclusions, ann)
        if found and not include:
            for target in list(ann.targets):
                work.drop_branch(ann.source, target)


def _develop(work: _Work, plan: BindingPlan, lost_support: set[str]) -> None:
    refs = set(plan.undeveloped)
    for node in sorted(work.elements, key=natural_key):
        if node not in work.elements:
            continue
        element = work.elements[node]
        keep = work.matches(node, refs)
        if keep and element.kind.can_be_developed:
            work.undeveloped.add(node)
            for child in list(work.children(node, RelationKind.SUPPORTED_BY)):
                work.drop_branch(node, child)
        elif Decorator.UNDEVELOP_STANTIATED in element.decorators:
            if not work.children(node, RelationKind.SUPPORTED_BY):
                raise UnresolvedUndevelopment(node)

    for node in sorted(lost_support, key=natural_key):
        if node not in work.elements or node in work.undeveloped:
            continue
        decorators = work.elements[node].decorators
        if not decorators & {Decorator.UNDEVELOPED, Decorator.UNDEVELOP_STANTIATED}:
            raise DanglingAfterDrop(node)


def _substitute(work: _Work, plan: BindingPlan) -> None:
    for node, element in list(work.elements.items()):
        spans = PLACEHOLDER_RE.findall(element.description)
        if not spans:
            continue
        values = plan.bindings.get(node)
        if values is None:
            values = plan.bindings.get(work.origin[node])
        if values is None:
            raise MissingBinding(node, f"{len(spans)} placeholder(s)")
        if isinstance(values, str):
            values = [values]
        if len(values) < len(spans):
            raise MissingBinding(f"{node}#{len(values) + 1}", "placeholder ordinal")
        replacement = iter(values)
        text = PLACEHOLDER_RE.sub(lambda _m: next(replacement), element.description)
        work.elements[node] = Element(node, element.kind, text, element.decorators, False)


def _strip(work: _Work) -> GsnGraph:
    elements = []
    for node, element in work.elements.items():
        decorators = set(element.decorators)
        decorators.discard(Decorator.UNINSTANTIATED)
        if Decorator.UNDEVELOP_STANTIATED in decorators:
            decorators.discard(Decorator.UNDEVELOP_STANTIATED)
            if node in work.undeveloped:
                decorators.add(Decorator.UNDEVELOPED)
        elif node in work.undeveloped:
            decorators.add(Decorator.UNDEVELOPED)
        elements.append(Element(node, element.kind, element.description, frozenset(decorators)))

    grouped: dict[tuple, list[str]] = {}
    for edge in work.edges:
        grouped.setdefault((edge.kind, edge.source, edge.side), []).append(edge.target)
    relationships = [
        Relationship(kind, source, tuple(targets), 1, side)
        for (kind, source, side), targets in grouped.items()
    ]
    return assign_depths(GsnGraph(tuple(elements), tuple(relationships)))


def instantiate(pattern: GsnGraph, plan: BindingPlan | None = None) -> GsnGraph:
    """Turn ``pattern`` into an assurance case following ``plan``."""
    plan = plan or BindingPlan()
    work = _Work(pattern)
    supported = {e.id for e in pattern.elements if pattern.children(e.id, RelationKind.SUPPORTED_BY)}
    _multiplicities(work, plan)
    _choices_and_options(work, plan)
    lost = {
        node
        for node in work.elements
        if work.origin[node] in supported and not work.children(node, RelationKind.SUPPORTED_BY)
    }
    _develop(work, plan, lost)
    _substitute(work, plan)
    return _strip(work)


def expansion_size(pattern: GsnGraph, counts: dict[str, int]) -> int:
    """Element count after multiplicity expansion, by the closed formula.

    ``|V| + sum((n_i - 1) * |subtree(t_i)|)`` for annotations on disjoint
    subtrees of a tree-shaped pattern.  Nested annotations multiply, so each
    element is weighted by the product of the counts above it.
    """
    copies: dict[str, int] = {e.id: 1 for e in pattern.elements}
    for ann in pattern.annotations:
        if ann.kind is not AnnotationKind.MULTIPLICITY:
            continue
        n = counts[ann.key]
        for target in ann.targets:
            for node in [target, *pattern.descendants(target)]:
                copies[node] *= n
    return sum(copies.values())


# -- structural diff ---------------------------------------------------------


@dataclass
class StructureDiff:
    """Alignment of candidate ``a`` against reference ``b``."""

    missing: list[str] = field(default_factory=list)
    extra: list[str] = field(default_factory=list)
    kind_mismatch: list[tuple[str, str, str, str]] = field(default_factory=list)
    degree_mismatch: list[tuple[str, str, int, int]] = field(default_factory=list)
    kind_delta: dict[str, int] = field(default_factory=dict)
    relationship_delta: dict[str, int] = field(default_factory=dict)
    text_mismatch: list[tuple[str, str]] = field(default_factory=list)
    size_a: int = 0
    size_b: int = 0

    @property
    def net_missing(self) -> int:
        return max(0, self.size_b - self.size_a)

    @property
    def net_extra(self) -> int:
        return max(0, self.size_a - self.size_b)

    @property
    def is_empty(self) -> bool:
        return not (
            self.missing
            or self.extra
            or self.kind_mismatch
            or self.degree_mismatch
            or any(self.kind_delta.values())
            or any(self.relationship_delta.values())
        )


def _degree(graph: GsnGraph, element_id: str) -> int:
    return len(graph.children(element_id))


def diff_structure(a: GsnGraph, b: GsnGraph) -> StructureDiff:
    """Greedy id-then-kind alignment of ``a`` (candidate) with ``b`` (reference).

    Symmetric in the sense ``diff(a, b).missing == diff(b, a).extra``.
    """
    diff = StructureDiff(size_a=len(a), size_b=len(b))
    pairs: list[tuple[str, str]] = []
    a_ids = {e.id for e in a.elements}
    b_ids = {e.id for e in b.elements}
    for element_id in sorted(a_ids & b_ids, key=natural_key):
        pairs.append((element_id, element_id))
        ka, kb = a.element(element_id).kind, b.element(element_id).kind
        if ka is not kb:
            diff.kind_mismatch.append((element_id, element_id, ka.value, kb.value))

    left_a = sorted(a_ids - b_ids, key=natural_key)
    left_b = sorted(b_ids - a_ids, key=natural_key)
    for kind in ElementKind:
        pool_a = [x for x in left_a if a.element(x).kind is kind]
        pool_b = [x for x in left_b if b.element(x).kind is kind]
        for xa, xb in zip(pool_a, pool_b):
            pairs.append((xa, xb))
        diff.extra.extend(pool_a[len(pool_b):])
        diff.missing.extend(pool_b[len(pool_a):])
    diff.extra.sort(key=natural_key)
    diff.missing.sort(key=natural_key)

    for xa, xb in pairs:
        da, db = _degree(a, xa), _degree(b, xb)
        if da != db:
            diff.degree_mismatch.append((xa, xb, da, db))
        if a.element(xa).description != b.element(xb).description:
            diff.text_mismatch.append((xa, xb))

    ca = Counter(e.kind.value for e in a.elements)
    cb = Counter(e.kind.value for e in b.elements)
    diff.kind_delta = {k.value: ca[k.value] - cb[k.value] for k in ElementKind if ca[k.value] != cb[k.value]}
    ra = Counter(r.kind.value for r in a.relationships for _ in r.targets)
    rb = Counter(r.kind.value for r in b.relationships for _ in r.targets)
    diff.relationship_delta = {
        k.value: ra[k.value] - rb[k.value] for k in RelationKind if ra[k.value] != rb[k.value]
    }
    return diff


__all__ = [
    "BindingPlan",
    "CountViolatesLabel",
    "DanglingAfterDrop",
    "DEFAULT_CAP",
    "InstantiationError",
    "MissingBinding",
    "SelectionViolatesLabel",
    "StructureDiff",
    "UnresolvedUndevelopment",
    "diff_structure",
    "expansion_size",
    "instantiate",
]
