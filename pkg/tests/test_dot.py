import re

from gsn_forge.core import Element, GsnGraph, Relationship
from gsn_forge.dot import render_dot


def test_fixture_dot_lists_every_node_and_edge(dataset):
    g = dataset["bluerov2"].groundtruth
    dot = render_dot(g)
    assert dot.startswith('digraph "gsn" {') and dot.rstrip().endswith("}")
    nodes = re.findall(r'^  "([^"]+)" \[', dot, re.M)
    edges = re.findall(r'^  "([^"]+)" -> "([^"]+)"', dot, re.M)
    assert sorted(nodes) == sorted(g.ids)
    assert sorted(edges) == sorted(g.pairs())


def test_shapes_and_escaping():
    g = GsnGraph(
        [Element("G1", "Goal", 'says "hi"', {"Undeveloped"}), Element("C1", "Context", "c"), Element("A1", "Assumption", "a")],
        [Relationship("InContextOf", "G1", ("C1", "A1"), 1)],
    )
    dot = render_dot(g)
    assert 'shape=box, label="G1\\nsays \\"hi\\"\\n<Undeveloped>"' in dot
    assert 'xlabel="A"' in dot
    assert dot.count("arrowhead=empty") == 2


def test_deterministic(dataset):
    g = dataset["gpca"].pattern
    assert render_dot(g) == render_dot(g.evolve(elements=tuple(reversed(g.elements))))
