import warnings

import pytest
from hypothesis import HealthCheck, given, settings

from gsn_forge.core import Decorator, Element, GsnGraph
from gsn_forge.instantiator import diff_structure
from gsn_forge.predicate import (
    DanglingReference,
    DuplicateId,
    MalformedCardinality,
    PlaceholderMismatch,
    PredicateSyntaxError,
    UnknownPredicate,
    parse_document,
    serialize,
)
from strategies import case_graphs, pattern_graphs

MINI = """\
Goal (G1, {System} is safe)
Strategy (S1, Argument over hazards)
Goal (G2, Hazard {H} is mitigated)
Uninstantiated (G1)
HasPlaceholder (G1)
HasPlaceholder (G2)
SupportedBy (G1, [S1], 1)
SupportedBy (S1, [G2], 2)
HasMultiplicity (S1, [G2], 1 of *)
"""


def test_parse_mini():
    g = parse_document(MINI)
    assert g.ids == ["G1", "S1", "G2"]
    assert Decorator.UNINSTANTIATED in g.element("G1").decorators
    assert g.annotations[0].key == "S1->G2"
    assert str(g.annotations[0].label) == "1 of *"


def test_fixture_round_trip(dataset):
    for name in dataset.names:
        g = dataset[name].pattern
        again = parse_document(serialize(g))
        assert again == g, name
        assert diff_structure(again, g).is_empty
        case = dataset[name].groundtruth
        assert parse_document(serialize(case)) == case


def test_serialize_is_stable(dataset):
    g = dataset["acas_xu"].pattern
    assert serialize(parse_document(serialize(g))) == serialize(g)


@settings(max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(pattern_graphs())
def test_random_pattern_round_trip(graph):
    assert parse_document(serialize(graph)) == graph


@settings(max_examples=200, deadline=None)
@given(case_graphs())
def test_random_case_round_trip(graph):
    assert parse_document(serialize(graph)) == graph


def test_escaped_description():
    g = GsnGraph([Element("G1", "Goal", 'quote " paren ) back \\ comma ,')])
    assert parse_document(serialize(g)) == g


@pytest.mark.parametrize(
    "text,error",
    [
        ("Goal (G1, a)\nGoal (G1, b)\n", DuplicateId),
        ("Goal (G1, a)\nSupportedBy (G1, [G9], 1)\n", DanglingReference),
        ("Claim (G1, a)\n", UnknownPredicate),
        ("Goal (G1, a\n", PredicateSyntaxError),
        ("Goal (G1, a)\nGoal (G2, b)\nHasChoice (G1, [G2], x of 2)\n", MalformedCardinality),
    ],
)
def test_errors(text, error):
    with pytest.raises(error):
        parse_document(text)


def test_error_carries_position():
    with pytest.raises(DanglingReference) as info:
        parse_document("Goal (G1, a)\nSupportedBy (G1, [G9], 1)\n")
    assert "2" in str(info.value)


def test_placeholder_flag_mismatch_warns():
    with pytest.warns(PlaceholderMismatch):
        parse_document("Goal (G1, {X} is safe)\n")


def test_depth_inferred_when_missing():
    g = parse_document("Goal (G1, a)\nGoal (G2, b)\nSupportedBy (G1, [G2])\n")
    assert g.relationships[0].depth == 1


def test_no_warning_for_consistent_flags():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        parse_document(MINI)
