import pytest

from gsn_forge.predicate import serialize
from gsn_forge.prompts import (
    BASELINE_SYSTEM,
    BLOCK_ORDER,
    EXPERIMENTS,
    MARKERS,
    SE_EXPERIMENTS,
    ConfigBundleMismatch,
    KnowledgeBundle,
    build_prompts,
    experiment,
    knowledge_for,
    prompts_for,
)

MATRIX = {
    #      example context domain predicates
    "E1": (False, False, False, False),
    "E2": (True, True, True, True),
    "E3": (False, True, True, True),
    "E4": (True, True, False, True),
    "E5": (False, True, False, True),
    "E6": (True, False, True, True),
    "E7": (False, False, True, True),
    "E8": (True, False, False, True),
    "E9": (False, False, False, True),
}


def test_matrix():
    for eid, flags in MATRIX.items():
        c = experiment(eid)
        assert (c.use_example, c.use_context, c.use_domain, c.use_predicates) == flags
    assert SE_EXPERIMENTS == tuple(f"E{i}" for i in range(2, 10))
    with pytest.raises(KeyError):
        experiment("E10")


def test_baseline(dataset):
    bundle = prompts_for(experiment("E1"), dataset, "acas_xu")
    assert bundle.system == BASELINE_SYSTEM
    assert "security case" in bundle.user and "ACAS Xu" in bundle.user
    assert "dashes (-)" in bundle.user
    assert bundle.blocks() == []


@pytest.mark.parametrize("eid", SE_EXPERIMENTS)
def test_blocks_follow_config(dataset, eid):
    config = experiment(eid)
    bundle = prompts_for(config, dataset, "gpca", "deepmind" if config.use_example else None)
    expected = [name for name in BLOCK_ORDER if config.flags()[name]]
    assert bundle.blocks() == expected
    positions = [bundle.system.index(MARKERS[name]) for name in expected]
    assert positions == sorted(positions)
    assert serialize(dataset["gpca"].pattern) in bundle.user
    if config.use_example:
        assert dataset["deepmind"].groundtruth_text.strip() in bundle.system
        assert bundle.example_system == "deepmind"
    if config.use_domain:
        assert dataset["gpca"].domain_text in bundle.system


def test_target_domain_only(dataset):
    bundle = prompts_for(experiment("E7"), dataset, "acas_xu")
    for other in ("bluerov2", "gpca", "im_software"):
        assert dataset[other].domain_text not in bundle.system


def test_mismatch_detected(dataset):
    config = experiment("E8")
    knowledge = KnowledgeBundle(dataset.context_text, dataset.predicate_rules_text)
    with pytest.raises(ConfigBundleMismatch):
        build_prompts(config, knowledge, dataset["gpca"].pattern, "gpca")
    with pytest.raises(ConfigBundleMismatch):
        knowledge_for(config, dataset, "gpca", None)
    knowledge = KnowledgeBundle(dataset.context_text, dataset.predicate_rules_text, domain_text="x")
    with pytest.raises(ConfigBundleMismatch):
        build_prompts(experiment("E9"), knowledge, dataset["gpca"].pattern, "gpca")


def test_prompts_deterministic(dataset):
    a = prompts_for(experiment("E2"), dataset, "bluerov2", "deepmind")
    b = prompts_for(experiment("E2"), dataset, "bluerov2", "deepmind")
    assert a == b


def test_all_experiments_listed():
    assert list(EXPERIMENTS) == [f"E{i}" for i in range(1, 10)]
