"""System and user prompts for the experiment matrix E1..E9.

E1 is the no-knowledge baseline.  E2..E9 add up to four knowledge blocks
to the system prompt, always in the order rules, context, domain, example.
Each block starts with a fixed marker line so its presence can be checked.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import GsnError, GsnGraph
from .predicate import serialize

BASELINE_SYSTEM = (
    "You are an assistant who assists in developing an assurance case in a tree structure "
    "using Goal Structuring Notation (GSN). Your role is to create an assurance case."
)
BASELINE_USER = (
    "Create a {case_type} for {display_name} and display it in a hierarchical tree format "
    "using dashes (-) to denote different levels."
)

ROLE_PREAMBLE = (
    "You help engineers instantiate assurance case patterns expressed in Goal Structuring "
    "Notation (GSN). Given a pattern, you produce the concrete assurance case for one system."
)
PATTERN_USER = (
    "Create a {case_type} for {display_name} that complies with the assurance case pattern "
    "below, written in predicate form.\n\n"
    "{pattern}\n"
    "Think step by step: substitute every placeholder with information about {display_name}, "
    "expand multiplicities, resolve choices and optional links, and drop the pattern "
    "decorators.\n"
    "Display the assurance case in a hierarchical tree format using dashes (-) to denote "
    "different levels, one element per line written as '<Kind> <Id>: <description>'."
)

MARKERS = {
    "predicates": "### PREDICATE RULES",
    "context": "### CONTEXT",
    "domain": "### DOMAIN INFORMATION",
    "example": "### EXAMPLE",
}
BLOCK_ORDER = ("predicates", "context", "domain", "example")


class ConfigBundleMismatch(GsnError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    id: str
    use_example: bool = False
    use_context: bool = False
    use_domain: bool = False
    use_predicates: bool = False

    @property
    def is_baseline(self) -> bool:
        return not (self.use_example or self.use_context or self.use_domain or self.use_predicates)

    def flags(self) -> dict[str, bool]:
        return {
            "predicates": self.use_predicates,
            "context": self.use_context,
            "domain": self.use_domain,
            "example": self.use_example,
        }


def _config(eid, example, context, domain, predicates) -> ExperimentConfig:
    return ExperimentConfig(eid, example, context, domain, predicates)


EXPERIMENTS: dict[str, ExperimentConfig] = {
    c.id: c
    for c in [
        #        id    example context domain predicates
        _config("E1", False, False, False, False),
        _config("E2", True, True, True, True),
        _config("E3", False, True, True, True),
        _config("E4", True, True, False, True),
        _config("E5", False, True, False, True),
        _config("E6", True, False, True, True),
        _config("E7", False, False, True, True),
        _config("E8", True, False, False, True),
        _config("E9", False, False, False, True),
    ]
}
SE_EXPERIMENTS = tuple(f"E{i}" for i in range(2, 10))


def experiment(eid: str) -> ExperimentConfig:
    try:
        return EXPERIMENTS[eid.upper()]
    except KeyError:
        raise KeyError(f"unknown experiment {eid!r}; expected E1..E9") from None


@dataclass(frozen=True)
class KnowledgeBundle:
    context_text: str
    predicate_rules_text: str
    domain_text: str | None = None
    # (pattern predicate text, ground-truth prose) of the one-shot system.
    example: tuple[str, str] | None = None


@dataclass(frozen=True)
class PromptBundle:
    system: str
    user: str
    config: ExperimentConfig
    system_name: str
    example_system: str | None = None

    def blocks(self) -> list[str]:
        """Knowledge blocks present in the system prompt, in order."""
        return [name for name in BLOCK_ORDER if MARKERS[name] in self.system]


def _example_block(example: tuple[str, str]) -> str:
    pattern_text, case_text = example
    return (
        f"{MARKERS['example']}\n"
        "Pattern:\n"
        f"{pattern_text.rstrip()}\n\n"
        "Assurance case instantiated from this pattern:\n"
        f"{case_text.rstrip()}"
    )


def build_prompts(
    config: ExperimentConfig,
    bundle: KnowledgeBundle,
    pattern: GsnGraph | None,
    system_name: str,
    display_name: str | None = None,
    case_type: str = "assurance case",
    example_system: str | None = None,
) -> PromptBundle:
    """Assemble the prompts of one matrix cell."""
    display_name = display_name or system_name
    if config.use_example != (bundle.example is not None):
        raise ConfigBundleMismatch(
            f"{config.id}: use_example={config.use_example} but the bundle "
            f"{'has' if bundle.example else 'lacks'} an example"
        )
    if config.use_domain != (bundle.domain_text is not None):
        raise ConfigBundleMismatch(
            f"{config.id}: use_domain={config.use_domain} but the bundle "
            f"{'has' if bundle.domain_text is not None else 'lacks'} domain text"
        )

    if config.is_baseline:
        return PromptBundle(
            BASELINE_SYSTEM,
            BASELINE_USER.format(case_type=case_type, display_name=display_name),
            config,
            system_name,
        )
    if pattern is None:
        raise ConfigBundleMismatch(f"{config.id} needs the pattern of {system_name}")

    parts = [ROLE_PREAMBLE]
    if config.use_predicates:
        parts.append(f"{MARKERS['predicates']}\n{bundle.predicate_rules_text.strip()}")
    if config.use_context:
        parts.append(f"{MARKERS['context']}\n{bundle.context_text.strip()}")
    if config.use_domain:
        parts.append(f"{MARKERS['domain']}\n{bundle.domain_text.strip()}")
    if config.use_example:
        parts.append(_example_block(bundle.example))
    user = PATTERN_USER.format(
        case_type=case_type, display_name=display_name, pattern=serialize(pattern)
    )
    return PromptBundle(
        "\n\n".join(parts) + "\n",
        user,
        config,
        system_name,
        example_system if config.use_example else None,
    )


def knowledge_for(config: ExperimentConfig, dataset, system: str, example_system: str | None):
    """Knowledge bundle for ``system`` holding exactly what ``config`` asks for."""
    example = None
    if config.use_example:
        if example_system is None:
            raise ConfigBundleMismatch(f"{config.id} needs an example system")
        ex = dataset[example_system]
        example = (serialize(ex.pattern), ex.groundtruth_text)
    return KnowledgeBundle(
        context_text=dataset.context_text,
        predicate_rules_text=dataset.predicate_rules_text,
        domain_text=dataset[system].domain_text if config.use_domain else None,
        example=example,
    )


def prompts_for(config: ExperimentConfig, dataset, system: str, example_system: str | None = None):
    """Build the prompt bundle of one (experiment, system) cell from a dataset."""
    data = dataset[system]
    bundle = knowledge_for(config, dataset, system, example_system)
    pattern = None if config.is_baseline else data.pattern
    return build_prompts(
        config,
        bundle,
        pattern,
        system,
        display_name=data.display_name,
        case_type=data.case_type,
        example_system=example_system,
    )


__all__ = [
    "BASELINE_SYSTEM",
    "BASELINE_USER",
    "BLOCK_ORDER",
    "ConfigBundleMismatch",
    "EXPERIMENTS",
    "ExperimentConfig",
    "KnowledgeBundle",
    "MARKERS",
    "PromptBundle",
    "SE_EXPERIMENTS",
    "build_prompts",
    "experiment",
    "knowledge_for",
    "prompts_for",
]
