"""Dataset directory layout: shared knowledge texts plus one folder per system.

::

    context.txt
    predicate_rules.txt
    <system>/domain.txt
    <system>/pattern.gsnp
    <system>/groundtruth.gsnt
    <system>/meta.json       optional: display_name, case_type
    <system>/plan.json       optional: binding plan reproducing the ground truth
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .core import GsnError, GsnGraph
from .instantiator import BindingPlan
from .predicate import parse_document
from .prose import parse_prose

SYSTEMS = ("acas_xu", "bluerov2", "deepmind", "gpca", "im_software")
DEFAULT_EXAMPLE = "deepmind"
REQUIRED_SHARED = ("context.txt", "predicate_rules.txt")
REQUIRED_PER_SYSTEM = ("domain.txt", "pattern.gsnp", "groundtruth.gsnt")


class DatasetIncomplete(GsnError):
    def __init__(self, missing: list[str]):
        super().__init__("dataset is missing: " + ", ".join(missing))
        self.missing = missing


@dataclass
class SystemData:
    name: str
    display_name: str
    case_type: str
    domain_text: str
    pattern_text: str
    groundtruth_text: str
    plan: BindingPlan | None = None

    @property
    def pattern(self) -> GsnGraph:
        return parse_document(self.pattern_text)

    @property
    def groundtruth(self) -> GsnGraph:
        return parse_prose(self.groundtruth_text, mode="strict")[0]


@dataclass
class Dataset:
    root: Path
    context_text: str
    predicate_rules_text: str
    systems: dict[str, SystemData] = field(default_factory=dict)

    def __getitem__(self, name: str) -> SystemData:
        return self.systems[name]

    @property
    def names(self) -> list[str]:
        return list(self.systems)


def default_dataset_dir() -> Path:
    return Path(str(resources.files("gsn_forge") / "data" / "dataset"))


def _read(path: Path) -> str:
    return path.read_text(encoding="utf-8")


def load_dataset(root=None, systems=None) -> Dataset:
    """Load and check a dataset directory; raises :class:`DatasetIncomplete`."""
    root = Path(root) if root is not None else default_dataset_dir()
    if systems is None:
        found = sorted(p.name for p in root.iterdir() if p.is_dir()) if root.is_dir() else []
        systems = found or list(SYSTEMS)
    missing = [name for name in REQUIRED_SHARED if not (root / name).is_file()]
    for system in systems:
        missing += [
            f"{system}/{name}" for name in REQUIRED_PER_SYSTEM if not (root / system / name).is_file()
        ]
    if missing:
        raise DatasetIncomplete(missing)

    dataset = Dataset(root, _read(root / "context.txt"), _read(root / "predicate_rules.txt"))
    for system in systems:
        folder = root / system
        meta = {}
        if (folder / "meta.json").is_file():
            meta = json.loads(_read(folder / "meta.json"))
        plan = BindingPlan.load(folder / "plan.json") if (folder / "plan.json").is_file() else None
        dataset.systems[system] = SystemData(
            name=system,
            display_name=meta.get("display_name", system),
            case_type=meta.get("case_type", "assurance case"),
            domain_text=_read(folder / "domain.txt").strip(),
            pattern_text=_read(folder / "pattern.gsnp"),
            groundtruth_text=_read(folder / "groundtruth.gsnt"),
            plan=plan,
        )
    return dataset


__all__ = [
    "DEFAULT_EXAMPLE",
    "Dataset",
    "DatasetIncomplete",
    "SYSTEMS",
    "SystemData",
    "default_dataset_dir",
    "load_dataset",
]
