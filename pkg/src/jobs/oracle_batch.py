"""
Batch agreement runs: algorithm verdict against the exhaustive oracle.

Instances are independent, so a batch can be spread over worker processes.
Results come back in instance order whatever the number of workers.
"""
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

from src.models.characters import CharacterSet
from src.models.network import is_galled
from src.models.tree import Tree
from src.modules.compatibility import galled_compatible
from src.modules.completion import galled_completion
from src.modules.oracle import (
    brute_force_compatible,
    brute_force_completable,
    enumerate_trees,
    random_character_set,
)
from src.modules.ptn_verify import explains
from src.services.matrix_service import format_character_sets
from src.services.newick_service import serialize_newick
from src.utils.config import OracleSettings
from src.utils.error_handler import InputError
from src.utils.logger import get_logger

logger = get_logger("oracle_batch")

SUBJECTS = ("complete", "compat")


@dataclass
class CompletionInstance:
    tree: Tree
    characters: CharacterSet

    def describe(self) -> str:
        return f"{serialize_newick(self.tree)}\n{format_character_sets(self.characters, list(self.tree.taxa_order))}"


@dataclass
class CompatInstance:
    characters: CharacterSet
    taxa: List[str]

    def describe(self) -> str:
        return format_character_sets(self.characters, self.taxa)


Instance = Union[CompletionInstance, CompatInstance]


@dataclass
class InstanceResult:
    index: int
    algorithm: bool
    oracle: bool
    witness_ok: bool = True
    algorithm_transfers: Optional[int] = None
    oracle_transfers: Optional[int] = None

    @property
    def agrees(self) -> bool:
        return self.algorithm == self.oracle and self.witness_ok


@dataclass
class AgreementReport:
    subject: str
    results: List[InstanceResult] = field(default_factory=list)
    disagreements: List[str] = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def agreements(self) -> int:
        return sum(result.agrees for result in self.results)

    @property
    def positives(self) -> int:
        return sum(result.oracle for result in self.results)

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def summary(self) -> str:
        return (
            f"{self.subject}: {self.agreements}/{self.total} agree "
            f"({self.positives} positive by the oracle, {len(self.disagreements)} disagreements)"
        )


def evaluate_instance(subject: str, index: int, instance: Instance,
                      settings: Optional[OracleSettings] = None) -> InstanceResult:
    """Runs one instance through both sides; module-level so worker processes can pickle it."""
    settings = settings or OracleSettings()
    if subject == "complete":
        outcome = galled_completion(instance.tree, instance.characters)
        oracle = brute_force_completable(instance.tree, instance.characters, max_edges=settings.max_completion_edges)
        witness_ok = True
        if outcome.completable:
            witness_ok = is_galled(outcome.network) and explains(outcome.network, instance.characters).all_explained
        return InstanceResult(
            index,
            outcome.completable,
            oracle.ok,
            witness_ok,
            len(outcome.network.transfer_edges) if outcome.completable else None,
            len(oracle.network.transfer_edges) if oracle.ok else None,
        )

    outcome = galled_compatible(instance.characters, instance.taxa)
    oracle = brute_force_compatible(instance.characters, instance.taxa,
                                    settings.max_compat_taxa, settings.max_compat_characters)
    witness_ok = True
    if outcome.compatible:
        witness_ok = is_galled(outcome.network) and explains(outcome.network, instance.characters).all_explained
    return InstanceResult(
        index,
        outcome.compatible,
        oracle.ok,
        witness_ok,
        len(outcome.network.transfer_edges) if outcome.compatible else None,
        len(oracle.network.transfer_edges) if oracle.ok else None,
    )


def run_agreement_batch(subject: str, instances: Sequence[Instance], jobs: int = 1,
                        settings: Optional[OracleSettings] = None) -> AgreementReport:
    if subject not in SUBJECTS:
        raise InputError(f"unknown oracle subject {subject!r}; expected one of {', '.join(SUBJECTS)}")
    if jobs < 1:
        raise InputError("--jobs must be at least 1")

    logger.info(f"🔄 Checking {len(instances)} {subject} instances against the oracle ({jobs} workers)")
    if jobs == 1 or len(instances) < 2:
        results = [evaluate_instance(subject, i, instance, settings) for i, instance in enumerate(instances)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(
                evaluate_instance,
                [subject] * len(instances),
                range(len(instances)),
                instances,
                [settings] * len(instances),
                chunksize=max(1, len(instances) // (4 * jobs)),
            ))

    report = AgreementReport(subject, results)
    for result in results:
        if not result.agrees:
            instance = instances[result.index]
            verdicts = f"algorithm={'yes' if result.algorithm else 'no'} oracle={'yes' if result.oracle else 'no'}"
            if not result.witness_ok:
                verdicts += " witness=invalid"
            report.disagreements.append(f"instance {result.index} ({verdicts})\n{instance.describe()}")
            logger.warning(f"⚠️ Disagreement on instance {result.index}: {verdicts}")
        elif result.algorithm and result.algorithm_transfers > result.oracle_transfers:
            logger.debug(
                f"Instance {result.index}: algorithm witness uses {result.algorithm_transfers} transfers, "
                f"oracle {result.oracle_transfers}"
            )

    if report.ok:
        logger.info(f"✅ {report.summary()}")
    else:
        logger.warning(f"❌ {report.summary()}")
    return report


def random_completion_instances(count: int, seed: int, settings: OracleSettings) -> List[CompletionInstance]:
    """``count`` random character sets for each tree on the configured taxa range."""
    rng = random.Random(seed)
    instances = []
    for size in range(settings.random_min_taxa, settings.random_max_taxa + 1):
        taxa = [f"t{i}" for i in range(1, size + 1)]
        for tree in enumerate_trees(taxa, settings.max_tree_taxa):
            for _ in range(count):
                instances.append(CompletionInstance(tree, random_character_set(taxa, rng, settings.random_max_characters)))
    return instances


def random_compat_instances(count: int, seed: int, settings: OracleSettings) -> List[CompatInstance]:
    rng = random.Random(seed)
    instances = []
    for _ in range(count):
        size = rng.randint(settings.random_min_taxa, settings.random_max_taxa)
        taxa = [f"t{i}" for i in range(1, size + 1)]
        instances.append(CompatInstance(random_character_set(taxa, rng, settings.random_max_characters), taxa))
    return instances

