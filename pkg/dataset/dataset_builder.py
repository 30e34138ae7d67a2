# dataset/dataset_builder.py
# =============================================================================
"""Two-snapshot train/test construction with closed-world negatives."""
import logging
from dataclasses import asdict, dataclass, field
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import Config
from knowledge_base.snapshot import KBSnapshot, diff_snapshots, type_counts
from knowledge_base.vocabulary import EntityId, TypeId
from utils.exceptions import DomainError, UsageError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatasetConfig:
    num_types: int = Config.NUM_TYPES
    extra_negative_fraction: float = Config.EXTRA_NEGATIVE_FRACTION
    seed: int = Config.SEED
    exclude_types: FrozenSet[int] = frozenset()

    def __post_init__(self):
        if self.num_types < 1:
            raise UsageError(f"num_types must be >= 1, got {self.num_types}")
        if not 0.0 <= self.extra_negative_fraction <= 1.0:
            raise UsageError(
                f"extra_negative_fraction must lie in [0, 1], got {self.extra_negative_fraction}")


@dataclass(frozen=True, order=True)
class LabeledExample:
    entity: EntityId
    type: TypeId
    label: bool


@dataclass
class DatasetStats:
    num_entities: int
    num_types: int
    num_positive_train: int
    num_positive_test: int
    num_negative_test: int
    neg_pos_ratio: Optional[float]  # None when there are no test positives
    max_positives_per_type: int
    min_positives_per_type: int
    test_positives_per_type: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def select_top_types(train: KBSnapshot, k: int, exclude: Sequence[int] = ()) -> List[TypeId]:
    """The k most frequent types of ``train``; ties go to the lower id"""
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    excluded = set(exclude)
    counts = {t: c for t, c in type_counts(train).items() if t not in excluded}
    if k > len(counts):
        raise DomainError(f"requested {k} types but only {len(counts)} types have facts")
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return [TypeId(t) for t, _ in ranked[:k]]


def build_training_positives(train: KBSnapshot, types: Sequence[int]) -> List[Tuple[EntityId, TypeId]]:
    selected = set(types)
    return [(EntityId(e), TypeId(t)) for e, t in train.sorted_facts() if t in selected]


def build_test_set(
    train: KBSnapshot,
    test: KBSnapshot,
    types: Sequence[int],
    cfg: DatasetConfig,
) -> List[LabeledExample]:
    """Label newly added facts positive and closed-world pairs negative.

    Negatives come from two rules: every unobserved selected type of an
    entity that gained a fact, and a seeded fraction of the unobserved
    pairs of entities that neither gained a fact nor trained.
    """
    selected = list(types)
    selected_set = set(selected)
    new_facts = sorted((e, t) for e, t in diff_snapshots(train, test) if t in selected_set)

    examples = [LabeledExample(EntityId(e), TypeId(t), True) for e, t in new_facts]
    gained = sorted({e for e, _ in new_facts})

    # rule (a): all unobserved selected types of entities with a new fact
    for e in gained:
        for t in selected:
            if (e, t) not in test.facts:
                examples.append(LabeledExample(EntityId(e), TypeId(t), False))
    rule_a = len(examples) - len(new_facts)

    # rule (b): a portion of the pairs of entities unused during training
    rule_b = 0
    if cfg.extra_negative_fraction > 0.0 and selected:
        trained = {e for e, t in train.facts if t in selected_set}
        skip = trained.union(gained)
        rng = np.random.default_rng(cfg.seed)
        for e in range(len(test.entity_vocab)):
            if e in skip:
                continue
            draws = rng.random(len(selected))
            for t, draw in zip(selected, draws):
                if draw < cfg.extra_negative_fraction and (e, t) not in test.facts:
                    examples.append(LabeledExample(EntityId(e), TypeId(t), False))
                    rule_b += 1

    examples.sort(key=lambda ex: (ex.entity, ex.type))
    logger.info("Test set: %d positives, %d rule-(a) negatives, %d rule-(b) negatives",
                len(new_facts), rule_a, rule_b)
    return examples


def dataset_stats(
    train_pos: Sequence[Tuple[int, int]],
    test_examples: Sequence[LabeledExample],
    types: Optional[Sequence[int]] = None,
) -> DatasetStats:
    num_pos = sum(1 for ex in test_examples if ex.label)
    num_neg = len(test_examples) - num_pos
    if num_pos == 0:
        logger.warning("No test positives; negative/positive ratio is undefined")
    train_counts = {t: 0 for t in (types or ())}
    for _, t in train_pos:
        train_counts[t] = train_counts.get(t, 0) + 1
    test_counts = {}
    for ex in test_examples:
        if ex.label:
            test_counts[int(ex.type)] = test_counts.get(int(ex.type), 0) + 1
    entities = {e for e, _ in train_pos} | {ex.entity for ex in test_examples}
    return DatasetStats(
        num_entities=len(entities),
        num_types=len(train_counts),
        num_positive_train=len(train_pos),
        num_positive_test=num_pos,
        num_negative_test=num_neg,
        neg_pos_ratio=(num_neg / num_pos) if num_pos else None,
        max_positives_per_type=max(train_counts.values(), default=0),
        min_positives_per_type=min(train_counts.values(), default=0),
        test_positives_per_type=dict(sorted(test_counts.items())),
    )
