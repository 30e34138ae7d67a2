# experiments/pipeline.py
# =============================================================================
"""In-process pipeline stages shared by the CLI commands and the experiment runner."""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from dataset.dataset_builder import (DatasetConfig, DatasetStats, LabeledExample, build_test_set,
                                     build_training_positives, dataset_stats, select_top_types)
from evaluation.evaluator import Prediction
from knowledge_base.snapshot import KBSnapshot, type_counts
from knowledge_base.vocabulary import EntityVocab, TypeVocab
from training.embedding_trainer import train_embedding
from training.linear_trainer import train_linear_adagrad, train_linear_dcd
from training.sampler import NegativeSampler
from training.train_config import TrainConfig
from vector_store.feature_store import FeatureMatrix
from vector_store.featurizer import Featurizer

logger = logging.getLogger(__name__)


@dataclass
class DatasetArtifacts:
    types: List[int]
    type_counts: Dict[int, int]
    train_positives: List[Tuple[int, int]]
    test_examples: List[LabeledExample]
    stats: DatasetStats

    def type_position(self) -> Dict[int, int]:
        return {t: i for i, t in enumerate(self.types)}

    def model_positives(self) -> List[Tuple[int, int]]:
        """Training positives with types re-indexed to their rank position"""
        position = self.type_position()
        return [(e, position[t]) for e, t in self.train_positives]

    def model_examples(self) -> List[LabeledExample]:
        position = self.type_position()
        return [LabeledExample(ex.entity, position[ex.type], ex.label) for ex in self.test_examples]


def build_dataset(train: KBSnapshot, test: KBSnapshot, cfg: DatasetConfig) -> DatasetArtifacts:
    types = select_top_types(train, cfg.num_types, sorted(cfg.exclude_types))
    positives = build_training_positives(train, types)
    examples = build_test_set(train, test, types, cfg)
    stats = dataset_stats(positives, examples, types)
    counts = type_counts(train)
    logger.info("Dataset: %d types, %d training positives, %d test examples (ratio %s)",
                len(types), len(positives), len(examples), stats.neg_pos_ratio)
    return DatasetArtifacts(types, counts, positives, examples, stats)


def featurize(
    num_entities: int,
    train: KBSnapshot,
    types: Sequence[int],
    blocks: Sequence[str],
    descriptions: Optional[Dict[int, str]] = None,
    wiki: Optional[Dict[int, str]] = None,
    min_df: Optional[int] = None,
) -> FeatureMatrix:
    return Featurizer(blocks, min_df).build(num_entities, train, types, descriptions, wiki)


def positives_snapshot(positives: Sequence[Tuple[int, int]], num_entities: int, num_types: int) -> KBSnapshot:
    """Training positives as a snapshot in model id space, for negative sampling"""
    entity_vocab = EntityVocab(str(i) for i in range(num_entities))
    type_vocab = TypeVocab(str(i) for i in range(num_types))
    return KBSnapshot(positives, entity_vocab, type_vocab, "train-positives")


def train_model(positives: Sequence[Tuple[int, int]], features: FeatureMatrix, num_types: int, cfg: TrainConfig):
    """Dispatch to the trainer named by cfg.algorithm"""
    snapshot = positives_snapshot(positives, features.num_entities, num_types)
    sampler = NegativeSampler(snapshot, features.num_entities, num_types, cfg.negative_config)
    logger.info("Training %s (%s objective, m=%d n=%d) on %d positives",
                cfg.algorithm, cfg.negative_config.objective, cfg.m, cfg.n, len(positives))
    if cfg.algorithm == "linear.adagrad":
        return train_linear_adagrad(positives, features, sampler, cfg)
    if cfg.algorithm == "linear.dcd":
        return train_linear_dcd(positives, features, sampler, cfg)
    return train_embedding(positives, features, None, sampler, cfg)


def predict(model, features: FeatureMatrix, examples: Sequence[LabeledExample]) -> List[Prediction]:
    entities = np.fromiter((ex.entity for ex in examples), dtype=np.int64, count=len(examples))
    types = np.fromiter((ex.type for ex in examples), dtype=np.int64, count=len(examples))
    scores = model.score_pairs(features, entities, types) if len(examples) else np.empty(0)
    return [Prediction(ex.entity, ex.type, float(s), ex.label) for ex, s in zip(examples, scores)]
