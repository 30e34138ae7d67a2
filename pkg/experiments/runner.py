# experiments/runner.py
# =============================================================================
"""Seed-averaged comparisons of objectives, feature blocks and algorithms on synthetic corpora."""
import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Sequence, Tuple

import numpy as np

from dataset.dataset_builder import DatasetConfig
from evaluation.evaluator import evaluate
from experiments.pipeline import DatasetArtifacts, build_dataset, featurize, predict, train_model
from knowledge_base.snapshot import KBSnapshot, load_snapshot
from knowledge_base.vocabulary import EntityVocab, TypeVocab
from synthetic.corpus_generator import CorpusGenerator, SynthConfig
from training.train_config import TrainConfig
from utils.exceptions import UsageError
from vector_store.feature_store import FeatureMatrix

logger = logging.getLogger(__name__)

# equal negative budgets: m + n = 2
OBJECTIVES = {"NE": (2, 0), "NT": (0, 2), "global": (1, 1)}
FEATURE_SETS = {"T": ("T",), "D": ("D",), "W": ("W",), "D+W": ("D", "W"), "T+D+W": ("T", "D", "W")}
ALGORITHMS = ("linear.adagrad", "linear.dcd", "embedding")
COMPARISONS = ("objectives", "features", "algorithms")


@dataclass
class PreparedCorpus:
    train: KBSnapshot
    test: KBSnapshot
    dataset: DatasetArtifacts
    descriptions: Dict[int, str]
    wiki: Dict[int, str]


class ExperimentRunner:
    """Runs every configuration of a comparison over several seeds and averages the metrics"""

    def __init__(self, synth: SynthConfig, num_types: int, seeds: Sequence[int], base: TrainConfig,
                 extra_negative_fraction: float = 0.1, ks: Sequence[int] = (100, 1000), min_df: int = 2):
        if not seeds:
            raise UsageError("at least one seed is required")
        self.synth = synth
        self.num_types = num_types
        self.seeds = list(seeds)
        self.base = base
        self.extra_negative_fraction = extra_negative_fraction
        self.ks = list(ks)
        self.min_df = min_df
        self._corpora: Dict[int, PreparedCorpus] = {}
        self._features: Dict[Tuple[int, Tuple[str, ...]], FeatureMatrix] = {}

    def prepare(self, seed: int) -> PreparedCorpus:
        if seed not in self._corpora:
            corpus = CorpusGenerator(replace(self.synth, seed=seed)).generate()
            entity_vocab, type_vocab = EntityVocab(), TypeVocab()
            train = load_snapshot(corpus.train_facts, entity_vocab, type_vocab, timestamp_label="train")
            test = load_snapshot(corpus.test_facts, entity_vocab, type_vocab, timestamp_label="test")
            cfg = DatasetConfig(self.num_types, self.extra_negative_fraction, seed)
            dataset = build_dataset(train, test, cfg)

            def as_ids(docs):
                return {entity_vocab.get(s): text for s, text in docs if s in entity_vocab}

            self._corpora[seed] = PreparedCorpus(train, test, dataset, as_ids(corpus.descriptions), as_ids(corpus.wiki))
        return self._corpora[seed]

    def features(self, seed: int, blocks: Sequence[str]) -> FeatureMatrix:
        key = (seed, tuple(blocks))
        if key not in self._features:
            prepared = self.prepare(seed)
            self._features[key] = featurize(
                len(prepared.train.entity_vocab), prepared.train, prepared.dataset.types, blocks,
                prepared.descriptions, prepared.wiki, self.min_df)
        return self._features[key]

    def run_one(self, seed: int, blocks: Sequence[str], cfg: TrainConfig) -> dict:
        prepared = self.prepare(seed)
        features = self.features(seed, blocks)
        model = train_model(prepared.dataset.model_positives(), features, len(prepared.dataset.types),
                            replace(cfg, seed=seed))
        report = evaluate(predict(model, features, prepared.dataset.model_examples()), self.ks)
        row = {"map": report.map, "gap": report.gap}
        row.update({f"g@{k}": v for k, v in report.g_at_k.items()})
        return row

    def run_configuration(self, name: str, blocks: Sequence[str], cfg: TrainConfig) -> dict:
        runs = [self.run_one(seed, blocks, cfg) for seed in self.seeds]
        summary = {"configuration": name, "algorithm": cfg.algorithm, "blocks": "+".join(blocks),
                   "m": cfg.m, "n": cfg.n, "seeds": len(runs)}
        for metric in runs[0]:
            values = [r[metric] for r in runs if r[metric] is not None]
            summary[metric] = float(np.mean(values)) if values else None
        logger.info("%s: MAP %s GAP %s", name, summary.get("map"), summary.get("gap"))
        return summary

    def compare_objectives(self, blocks=("D", "W")) -> List[dict]:
        return [self.run_configuration(name, blocks, replace(self.base, m=m, n=n))
                for name, (m, n) in OBJECTIVES.items()]

    def compare_features(self) -> List[dict]:
        return [self.run_configuration(name, blocks, replace(self.base, m=1, n=1))
                for name, blocks in FEATURE_SETS.items()]

    def compare_algorithms(self, blocks=("D", "W")) -> List[dict]:
        rows = []
        for algorithm in ALGORITHMS:
            cfg = TrainConfig(**{**self.base.to_dict(), "algorithm": algorithm, "loss_power": None, "m": 1, "n": 1})
            rows.append(self.run_configuration(algorithm, blocks, cfg))
        return rows

    def run(self, comparison: str, blocks=("D", "W")) -> List[dict]:
        if comparison == "objectives":
            return self.compare_objectives(blocks)
        if comparison == "features":
            return self.compare_features()
        if comparison == "algorithms":
            return self.compare_algorithms(blocks)
        raise UsageError(f"unknown comparison '{comparison}', expected one of {COMPARISONS}")
