# synthetic/corpus_generator.py
# =============================================================================
"""Latent-cluster KB snapshot pairs with predictive entity text.

Each entity belongs to one cluster; each cluster implies a set of types.
Descriptions and articles mix cluster tokens, type tokens and background
noise, so text is genuinely predictive of types. A seeded fraction of the
true facts is hidden from the earlier snapshot and revealed in the later.
"""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple

import numpy as np

from document_processing.document_loader import DocumentLoader
from knowledge_base.snapshot import write_facts_tsv
from utils.exceptions import UsageError

logger = logging.getLogger(__name__)

TRAIN_SNAPSHOT = "train_snapshot.tsv"
TEST_SNAPSHOT = "test_snapshot.tsv"
DESCRIPTIONS = "descriptions.tsv"
WIKI = "wiki.tsv"


@dataclass(frozen=True)
class SynthConfig:
    entities: int = 10000
    types: int = 50
    clusters: int = 40
    missing_rate: float = 0.2
    seed: int = 0
    max_types_per_cluster: int = 4
    type_keep_rate: float = 0.9
    tokens_per_cluster: int = 12
    tokens_per_type: int = 4
    background_tokens: int = 2000
    description_length: int = 12
    wiki_length: int = 60
    description_signal: float = 0.5
    wiki_signal: float = 0.3

    def __post_init__(self):
        if self.entities < 1 or self.types < 1 or self.clusters < 1:
            raise UsageError("entities, types and clusters must be >= 1")
        for name in ("missing_rate", "type_keep_rate", "description_signal", "wiki_signal"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise UsageError(f"{name} must lie in [0, 1], got {value}")
        if self.max_types_per_cluster < 1:
            raise UsageError("max_types_per_cluster must be >= 1")


@dataclass
class SyntheticCorpus:
    entity_symbols: List[str]
    type_symbols: List[str]
    cluster_of: np.ndarray
    train_facts: List[Tuple[str, str]] = field(default_factory=list)
    test_facts: List[Tuple[str, str]] = field(default_factory=list)
    descriptions: List[Tuple[str, str]] = field(default_factory=list)
    wiki: List[Tuple[str, str]] = field(default_factory=list)

    @property
    def hidden_facts(self) -> int:
        return len(self.test_facts) - len(self.train_facts)

    def write(self, out_dir) -> List[Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for name, facts in ((TRAIN_SNAPSHOT, self.train_facts), (TEST_SNAPSHOT, self.test_facts)):
            write_facts_tsv(out_dir / name, facts)
            paths.append(out_dir / name)
        for name, docs in ((DESCRIPTIONS, self.descriptions), (WIKI, self.wiki)):
            DocumentLoader.write_corpus(out_dir / name, docs)
            paths.append(out_dir / name)
        return paths


class CorpusGenerator:
    """Generates a synthetic snapshot pair plus description and article corpora"""

    def __init__(self, cfg: SynthConfig):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)

    def _cluster_types(self) -> List[np.ndarray]:
        cfg = self.cfg
        # Zipf-like type popularity so a few types dominate, as in real KBs
        popularity = 1.0 / np.arange(1, cfg.types + 1) ** 0.7
        popularity /= popularity.sum()
        sets = []
        for _ in range(cfg.clusters):
            size = int(self.rng.integers(1, min(cfg.max_types_per_cluster, cfg.types) + 1))
            sets.append(np.sort(self.rng.choice(cfg.types, size=size, replace=False, p=popularity)))
        return sets

    def _text(self, length: int, signal: float, signal_tokens: np.ndarray) -> str:
        words = []
        for is_signal in self.rng.random(length) < signal:
            if is_signal and len(signal_tokens):
                words.append(f"w{int(self.rng.choice(signal_tokens))}")
            else:
                words.append(f"w{int(self.rng.integers(self.cfg.background_tokens))}")
        return " ".join(words)

    def generate(self) -> SyntheticCorpus:
        cfg = self.cfg
        entity_symbols = [f"/m/e{i:06d}" for i in range(cfg.entities)]
        type_symbols = [f"/synthetic/type_{t:03d}" for t in range(cfg.types)]
        cluster_types = self._cluster_types()
        cluster_sizes = self.rng.dirichlet(np.full(cfg.clusters, 2.0))
        cluster_of = self.rng.choice(cfg.clusters, size=cfg.entities, p=cluster_sizes)

        # token ids: background first, then cluster blocks, then type blocks
        cluster_base = cfg.background_tokens
        type_base = cluster_base + cfg.clusters * cfg.tokens_per_cluster
        corpus = SyntheticCorpus(entity_symbols, type_symbols, cluster_of)

        for e in range(cfg.entities):
            c = int(cluster_of[e])
            kept = [int(t) for t in cluster_types[c] if self.rng.random() < cfg.type_keep_rate]
            for t in kept:
                fact = (entity_symbols[e], type_symbols[t])
                corpus.test_facts.append(fact)
                if self.rng.random() >= cfg.missing_rate:
                    corpus.train_facts.append(fact)
            signal = np.concatenate([
                cluster_base + c * cfg.tokens_per_cluster + np.arange(cfg.tokens_per_cluster),
                *[type_base + t * cfg.tokens_per_type + np.arange(cfg.tokens_per_type) for t in kept],
            ])
            corpus.descriptions.append(
                (entity_symbols[e], self._text(cfg.description_length, cfg.description_signal, signal)))
            corpus.wiki.append((entity_symbols[e], self._text(cfg.wiki_length, cfg.wiki_signal, signal)))

        logger.info("Synthesized %d entities, %d true facts, %d hidden (rate %.3f)",
                    cfg.entities, len(corpus.test_facts), corpus.hidden_facts, cfg.missing_rate)
        return corpus
