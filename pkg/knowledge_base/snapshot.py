# knowledge_base/snapshot.py
# =============================================================================
"""Immutable sets of (entity, type) facts observed at one point in time."""
import logging
from collections import Counter
from functools import cached_property
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, Iterator, Set, Tuple

import numpy as np

from knowledge_base.vocabulary import EntityId, EntityVocab, TypeId, TypeVocab
from utils.exceptions import DomainError, ParseError

logger = logging.getLogger(__name__)

Fact = Tuple[int, int]


class KBSnapshot:
    """A set of observed entity-type facts plus the vocabularies they reference"""

    def __init__(
        self,
        facts: Iterable[Fact],
        entity_vocab: EntityVocab,
        type_vocab: TypeVocab,
        timestamp_label: str = "",
    ):
        self.facts: FrozenSet[Fact] = frozenset((int(e), int(t)) for e, t in facts)
        self.entity_vocab = entity_vocab
        self.type_vocab = type_vocab
        self.timestamp_label = timestamp_label
        for e, t in self.facts:
            entity_vocab.check(e)
            type_vocab.check(t)

    def __len__(self) -> int:
        return len(self.facts)

    def __iter__(self) -> Iterator[Fact]:
        return iter(self.facts)

    def __repr__(self) -> str:
        return f"KBSnapshot({self.timestamp_label!r}, {len(self.facts)} facts)"

    def sorted_facts(self):
        return sorted(self.facts)

    @cached_property
    def types_by_entity(self) -> Dict[int, FrozenSet[int]]:
        grouped: Dict[int, Set[int]] = {}
        for e, t in self.facts:
            grouped.setdefault(e, set()).add(t)
        return {e: frozenset(ts) for e, ts in grouped.items()}

    @cached_property
    def entities_by_type(self) -> Dict[int, np.ndarray]:
        grouped: Dict[int, list] = {}
        for e, t in self.facts:
            grouped.setdefault(t, []).append(e)
        return {t: np.array(sorted(es), dtype=np.int64) for t, es in grouped.items()}

    def types_of(self, e: int) -> FrozenSet[int]:
        return self.types_by_entity.get(e, frozenset())

    def entities_of(self, t: int) -> np.ndarray:
        return self.entities_by_type.get(t, np.empty(0, dtype=np.int64))

    def restrict(self, types: Iterable[int], timestamp_label=None) -> "KBSnapshot":
        keep = set(types)
        return KBSnapshot(
            (f for f in self.facts if f[1] in keep),
            self.entity_vocab,
            self.type_vocab,
            self.timestamp_label if timestamp_label is None else timestamp_label,
        )


def load_snapshot(
    facts_stream: Iterable[Tuple[str, str]],
    entity_vocab: EntityVocab,
    type_vocab: TypeVocab,
    extend: bool = True,
    timestamp_label: str = "",
) -> KBSnapshot:
    """Intern a stream of (entity_symbol, type_symbol) records into a snapshot.

    With ``extend`` unseen symbols are added to the vocabularies; otherwise
    they raise VocabularyError. Duplicate records collapse into one fact.
    """
    facts = set()
    for line_number, record in enumerate(facts_stream, start=1):
        if not isinstance(record, (tuple, list)) or len(record) != 2:
            raise ParseError(f"expected (entity, type) record, got {record!r}", line_number)
        entity_symbol, type_symbol = record
        if not entity_symbol or not type_symbol:
            raise ParseError("empty entity or type symbol", line_number)
        e = entity_vocab.lookup(entity_symbol, extend=extend)
        t = type_vocab.lookup(type_symbol, extend=extend)
        facts.add((e, t))
    snapshot = KBSnapshot(facts, entity_vocab, type_vocab, timestamp_label)
    logger.debug("Loaded %s: %d facts, |E|=%d |T|=%d",
                 timestamp_label or "snapshot", len(snapshot), len(entity_vocab), len(type_vocab))
    return snapshot


def read_facts_tsv(path) -> Iterator[Tuple[str, str]]:
    """Yield (entity_symbol, type_symbol) from a fact TSV; '#' lines are comments"""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not fields[0] or not fields[1]:
                raise ParseError("expected 'entity<TAB>type'", line_number, path.name)
            yield fields[0], fields[1]


def load_snapshot_file(path, entity_vocab, type_vocab, extend=True, timestamp_label=None) -> KBSnapshot:
    label = Path(path).stem if timestamp_label is None else timestamp_label
    return load_snapshot(read_facts_tsv(path), entity_vocab, type_vocab, extend, label)


def write_facts_tsv(path, facts: Iterable[Tuple[str, str]]) -> None:
    """Write (entity_symbol, type_symbol) rows in the layout read_facts_tsv parses"""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for e, t in facts:
            f.write(f"{e}\t{t}\n")


def contains(snapshot: KBSnapshot, e: EntityId, t: TypeId) -> bool:
    snapshot.entity_vocab.check(e)
    snapshot.type_vocab.check(t)
    return (e, t) in snapshot.facts


def diff_snapshots(train: KBSnapshot, test: KBSnapshot) -> Set[Fact]:
    """Facts newly added in ``test``; deletions are ignored"""
    if train.entity_vocab is not test.entity_vocab or train.type_vocab is not test.type_vocab:
        raise DomainError("snapshots must share entity and type vocabularies")
    return set(test.facts - train.facts)


def type_counts(snapshot: KBSnapshot) -> Dict[int, int]:
    return dict(Counter(t for _, t in snapshot.facts))
