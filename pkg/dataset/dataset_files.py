# dataset/dataset_files.py
# =============================================================================
"""Reading and writing the artifacts of build-dataset."""
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from dataset.dataset_builder import DatasetStats, LabeledExample
from knowledge_base.snapshot import read_facts_tsv
from knowledge_base.vocabulary import EntityVocab, TypeVocab
from utils.exceptions import ParseError

TRAIN_POSITIVES = "train_positives.tsv"
TEST_SET = "test_set.tsv"
TYPES = "types.tsv"
STATS = "stats.json"


def write_test_set(path, examples: Sequence[LabeledExample], entity_vocab, type_vocab) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for ex in examples:
            f.write(f"{entity_vocab.symbol(ex.entity)}\t{type_vocab.symbol(ex.type)}\t{int(ex.label)}\n")


def read_test_set(path) -> List[Tuple[str, str, bool]]:
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3 or fields[2] not in ("0", "1"):
                raise ParseError("expected 'entity<TAB>type<TAB>{0|1}'", line_number, Path(path).name)
            rows.append((fields[0], fields[1], fields[2] == "1"))
    return rows


def write_types(path, types: Sequence[int], counts: Dict[int, int], type_vocab,
                test_counts: Optional[Dict[int, int]] = None) -> None:
    """symbol, training facts, test positives; one line per selected type in rank order"""
    test_counts = test_counts or {}
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for t in types:
            f.write(f"{type_vocab.symbol(t)}\t{counts.get(t, 0)}\t{test_counts.get(t, 0)}\n")


def read_types(path) -> TypeVocab:
    """Selected types in rank order; model type index i is the i-th line"""
    vocab = TypeVocab()
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            symbol = line.split("\t")[0]
            if not symbol:
                raise ParseError("empty type symbol", line_number, Path(path).name)
            vocab.add(symbol)
    return vocab


def write_stats(path, stats: DatasetStats) -> None:
    """Flat JSON of the dataset counts; per-type test positives live in types.tsv"""
    payload = stats.to_dict()
    del payload["test_positives_per_type"]
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


class DatasetBundle:
    """The dataset directory re-interned for training and prediction"""

    def __init__(self, dataset_dir, entity_vocab: EntityVocab):
        self.dataset_dir = Path(dataset_dir)
        self.entity_vocab = entity_vocab
        self.type_vocab = read_types(self.dataset_dir / TYPES)

    def training_positives(self, extend=False) -> List[Tuple[int, int]]:
        return [
            (self.entity_vocab.lookup(e, extend), self.type_vocab.lookup(t))
            for e, t in read_facts_tsv(self.dataset_dir / TRAIN_POSITIVES)
        ]

    def test_examples(self, extend=False) -> List[LabeledExample]:
        return [
            LabeledExample(self.entity_vocab.lookup(e, extend), self.type_vocab.lookup(t), label)
            for e, t, label in read_test_set(self.dataset_dir / TEST_SET)
        ]
