# vector_store/featurizer.py
# =============================================================================
"""Entity features Phi(e) built from blocks T, D, W and one-hot type features Psi(t)."""
import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from document_processing.text_processor import TextProcessor, TextVocabulary
from knowledge_base.snapshot import KBSnapshot
from utils.exceptions import DomainError
from vector_store.feature_store import FeatureMatrix
from vector_store.sparse import BLOCK_ORDER, FeatureSpace, SparseVector

logger = logging.getLogger(__name__)


def type_feature_vector(e: int, train: KBSnapshot, types: Sequence[int]) -> SparseVector:
    """Boolean indicators of the selected types observed for e in the training snapshot"""
    observed = train.types_of(e)
    idx = [i for i, t in enumerate(types) if t in observed]
    return SparseVector(idx, np.ones(len(idx)), len(types))


def compose_entity_features(blocks: Sequence[Tuple[str, SparseVector]], space: FeatureSpace) -> SparseVector:
    """Concatenate block vectors at their offsets, in the fixed T, D, W order"""
    indices, values = [], []
    for name, vector in sorted(blocks, key=lambda item: BLOCK_ORDER.index(item[0])):
        block = space.block(name)
        if vector.dim != block.width:
            raise DomainError(f"block {name} has dimension {vector.dim}, expected {block.width}")
        indices.append(vector.indices + block.offset)
        values.append(vector.values)
    if not indices:
        return SparseVector.zeros(space.total_dim)
    return SparseVector(np.concatenate(indices), np.concatenate(values), space.total_dim)


def type_one_hot(t: int, num_types: int) -> SparseVector:
    if not 0 <= t < num_types:
        raise DomainError(f"type id {t} out of range [0, {num_types})")
    return SparseVector([t], [1.0], num_types)


def type_feature_matrix(num_types: int) -> sp.csr_matrix:
    """Psi for all types at once: the identity"""
    return sp.identity(num_types, format="csr", dtype=np.float64)


class Featurizer:
    """Builds the entity feature matrix from the training-era KB and text corpora"""

    def __init__(self, blocks: Sequence[str], min_df: Optional[int] = None):
        unknown = set(blocks) - set(BLOCK_ORDER)
        if unknown or not blocks:
            raise DomainError(f"feature blocks must be a non-empty subset of {BLOCK_ORDER}, got {list(blocks)}")
        self.blocks = [b for b in BLOCK_ORDER if b in blocks]
        self.text_processor = TextProcessor(min_df)
        self.vocabularies: Dict[str, TextVocabulary] = {}

    def type_block(self, num_entities: int, train: KBSnapshot, types: Sequence[int]) -> sp.csr_matrix:
        position = {t: i for i, t in enumerate(types)}
        rows, cols = [], []
        for e, t in train.sorted_facts():
            if t in position and e < num_entities:
                rows.append(e)
                cols.append(position[t])
        data = np.ones(len(rows))
        return sp.csr_matrix((data, (rows, cols)), shape=(num_entities, len(types)))

    def text_block(self, name: str, num_entities: int, documents: Dict[int, str]) -> sp.csr_matrix:
        corpus = sorted(documents.items())
        vocab = self.text_processor.build_text_vocabulary(corpus)
        self.vocabularies[name] = vocab
        texts = [documents.get(e, "") for e in range(num_entities)]
        return self.text_processor.tfidf_matrix(texts, vocab)

    def build(
        self,
        num_entities: int,
        train: KBSnapshot,
        types: Sequence[int],
        descriptions: Optional[Dict[int, str]] = None,
        wiki: Optional[Dict[int, str]] = None,
    ) -> FeatureMatrix:
        """Feature rows for entity ids 0..num_entities-1; entities without text get empty text blocks"""
        matrices, widths = [], []
        for name in self.blocks:
            if name == "T":
                block = self.type_block(num_entities, train, types)
            elif name == "D":
                block = self.text_block(name, num_entities, descriptions or {})
            else:
                block = self.text_block(name, num_entities, wiki or {})
            matrices.append(block)
            widths.append((name, block.shape[1]))
            logger.info("Feature block %s: width %d, %d non-zeros", name, block.shape[1], block.nnz)
        space = FeatureSpace.from_widths(widths)
        matrix = sp.hstack(matrices, format="csr") if matrices else sp.csr_matrix((num_entities, 0))
        return FeatureMatrix(matrix, space)
