# vector_store/feature_store.py
# =============================================================================
import logging
from pathlib import Path
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from knowledge_base.vocabulary import EntityVocab
from utils.exceptions import DomainError, ParseError
from utils.helpers import format_number
from vector_store.sparse import Block, FeatureSpace, SparseVector

logger = logging.getLogger(__name__)


class FeatureMatrix:
    """CSR store of Phi(e), one row per entity id"""

    def __init__(self, matrix, space: FeatureSpace):
        matrix = sp.csr_matrix(matrix, dtype=np.float64)
        if matrix.shape[1] != space.total_dim:
            raise DomainError(f"matrix has {matrix.shape[1]} columns, feature space declares {space.total_dim}")
        matrix.eliminate_zeros()
        matrix.sort_indices()
        self.matrix = matrix
        self.space = space

    @property
    def num_entities(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.space.total_dim

    def row_arrays(self, e: int) -> Tuple[np.ndarray, np.ndarray]:
        """(indices, values) of Phi(e) without copying"""
        start, end = self.matrix.indptr[e], self.matrix.indptr[e + 1]
        return self.matrix.indices[start:end], self.matrix.data[start:end]

    def row(self, e: int) -> SparseVector:
        if not 0 <= e < self.num_entities:
            raise DomainError(f"entity id {e} has no feature row")
        idx, vals = self.row_arrays(e)
        return SparseVector(idx.astype(np.int64), vals.copy(), self.dim)

    def squared_norms(self) -> np.ndarray:
        return np.asarray(self.matrix.multiply(self.matrix).sum(axis=1)).ravel()


def _format_row(indices, values) -> str:
    return " ".join(f"{i}:{format_number(w)}" for i, w in zip(indices.tolist(), values.tolist()))


def _parse_row(text: str, dim: int, line_number: int, source: str) -> Tuple[list, list]:
    indices, values = [], []
    for item in text.split():
        idx, sep, weight = item.partition(":")
        try:
            i, w = int(idx), float(weight)
        except ValueError:
            raise ParseError(f"bad sparse entry '{item}'", line_number, source) from None
        if not sep or not 0 <= i < dim:
            raise ParseError(f"sparse entry '{item}' outside dimension {dim}", line_number, source)
        indices.append(i)
        values.append(w)
    return indices, values


def write_feature_matrix(path, features: FeatureMatrix, entity_vocab: EntityVocab) -> None:
    """Header (total_dim, block table) then one sparse row per entity"""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"# total_dim {features.dim}\n")
        for block in features.space.blocks:
            f.write(f"# block {block.name} {block.offset} {block.width}\n")
        for e in range(features.num_entities):
            idx, vals = features.row_arrays(e)
            f.write(f"{entity_vocab.symbol(e)}\t{_format_row(idx, vals)}\n")


def read_sparse_header(handle, source: str):
    """Consume '# key ...' header lines; returns (header dict, blocks, first body line)"""
    header, blocks = {}, []
    for line_number, line in enumerate(handle, start=1):
        if not line.startswith("# "):
            return header, blocks, (line_number, line)
        key, _, value = line[2:].rstrip("\n").partition(" ")
        if key == "block":
            rest = value.split()
            if len(rest) != 3:
                raise ParseError("expected '# block NAME OFFSET WIDTH'", line_number, source)
            blocks.append(Block(rest[0], int(rest[1]), int(rest[2])))
        else:
            header[key] = value
    return header, blocks, None


def read_sparse_rows(handle, first, dim: int, source: str):
    """Yield (symbol, indices, values) for every `symbol<TAB>i:w ...` line"""
    if first is None:
        return
    yield _split_row(first[1], dim, first[0], source)
    for line_number, line in enumerate(handle, start=first[0] + 1):
        if line.strip():
            yield _split_row(line, dim, line_number, source)


def _split_row(line: str, dim: int, line_number: int, source: str):
    line = line.rstrip("\n")
    symbol, sep, body = line.partition("\t")
    if not sep or not symbol:
        raise ParseError("expected 'symbol<TAB>idx:weight ...'", line_number, source)
    indices, values = _parse_row(body, dim, line_number, source)
    return symbol, indices, values


def read_feature_matrix(path) -> Tuple[FeatureMatrix, EntityVocab]:
    path = Path(path)
    vocab = EntityVocab()
    rows, cols, data = [], [], []
    with open(path, "r", encoding="utf-8") as f:
        header, blocks, first = read_sparse_header(f, path.name)
        if "total_dim" not in header:
            raise ParseError("missing '# total_dim' header", 1, path.name)
        dim = int(header["total_dim"])
        space = FeatureSpace(blocks)
        if space.total_dim != dim:
            raise ParseError(f"block widths sum to {space.total_dim}, header says {dim}", 1, path.name)
        for symbol, indices, values in read_sparse_rows(f, first, dim, path.name):
            if symbol in vocab:
                raise ParseError(f"duplicate feature row for '{symbol}'", None, path.name)
            e = vocab.add(symbol)
            rows.extend([e] * len(indices))
            cols.extend(indices)
            data.extend(values)
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(len(vocab), dim))
    logger.info("Read %d feature rows of dimension %d from %s", len(vocab), dim, path.name)
    return FeatureMatrix(matrix, space), vocab
