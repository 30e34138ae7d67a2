# vector_store/sparse.py
# =============================================================================
"""Sparse vectors and the block layout of the entity feature space."""
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from utils.exceptions import DomainError

BLOCK_ORDER = ("T", "D", "W")


class SparseVector:
    """Sorted (index, weight) entries with no stored zeros"""

    __slots__ = ("indices", "values", "dim")

    def __init__(self, indices, values, dim: int):
        indices = np.asarray(indices, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if indices.shape != values.shape or indices.ndim != 1:
            raise DomainError("indices and values must be 1-d arrays of equal length")
        if len(indices):
            if np.any(np.diff(indices) <= 0):
                raise DomainError("sparse indices must be strictly increasing")
            if indices[0] < 0 or indices[-1] >= dim:
                raise DomainError(f"sparse index out of range for dimension {dim}")
            if np.any(values == 0.0):
                raise DomainError("sparse vectors must not store zero weights")
        self.indices = indices
        self.values = values
        self.dim = int(dim)

    @classmethod
    def from_dense(cls, dense) -> "SparseVector":
        dense = np.asarray(dense, dtype=np.float64)
        nz = np.flatnonzero(dense)
        return cls(nz, dense[nz], len(dense))

    @classmethod
    def zeros(cls, dim: int) -> "SparseVector":
        return cls(np.empty(0, dtype=np.int64), np.empty(0), dim)

    def __len__(self) -> int:
        return len(self.indices)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseVector)
            and self.dim == other.dim
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"SparseVector(dim={self.dim}, entries={self.entries()})"

    def entries(self) -> List[Tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def dot_dense(self, dense: np.ndarray) -> float:
        if dense.shape[-1] != self.dim:
            raise DomainError(f"dimension mismatch: vector {self.dim}, weights {dense.shape[-1]}")
        return float(np.dot(dense[self.indices], self.values))

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        dense[self.indices] = self.values
        return dense

    def scaled(self, alpha: float) -> "SparseVector":
        if alpha == 0.0:
            return SparseVector.zeros(self.dim)
        return SparseVector(self.indices, self.values * alpha, self.dim)


def sparse_difference(ia, va, ib, vb):
    """a - b over the union of both supports (explicit zeros possible)"""
    idx = np.union1d(ia, ib)
    vals = np.zeros(len(idx))
    vals[np.searchsorted(idx, ia)] += va
    vals[np.searchsorted(idx, ib)] -= vb
    return idx, vals


@dataclass(frozen=True)
class Block:
    name: str
    offset: int
    width: int


class FeatureSpace:
    """Ordered, non-overlapping blocks making up the d_e entity dimensions"""

    def __init__(self, blocks: Sequence[Block]):
        offset = 0
        names = []
        for block in blocks:
            if block.name not in BLOCK_ORDER:
                raise DomainError(f"unknown feature block '{block.name}'")
            if block.offset != offset or block.width < 0:
                raise DomainError(f"block {block.name} must start at {offset} with width >= 0")
            offset += block.width
            names.append(block.name)
        if names != sorted(names, key=BLOCK_ORDER.index) or len(set(names)) != len(names):
            raise DomainError(f"blocks must appear once each in order {BLOCK_ORDER}, got {names}")
        self.blocks = tuple(blocks)
        self.total_dim = offset

    @classmethod
    def from_widths(cls, widths: Sequence[Tuple[str, int]]) -> "FeatureSpace":
        blocks, offset = [], 0
        for name, width in sorted(widths, key=lambda item: BLOCK_ORDER.index(item[0])):
            blocks.append(Block(name, offset, int(width)))
            offset += int(width)
        return cls(blocks)

    def block(self, name: str) -> Block:
        for block in self.blocks:
            if block.name == name:
                return block
        raise DomainError(f"feature space has no block '{name}'")

    @property
    def names(self) -> List[str]:
        return [b.name for b in self.blocks]

    def __eq__(self, other) -> bool:
        return isinstance(other, FeatureSpace) and self.blocks == other.blocks

    def __repr__(self) -> str:
        table = ", ".join(f"{b.name}@{b.offset}+{b.width}" for b in self.blocks)
        return f"FeatureSpace({table}; d_e={self.total_dim})"
