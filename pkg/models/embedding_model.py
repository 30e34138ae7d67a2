# models/embedding_model.py
# =============================================================================
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from models.linear_model import check_feature_space
from utils.exceptions import DomainError
from vector_store.feature_store import FeatureMatrix
from vector_store.sparse import FeatureSpace, SparseVector


class EmbeddingModel:
    """Bilinear model s(e, t) = Psi(t)^T V U^T Phi(e) with U: d_e x d, V: d_t x d"""

    algorithm = "embedding"

    def __init__(self, U: np.ndarray, V: np.ndarray, space: FeatureSpace, config: Optional[dict] = None):
        U = np.asarray(U, dtype=np.float64)
        V = np.asarray(V, dtype=np.float64)
        if U.ndim != 2 or V.ndim != 2 or U.shape[1] != V.shape[1] or U.shape[1] < 1:
            raise DomainError(f"U and V must be 2-d with the same d >= 1, got {U.shape} and {V.shape}")
        if U.shape[0] != space.total_dim:
            raise DomainError(f"U must have {space.total_dim} rows, got {U.shape[0]}")
        self.U = U
        self.V = V
        self.space = space
        self.config = dict(config or {})

    @classmethod
    def random(cls, d_e: int, d_t: int, d: int, space: FeatureSpace, rng: np.random.Generator, config=None):
        """Entries i.i.d. uniform in [-1/sqrt(d), 1/sqrt(d)]"""
        bound = 1.0 / np.sqrt(d)
        U = rng.uniform(-bound, bound, size=(d_e, d))
        V = rng.uniform(-bound, bound, size=(d_t, d))
        return cls(U, V, space, config)

    @property
    def d(self) -> int:
        return self.U.shape[1]

    @property
    def num_types(self) -> int:
        return self.V.shape[0]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.U)) and np.all(np.isfinite(self.V)))

    def entity_embedding(self, phi_e: SparseVector) -> np.ndarray:
        if phi_e.dim != self.U.shape[0]:
            raise DomainError(f"entity features have dimension {phi_e.dim}, expected {self.U.shape[0]}")
        return phi_e.values @ self.U[phi_e.indices]

    def type_embedding(self, psi_t: SparseVector) -> np.ndarray:
        if psi_t.dim != self.V.shape[0]:
            raise DomainError(f"type features have dimension {psi_t.dim}, expected {self.V.shape[0]}")
        return psi_t.values @ self.V[psi_t.indices]

    def score(self, phi_e: SparseVector, psi_t: SparseVector) -> float:
        return float(np.dot(self.type_embedding(psi_t), self.entity_embedding(phi_e)))

    def score_pairs(self, features: FeatureMatrix, entities: Sequence[int], types: Sequence[int],
                    type_features: Optional[sp.csr_matrix] = None) -> np.ndarray:
        check_feature_space(self.space, features)
        entities = np.asarray(entities, dtype=np.int64)
        types = np.asarray(types, dtype=np.int64)
        ent = np.asarray(features.matrix[entities] @ self.U)
        if type_features is None:
            typ = self.V[types]
        else:
            typ = np.asarray(type_features[types] @ self.V)
        return np.einsum("ij,ij->i", ent, typ)

    def score_matrix(self, features: FeatureMatrix, type_features: Optional[sp.csr_matrix] = None) -> np.ndarray:
        check_feature_space(self.space, features)
        typ = self.V if type_features is None else np.asarray(type_features @ self.V)
        return np.asarray(features.matrix @ self.U) @ typ.T


def score_embedding(model: EmbeddingModel, phi_e: SparseVector, psi_t: SparseVector) -> float:
    return model.score(phi_e, psi_t)
