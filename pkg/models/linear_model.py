# models/linear_model.py
# =============================================================================
from typing import Optional, Sequence

import numpy as np

from utils.exceptions import DomainError
from vector_store.feature_store import FeatureMatrix
from vector_store.sparse import FeatureSpace, SparseVector


class LinearModel:
    """One weight vector w_t per type; s(e, t) = w_t . Phi(e)"""

    algorithm = "linear"

    def __init__(self, weights: np.ndarray, space: FeatureSpace, config: Optional[dict] = None):
        weights = np.asarray(weights, dtype=np.float64)
        if weights.ndim != 2 or weights.shape[1] != space.total_dim:
            raise DomainError(f"weights must have shape (|T|, {space.total_dim}), got {weights.shape}")
        self.weights = weights
        self.space = space
        self.config = dict(config or {})

    @classmethod
    def zeros(cls, num_types: int, space: FeatureSpace, config=None) -> "LinearModel":
        return cls(np.zeros((num_types, space.total_dim)), space, config)

    @property
    def num_types(self) -> int:
        return self.weights.shape[0]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.weights)))

    def score(self, phi_e: SparseVector, t: int) -> float:
        if not 0 <= t < self.num_types:
            raise DomainError(f"type id {t} out of range [0, {self.num_types})")
        return phi_e.dot_dense(self.weights[t])

    def score_pairs(self, features: FeatureMatrix, entities: Sequence[int], types: Sequence[int]) -> np.ndarray:
        """Scores for aligned entity/type id arrays, computed one type at a time"""
        check_feature_space(self.space, features)
        entities = np.asarray(entities, dtype=np.int64)
        types = np.asarray(types, dtype=np.int64)
        scores = np.zeros(len(entities))
        for t in np.unique(types):
            mask = types == t
            scores[mask] = features.matrix[entities[mask]] @ self.weights[t]
        return scores

    def score_matrix(self, features: FeatureMatrix) -> np.ndarray:
        """(num_entities, |T|) score table"""
        check_feature_space(self.space, features)
        return np.asarray(features.matrix @ self.weights.T)


def score_linear(model: LinearModel, phi_e: SparseVector, t: int) -> float:
    return model.score(phi_e, t)


def check_feature_space(space: FeatureSpace, features: FeatureMatrix) -> None:
    if features.space != space:
        raise DomainError(f"feature space mismatch: model {space}, features {features.space}")
