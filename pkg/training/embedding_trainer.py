# training/embedding_trainer.py
# =============================================================================
import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from models.embedding_model import EmbeddingModel
from training.adagrad import SparseAdagrad
from training.sampler import NegativeDraw, NegativeSampler
from training.train_config import TrainConfig
from utils.exceptions import DomainError, NumericalError, UsageError
from vector_store.feature_store import FeatureMatrix
from vector_store.featurizer import type_feature_matrix
from vector_store.sparse import sparse_difference

logger = logging.getLogger(__name__)


def _rows(matrix: sp.csr_matrix, i: int):
    start, end = matrix.indptr[i], matrix.indptr[i + 1]
    return matrix.indices[start:end], matrix.data[start:end]


def _bilinear(U, V, ie, ve, it, vt) -> float:
    return float(np.dot(vt @ V[it], ve @ U[ie]))


def ne_update_directions(U, V, ie, ve, ine, vne, it, vt):
    """Gradients of s(e', t) - s(e, t) at the current point.

    mu = V^T Psi(t) and eta = U^T (Phi(e') - Phi(e)), computed before any update.
    Returns (U rows, U gradient rows, V rows, V gradient rows).
    """
    idx, g = sparse_difference(ine, vne, ie, ve)
    mu = vt @ V[it]
    eta = g @ U[idx]
    return idx, np.outer(g, mu), it, np.outer(vt, eta)


def nt_update_directions(U, V, ie, ve, it, vt, itn, vtn):
    """Gradients of s(e, t') - s(e, t): mu = V^T (Psi(t') - Psi(t)), eta = U^T Phi(e)"""
    idx, g = sparse_difference(itn, vtn, it, vt)
    mu = g @ V[idx]
    eta = ve @ U[ie]
    return ie, np.outer(ve, mu), idx, np.outer(g, eta)


class EmbeddingTrainer:
    """Online training of the projections U and V with per-column Adagrad"""

    def __init__(self, features: FeatureMatrix, sampler: NegativeSampler, cfg: TrainConfig,
                 type_features: Optional[sp.csr_matrix] = None, epoch_callback: Optional[Callable] = None):
        if cfg.algorithm != "embedding":
            raise UsageError(f"EmbeddingTrainer needs algorithm embedding, got {cfg.algorithm}")
        self.features = features
        self.sampler = sampler
        self.cfg = cfg
        self.epoch_callback = epoch_callback
        self.type_features = (type_feature_matrix(sampler.num_types) if type_features is None
                              else sp.csr_matrix(type_features))
        if self.type_features.shape[0] != sampler.num_types:
            raise DomainError(f"type features have {self.type_features.shape[0]} rows, expected {sampler.num_types}")
        init_seed, order_seed = np.random.SeedSequence(cfg.seed & ((1 << 64) - 1)).spawn(2)
        self.order_rng = np.random.default_rng(order_seed)
        self.model = EmbeddingModel.random(
            features.dim, self.type_features.shape[1], cfg.dim, features.space,
            np.random.default_rng(init_seed), cfg.to_dict())
        self.u_optimizer = SparseAdagrad(self.model.U, cfg.learning_rate, cfg.adagrad_epsilon)
        self.v_optimizer = SparseAdagrad(self.model.V, cfg.learning_rate, cfg.adagrad_epsilon)
        self.step_index = 0

    def _apply(self, u_rows, u_grad, v_rows, v_grad) -> None:
        self.step_index += 1
        if not (np.all(np.isfinite(u_grad)) and np.all(np.isfinite(v_grad))):
            raise NumericalError("non-finite embedding gradient", self.step_index)
        self.u_optimizer.update(u_rows, u_grad)
        self.v_optimizer.update(v_rows, v_grad)

    def _step(self, e: int, t: int, draw: NegativeDraw) -> int:
        U, V = self.model.U, self.model.V
        ie, ve = self.features.row_arrays(e)
        it, vt = _rows(self.type_features, t)
        fired = 0
        for e_neg in draw.entities:
            ine, vne = self.features.row_arrays(e_neg)
            if _bilinear(U, V, ie, ve, it, vt) - _bilinear(U, V, ine, vne, it, vt) - 1.0 < 0.0:
                self._apply(*ne_update_directions(U, V, ie, ve, ine, vne, it, vt))
                fired += 1
        for t_neg in draw.types:
            itn, vtn = _rows(self.type_features, t_neg)
            if _bilinear(U, V, ie, ve, it, vt) - _bilinear(U, V, ie, ve, itn, vtn) - 1.0 < 0.0:
                self._apply(*nt_update_directions(U, V, ie, ve, it, vt, itn, vtn))
                fired += 1
        return fired

    def fit(self, positives: Sequence[Tuple[int, int]]) -> EmbeddingModel:
        for epoch in range(self.cfg.epochs):
            fired = 0
            for i in self.order_rng.permutation(len(positives)):
                e, t = positives[i]
                fired += self._step(e, t, self.sampler.draw(e, t, epoch))
            if not self.model.is_finite():
                raise NumericalError(f"embedding parameters became non-finite in epoch {epoch}", self.step_index)
            logger.info("Epoch %d/%d: %d hinge updates over %d positives",
                        epoch + 1, self.cfg.epochs, fired, len(positives))
            if self.epoch_callback is not None:
                self.epoch_callback(epoch, self)
        return self.model


def train_embedding(positives, entity_features: FeatureMatrix, type_features, sampler: NegativeSampler,
                    cfg: TrainConfig, d: Optional[int] = None) -> EmbeddingModel:
    if d is not None and d != cfg.dim:
        raise UsageError(f"embedding dimension {d} disagrees with config dim {cfg.dim}")
    return EmbeddingTrainer(entity_features, sampler, cfg, type_features).fit(positives)
