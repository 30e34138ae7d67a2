# training/linear_trainer.py
# =============================================================================
"""Linear per-type scorers trained on the global objective.

Two solvers: online Adagrad on the l1-hinge with no regularizer, and batch
dual coordinate descent on the l2-hinge with an L2 regularizer, where the
per-type vectors are stacked into one parameter vector theta.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from models.linear_model import LinearModel
from training.adagrad import SparseAdagrad
from training.objective import objective_value
from training.sampler import NegativeDraw, NegativeSampler
from training.train_config import TrainConfig
from utils.exceptions import NumericalError, UsageError
from vector_store.feature_store import FeatureMatrix
from vector_store.sparse import sparse_difference

logger = logging.getLogger(__name__)


class LinearAdagradTrainer:
    """Online training of w_t with per-coordinate Adagrad"""

    def __init__(self, features: FeatureMatrix, sampler: NegativeSampler, cfg: TrainConfig,
                 epoch_callback: Optional[Callable] = None):
        if cfg.algorithm != "linear.adagrad":
            raise UsageError(f"LinearAdagradTrainer needs algorithm linear.adagrad, got {cfg.algorithm}")
        self.features = features
        self.sampler = sampler
        self.cfg = cfg
        self.epoch_callback = epoch_callback
        self.weights = np.zeros((sampler.num_types, features.dim))
        self.optimizer = SparseAdagrad(self.weights, cfg.learning_rate, cfg.adagrad_epsilon)

    def _step(self, e: int, t: int, draw: NegativeDraw) -> int:
        W = self.weights
        ie, ve = self.features.row_arrays(e)
        fired = 0
        for e_neg in draw.entities:
            ine, vne = self.features.row_arrays(e_neg)
            if np.dot(W[t, ie], ve) - np.dot(W[t, ine], vne) - 1.0 < 0.0:
                idx, grad = sparse_difference(ine, vne, ie, ve)
                self.optimizer.update((t, idx), grad)
                fired += 1
        for t_neg in draw.types:
            if np.dot(W[t, ie], ve) - np.dot(W[t_neg, ie], ve) - 1.0 < 0.0:
                self.optimizer.update((t, ie), -ve)
                self.optimizer.update((t_neg, ie), ve)
                fired += 1
        return fired

    def fit(self, positives: Sequence[Tuple[int, int]]) -> LinearModel:
        order_rng = np.random.default_rng(self.cfg.seed)
        for epoch in range(self.cfg.epochs):
            fired = 0
            for i in order_rng.permutation(len(positives)):
                e, t = positives[i]
                try:
                    fired += self._step(e, t, self.sampler.draw(e, t, epoch))
                except NumericalError as err:
                    raise NumericalError(
                        f"Adagrad diverged at epoch {epoch}, fact ({e}, {t}): {err}", err.step) from err
            logger.info("Epoch %d/%d: %d hinge updates over %d positives",
                        epoch + 1, self.cfg.epochs, fired, len(positives))
            if self.epoch_callback is not None:
                self.epoch_callback(epoch, self)
        return LinearModel(self.weights, self.features.space, self.cfg.to_dict())


def train_linear_adagrad(positives, features: FeatureMatrix, sampler: NegativeSampler, cfg: TrainConfig) -> LinearModel:
    return LinearAdagradTrainer(features, sampler, cfg).fit(positives)


@dataclass
class RankConstraint:
    """theta . x >= 1 where x lives in block t (and block t_neg for NT pairs)"""

    t: int
    t_neg: Optional[int]  # None for negative-entity pairs
    indices: np.ndarray
    values: np.ndarray
    sq_norm: float  # x . x


@dataclass
class DCDResult:
    model: LinearModel
    alpha: np.ndarray
    constraints: List[RankConstraint]
    negatives: List[NegativeDraw]
    dual_history: List[float] = field(default_factory=list)
    primal: float = float("nan")
    sweeps: int = 0
    skipped: int = 0


def build_constraints(positives, negatives: Sequence[NegativeDraw], features: FeatureMatrix):
    """Stacked difference features; zero-norm pairs are skipped as degenerate"""
    constraints, skipped = [], 0
    for (e, t), draw in zip(positives, negatives):
        ie, ve = features.row_arrays(e)
        for e_neg in draw.entities:
            ine, vne = features.row_arrays(e_neg)
            idx, vals = sparse_difference(ie, ve, ine, vne)
            keep = vals != 0.0
            idx, vals = idx[keep], vals[keep]
            sq = float(np.dot(vals, vals))
            if sq == 0.0:
                skipped += 1
                continue
            constraints.append(RankConstraint(t, None, idx, vals, sq))
        for t_neg in draw.types:
            sq = 2.0 * float(np.dot(ve, ve))
            if sq == 0.0:
                skipped += 1
                continue
            constraints.append(RankConstraint(t, t_neg, ie.astype(np.int64), ve.copy(), sq))
    if skipped:
        logger.warning("Skipped %d degenerate ranking pairs with zero difference features", skipped)
    return constraints, skipped


def dual_value(alpha: np.ndarray, weights: np.ndarray, C: float) -> float:
    """sum(alpha) - 1/2 |theta|^2 - sum(alpha^2) / (4C)"""
    return float(np.sum(alpha) - 0.5 * np.sum(weights ** 2) - np.sum(alpha ** 2) / (4.0 * C))


def solve_linear_dcd(positives, features: FeatureMatrix, sampler: NegativeSampler, cfg: TrainConfig) -> DCDResult:
    if cfg.algorithm != "linear.dcd":
        raise UsageError(f"solve_linear_dcd needs algorithm linear.dcd, got {cfg.algorithm}")
    negatives = sampler.freeze(positives)
    constraints, skipped = build_constraints(positives, negatives, features)
    W = np.zeros((sampler.num_types, features.dim))
    alpha = np.zeros(len(constraints))
    diag = 1.0 / (2.0 * cfg.C)
    rng = np.random.default_rng(cfg.seed)
    history, sweeps = [], 0

    for sweep in range(cfg.max_sweeps):
        max_delta = 0.0
        for i in rng.permutation(len(constraints)):
            c = constraints[i]
            wx = np.dot(W[c.t, c.indices], c.values)
            if c.t_neg is not None:
                wx -= np.dot(W[c.t_neg, c.indices], c.values)
            gradient = wx - 1.0 + alpha[i] * diag
            new_alpha = max(0.0, alpha[i] - gradient / (c.sq_norm + diag))
            delta = new_alpha - alpha[i]
            if delta != 0.0:
                alpha[i] = new_alpha
                W[c.t, c.indices] += delta * c.values
                if c.t_neg is not None:
                    W[c.t_neg, c.indices] -= delta * c.values
                max_delta = max(max_delta, abs(delta))
        sweeps = sweep + 1
        history.append(dual_value(alpha, W, cfg.C))
        if not np.isfinite(history[-1]):
            raise NumericalError("dual objective became non-finite", sweeps)
        logger.debug("DCD sweep %d: dual %.9g, max update %.3g", sweeps, history[-1], max_delta)
        if max_delta < cfg.tolerance:
            break

    model = LinearModel(W, features.space, cfg.to_dict())
    primal = objective_value(model, positives, negatives, cfg, features)
    logger.info("DCD finished after %d sweeps over %d constraints: primal %.9g, dual %.9g",
                sweeps, len(constraints), primal, history[-1] if history else 0.0)
    return DCDResult(model, alpha, constraints, negatives, history, primal, sweeps, skipped)


def train_linear_dcd(positives, features: FeatureMatrix, sampler: NegativeSampler, cfg: TrainConfig) -> LinearModel:
    return solve_linear_dcd(positives, features, sampler, cfg).model
