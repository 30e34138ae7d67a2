# training/objective.py
# =============================================================================
"""The global ranking objective over positives and their sampled negatives."""
from typing import List, Sequence, Tuple

import numpy as np

from training.sampler import NegativeDraw
from training.train_config import TrainConfig
from vector_store.feature_store import FeatureMatrix


def ranking_pairs(positives: Sequence[Tuple[int, int]], negatives: Sequence[NegativeDraw]):
    """Flatten frozen draws into aligned arrays.

    Returns (pos_e, pos_t, neg_e, neg_t) where row i compares s(pos_e, pos_t)
    against s(neg_e, neg_t); NE rows share the type, NT rows share the entity.
    """
    rows = []
    for (e, t), draw in zip(positives, negatives):
        rows.extend((e, t, e_neg, t) for e_neg in draw.entities)
        rows.extend((e, t, e, t_neg) for t_neg in draw.types)
    table = np.asarray(rows, dtype=np.int64).reshape(-1, 4)
    return table[:, 0], table[:, 1], table[:, 2], table[:, 3]


def hinge_terms(model, features: FeatureMatrix, positives, negatives, loss_power: int = 1) -> np.ndarray:
    """[s(neg) - s(pos) + 1]_+^k for every ranking pair"""
    pos_e, pos_t, neg_e, neg_t = ranking_pairs(positives, negatives)
    if not len(pos_e):
        return np.empty(0)
    margin = model.score_pairs(features, neg_e, neg_t) - model.score_pairs(features, pos_e, pos_t) + 1.0
    return np.maximum(margin, 0.0) ** loss_power


def count_violations(model, features: FeatureMatrix, positives, negatives) -> int:
    """Ranking pairs whose margin is below 1, i.e. where the online update would fire"""
    return int(np.count_nonzero(hinge_terms(model, features, positives, negatives, 1) > 0.0))


def regularizer(model) -> float:
    weights = getattr(model, "weights", None)
    if weights is None:
        return 0.5 * (float(np.sum(model.U ** 2)) + float(np.sum(model.V ** 2)))
    return 0.5 * float(np.sum(weights ** 2))


def objective_value(model, positives, sampled_negatives: List[NegativeDraw], cfg: TrainConfig,
                    features: FeatureMatrix) -> float:
    """Reg(theta) + C * sum of hinge terms over NE and NT pairs.

    The online configurations use Reg = 0 and C = 1.
    """
    hinge = float(np.sum(hinge_terms(model, features, positives, sampled_negatives, cfg.loss_power)))
    if cfg.regularized:
        return regularizer(model) + cfg.C * hinge
    return hinge
