"""Tests for the bilinear embedding model and its online trainer."""
import numpy as np
import pytest

from experiments.pipeline import positives_snapshot, train_model
from models.embedding_model import EmbeddingModel, score_embedding
from models.linear_model import LinearModel
from training.embedding_trainer import EmbeddingTrainer, ne_update_directions, nt_update_directions
from training.objective import count_violations, objective_value
from training.sampler import NegativeDraw, NegativeSampler
from training.train_config import TrainConfig
from utils.exceptions import DomainError, UsageError
from vector_store.featurizer import type_one_hot
from vector_store.sparse import FeatureSpace, SparseVector


def _bilinear(U, V, phi, psi):
    return float(psi @ V @ U.T @ phi)


def _numeric_gradient(f, X, eps=1e-6):
    grad = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        saved = X[idx]
        X[idx] = saved + eps
        up = f()
        X[idx] = saved - eps
        down = f()
        X[idx] = saved
        grad[idx] = (up - down) / (2 * eps)
    return grad


def _random_sparse(rng, dim):
    dense = rng.normal(size=dim)
    dense[rng.random(dim) < 0.4] = 0.0
    idx = np.flatnonzero(dense)
    return idx, dense[idx], dense


# -----------------------------------------------------------------------------
# Scoring
# -----------------------------------------------------------------------------

def test_scalar_score_by_hand():
    space = FeatureSpace.from_widths([("D", 1)])
    model = EmbeddingModel(np.array([[2.0]]), np.array([[3.0]]), space)
    assert score_embedding(model, SparseVector([0], [1.0], 1), type_one_hot(0, 1)) == pytest.approx(6.0)


def test_zero_projection_scores_zero():
    space = FeatureSpace.from_widths([("D", 3)])
    model = EmbeddingModel(np.zeros((3, 2)), np.ones((2, 2)), space)
    assert model.score(SparseVector([0, 2], [1.0, 4.0], 3), type_one_hot(1, 2)) == 0.0


def test_dimension_mismatch_rejected():
    space = FeatureSpace.from_widths([("D", 3)])
    model = EmbeddingModel(np.ones((3, 2)), np.ones((2, 2)), space)
    with pytest.raises(DomainError):
        model.score(SparseVector([0], [1.0], 4), type_one_hot(0, 2))
    with pytest.raises(DomainError):
        EmbeddingModel(np.ones((3, 2)), np.ones((2, 3)), space)


def test_score_is_bilinear():
    rng = np.random.default_rng(3)
    space = FeatureSpace.from_widths([("D", 6)])
    model = EmbeddingModel(rng.normal(size=(6, 3)), rng.normal(size=(4, 3)), space)
    phi_a = SparseVector.from_dense(rng.normal(size=6))
    phi_b = SparseVector.from_dense(rng.normal(size=6))
    psi = type_one_hot(2, 4)
    assert model.score(phi_a.scaled(2.5), psi) == pytest.approx(2.5 * model.score(phi_a, psi), abs=1e-9)
    summed = SparseVector.from_dense(phi_a.to_dense() + phi_b.to_dense())
    assert model.score(summed, psi) == pytest.approx(model.score(phi_a, psi) + model.score(phi_b, psi), abs=1e-9)


def test_identity_type_projection_matches_linear_model(make_features):
    rng = np.random.default_rng(0)
    num_types, dim = 4, 7
    features = make_features(rng.normal(size=(9, dim)))
    U = rng.normal(size=(dim, num_types))
    embedding = EmbeddingModel(U, np.eye(num_types), features.space)
    linear = LinearModel(U.T, features.space)
    assert np.allclose(embedding.score_matrix(features), linear.score_matrix(features), atol=1e-9)
    entities, types = np.arange(9), np.arange(9) % num_types
    assert np.allclose(embedding.score_pairs(features, entities, types),
                       linear.score_pairs(features, entities, types), atol=1e-9)


# -----------------------------------------------------------------------------
# Update directions
# -----------------------------------------------------------------------------

def test_update_directions_match_finite_differences():
    rng = np.random.default_rng(17)
    d_e, d_t, d = 6, 4, 3
    for _ in range(100):
        U = rng.normal(size=(d_e, d))
        V = rng.normal(size=(d_t, d))
        ie, ve, phi = _random_sparse(rng, d_e)
        ine, vne, phi_neg = _random_sparse(rng, d_e)
        t, t_neg = rng.choice(d_t, size=2, replace=False)
        psi, psi_neg = np.eye(d_t)[t], np.eye(d_t)[t_neg]
        it, vt = np.array([t]), np.array([1.0])
        itn, vtn = np.array([t_neg]), np.array([1.0])

        checks = [
            (ne_update_directions(U, V, ie, ve, ine, vne, it, vt),
             lambda: _bilinear(U, V, phi_neg, psi) - _bilinear(U, V, phi, psi)),
            (nt_update_directions(U, V, ie, ve, it, vt, itn, vtn),
             lambda: _bilinear(U, V, phi, psi_neg) - _bilinear(U, V, phi, psi)),
        ]
        for (u_rows, u_grad, v_rows, v_grad), margin in checks:
            analytic_u = np.zeros_like(U)
            analytic_u[u_rows] = u_grad
            analytic_v = np.zeros_like(V)
            analytic_v[v_rows] = v_grad
            assert np.allclose(analytic_u, _numeric_gradient(margin, U), rtol=1e-5, atol=1e-7)
            assert np.allclose(analytic_v, _numeric_gradient(margin, V), rtol=1e-5, atol=1e-7)


def test_directions_use_pre_update_parameters():
    rng = np.random.default_rng(1)
    U, V = rng.normal(size=(3, 2)), rng.normal(size=(2, 2))
    U_before, V_before = U.copy(), V.copy()
    ie, ve = np.array([0, 1]), np.array([1.0, 2.0])
    ine, vne = np.array([2]), np.array([1.0])
    _, u_grad, _, v_grad = ne_update_directions(U, V, ie, ve, ine, vne, np.array([0]), np.array([1.0]))
    assert np.array_equal(U, U_before) and np.array_equal(V, V_before)
    eta = np.array([-1.0, -2.0, 1.0]) @ U_before
    assert np.allclose(v_grad[0], eta)
    assert np.allclose(u_grad, np.outer([-1.0, -2.0, 1.0], V_before[0]))


# -----------------------------------------------------------------------------
# Training
# -----------------------------------------------------------------------------

def _trainer(features, positives, num_types, cfg):
    sampler = NegativeSampler(positives_snapshot(positives, features.num_entities, num_types),
                              features.num_entities, num_types, cfg.negative_config)
    return EmbeddingTrainer(features, sampler, cfg)


def test_zero_epochs_keeps_initialisation(separable_toy):
    features, positives, num_types = separable_toy
    cfg = TrainConfig("embedding", epochs=0, dim=3, seed=2)
    trainer = _trainer(features, positives, num_types, cfg)
    U0, V0 = trainer.model.U.copy(), trainer.model.V.copy()
    model = trainer.fit(positives)
    assert np.array_equal(model.U, U0) and np.array_equal(model.V, V0)
    bound = 1.0 / np.sqrt(3)
    assert np.abs(U0).max() <= bound and np.abs(V0).max() <= bound


def test_same_seed_gives_identical_parameters(separable_toy):
    features, positives, num_types = separable_toy
    cfg = TrainConfig("embedding", epochs=5, dim=3, seed=12)
    first = train_model(positives, features, num_types, cfg)
    second = train_model(positives, features, num_types, cfg)
    assert np.array_equal(first.U, second.U) and np.array_equal(first.V, second.V)


def test_training_moves_parameters(separable_toy):
    features, positives, num_types = separable_toy
    cfg = TrainConfig("embedding", epochs=2, dim=3, seed=12)
    trainer = _trainer(features, positives, num_types, cfg)
    U0 = trainer.model.U.copy()
    trainer.fit(positives)
    assert trainer.step_index > 0
    assert not np.array_equal(trainer.model.U, U0)
    assert trainer.model.is_finite()


def test_embedding_trainer_rejects_other_algorithms(separable_toy):
    features, positives, num_types = separable_toy
    with pytest.raises(UsageError):
        _trainer(features, positives, num_types, TrainConfig("linear.adagrad"))


# -----------------------------------------------------------------------------
# Training behaviour
# -----------------------------------------------------------------------------

def _all_negatives(positives, num_entities, num_types):
    observed = set(positives)
    return [NegativeDraw(tuple(x for x in range(num_entities) if (x, t) not in observed),
                         tuple(x for x in range(num_types) if (e, x) not in observed))
            for e, t in positives]


@pytest.mark.parametrize("seed", range(10))
def test_embedding_separates_toy_data(separable_toy, seed):
    features, positives, num_types = separable_toy
    cfg = TrainConfig("embedding", epochs=200, dim=num_types, m=1, n=1, seed=seed)
    model = train_model(positives, features, num_types, cfg)
    negatives = _all_negatives(positives, features.num_entities, num_types)
    assert count_violations(model, features, positives, negatives) == 0


def test_first_epoch_lowers_the_objective(separable_toy):
    features, positives, num_types = separable_toy
    before, after = [], []
    for seed in range(5):
        cfg = TrainConfig("embedding", epochs=1, dim=3, m=1, n=1, seed=seed, resample_negatives=False)
        trainer = _trainer(features, positives, num_types, cfg)
        frozen = trainer.sampler.freeze(positives)
        before.append(objective_value(trainer.model, positives, frozen, cfg, features))
        model = trainer.fit(positives)
        after.append(objective_value(model, positives, frozen, cfg, features))
    assert np.isfinite(after).all()
    assert np.mean(after) < np.mean(before)


def test_zero_epsilon_with_shared_coordinate(make_features):
    features = make_features([[1.0, 1.0, 0.0], [1.0, 0.0, 1.0]])
    cfg = TrainConfig("embedding", epochs=1, dim=2, m=1, n=0, adagrad_epsilon=0.0, seed=0)
    model = train_model([(0, 0)], features, 1, cfg)
    assert model.is_finite()
