"""Tests for linear scoring and model files."""
import numpy as np
import pytest

from models.embedding_model import EmbeddingModel
from models.linear_model import LinearModel, score_linear
from models.model_io import read_model, write_model
from utils.exceptions import DomainError, ParseError
from vector_store.sparse import FeatureSpace, SparseVector


@pytest.fixture
def space():
    return FeatureSpace.from_widths([("T", 2), ("D", 3)])


def test_linear_score_by_hand(space):
    weights = np.zeros((2, 5))
    weights[1, :2] = [0.5, 0.25]
    model = LinearModel(weights, space)
    phi = SparseVector([0, 1], [1.0, 2.0], 5)
    assert score_linear(model, phi, 1) == pytest.approx(1.0)
    assert score_linear(model, phi, 0) == 0.0
    assert score_linear(model, SparseVector.zeros(5), 1) == 0.0


def test_linear_score_errors(space):
    model = LinearModel.zeros(2, space)
    with pytest.raises(DomainError):
        model.score(SparseVector([0], [1.0], 4), 0)
    with pytest.raises(DomainError):
        model.score(SparseVector([0], [1.0], 5), 2)
    with pytest.raises(DomainError):
        LinearModel(np.zeros((2, 4)), space)


def test_score_pairs_rejects_foreign_feature_space(make_features, space):
    features = make_features(np.eye(5))
    with pytest.raises(DomainError):
        LinearModel.zeros(2, space).score_pairs(features, [0], [0])


def test_linear_model_file(tmp_path, space):
    weights = np.array([[0.0, 1.5, 0.0, -2.25, 0.0], [1e-3, 0.0, 0.0, 0.0, 7.0]])
    model = LinearModel(weights, space, {"algorithm": "linear.adagrad", "seed": 3})
    path = tmp_path / "model.txt"
    write_model(path, model, ["/t/a", "/t/b"])
    restored, symbols = read_model(path)
    assert symbols == ["/t/a", "/t/b"]
    assert isinstance(restored, LinearModel)
    assert restored.space == space
    assert np.array_equal(restored.weights, weights)
    assert restored.config["seed"] == 3


def test_embedding_model_file(tmp_path, space):
    rng = np.random.default_rng(0)
    model = EmbeddingModel(rng.normal(size=(5, 3)), rng.normal(size=(2, 3)), space, {"algorithm": "embedding"})
    path = tmp_path / "model.txt"
    write_model(path, model, ["/t/a", "/t/b"])
    restored, _ = read_model(path)
    assert isinstance(restored, EmbeddingModel)
    assert restored.d == 3
    assert np.allclose(restored.U, model.U, rtol=1e-8)
    assert np.allclose(restored.V, model.V, rtol=1e-8)


def test_embedding_model_file_with_bad_number(tmp_path, space):
    model = EmbeddingModel(np.ones((5, 3)), np.ones((2, 3)), space, {"algorithm": "embedding"})
    path = tmp_path / "model.txt"
    write_model(path, model, ["/t/a", "/t/b"])
    lines = path.read_text(encoding="utf-8").splitlines()
    row = next(i for i, line in enumerate(lines) if line.startswith("V\t"))
    name, _, body = lines[row].partition("\t")
    lines[row] = name + "\t" + " ".join(["abc"] + body.split()[1:])
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(ParseError):
        read_model(path)


def test_embedding_model_file_with_missing_row(tmp_path, space):
    model = EmbeddingModel(np.ones((5, 3)), np.ones((2, 3)), space, {"algorithm": "embedding"})
    path = tmp_path / "model.txt"
    write_model(path, model, ["/t/a", "/t/b"])
    lines = path.read_text(encoding="utf-8").splitlines()
    path.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
    with pytest.raises(ParseError):
        read_model(path)


def test_model_file_requires_header(tmp_path):
    path = tmp_path / "model.txt"
    path.write_text("# model linear\n/t/a\t0:1\n", encoding="utf-8")
    with pytest.raises(ParseError):
        read_model(path)
