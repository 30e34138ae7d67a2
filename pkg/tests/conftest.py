"""Shared fixtures for the KB completion test suite."""
import numpy as np
import pytest
import scipy.sparse as sp

from knowledge_base.snapshot import load_snapshot
from knowledge_base.vocabulary import EntityVocab, TypeVocab
from vector_store.feature_store import FeatureMatrix
from vector_store.sparse import FeatureSpace


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow training trend checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


# -----------------------------------------------------------------------------
# Builders
# -----------------------------------------------------------------------------

def build_snapshots(train_facts, test_facts):
    """Load both snapshots into shared vocabularies, train first"""
    entity_vocab, type_vocab = EntityVocab(), TypeVocab()
    train = load_snapshot(train_facts, entity_vocab, type_vocab, timestamp_label="train")
    test = load_snapshot(test_facts, entity_vocab, type_vocab, timestamp_label="test")
    return train, test


def dense_features(dense, block="D") -> FeatureMatrix:
    dense = np.asarray(dense, dtype=np.float64)
    return FeatureMatrix(sp.csr_matrix(dense), FeatureSpace.from_widths([(block, dense.shape[1])]))


@pytest.fixture
def snapshots():
    return build_snapshots


@pytest.fixture
def make_features():
    return dense_features


@pytest.fixture
def separable_toy():
    """4 entities with orthogonal features; entities 0, 1 have type 0 and 2, 3 have type 1"""
    features = dense_features(np.eye(4))
    positives = [(0, 0), (1, 0), (2, 1), (3, 1)]
    return features, positives, 2
