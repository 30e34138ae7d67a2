"""Tests for top-type selection, training positives and the two-snapshot test set."""
import numpy as np
import pytest

from dataset import dataset_files
from dataset.dataset_builder import (DatasetConfig, LabeledExample, build_test_set, build_training_positives,
                                     dataset_stats, select_top_types)
from knowledge_base.snapshot import load_snapshot, type_counts, write_facts_tsv
from knowledge_base.vocabulary import EntityVocab, TypeVocab
from utils.exceptions import DomainError, UsageError


def _pairs(snapshot, symbols):
    ev, tv = snapshot.entity_vocab, snapshot.type_vocab
    return {(ev.get(e), tv.get(t)) for e, t in symbols}


def _split(examples):
    positives = {(ex.entity, ex.type) for ex in examples if ex.label}
    negatives = {(ex.entity, ex.type) for ex in examples if not ex.label}
    return positives, negatives


# -----------------------------------------------------------------------------
# select_top_types
# -----------------------------------------------------------------------------

def test_top_types_sorted_by_count(snapshots):
    facts = [(f"e{i}", "/t1") for i in range(5)] + [(f"e{i}", "/t2") for i in range(9)] + [("e0", "/t3")]
    train, _ = snapshots(facts, [])
    tv = train.type_vocab
    assert select_top_types(train, 2) == [tv.get("/t2"), tv.get("/t1")]
    assert sorted(select_top_types(train, 3)) == sorted(tv.get(s) for s in ("/t1", "/t2", "/t3"))


def test_top_types_tie_goes_to_lower_id(snapshots):
    train, _ = snapshots([("a", "/t1"), ("b", "/t1"), ("c", "/t1"), ("a", "/t2"), ("b", "/t2"), ("c", "/t2")], [])
    assert select_top_types(train, 1) == [train.type_vocab.get("/t1")]


def test_top_types_errors(snapshots):
    train, _ = snapshots([("a", "/t1"), ("a", "/t2")], [])
    with pytest.raises(DomainError):
        select_top_types(train, 3)
    with pytest.raises(DomainError):
        select_top_types(train, 0)


def test_excluded_types_are_skipped(snapshots):
    train, _ = snapshots([("a", "/t1"), ("b", "/t1"), ("a", "/t2")], [])
    t1, t2 = train.type_vocab.get("/t1"), train.type_vocab.get("/t2")
    assert select_top_types(train, 1, exclude=[t1]) == [t2]


# -----------------------------------------------------------------------------
# build_training_positives
# -----------------------------------------------------------------------------

def test_training_positives_restricted_to_selected_types(snapshots):
    train, _ = snapshots([("a", "/t1"), ("a", "/t2"), ("b", "/t1")], [])
    t1 = train.type_vocab.get("/t1")
    assert set(build_training_positives(train, [t1])) == _pairs(train, [("a", "/t1"), ("b", "/t1")])
    assert build_training_positives(train, []) == []


# -----------------------------------------------------------------------------
# build_test_set
# -----------------------------------------------------------------------------

def test_unobserved_type_of_gaining_entity_is_negative(snapshots):
    train, test = snapshots([("a", "/t1")], [("a", "/t1"), ("a", "/t2")])
    types = [test.type_vocab.get("/t1"), test.type_vocab.get("/t2")]
    positives, negatives = _split(build_test_set(train, test, types, DatasetConfig(2, 0.0)))
    assert positives == _pairs(test, [("a", "/t2")])
    assert negatives == set()


def test_new_entity_gets_all_unobserved_types(snapshots):
    train, test = snapshots([("a", "/t1")], [("a", "/t1"), ("b", "/t1")])
    test.type_vocab.add("/t2")
    types = [test.type_vocab.get("/t1"), test.type_vocab.get("/t2")]
    positives, negatives = _split(build_test_set(train, test, types, DatasetConfig(2, 0.0)))
    assert positives == _pairs(test, [("b", "/t1")])
    assert negatives == _pairs(test, [("b", "/t2")])


TRAIN = [("a", "/t1"), ("a", "/t2"), ("b", "/t1"), ("c", "/t3"), ("d", "/t1")]
TEST = [("a", "/t1"), ("a", "/t2"), ("a", "/t3"), ("b", "/t1"), ("b", "/t2"),
        ("c", "/t3"), ("d", "/t1"), ("e", "/t3")]


def test_hand_enumerated_audit_all_types(snapshots):
    train, test = snapshots(TRAIN, TEST)
    types = select_top_types(train, 3)
    examples = build_test_set(train, test, types, DatasetConfig(3, 0.0))
    positives, negatives = _split(examples)
    assert positives == _pairs(test, [("a", "/t3"), ("b", "/t2"), ("e", "/t3")])
    assert negatives == _pairs(test, [("b", "/t3"), ("e", "/t1"), ("e", "/t2")])
    assert len(examples) == len(positives) + len(negatives)


def test_hand_enumerated_audit_with_extra_negatives(snapshots):
    train, test = snapshots(TRAIN, TEST)
    types = select_top_types(train, 2)
    assert types == [test.type_vocab.get("/t1"), test.type_vocab.get("/t2")]
    positives, negatives = _split(build_test_set(train, test, types, DatasetConfig(2, 1.0)))
    assert positives == _pairs(test, [("b", "/t2")])
    # c and e have no selected-type facts in either snapshot
    assert negatives == _pairs(test, [("c", "/t1"), ("c", "/t2"), ("e", "/t1"), ("e", "/t2")])


def test_test_set_invariants_on_random_snapshots():
    rng = np.random.default_rng(7)
    for seed in range(20):
        ev, tv = EntityVocab(), TypeVocab()
        test_facts = {(f"e{rng.integers(30)}", f"/t{rng.integers(6)}") for _ in range(80)}
        train_facts = [f for f in sorted(test_facts) if rng.random() < 0.7]
        train = load_snapshot(train_facts, ev, tv)
        test = load_snapshot(sorted(test_facts), ev, tv)
        types = select_top_types(train, min(4, len(type_counts(train))))
        examples = build_test_set(train, test, types, DatasetConfig(4, 0.3, seed))
        pairs = [(ex.entity, ex.type) for ex in examples]
        assert len(pairs) == len(set(pairs))
        for ex in examples:
            assert ex.type in types
            if ex.label:
                assert (ex.entity, ex.type) in test.facts and (ex.entity, ex.type) not in train.facts
            else:
                assert (ex.entity, ex.type) not in test.facts


def test_extra_negatives_deterministic_under_seed(snapshots):
    train_facts = [("e0", "/t1"), ("z", "/t2")]
    train, test = snapshots(train_facts, train_facts + [(f"x{i}", "/t3") for i in range(40)])
    types = select_top_types(train, 2)
    first = build_test_set(train, test, types, DatasetConfig(2, 0.5, seed=3))
    second = build_test_set(train, test, types, DatasetConfig(2, 0.5, seed=3))
    assert first == second
    assert any(not ex.label for ex in first)
    assert first == sorted(first, key=lambda ex: (ex.entity, ex.type))


def test_dataset_config_validation():
    with pytest.raises(UsageError):
        DatasetConfig(0)
    with pytest.raises(UsageError):
        DatasetConfig(2, 1.5)


# -----------------------------------------------------------------------------
# dataset_stats and files
# -----------------------------------------------------------------------------

def test_stats_ratio():
    examples = [LabeledExample(0, 0, True), LabeledExample(1, 0, False)]
    stats = dataset_stats([(0, 0), (2, 0), (2, 1)], examples, [0, 1])
    assert stats.neg_pos_ratio == 1.0
    assert stats.num_positive_train == 3
    assert stats.max_positives_per_type == 2
    assert stats.min_positives_per_type == 1
    assert stats.test_positives_per_type == {0: 1}


def test_stats_ratio_undefined_without_positives():
    stats = dataset_stats([], [LabeledExample(0, 0, False)])
    assert stats.neg_pos_ratio is None


def test_dataset_files_reinterned_in_rank_order(tmp_path, snapshots):
    train, test = snapshots(TRAIN, TEST)
    types = select_top_types(train, 2)
    positives = build_training_positives(train, types)
    examples = build_test_set(train, test, types, DatasetConfig(2, 0.0))
    ev, tv = test.entity_vocab, test.type_vocab
    write_facts_tsv(tmp_path / dataset_files.TRAIN_POSITIVES, [(ev.symbol(e), tv.symbol(t)) for e, t in positives])
    dataset_files.write_test_set(tmp_path / dataset_files.TEST_SET, examples, ev, tv)
    dataset_files.write_types(tmp_path / dataset_files.TYPES, types, {t: 1 for t in types}, tv)

    bundle = dataset_files.DatasetBundle(tmp_path, EntityVocab(ev.symbols))
    assert bundle.type_vocab.symbols == ["/t1", "/t2"]
    assert len(bundle.training_positives()) == len(positives)
    assert [ex.label for ex in bundle.test_examples()] == [ex.label for ex in examples]
