"""Tests for the latent-cluster synthetic corpus generator."""
import pytest

from document_processing.document_loader import DocumentLoader
from knowledge_base.snapshot import read_facts_tsv
from synthetic import corpus_generator
from synthetic.corpus_generator import CorpusGenerator, SynthConfig
from utils.exceptions import UsageError


def test_zero_missing_rate_keeps_snapshots_equal():
    corpus = CorpusGenerator(SynthConfig(entities=300, types=10, clusters=5, missing_rate=0.0, seed=1)).generate()
    assert corpus.train_facts == corpus.test_facts
    assert corpus.hidden_facts == 0


def test_full_missing_rate_empties_training_snapshot():
    corpus = CorpusGenerator(SynthConfig(entities=300, types=10, clusters=5, missing_rate=1.0, seed=1)).generate()
    assert corpus.train_facts == []
    assert len(corpus.test_facts) > 0


def test_hidden_fraction_tracks_missing_rate():
    corpus = CorpusGenerator(SynthConfig(entities=10000, types=50, clusters=40, missing_rate=0.2, seed=0)).generate()
    assert corpus.hidden_facts / len(corpus.test_facts) == pytest.approx(0.2, abs=0.02)
    assert set(corpus.train_facts) <= set(corpus.test_facts)


def test_generation_is_seeded():
    cfg = SynthConfig(entities=200, types=8, clusters=4, seed=5)
    first, second = CorpusGenerator(cfg).generate(), CorpusGenerator(cfg).generate()
    assert first.test_facts == second.test_facts
    assert first.descriptions == second.descriptions


def test_text_shares_tokens_within_a_cluster():
    corpus = CorpusGenerator(SynthConfig(entities=400, types=8, clusters=4, seed=3)).generate()
    cluster_base = SynthConfig().background_tokens
    members = [i for i, c in enumerate(corpus.cluster_of) if c == corpus.cluster_of[0]]
    cluster_tokens = {f"w{cluster_base + int(corpus.cluster_of[0]) * 12 + j}" for j in range(12)}
    hits = sum(bool(cluster_tokens & set(corpus.wiki[i][1].split())) for i in members)
    assert hits / len(members) > 0.9


def test_invalid_rates_rejected():
    with pytest.raises(UsageError):
        SynthConfig(missing_rate=1.5)
    with pytest.raises(UsageError):
        SynthConfig(entities=0)


def test_written_files_parse(tmp_path):
    corpus = CorpusGenerator(SynthConfig(entities=50, types=5, clusters=3, seed=2)).generate()
    paths = corpus.write(tmp_path)
    assert [p.name for p in paths] == [corpus_generator.TRAIN_SNAPSHOT, corpus_generator.TEST_SNAPSHOT,
                                      corpus_generator.DESCRIPTIONS, corpus_generator.WIKI]
    assert list(read_facts_tsv(tmp_path / corpus_generator.TEST_SNAPSHOT)) == corpus.test_facts
    assert len(DocumentLoader().load_corpus(tmp_path / corpus_generator.WIKI)) == 50
