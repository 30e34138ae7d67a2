"""Tests for tokenization, document frequencies and tf-idf weighting."""
import math

import numpy as np
import pytest

from document_processing.document_loader import DocumentLoader, escape_text, unescape_text
from document_processing.text_processor import TextProcessor, build_text_vocabulary, tfidf_vector, tokenize
from utils.exceptions import InputError, ParseError


def test_tokenize_lowercases_and_splits_on_non_alphanumerics():
    assert tokenize("Hello, WORLD_x 42!") == ["hello", "world", "x", "42"]
    assert tokenize("") == []


def test_document_frequencies_single_doc():
    vocab = build_text_vocabulary([(0, "cat cat dog")], min_df=1)
    assert vocab.num_documents == 1
    assert {tok: df for tok, (_, df) in vocab.tokens.items()} == {"cat": 1, "dog": 1}


def test_document_frequencies_counted_once_per_doc():
    vocab = build_text_vocabulary([(0, "a b"), (1, "b c")], min_df=1)
    dfs = {tok: df for tok, (_, df) in vocab.tokens.items()}
    assert dfs == {"a": 1, "b": 2, "c": 1}


def test_empty_corpus():
    vocab = build_text_vocabulary([], min_df=1)
    assert len(vocab) == 0
    assert vocab.num_documents == 0


def test_min_df_prunes_rare_tokens():
    vocab = build_text_vocabulary([(0, "a b"), (1, "b c")], min_df=2)
    assert list(vocab.tokens) == ["b"]


def test_pruning_everything_leaves_empty_vocabulary():
    vocab = build_text_vocabulary([(0, "a"), (1, "b")], min_df=2)
    assert len(vocab) == 0
    assert vocab.num_documents == 2


def test_duplicate_entity_document_rejected():
    with pytest.raises(InputError):
        build_text_vocabulary([(0, "a"), (0, "b")], min_df=1)


def test_single_token_weight_normalises_to_one():
    vocab = build_text_vocabulary([(0, "cat")], min_df=1)
    assert vocab.idf()[0] == pytest.approx(1.0)
    vector = tfidf_vector("cat", vocab)
    assert vector.indices.tolist() == [0]
    assert vector.values.tolist() == pytest.approx([1.0])


def test_idf_formula_by_hand():
    vocab = build_text_vocabulary([(0, "x x"), (1, "y"), (2, "z")], min_df=1)
    x_index = vocab.tokens["x"][0]
    idf = vocab.idf()[x_index]
    assert idf == pytest.approx(math.log(4 / 2) + 1)
    assert 2 * idf == pytest.approx(3.3863, abs=1e-4)


def test_tfidf_rows_are_unit_norm_and_ignore_unknown_tokens():
    corpus = [(0, "red apple"), (1, "green apple pie"), (2, "red car")]
    processor = TextProcessor(min_df=1)
    vocab = processor.build_text_vocabulary(corpus)
    matrix = processor.tfidf_matrix(["red apple", "unknown words only", ""], vocab)
    norms = np.sqrt(np.asarray(matrix.multiply(matrix).sum(axis=1)).ravel())
    assert norms.tolist() == pytest.approx([1.0, 0.0, 0.0])
    assert len(tfidf_vector("unknown", vocab)) == 0


def test_tfidf_is_deterministic():
    vocab = build_text_vocabulary([(0, "alpha beta"), (1, "beta gamma")], min_df=1)
    first = tfidf_vector("Beta, alpha; beta", vocab)
    second = tfidf_vector("Beta, alpha; beta", vocab)
    assert first == second


def test_vocabulary_stats():
    vocab = build_text_vocabulary([(0, "a b"), (1, "b c")], min_df=1)
    stats = TextProcessor.get_vocabulary_stats(vocab)
    assert stats["num_tokens"] == 3
    assert stats["max_df"] == 2


# -----------------------------------------------------------------------------
# Corpus files
# -----------------------------------------------------------------------------

def test_escaping_round_trip():
    text = "tab\there\nnew line \\ backslash"
    assert "\t" not in escape_text(text) and "\n" not in escape_text(text)
    assert unescape_text(escape_text(text)) == text


def test_load_corpus(tmp_path):
    path = tmp_path / "descriptions.tsv"
    DocumentLoader.write_corpus(path, [("/m/a", "first\tdoc"), ("/m/b", "second")])
    assert DocumentLoader().load_corpus(path) == [("/m/a", "first\tdoc"), ("/m/b", "second")]


def test_load_corpus_errors(tmp_path):
    path = tmp_path / "wiki.tsv"
    path.write_text("/m/a\tone\n/m/a\ttwo\n", encoding="utf-8")
    with pytest.raises(InputError):
        DocumentLoader().load_corpus(path)
    path.write_text("no tab here\n", encoding="utf-8")
    with pytest.raises(ParseError):
        DocumentLoader().load_corpus(path)
    with pytest.raises(FileNotFoundError):
        DocumentLoader().load_corpus(tmp_path / "missing.tsv")
