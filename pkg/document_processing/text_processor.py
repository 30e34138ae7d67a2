# document_processing/text_processor.py
# =============================================================================
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.preprocessing import normalize

from config.settings import Config
from utils.exceptions import InputError
from vector_store.sparse import SparseVector

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[^\W_]+")


def tokenize(text: str) -> List[str]:
    """Lowercase and split on every non-alphanumeric character"""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class TextVocabulary:
    tokens: Dict[str, Tuple[int, int]] = field(default_factory=dict)  # token -> (index, df)
    num_documents: int = 0

    def __len__(self) -> int:
        return len(self.tokens)

    def index_map(self) -> Dict[str, int]:
        return {token: idx for token, (idx, _) in self.tokens.items()}

    def idf(self) -> np.ndarray:
        """Smoothed idf: ln((1 + N) / (1 + df)) + 1, ordered by index"""
        df = np.zeros(len(self.tokens))
        for idx, count in self.tokens.values():
            df[idx] = count
        return np.log((1.0 + self.num_documents) / (1.0 + df)) + 1.0


class TextProcessor:
    """Handles tokenization, vocabulary building and tf-idf weighting"""

    def __init__(self, min_df: int = None):
        self.min_df = Config.MIN_DF if min_df is None else min_df

    def _vectorizer(self, vocabulary=None) -> CountVectorizer:
        return CountVectorizer(
            tokenizer=tokenize,
            lowercase=False,
            token_pattern=None,
            vocabulary=vocabulary,
            min_df=1 if vocabulary is not None else self.min_df,
        )

    def build_text_vocabulary(self, corpus: Sequence[Tuple[int, str]]) -> TextVocabulary:
        """Count document frequencies; tokens below min_df are dropped"""
        seen = set()
        for entity, _ in corpus:
            if entity in seen:
                raise InputError(f"duplicate document for entity {entity}")
            seen.add(entity)
        texts = [text for _, text in corpus]
        if not texts:
            return TextVocabulary({}, 0)
        try:
            counts = self._vectorizer().fit(texts)
        except ValueError as e:
            # nothing survived tokenization or pruning
            logger.warning("Empty text vocabulary over %d documents: %s", len(texts), e)
            return TextVocabulary({}, len(texts))
        vocabulary = counts.vocabulary_
        matrix = self._vectorizer(vocabulary).transform(texts)
        df = np.asarray((matrix > 0).sum(axis=0)).ravel()
        tokens = {token: (int(idx), int(df[idx])) for token, idx in sorted(vocabulary.items(), key=lambda kv: kv[1])}
        logger.info("Text vocabulary: %d tokens over %d documents (min_df=%d)",
                    len(tokens), len(texts), self.min_df)
        return TextVocabulary(tokens, len(texts))

    def tfidf_matrix(self, texts: Sequence[str], vocab: TextVocabulary) -> sp.csr_matrix:
        """One L2-normalized tf-idf row per text; unknown tokens are ignored"""
        if len(vocab) == 0:
            return sp.csr_matrix((len(texts), 0), dtype=np.float64)
        counts = self._vectorizer(vocab.index_map()).transform(list(texts)).astype(np.float64)
        weighted = sp.csr_matrix(counts @ sp.diags(vocab.idf()))
        weighted = normalize(weighted, norm="l2", axis=1, copy=False)
        weighted.eliminate_zeros()
        weighted.sort_indices()
        return sp.csr_matrix(weighted)

    def tfidf_vector(self, text: str, vocab: TextVocabulary) -> SparseVector:
        row = self.tfidf_matrix([text], vocab)
        return SparseVector(row.indices, row.data, len(vocab))

    @staticmethod
    def get_vocabulary_stats(vocab: TextVocabulary) -> dict:
        """Get statistics about a text vocabulary"""
        if not vocab.tokens:
            return {'num_tokens': 0, 'num_documents': vocab.num_documents}
        dfs = [df for _, df in vocab.tokens.values()]
        return {
            'num_tokens': len(dfs),
            'num_documents': vocab.num_documents,
            'avg_df': sum(dfs) / len(dfs),
            'max_df': max(dfs),
        }


def build_text_vocabulary(corpus, min_df: int = None) -> TextVocabulary:
    return TextProcessor(min_df).build_text_vocabulary(corpus)


def tfidf_vector(text: str, vocab: TextVocabulary) -> SparseVector:
    return TextProcessor().tfidf_vector(text, vocab)
