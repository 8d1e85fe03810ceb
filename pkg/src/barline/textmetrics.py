"""Edit-distance and text-overlap metrics for response scoring."""

from __future__ import annotations

import string
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import EmptyVocabulary

_PUNCT = str.maketrans("", "", string.punctuation)


def tokenize(text: str, lowercase: bool = True,
             strip_punctuation: bool = True) -> Tuple[str, ...]:
    """Whitespace tokens, lowercased and punctuation-stripped by default."""
    if lowercase:
        text = text.lower()
    tokens = []
    for raw in text.split():
        token = raw.translate(_PUNCT) if strip_punctuation else raw
        if token:
            tokens.append(token)
    return tuple(tokens)


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Minimum single-element edit count between two sequences.

    Classic DP with D[0][j] = j, D[i][0] = i, rolling one row.
    """
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, item_a in enumerate(a, start=1):
        current = [i]
        for j, item_b in enumerate(b, start=1):
            cost = 0 if item_a == item_b else 1
            current.append(min(previous[j] + 1,      # delete
                               current[j - 1] + 1,    # insert
                               previous[j - 1] + cost))
        previous = current
    return previous[-1]


def _prf(matches: int, hyp_len: int, ref_len: int) -> Dict[str, float]:
    precision = matches / hyp_len if hyp_len else 0.0
    recall = matches / ref_len if ref_len else 0.0
    f1 = 2 * precision * recall / (precision + recall) \
        if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def rouge1(reference: Sequence[str],
           hypothesis: Sequence[str]) -> Dict[str, float]:
    """Clipped unigram overlap scores."""
    overlap = Counter(reference) & Counter(hypothesis)
    return _prf(sum(overlap.values()), len(hypothesis), len(reference))


def lcs_length(a: Sequence, b: Sequence) -> int:
    previous = [0] * (len(b) + 1)
    for item_a in a:
        current = [0]
        for j, item_b in enumerate(b, start=1):
            if item_a == item_b:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rougeL(reference: Sequence[str],
           hypothesis: Sequence[str]) -> Dict[str, float]:
    """Longest-common-subsequence overlap scores."""
    return _prf(lcs_length(reference, hypothesis),
                len(hypothesis), len(reference))


def meteor_lite(reference: Sequence[str], hypothesis: Sequence[str],
                synonyms: Optional[Mapping[str, Set[str]]] = None) -> float:
    """Unigram-alignment score with a fragmentation penalty.

    Hypothesis tokens align leftmost-greedy to unused reference tokens,
    exact matches first, then the optional synonym table.  With P, R
    over the m aligned tokens: F = 10PR / (P + 9R), and contiguous
    alignment runs (chunks) discount it by 0.5 (chunks/m)^3.
    """
    reference = list(reference)
    hypothesis = list(hypothesis)
    if not reference or not hypothesis:
        return 0.0

    used = [False] * len(reference)
    alignment = [None] * len(hypothesis)
    for h, token in enumerate(hypothesis):
        for r, ref_token in enumerate(reference):
            if not used[r] and token == ref_token:
                used[r] = True
                alignment[h] = r
                break
    if synonyms:
        for h, token in enumerate(hypothesis):
            if alignment[h] is not None:
                continue
            accept = synonyms.get(token, set())
            for r, ref_token in enumerate(reference):
                if not used[r] and (ref_token in accept
                                    or token in synonyms.get(ref_token, ())):
                    used[r] = True
                    alignment[h] = r
                    break

    pairs = [(h, r) for h, r in enumerate(alignment) if r is not None]
    matches = len(pairs)
    if matches == 0:
        return 0.0
    precision = matches / len(hypothesis)
    recall = matches / len(reference)
    f_mean = 10 * precision * recall / (precision + 9 * recall)

    chunks = 1
    for (h0, r0), (h1, r1) in zip(pairs, pairs[1:]):
        if h1 != h0 + 1 or r1 != r0 + 1:
            chunks += 1
    penalty = 0.5 * (chunks / matches) ** 3
    return f_mean * (1.0 - penalty)


@dataclass
class LsaVectorizer:
    """TF-IDF vectorizer with an optional truncated-SVD projection.

    svd_dims caps the projection at the corpus rank; None keeps raw
    TF-IDF vectors.
    """

    svd_dims: Optional[int] = 100

    def __post_init__(self):
        self.vocabulary: Dict[str, int] = {}
        self.idf: Optional[np.ndarray] = None
        self.components: Optional[np.ndarray] = None

    def fit(self, corpus: Sequence[str]) -> "LsaVectorizer":
        docs = [tokenize(text) for text in corpus]
        vocab: Dict[str, int] = {}
        for doc in docs:
            for token in doc:
                vocab.setdefault(token, len(vocab))
        if not vocab:
            raise EmptyVocabulary("corpus has no tokens")
        self.vocabulary = vocab

        n_docs = len(docs)
        df = np.zeros(len(vocab))
        for doc in docs:
            for index in {vocab[t] for t in doc}:
                df[index] += 1
        self.idf = np.log((1 + n_docs) / (1 + df)) + 1.0

        if self.svd_dims is not None:
            matrix = np.vstack([self._tfidf(doc) for doc in docs])
            _, singular, vt = np.linalg.svd(matrix, full_matrices=False)
            rank = int((singular > singular[0] * 1e-12).sum()) \
                if len(singular) else 0
            self.components = vt[:min(self.svd_dims, max(rank, 1))]
        return self

    def _tfidf(self, tokens: Sequence[str]) -> np.ndarray:
        vector = np.zeros(len(self.vocabulary))
        for token, count in Counter(tokens).items():
            index = self.vocabulary.get(token)
            if index is not None:
                vector[index] = count
        return vector * self.idf

    def transform(self, text: str) -> np.ndarray:
        if self.idf is None:
            raise EmptyVocabulary("vectorizer not fitted")
        vector = self._tfidf(tokenize(text))
        if self.components is not None:
            return self.components @ vector
        return vector


def lsa_cosine(vectorizer: LsaVectorizer, a: str, b: str) -> float:
    """Cosine similarity of two texts under a fitted vectorizer."""
    u = vectorizer.transform(a)
    v = vectorizer.transform(b)
    norm = np.linalg.norm(u) * np.linalg.norm(v)
    if norm == 0:
        return 0.0
    return float(np.dot(u, v) / norm)
