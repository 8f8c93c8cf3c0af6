"""LDA via collapsed Gibbs sampling plus UMass coherence.

The per-token sweep runs in the selected kernel (compiled or pure Python);
this wrapper owns corpus flattening, the posterior point estimates, and the
coherence metric used by grid search.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import MiningError
from ._kernels import gibbs_lda
from .types import DocTermMatrix, TopicSet


def _flatten(dtm: DocTermMatrix) -> tuple[np.ndarray, np.ndarray]:
    ptr = [0]
    words: list[int] = []
    for i in range(dtm.n_docs):
        words.extend(dtm.doc_tokens(i))
        ptr.append(len(words))
    return np.asarray(ptr, dtype=np.int32), np.asarray(words, dtype=np.int32)


def umass_coherence(dtm: DocTermMatrix, top_word_indices: list[int]) -> float:
    """UMass coherence of one topic: sum over ordered pairs of top words of
    log((D(w_m, w_l) + 1) / D(w_l)), with document frequencies taken from
    the training corpus."""
    df = dtm.doc_frequency()
    pair_df = dtm.co_document_frequency(top_word_indices)
    score = 0.0
    for m in range(1, len(top_word_indices)):
        for l in range(m):
            wm, wl = top_word_indices[m], top_word_indices[l]
            co = pair_df.get((min(wm, wl), max(wm, wl)), 0)
            denom = df.get(wl, 0)
            if denom == 0:
                continue
            score += math.log((co + 1.0) / denom)
    return score


def run_lda(dtm: DocTermMatrix, k: int, alpha: float, beta: float,
            iterations: int, seed: int, coherence_top_n: int = 10,
            kernel=gibbs_lda) -> TopicSet:
    if dtm.n_docs == 0 or not dtm.vocab:
        raise MiningError("empty corpus for topic modeling")
    if k < 1:
        raise MiningError(f"k must be >= 1, got {k}")
    ptr, words = _flatten(dtm)
    if len(words) == 0:
        raise MiningError("corpus has no content tokens")
    _, n_dk, n_kw, n_k = kernel(ptr, words, k, len(dtm.vocab), alpha, beta,
                                iterations, seed)

    v = len(dtm.vocab)
    doc_lens = (ptr[1:] - ptr[:-1]).astype(np.float64)
    theta = (n_dk + alpha) / (doc_lens[:, None] + k * alpha)
    phi = (n_kw + beta) / (n_k[:, None].astype(np.float64) + v * beta)

    coherences = []
    for t in range(k):
        row = phi[t]
        order = np.lexsort((np.arange(v), -row))[:coherence_top_n]
        coherences.append(umass_coherence(dtm, [int(w) for w in order]))

    return TopicSet(
        vocab=dtm.vocab,
        doc_ids=dtm.doc_ids,
        topic_word=tuple(tuple(float(x) for x in row) for row in phi),
        doc_topic=tuple(tuple(float(x) for x in row) for row in theta),
        coherence=tuple(coherences),
        mean_coherence=float(sum(coherences) / k),
    )
