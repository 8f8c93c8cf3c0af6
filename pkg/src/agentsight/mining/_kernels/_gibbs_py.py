"""Pure-Python collapsed-Gibbs kernel, arithmetic-identical to the compiled one.

Both kernels draw from the same splitmix64 stream and evaluate the sampling
weights in the same operation order, so given identical inputs they produce
bit-identical assignments. Keep any change here mirrored in _gibbs.pyx.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z = z ^ (z >> 31)
    return state, z


def gibbs_lda(doc_ptr, words, n_topics: int, vocab_size: int, alpha: float,
              beta: float, n_iters: int, seed: int):
    """Run `n_iters` full Gibbs sweeps over the flattened corpus.

    doc_ptr: int32[n_docs+1] CSR-style offsets into `words`.
    words:   int32[n_tokens] word ids in document order.
    Returns (z, n_dk, n_kw, n_k) as numpy int32 arrays.
    """
    doc_ptr = list(map(int, doc_ptr))
    words_l = list(map(int, words))
    n_docs = len(doc_ptr) - 1
    n_tokens = len(words_l)
    k = int(n_topics)
    v = int(vocab_size)
    vbeta = v * beta

    doc_of = [0] * n_tokens
    for d in range(n_docs):
        for t in range(doc_ptr[d], doc_ptr[d + 1]):
            doc_of[t] = d

    n_dk = [0] * (n_docs * k)
    n_kw = [0] * (k * v)
    n_k = [0] * k
    z = [0] * n_tokens

    state = seed & _MASK
    for t in range(n_tokens):
        state, bits = _splitmix64(state)
        u = (bits >> 11) * _INV_2_53
        topic = int(u * k)
        if topic >= k:
            topic = k - 1
        z[t] = topic
        n_dk[doc_of[t] * k + topic] += 1
        n_kw[topic * v + words_l[t]] += 1
        n_k[topic] += 1

    cum = [0.0] * k
    for _ in range(n_iters):
        for t in range(n_tokens):
            d = doc_of[t]
            w = words_l[t]
            old = z[t]
            n_dk[d * k + old] -= 1
            n_kw[old * v + w] -= 1
            n_k[old] -= 1

            total = 0.0
            base_d = d * k
            for j in range(k):
                total += (n_dk[base_d + j] + alpha) * (n_kw[j * v + w] + beta) / (n_k[j] + vbeta)
                cum[j] = total
            state, bits = _splitmix64(state)
            u = ((bits >> 11) * _INV_2_53) * total
            new = k - 1
            for j in range(k):
                if cum[j] > u:
                    new = j
                    break
            z[t] = new
            n_dk[base_d + new] += 1
            n_kw[new * v + w] += 1
            n_k[new] += 1

    return (
        np.asarray(z, dtype=np.int32),
        np.asarray(n_dk, dtype=np.int32).reshape(n_docs, k),
        np.asarray(n_kw, dtype=np.int32).reshape(k, v),
        np.asarray(n_k, dtype=np.int32),
    )
