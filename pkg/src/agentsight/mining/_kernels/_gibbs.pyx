# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled collapsed-Gibbs kernel. Mirror of _gibbs_py.py: same splitmix64
stream, same operation order, bit-identical output."""

import numpy as np

cimport numpy as cnp

ctypedef unsigned long long u64

cdef double _INV_2_53 = 1.0 / 9007199254740992.0


cdef inline u64 _mix(u64 state, u64* out) nogil:
    state = state + <u64>0x9E3779B97F4A7C15
    cdef u64 z = state
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EB
    z = z ^ (z >> 31)
    out[0] = z
    return state


def gibbs_lda(doc_ptr, words, int n_topics, int vocab_size, double alpha,
              double beta, int n_iters, unsigned long long seed):
    cdef cnp.int32_t[::1] ptr = np.ascontiguousarray(doc_ptr, dtype=np.int32)
    cdef cnp.int32_t[::1] w_arr = np.ascontiguousarray(words, dtype=np.int32)
    cdef int n_docs = ptr.shape[0] - 1
    cdef int n_tokens = w_arr.shape[0]
    cdef int k = n_topics
    cdef int v = vocab_size
    cdef double vbeta = v * beta

    doc_of_np = np.empty(n_tokens, dtype=np.int32)
    cdef cnp.int32_t[::1] doc_of = doc_of_np
    cdef int d, t, j
    for d in range(n_docs):
        for t in range(ptr[d], ptr[d + 1]):
            doc_of[t] = d

    n_dk_np = np.zeros(n_docs * k, dtype=np.int32)
    n_kw_np = np.zeros(k * v, dtype=np.int32)
    n_k_np = np.zeros(k, dtype=np.int32)
    z_np = np.zeros(n_tokens, dtype=np.int32)
    cdef cnp.int32_t[::1] n_dk = n_dk_np
    cdef cnp.int32_t[::1] n_kw = n_kw_np
    cdef cnp.int32_t[::1] n_k = n_k_np
    cdef cnp.int32_t[::1] z = z_np

    cdef u64 state = seed
    cdef u64 bits = 0
    cdef double u, total
    cdef int topic, old, new, w, base_d, it

    for t in range(n_tokens):
        state = _mix(state, &bits)
        u = (bits >> 11) * _INV_2_53
        topic = <int>(u * k)
        if topic >= k:
            topic = k - 1
        z[t] = topic
        n_dk[doc_of[t] * k + topic] += 1
        n_kw[topic * v + w_arr[t]] += 1
        n_k[topic] += 1

    cum_np = np.zeros(k, dtype=np.float64)
    cdef double[::1] cum = cum_np

    for it in range(n_iters):
        for t in range(n_tokens):
            d = doc_of[t]
            w = w_arr[t]
            old = z[t]
            base_d = d * k
            n_dk[base_d + old] -= 1
            n_kw[old * v + w] -= 1
            n_k[old] -= 1

            total = 0.0
            for j in range(k):
                total += (n_dk[base_d + j] + alpha) * (n_kw[j * v + w] + beta) / (n_k[j] + vbeta)
                cum[j] = total
            state = _mix(state, &bits)
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
        z_np,
        n_dk_np.reshape(n_docs, k),
        n_kw_np.reshape(k, v),
        n_k_np,
    )
