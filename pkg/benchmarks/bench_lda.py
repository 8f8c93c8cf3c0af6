#!/usr/bin/env python3
"""Benchmark the collapsed-Gibbs kernels: compiled extension vs pure Python.

Usage: python3 benchmarks/bench_lda.py [--docs 2000] [--iters 40] [--k 6]

Also verifies that both kernels produce bit-identical output on the
benchmark corpus before timing them.
"""

from __future__ import annotations

import argparse
import random
import time

import numpy as np

from agentsight.mining._kernels import gibbs_lda_compiled, gibbs_lda_python


def synth_corpus(n_docs: int, vocab_size: int, doc_len: int, seed: int):
    rng = random.Random(seed)
    ptr = [0]
    words = []
    for _ in range(n_docs):
        words.extend(rng.randrange(vocab_size) for _ in range(doc_len))
        ptr.append(len(words))
    return (np.asarray(ptr, dtype=np.int32), np.asarray(words, dtype=np.int32))


def bench(kernel, ptr, words, k, vocab_size, iters, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = kernel(ptr, words, k, vocab_size, 0.1, 0.01, iters, 42)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--docs", type=int, default=2000)
    parser.add_argument("--vocab", type=int, default=1500)
    parser.add_argument("--doc-len", type=int, default=12)
    parser.add_argument("--k", type=int, default=6)
    parser.add_argument("--iters", type=int, default=40)
    args = parser.parse_args()

    ptr, words = synth_corpus(args.docs, args.vocab, args.doc_len, seed=1)
    n_tokens = len(words)
    print(f"corpus: {args.docs} docs, {n_tokens} tokens, vocab {args.vocab}, "
          f"k={args.k}, {args.iters} sweeps")

    t_py, out_py = bench(gibbs_lda_python, ptr, words, args.k, args.vocab,
                         args.iters, repeats=1)
    print(f"pure python : {t_py:8.3f} s   "
          f"({n_tokens * args.iters / t_py / 1e6:6.2f} M token-updates/s)")

    if gibbs_lda_compiled is None:
        print("compiled    : extension not built (pip install -e . rebuilds it)")
        return
    t_c, out_c = bench(gibbs_lda_compiled, ptr, words, args.k, args.vocab, args.iters)
    print(f"compiled    : {t_c:8.3f} s   "
          f"({n_tokens * args.iters / t_c / 1e6:6.2f} M token-updates/s)")
    print(f"speedup     : {t_py / t_c:8.1f} x")

    identical = all(np.array_equal(a, b) for a, b in zip(out_py, out_c))
    print(f"bit-identical output: {identical}")
    if not identical:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
