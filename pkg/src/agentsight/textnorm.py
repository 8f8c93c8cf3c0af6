"""Shared text normalization.

One tokenizer for the datastore text index and the mining vocabulary, so a
term that matches in search is the same term that shows up in a topic. Rules:
lowercase, split on anything that is not Unicode-alphanumeric, drop pure
digits shorter than 4 chars and stop words.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    text = resources.files("agentsight.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#"))


def tokenize(text: str) -> list[str]:
    """All lowercase tokens, stop words included (index-level view)."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


def content_tokens(text: str) -> list[str]:
    """Tokens that carry content: stop words and short digit runs removed."""
    sw = stopwords()
    out = []
    for tok in tokenize(text):
        if tok in sw:
            continue
        if tok.isdigit() and len(tok) < 4:
            continue
        out.append(tok)
    return out
