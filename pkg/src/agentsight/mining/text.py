"""Lexicon sentiment scoring and keyword stance classification.

Stance detection here is a deliberate approximation: label fractions come
from configurable keyword sets, not a trained classifier.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

from ..errors import MiningError
from ..textnorm import tokenize
from .types import LabeledTexts, SentimentDist, StanceDist

_POS_CUTOFF = 0.05
_NEG_CUTOFF = -0.05


@lru_cache(maxsize=1)
def sentiment_lexicon() -> dict[str, float]:
    text = resources.files("agentsight.data").joinpath("sentiment_lexicon.txt").read_text("utf-8")
    out: dict[str, float] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, _, score = line.partition("\t")
        out[word] = float(score)
    return out


@lru_cache(maxsize=1)
def stance_lexicons() -> dict[str, dict[str, list[str]]]:
    raw = resources.files("agentsight.data").joinpath("stance_lexicons.json").read_text("utf-8")
    return json.loads(raw)


def score_text(text: str, lexicon: dict[str, float] | None = None) -> float:
    """Signed mean polarity over matched tokens; 0.0 when nothing matches."""
    lex = lexicon if lexicon is not None else sentiment_lexicon()
    hits = [lex[t] for t in tokenize(text) if t in lex]
    return sum(hits) / len(hits) if hits else 0.0


def lexicon_sentiment(data: LabeledTexts) -> SentimentDist:
    if not data.items:
        raise MiningError("no texts to score")
    pos = neg = 0
    for _, text in data.items:
        s = score_text(text)
        if s > _POS_CUTOFF:
            pos += 1
        elif s < _NEG_CUTOFF:
            neg += 1
    n = len(data.items)
    return SentimentDist(
        positive=pos / n,
        negative=neg / n,
        neutral=(n - pos - neg) / n,
        n_docs=n,
    )


def keyword_stance(data: LabeledTexts, lexicon_name: str = "default") -> StanceDist:
    sets = stance_lexicons()
    if lexicon_name not in sets:
        raise MiningError(f"unknown stance lexicon {lexicon_name!r}; "
                          f"available: {sorted(sets)}")
    if not data.items:
        raise MiningError("no texts to classify")
    keyword_to_label: dict[str, str] = {}
    labels = sorted(sets[lexicon_name])
    for label in labels:
        for kw in sets[lexicon_name][label]:
            keyword_to_label[kw.lower()] = label
    counts = {label: 0 for label in labels}
    counts["none"] = 0
    for _, text in data.items:
        votes: dict[str, int] = {}
        for tok in tokenize(text):
            label = keyword_to_label.get(tok)
            if label:
                votes[label] = votes.get(label, 0) + 1
        if votes:
            best = sorted(votes.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
            counts[best] += 1
        else:
            counts["none"] += 1
    n = len(data.items)
    return StanceDist(fractions={lab: c / n for lab, c in sorted(counts.items())}, n_docs=n)
