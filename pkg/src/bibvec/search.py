"""Similarity search: rank a category's elements against a query element.

Three measures are supported.  ``linear`` is the model's own prediction
score (context vector . target vector + bias) and therefore orders a
non-textual category exactly like the prediction softmax; ``dot`` and
``cosine`` compare target vectors, which every element of every category
owns.  Ranking is brute force over the whole category; at bibliographic
vocabulary sizes this needs no index.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Collection, Iterable

import numpy as np

from .corpus import Vocabulary, normalize_author
from .model import Element, EmbeddingModel, logit

MEASURES = ("linear", "dot", "cosine")


class UnknownTokenError(KeyError):
    """Raised when a query token is not in the vocabulary; carries up to
    five nearest retained tokens by edit distance."""

    def __init__(self, category: str, token: str, suggestions: list[str]):
        super().__init__(token)
        self.category = category
        self.token = token
        self.suggestions = suggestions

    def __str__(self) -> str:
        hint = f"; did you mean {self.suggestions}?" if self.suggestions else ""
        return (f"token {self.token!r} not found in category "
                f"{self.category!r}{hint}")


@dataclass(frozen=True)
class RankedItem:
    element: Element
    token: str
    score: float


def _edit_distance(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1,
                           prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def nearest_tokens(tokens: Iterable[str], query: str, n: int = 5) -> list[str]:
    """The n tokens closest to ``query`` by edit distance, ties by token."""
    return heapq.nsmallest(n, tokens,
                           key=lambda tok: (_edit_distance(tok, query), tok))


def resolve_query(vocab: Vocabulary, category: str, token: str) -> Element:
    """Look a token up in a category, falling back to a whitespace-collapsed
    lowercase match, and raise :class:`UnknownTokenError` with spelling
    suggestions when absent."""
    cv = vocab.cat(category)  # raises ValueError on unknown category
    idx = cv.index.get(token)
    if idx is None:
        idx = cv.index.get(normalize_author(token))
    if idx is None:
        raise UnknownTokenError(category, token,
                                nearest_tokens(cv.tokens, token))
    return Element(category, idx)


def similarity(model: EmbeddingModel, query: Element, candidate: Element,
               measure: str) -> float:
    """Score one candidate against the query under the chosen measure.

    ``linear`` scores the candidate as a predicted context of the query; when
    the candidate is textual (it has no context vector) the roles swap and
    the query's context vector scores the candidate's target vector.  ``dot``
    and ``cosine`` always compare target vectors and are symmetric.
    """
    if measure == "linear":
        if not model.is_textual(candidate.category):
            return logit(model, query, candidate)
        if not model.is_textual(query.category):
            return logit(model, candidate, query)
        raise ValueError("linear measure is undefined between two textual "
                         "elements (no context vectors exist)")
    if measure not in MEASURES:
        raise ValueError(f"unknown measure {measure!r}; choose from {MEASURES}")

    a = model.target[query.category][query.index].astype(np.float64)
    b = model.target[candidate.category][candidate.index].astype(np.float64)
    dot = float(np.dot(a, b))
    if measure == "dot":
        return dot
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for a zero vector")
    return dot / (na * nb)


def top_k(model: EmbeddingModel, vocab: Vocabulary, query: Element,
          target_category: str, measure: str, k: int = 30,
          exclusions: Collection[Element] = ()) -> list[RankedItem]:
    """The k best-scoring elements of ``target_category`` for the query.

    Scores every element of the category (the query itself and any
    exclusions removed), sorts descending with ties broken by token order,
    and returns the first k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    cv = vocab.cat(target_category)
    skip = {e.index for e in exclusions if e.category == target_category}
    if query.category == target_category:
        skip.add(query.index)

    scored: list[tuple[float, str, int]] = []
    for idx in range(cv.size):
        if idx in skip:
            continue
        s = similarity(model, query, Element(target_category, idx), measure)
        scored.append((-s, cv.tokens[idx], idx))
    scored.sort()
    return [RankedItem(element=Element(target_category, idx), token=tok,
                       score=-neg)
            for neg, tok, idx in scored[:k]]
