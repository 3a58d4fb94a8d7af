"""Author-prediction evaluation: multiple-choice question construction and
scoring, a bag-of-elements logistic-regression baseline, and a synthetic
topic-clustered corpus small enough to verify end to end.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import (AUTHOR, PAPER_ID, TEXT, YEAR, EncodedPaper, PaperRecord,
                     Vocabulary)
from .model import Element, EmbeddingModel, TextAverage, logit, paper_elements


@dataclass
class McqQuestion:
    """One question: pick the held-out author of a paper among n candidates."""

    paper: EncodedPaper               # the paper with the held-out author removed
    correct: Element
    correct_token: str
    candidates: list[Element]         # shuffled; contains ``correct``
    candidate_tokens: list[str]


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape of the synthetic topic-clustered corpus."""

    n_topics: int = 4
    authors_per_topic: int = 5
    words_per_topic: int = 50
    papers_per_topic: int = 50
    noise_rate: float = 0.05

    def __post_init__(self) -> None:
        for name in ("n_topics", "authors_per_topic", "words_per_topic",
                     "papers_per_topic"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.noise_rate < 1.0:
            raise ValueError("noise_rate must be in [0, 1)")


def make_mcq(papers: Sequence[EncodedPaper], vocab: Vocabulary,
             n_choices: int = 10, seed: int = 0,
             author_category: str = AUTHOR) -> list[McqQuestion]:
    """Build one question per paper that has at least one in-vocabulary author.

    The held-out author is chosen uniformly among the paper's distinct
    authors; distractors are sampled uniformly without replacement from the
    author vocabulary excluding all of the paper's authors.  When that pool
    is too small (n_choices near the vocabulary size) the paper's remaining
    co-authors fill the gap so the boundary case n_choices == vocabulary size
    yields every author as a candidate.
    """
    if n_choices < 2:
        raise ValueError("n_choices must be >= 2")
    cv = vocab.cat(author_category)
    if cv.size < n_choices:
        raise ValueError(f"author vocabulary has {cv.size} elements, "
                         f"fewer than n_choices={n_choices}")
    rng = np.random.default_rng(seed)
    questions = []
    for paper in papers:
        authors = list(dict.fromkeys(paper.category(author_category)))
        if not authors:
            continue
        held = int(authors[rng.integers(len(authors))])
        paper_set = set(authors)
        pool = [i for i in range(cv.size) if i not in paper_set]
        need = n_choices - 1
        if len(pool) >= need:
            distractors = [int(i) for i in
                           rng.choice(len(pool), size=need, replace=False)]
            distractors = [pool[i] for i in distractors]
        else:
            co_authors = [i for i in authors if i != held]
            if len(pool) + len(co_authors) < need:
                raise ValueError(f"cannot draw {need} distractors for paper "
                                 f"{paper.paper_id!r}")
            distractors = pool + co_authors[:need - len(pool)]
        candidates = [held] + distractors
        perm = rng.permutation(len(candidates))
        candidates = [candidates[i] for i in perm]

        remaining = dict(paper.elements)
        remaining[author_category] = [i for i in paper.category(author_category)
                                      if i != held]
        questions.append(McqQuestion(
            paper=EncodedPaper(paper_id=paper.paper_id, elements=remaining),
            correct=Element(author_category, held),
            correct_token=cv.tokens[held],
            candidates=[Element(author_category, i) for i in candidates],
            candidate_tokens=[cv.tokens[i] for i in candidates],
        ))
    return questions


def answer_mcq(model: EmbeddingModel, question: McqQuestion) -> Element:
    """Pick the candidate with the highest summed prediction score.

    Each candidate is scored as a predicted context of every remaining
    non-textual element of the paper, plus the averaged-text target when the
    paper has text.  Ties break by candidate token order.
    """
    targets: list = list(paper_elements(question.paper, model.specs))
    if question.paper.category(model.textual_category):
        targets.append(TextAverage(question.paper))
    if not targets:
        raise ValueError(f"paper {question.paper.paper_id!r} has no remaining "
                         f"elements; question is unanswerable")
    best = None
    for cand, tok in zip(question.candidates, question.candidate_tokens):
        score = sum(logit(model, t, cand) for t in targets)
        key = (-score, tok)
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]


def accuracy(questions: Sequence[McqQuestion],
             answers: Sequence[Element]) -> float:
    """Fraction of answers matching the correct author."""
    if len(questions) != len(answers):
        raise ValueError(f"{len(questions)} questions vs {len(answers)} answers")
    if not questions:
        raise ValueError("accuracy undefined on an empty question set")
    hits = sum(q.correct == a for q, a in zip(questions, answers))
    return hits / len(questions)


@dataclass
class BaselineConfig:
    l2: float = 1e-4
    epochs: int = 30
    learning_rate: float = 0.1
    batch_size: int = 64
    seed: int = 0


def _feature_layout(vocab: Vocabulary,
                    author_category: str) -> tuple[dict[str, int], int]:
    offsets: dict[str, int] = {}
    total = 0
    for name in vocab.category_names:
        if name == author_category:
            continue
        offsets[name] = total
        total += vocab.size(name)
    return offsets, total


def _features(paper: EncodedPaper, offsets: dict[str, int]) -> np.ndarray:
    feats = {offsets[name] + idx
             for name, idxs in paper.elements.items() if name in offsets
             for idx in idxs}
    return np.fromiter(sorted(feats), dtype=np.int64, count=len(feats))


def logistic_baseline(train_papers: Sequence[EncodedPaper],
                      questions: Sequence[McqQuestion], vocab: Vocabulary,
                      config: BaselineConfig = BaselineConfig(),
                      author_category: str = AUTHOR) -> list[Element]:
    """Multinomial logistic regression from bag-of-elements indicators to
    authors, answering each question by the posterior restricted to its
    candidates.

    Features are indicator vectors over every non-author category (text as a
    bag of words).  One training sample per (paper, author) pair.  Trained by
    seeded mini-batch gradient descent; the L2 penalty decays only the
    feature rows active in each batch, the usual sparse approximation.
    """
    offsets, n_features = _feature_layout(vocab, author_category)
    n_classes = vocab.size(author_category)
    tokens = vocab.cat(author_category).tokens

    samples: list[tuple[np.ndarray, int]] = []
    for paper in train_papers:
        feats = _features(paper, offsets)
        for author in dict.fromkeys(paper.category(author_category)):
            samples.append((feats, author))

    weights = np.zeros((n_features, n_classes), dtype=np.float64)
    intercept = np.zeros(n_classes, dtype=np.float64)

    rng = np.random.default_rng(config.seed)
    lr = config.learning_rate
    for _ in range(config.epochs):
        order = rng.permutation(len(samples))
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            if len(batch) == 0:
                continue
            scores = np.vstack([
                weights[samples[i][0]].sum(axis=0) + intercept for i in batch])
            scores -= scores.max(axis=1, keepdims=True)
            np.exp(scores, out=scores)
            scores /= scores.sum(axis=1, keepdims=True)
            for row, i in enumerate(batch):
                scores[row, samples[i][1]] -= 1.0
            scores /= len(batch)
            touched = np.unique(np.concatenate(
                [samples[i][0] for i in batch] or [np.zeros(0, np.int64)]))
            weights[touched] *= 1.0 - lr * config.l2
            for row, i in enumerate(batch):
                np.add.at(weights, samples[i][0], -lr * scores[row])
            intercept -= lr * scores.sum(axis=0)

    answers = []
    for q in questions:
        feats = _features(q.paper, offsets)
        z = weights[feats].sum(axis=0) + intercept
        best = min(((-z[c.index], tok, c) for c, tok in
                    zip(q.candidates, q.candidate_tokens)))
        answers.append(best[2])
    return answers


def _letters(n: int) -> str:
    """Non-negative integer to a lowercase base-26 string ('a'..'z', 'ba'...)."""
    digits = []
    while True:
        n, r = divmod(n, 26)
        digits.append(string.ascii_lowercase[r])
        if n == 0:
            break
    return "".join(reversed(digits))


def synth_corpus(spec: SyntheticSpec, seed: int = 0) -> list[PaperRecord]:
    """Topic-clustered synthetic papers with disjoint author and word pools.

    Each paper draws 2 authors and 10 words from its topic's pools, each draw
    independently replaced by a uniform cross-topic substitute with
    probability ``noise_rate``.  Papers carry a per-topic year and their own
    paper id; references stay empty.  Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    author_pools = [[f"author {_letters(t)} {_letters(i)}"
                     for i in range(spec.authors_per_topic)]
                    for t in range(spec.n_topics)]
    word_pools = [[f"topic{_letters(t)}word{_letters(i)}"
                   for i in range(spec.words_per_topic)]
                  for t in range(spec.n_topics)]

    def cross_topic(pools: list[list[str]], topic: int) -> str:
        others = [t for t in range(spec.n_topics) if t != topic]
        t = others[rng.integers(len(others))]
        pool = pools[t]
        return pool[rng.integers(len(pool))]

    def draw(pool: list[str], n: int) -> list[str]:
        if len(pool) >= n:
            picks = rng.choice(len(pool), size=n, replace=False)
        else:
            picks = rng.integers(len(pool), size=n)
        return [pool[int(i)] for i in picks]

    papers = []
    for topic in range(spec.n_topics):
        for j in range(spec.papers_per_topic):
            authors = draw(author_pools[topic], min(2, spec.authors_per_topic))
            words = draw(word_pools[topic], 10)
            if spec.n_topics > 1 and spec.noise_rate > 0:
                authors = [cross_topic(author_pools, topic)
                           if rng.random() < spec.noise_rate else a
                           for a in authors]
                words = [cross_topic(word_pools, topic)
                         if rng.random() < spec.noise_rate else w
                         for w in words]
            paper_id = f"p{topic:02d}{j:04d}"
            papers.append(PaperRecord(paper_id=paper_id, elements={
                AUTHOR: list(dict.fromkeys(authors)),
                PAPER_ID: [paper_id],
                "reference": [],
                YEAR: [str(2000 + topic)],
                TEXT: words,
            }))
    return papers
