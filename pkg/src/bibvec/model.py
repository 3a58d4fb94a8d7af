"""Embedding model over bibliographic categories.

Every element of every category owns a d-dimensional *target* vector, used
when the element is the input side of a prediction.  Elements of non-textual
categories additionally own a *context* vector and a scalar bias, used when
they are the predicted side.  The probability of predicting context element
``c`` from target ``t`` is a per-category softmax over linear scores::

    p(c | t) = exp(context[c] . target[t] + bias[c]) / sum over c's category

The textual category never acts as a context.  As a target it is collapsed
into a single pseudo-element per paper: the mean of the paper's text-token
target vectors.

Training minimizes the negative log-likelihood of all observed
(target, context) pairs.  The softmax normalization is avoided with
noise-contrastive estimation: each observed pair is discriminated against k
noise elements drawn from a per-category unigram^0.75 distribution, with the
logistic discriminator applied to ``score(e) - ln(k * P_noise(e))``.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .corpus import CategorySpec, EncodedPaper, Vocabulary


@dataclass(frozen=True)
class Element:
    """Reference to one element: its category name and vocabulary index."""

    category: str
    index: int


@dataclass(frozen=True, eq=True)
class TextAverage:
    """Pseudo-target standing for all of a paper's text tokens at once."""

    paper: EncodedPaper

    def __hash__(self) -> int:  # EncodedPaper holds a dict; identity is enough
        return id(self.paper)


TargetRef = Union[Element, TextAverage]


@dataclass(frozen=True)
class TrainingPair:
    """One observed (target, context) co-occurrence within a paper."""

    target: TargetRef
    context: Element

    def __post_init__(self) -> None:
        if isinstance(self.target, Element) and self.target == self.context:
            raise ValueError(f"self-pair: {self.target}")


# Auto-epoch sizing: aim for this many stochastic updates in total, so small
# corpora get many passes and large ones few.
AUTO_EPOCH_UPDATE_TARGET = 1_500_000
AUTO_EPOCH_MIN = 20
AUTO_EPOCH_MAX = 500


@dataclass
class TrainConfig:
    """Stochastic-update hyperparameters.

    ``epochs=None`` scales the pass count to the corpus so that roughly
    :data:`AUTO_EPOCH_UPDATE_TARGET` per-pair updates happen in total,
    clamped to [``AUTO_EPOCH_MIN``, ``AUTO_EPOCH_MAX``]; per-pair SGD needs
    many passes on a small corpus and few on a large one.
    """

    epochs: int | None = None
    learning_rate: float = 0.1
    lr_floor: float = 1e-4
    negatives: int = 5
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs is not None and self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def resolve_epochs(self, pairs_per_epoch: int) -> int:
        if self.epochs is not None:
            return self.epochs
        if pairs_per_epoch < 1:
            return AUTO_EPOCH_MIN
        wanted = -(-AUTO_EPOCH_UPDATE_TARGET // pairs_per_epoch)  # ceil
        return int(min(AUTO_EPOCH_MAX, max(AUTO_EPOCH_MIN, wanted)))


@dataclass
class EmbeddingModel:
    """Parameter store: per-category target/context matrices, biases, and
    noise distributions.

    ``target`` covers every category; ``context``, ``bias`` and ``noise``
    exist only for non-textual categories.  Row i of each array belongs to
    vocabulary index i.
    """

    dim: int
    specs: list[CategorySpec]
    target: dict[str, np.ndarray]
    context: dict[str, np.ndarray]
    bias: dict[str, np.ndarray]
    noise: dict[str, np.ndarray]
    _noise_cdf: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def textual_category(self) -> str:
        for spec in self.specs:
            if spec.is_textual:
                return spec.name
        raise ValueError("model has no textual category")

    @property
    def kinds(self) -> dict[str, str]:
        return {s.name: s.kind for s in self.specs}

    def is_textual(self, category: str) -> bool:
        kinds = self.kinds
        if category not in kinds:
            raise ValueError(f"unknown category {category!r}")
        return kinds[category] == "textual"

    def noise_cdf(self, category: str) -> np.ndarray:
        cdf = self._noise_cdf.get(category)
        if cdf is None:
            cdf = np.cumsum(self.noise[category])
            self._noise_cdf[category] = cdf
        return cdf

    def parameter_count(self) -> int:
        return (sum(a.size for a in self.target.values())
                + sum(a.size for a in self.context.values())
                + sum(a.size for a in self.bias.values()))


def noise_distribution(freqs: np.ndarray, power: float = 0.75) -> np.ndarray:
    """Unigram frequencies raised to ``power`` and renormalized.

    Frequencies are clamped to at least 1 so the distribution stays strictly
    positive on every retained element (an unk entry can carry count 0).
    """
    weights = np.maximum(freqs, 1).astype(np.float64) ** power
    return weights / weights.sum()


def init_model(vocab: Vocabulary, dim: int, seed: int = 0,
               dtype: np.dtype = np.float32) -> EmbeddingModel:
    """Create a fresh model: target rows uniform in [-0.5/d, 0.5/d], context
    rows and biases zero, noise distributions from vocabulary frequencies.

    Deterministic for a fixed seed; categories are initialized in vocabulary
    order.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    bound = 0.5 / dim
    target: dict[str, np.ndarray] = {}
    context: dict[str, np.ndarray] = {}
    bias: dict[str, np.ndarray] = {}
    noise: dict[str, np.ndarray] = {}
    for name in vocab.category_names:
        cv = vocab.cat(name)
        target[name] = rng.uniform(-bound, bound, size=(cv.size, dim)).astype(dtype)
        if not cv.spec.is_textual:
            context[name] = np.zeros((cv.size, dim), dtype=dtype)
            bias[name] = np.zeros(cv.size, dtype=dtype)
            noise[name] = noise_distribution(cv.freqs) if cv.size else \
                np.zeros(0, dtype=np.float64)
    return EmbeddingModel(dim=dim, specs=list(vocab.specs), target=target,
                          context=context, bias=bias, noise=noise)


def text_target_vector(model: EmbeddingModel, paper: EncodedPaper) -> np.ndarray:
    """Mean of the paper's text-token target vectors, duplicates counted
    with multiplicity.  Raises if the paper has no in-vocabulary text."""
    idx = paper.category(model.textual_category)
    if not idx:
        raise ValueError(f"paper {paper.paper_id!r} has no in-vocabulary "
                         f"text tokens")
    return model.target[model.textual_category][idx].mean(axis=0)


def _target_vector(model: EmbeddingModel, target: TargetRef) -> np.ndarray:
    if isinstance(target, TextAverage):
        return text_target_vector(model, target.paper)
    return model.target[target.category][target.index]


def logit(model: EmbeddingModel, target: TargetRef, context: Element) -> float:
    """Linear prediction score: context vector . target vector + context bias."""
    if model.is_textual(context.category):
        raise ValueError(f"textual category {context.category!r} cannot be "
                         f"a context")
    vec = _target_vector(model, target).astype(np.float64)
    row = model.context[context.category][context.index].astype(np.float64)
    return float(np.dot(row, vec) + float(model.bias[context.category][context.index]))


def softmax_predict(model: EmbeddingModel, target: TargetRef,
                    category: str) -> np.ndarray:
    """Probabilities of predicting each element of a non-textual category
    from the target.  Max-subtracted for overflow safety; sums to 1."""
    if model.is_textual(category):
        raise ValueError(f"textual category {category!r} cannot be predicted")
    if model.context[category].shape[0] == 0:
        raise ValueError(f"category {category!r} is empty")
    vec = _target_vector(model, target).astype(np.float64)
    scores = model.context[category].astype(np.float64) @ vec \
        + model.bias[category].astype(np.float64)
    scores -= scores.max()
    np.exp(scores, out=scores)
    scores /= scores.sum()
    return scores


def _dedup(seq: Sequence[int]) -> list[int]:
    return list(dict.fromkeys(seq))


def paper_elements(paper: EncodedPaper,
                   specs: Sequence[CategorySpec]) -> list[Element]:
    """Distinct non-textual elements of a paper, in category then first-seen
    order.  Repeated indices within a category are collapsed."""
    out: list[Element] = []
    for spec in specs:
        if spec.is_textual:
            continue
        for idx in _dedup(paper.category(spec.name)):
            out.append(Element(spec.name, idx))
    return out


def generate_pairs(paper: EncodedPaper,
                   specs: Sequence[CategorySpec]) -> list[TrainingPair]:
    """All training pairs contributed by one paper.

    Every distinct non-textual element targets every other non-textual
    element of the same paper (same-category co-elements included).  If the
    paper has in-vocabulary text, the averaged-text pseudo-target also
    targets every non-textual element.  Textual elements are never contexts.
    """
    elements = paper_elements(paper, specs)
    pairs = [TrainingPair(t, c)
             for t in elements for c in elements if c != t]
    textual = next(s.name for s in specs if s.is_textual)
    if paper.category(textual):
        rep = TextAverage(paper)
        pairs.extend(TrainingPair(rep, c) for c in elements)
    return pairs


def pair_count(paper: EncodedPaper, specs: Sequence[CategorySpec]) -> int:
    """Number of pairs :func:`generate_pairs` emits, without materializing them."""
    m = len(paper_elements(paper, specs))
    textual = next(s.name for s in specs if s.is_textual)
    n_text = m if paper.category(textual) else 0
    return m * (m - 1) + n_text


@dataclass
class SparseGrads:
    """Gradients touching only the rows involved in one pair.

    Entries may repeat an index (duplicate noise draws); applying them must
    accumulate.
    """

    target_rows: list[tuple[str, int, np.ndarray]]
    context_rows: list[tuple[str, int, np.ndarray]]
    bias_rows: list[tuple[str, int, float]]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def nce_loss_and_grads(model: EmbeddingModel, pair: TrainingPair,
                       noise_indices: Sequence[int],
                       ) -> tuple[float, SparseGrads]:
    """Noise-contrastive loss and analytic gradients for one pair.

    With ``s(e)`` the linear score of element ``e`` against the pair's target
    and ``delta(e) = s(e) - ln(k * P_noise(e))``::

        loss = -ln sigmoid(delta(context))
               - sum_i ln(1 - sigmoid(delta(noise_i)))

    Gradients cover the context and noise rows (context vector and bias) and
    the target vector; for an averaged-text target the target-vector gradient
    is split over the constituent tokens, each occurrence weighted 1/n.
    """
    cat = pair.context.category
    if model.is_textual(cat):
        raise ValueError(f"textual category {cat!r} cannot be a context")
    k = len(noise_indices)
    if k < 1:
        raise ValueError("at least one noise sample required")

    idxs = np.fromiter((pair.context.index, *noise_indices), dtype=np.int64,
                       count=k + 1)
    prob = model.noise[cat][idxs]
    assert np.all(prob > 0), "noise distribution must be strictly positive"

    vec = _target_vector(model, pair.target).astype(np.float64)
    rows = model.context[cat][idxs].astype(np.float64)
    delta = rows @ vec + model.bias[cat][idxs].astype(np.float64) \
        - np.log(k * prob)

    # -ln sig(d) = softplus(-d); -ln(1 - sig(d)) = softplus(d)
    loss = float(_softplus(-delta[0]) + _softplus(delta[1:]).sum())

    d_delta = _sigmoid(delta)
    d_delta[0] -= 1.0

    grad_rows = d_delta[:, None] * vec[None, :]
    grad_vec = d_delta @ rows

    context_rows = [(cat, int(idxs[i]), grad_rows[i]) for i in range(k + 1)]
    # np.float64 entries (a float subclass) keep the bias update arithmetic
    # in float64; a plain Python float would be demoted to float32 by the
    # in-place subtraction and round differently
    bias_rows = [(cat, int(idxs[i]), d_delta[i]) for i in range(k + 1)]

    if isinstance(pair.target, TextAverage):
        text_cat = model.textual_category
        tok_idx = pair.target.paper.category(text_cat)
        n = len(tok_idx)
        counts = dict.fromkeys(tok_idx, 0)
        for i in tok_idx:
            counts[i] += 1
        target_rows = [(text_cat, i, (c / n) * grad_vec)
                       for i, c in counts.items()]
    else:
        target_rows = [(pair.target.category, pair.target.index, grad_vec)]

    return loss, SparseGrads(target_rows=target_rows,
                             context_rows=context_rows, bias_rows=bias_rows)


def apply_grads(model: EmbeddingModel, grads: SparseGrads, lr: float) -> None:
    """One SGD step: subtract ``lr`` times each sparse gradient row."""
    for cat, idx, g in grads.target_rows:
        model.target[cat][idx] -= lr * g
    for cat, idx, g in grads.context_rows:
        model.context[cat][idx] -= lr * g
    for cat, idx, g in grads.bias_rows:
        model.bias[cat][idx] -= lr * g


def sample_noise(model: EmbeddingModel, category: str, k: int,
                 rng: np.random.Generator) -> np.ndarray:
    """Draw k element indices from the category's noise distribution."""
    cdf = model.noise_cdf(category)
    idx = np.searchsorted(cdf, rng.random(k), side="right")
    return np.minimum(idx, len(cdf) - 1)


def full_softmax_loss(model: EmbeddingModel,
                      pairs: Sequence[TrainingPair]) -> float:
    """Exact negative log-likelihood of the pairs under the per-category
    softmax.  Only practical on small vocabularies; used for monitoring and
    oracle checks."""
    total = 0.0
    for pair in pairs:
        probs = softmax_predict(model, pair.target, pair.context.category)
        total -= math.log(probs[pair.context.index])
    return total


def _train_papers(model: EmbeddingModel, papers: Sequence[EncodedPaper],
                  order: np.ndarray, config: TrainConfig,
                  rng: np.random.Generator, step: list[int],
                  total_steps: int) -> tuple[float, int]:
    """Sequential pass over ``papers[order]``; returns (loss sum, pair count).

    ``step`` is a shared one-cell counter driving the linear learning-rate
    decay; in multi-worker mode it is read and bumped without locking.

    The body is a fused form of sample_noise + nce_loss_and_grads +
    apply_grads: identical arithmetic in identical order (bitwise-equal
    parameters, covered by a test), minus the per-pair bookkeeping objects.
    """
    lr0 = config.learning_rate
    # the floor never raises the rate above its starting value, so a zero
    # learning rate really means zero updates
    floor = min(config.lr_floor, lr0)
    k = config.negatives
    specs = model.specs
    text_cat = model.textual_category
    targets, contexts, biases = model.target, model.context, model.bias
    text_rows = targets[text_cat]
    cdfs = {c: model.noise_cdf(c) for c in contexts}
    log_k_noise = {c: np.log(k * model.noise[c]) for c in contexts}
    for cat, noise in model.noise.items():
        assert noise.size == 0 or np.all(noise > 0), \
            "noise distribution must be strictly positive"

    loss_sum = 0.0
    n_pairs = 0
    for pi in order:
        paper = papers[pi]
        elements = paper_elements(paper, specs)
        tok = paper.category(text_cat)
        if tok and elements:
            tok_arr = np.asarray(tok, dtype=np.int64)
            n_tok = len(tok)
            counts = dict.fromkeys(tok, 0)
            for t in tok:
                counts[t] += 1
            text_weights = [(i, c / n_tok) for i, c in counts.items()]

        # the generate_pairs order: every ordered element pair, then the
        # averaged-text target against each element
        for phase in (0, 1):
            if phase == 0:
                pair_iter = ((t, c) for t in elements for c in elements
                             if c != t)
            elif tok and elements:
                pair_iter = ((None, c) for c in elements)
            else:
                break
            for t, c in pair_iter:
                lr = max(floor, lr0 * (1.0 - step[0] / total_steps))
                ccat = c.category
                cdf = cdfs[ccat]
                noise_idx = np.searchsorted(cdf, rng.random(k), side="right")
                idxs = np.empty(k + 1, dtype=np.int64)
                idxs[0] = c.index
                idxs[1:] = np.minimum(noise_idx, len(cdf) - 1)

                if t is None:
                    vec = text_rows[tok_arr].mean(axis=0).astype(np.float64)
                else:
                    vec = targets[t.category][t.index].astype(np.float64)
                ctx = contexts[ccat]
                rows = ctx[idxs].astype(np.float64)
                delta = rows @ vec + biases[ccat][idxs].astype(np.float64) \
                    - log_k_noise[ccat][idxs]
                loss_sum += float(_softplus(-delta[0])
                                  + _softplus(delta[1:]).sum())

                d_delta = _sigmoid(delta)
                d_delta[0] -= 1.0
                grad_vec = d_delta @ rows
                np.subtract.at(ctx, idxs, lr * (d_delta[:, None] * vec))
                np.subtract.at(biases[ccat], idxs, lr * d_delta)
                if t is None:
                    for i, w in text_weights:
                        text_rows[i] -= lr * (w * grad_vec)
                else:
                    targets[t.category][t.index] -= lr * grad_vec
                n_pairs += 1
                step[0] += 1
    return loss_sum, n_pairs


def train(model: EmbeddingModel, papers: Sequence[EncodedPaper],
          config: TrainConfig = TrainConfig()) -> list[float]:
    """NCE training over all papers' pairs; returns the mean loss per epoch.

    Papers are visited in a seeded-shuffled order each epoch, with one
    stochastic update per pair and a learning rate decaying linearly from
    ``learning_rate`` to ``lr_floor`` over the whole run.  The epoch count
    defaults to corpus-scaled (see :class:`TrainConfig`).  With one worker
    the result is bitwise-reproducible for a fixed seed; with several, shards
    of each epoch update the parameters concurrently without synchronization
    and determinism is not guaranteed.
    """
    total = sum(pair_count(p, model.specs) for p in papers)
    epochs = config.resolve_epochs(total)
    total_steps = max(1, epochs * total)
    rng = np.random.default_rng(config.seed)
    step = [0]
    trace: list[float] = []
    for epoch in range(epochs):
        order = rng.permutation(len(papers))
        if config.workers == 1:
            loss_sum, n_pairs = _train_papers(model, papers, order, config,
                                              rng, step, total_steps)
        else:
            shards = np.array_split(order, config.workers)
            seeds = [np.random.default_rng([config.seed, epoch, w])
                     for w in range(len(shards))]
            with concurrent.futures.ThreadPoolExecutor(config.workers) as pool:
                results = list(pool.map(
                    lambda args: _train_papers(model, papers, args[0], config,
                                               args[1], step, total_steps),
                    zip(shards, seeds)))
            loss_sum = sum(r[0] for r in results)
            n_pairs = sum(r[1] for r in results)
        trace.append(loss_sum / n_pairs if n_pairs else 0.0)
    return trace
