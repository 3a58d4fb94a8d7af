"""Multi-category bibliographic embeddings.

Elements of bibliographic records (authors, references, years, paper ids,
and a shared pool of text words/phrases) are embedded as target/context
vector pairs with biases, trained by noise-contrastive estimation on
within-paper co-occurrence.  The package covers the full pipeline: corpus
ingestion, training, similarity search under three measures, a 10-choice
author-prediction evaluation with a logistic-regression baseline, model
persistence, and a read-only HTTP serving layer.
"""

from .corpus import (CategorySpec, EncodedPaper, PaperRecord, Vocabulary,
                     build_vocabulary, encode_paper, encode_papers,
                     load_corpus, mine_phrases, normalize_text, split_dataset)
from .evaluation import (McqQuestion, SyntheticSpec, accuracy, answer_mcq,
                         logistic_baseline, make_mcq, synth_corpus)
from .model import (Element, EmbeddingModel, TextAverage, TrainConfig,
                    TrainingPair, full_softmax_loss, generate_pairs,
                    init_model, logit, nce_loss_and_grads, softmax_predict,
                    text_target_vector, train)
from .modelfile import load_model, save_model
from .search import RankedItem, UnknownTokenError, resolve_query, similarity, top_k
from .service import create_app, serve

__version__ = "0.1.0"

__all__ = [
    "CategorySpec", "PaperRecord", "Vocabulary", "EncodedPaper",
    "load_corpus", "normalize_text", "mine_phrases", "build_vocabulary",
    "split_dataset", "encode_paper", "encode_papers",
    "Element", "TextAverage", "TrainingPair", "TrainConfig", "EmbeddingModel",
    "init_model", "text_target_vector", "logit", "softmax_predict",
    "generate_pairs", "nce_loss_and_grads", "train", "full_softmax_loss",
    "RankedItem", "UnknownTokenError", "resolve_query", "similarity", "top_k",
    "McqQuestion", "SyntheticSpec", "make_mcq", "answer_mcq", "accuracy",
    "logistic_baseline", "synth_corpus",
    "save_model", "load_model", "create_app", "serve",
    "__version__",
]
