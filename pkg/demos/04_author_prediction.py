"""
Author prediction: 10-choice evaluation and baseline
====================================================

Holds one author out of each test paper, asks the model to pick it among
distractors by summing its prediction scores over the paper's remaining
elements, and compares against a logistic-regression baseline on
bag-of-elements features.
"""

from bibvec import (SyntheticSpec, TrainConfig, accuracy, answer_mcq,
                    build_vocabulary, encode_papers, init_model,
                    logistic_baseline, make_mcq, synth_corpus, train)
from bibvec.corpus import DEFAULT_CATEGORY_SPECS

records = synth_corpus(SyntheticSpec(2, 3, 20, 60, 0.05), seed=7)
vocab = build_vocabulary(records, DEFAULT_CATEGORY_SPECS)
papers = encode_papers(vocab, records)

model = init_model(vocab, dim=16, seed=0)
train(model, papers, TrainConfig(epochs=120, seed=0))

# One question per paper with an in-vocabulary author; candidates are the
# held-out author plus uniformly drawn distractors.  6 authors exist here,
# so 4 choices leaves 2 off each ballot.
questions = make_mcq(papers, vocab, n_choices=4, seed=1)
print(f"{len(questions)} questions, 4 candidates each (chance 0.25)")
q = questions[0]
print(f"example: held-out {q.correct_token!r} among {q.candidate_tokens}")

answers = [answer_mcq(model, q) for q in questions]
print(f"embedding model accuracy: {accuracy(questions, answers):.3f}")

# The baseline sees the same bag-of-elements evidence but no geometry; at
# this scale both should be far above chance.
base = logistic_baseline(papers, questions, vocab)
print(f"logistic baseline accuracy: {accuracy(questions, base):.3f}")

wrong = [(q, a) for q, a in zip(questions, answers) if a != q.correct]
if wrong:
    q, a = wrong[0]
    chosen = vocab.token("author", a.index)
    print(f"a miss: predicted {chosen!r}, wanted {q.correct_token!r}")
