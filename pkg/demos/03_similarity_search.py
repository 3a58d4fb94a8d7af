"""
Similarity search across categories
===================================

Queries a trained model for the nearest elements of any category under the
three measures: the model's own linear prediction score, plain dot product,
and cosine similarity.  Also shows typo handling with suggestions.
"""

from bibvec import (SyntheticSpec, TrainConfig, UnknownTokenError,
                    build_vocabulary, encode_papers, init_model,
                    resolve_query, synth_corpus, top_k, train)
from bibvec.corpus import AUTHOR, TEXT, DEFAULT_CATEGORY_SPECS

records = synth_corpus(SyntheticSpec(2, 3, 20, 60, 0.05), seed=7)
vocab = build_vocabulary(records, DEFAULT_CATEGORY_SPECS)
papers = encode_papers(vocab, records)
model = init_model(vocab, dim=16, seed=0)
train(model, papers, TrainConfig(epochs=120, seed=0))

probe_token = vocab.cat(AUTHOR).tokens[0]
probe = resolve_query(vocab, AUTHOR, probe_token)
print(f"query: {AUTHOR} {probe_token!r}")

# linear = context . target + bias, the score the model itself ranks
# contexts by; it is only defined when one side owns a context vector.
print("\nwords most predicted by this author (linear):")
for item in top_k(model, vocab, probe, TEXT, "linear", k=5):
    print(f"  {item.score:8.3f}  {item.token}")

# cosine compares target vectors, so it works within any category; authors
# sharing a topic should cluster.
print("\nnearest authors (cosine):")
for item in top_k(model, vocab, probe, AUTHOR, "cosine", k=4):
    print(f"  {item.score:8.3f}  {item.token}")

print("\nnearest authors (dot):")
for item in top_k(model, vocab, probe, AUTHOR, "dot", k=4):
    print(f"  {item.score:8.3f}  {item.token}")

# Unknown tokens raise with edit-distance suggestions instead of failing
# silently; the service layer turns this into a 404 with the same hints.
typo = probe_token[:-1] + "x"
try:
    resolve_query(vocab, AUTHOR, typo)
except UnknownTokenError as exc:
    print(f"\nlookup {typo!r} failed; suggestions: {exc.suggestions}")
