"""
Corpus ingestion: records, phrases, vocabulary, encoding
========================================================

Walks the preprocessing pipeline on a small synthetic corpus: raw records,
text normalization, collocation mining, vocabulary construction with
frequency cutoffs, a train/test split, and integer encoding.
"""

from bibvec import (SyntheticSpec, build_vocabulary, encode_papers,
                    mine_phrases, normalize_text, split_dataset, synth_corpus)
from bibvec.corpus import DEFAULT_CATEGORY_SPECS, apply_phrases

# A topic-clustered corpus: 2 topics, 3 authors and 20 words each, 60 papers
# per topic, 5% of element draws swapped across topics.  Sized so the stock
# frequency cutoffs (20 for words, 5 for authors) keep most tokens.
records = synth_corpus(SyntheticSpec(2, 3, 20, 60, 0.05), seed=7)
print(f"{len(records)} papers")
first = records[0]
print("first record:", first.paper_id)
for name, tokens in first.elements.items():
    print(f"  {name:10s} {tokens[:6]}")

# Free text is lowercased and split on whitespace, punctuation stripped.
print()
print("normalize_text('Distributed Representations, Revisited!') ->",
      normalize_text("Distributed Representations, Revisited!"))

# Collocation mining rewrites frequently co-occurring adjacent words into
# joined phrase tokens; on this corpus word order is random so few pairs
# pass the threshold.
streams = [r.category("text") for r in records]
mined = mine_phrases(streams, threshold=50.0)
joined = {t for s in mined for t in s if "_" in t}
print(f"{len(joined)} distinct phrase tokens, e.g. {sorted(joined)[:3]}")
records = apply_phrases(records, threshold=50.0)

# The vocabulary keeps tokens meeting each category's min_freq, indexed by
# descending frequency (token order breaks ties).
vocab = build_vocabulary(records, DEFAULT_CATEGORY_SPECS)
for name in vocab.category_names:
    cv = vocab.cat(name)
    print(f"category {name:10s} size {cv.size:4d}  "
          f"most frequent: {cv.tokens[:3]}")

# Hold out papers for evaluation, then replace tokens with indices.
train_rec, test_rec = split_dataset(records, n_test=10, seed=0)
print(f"\nsplit: {len(train_rec)} train / {len(test_rec)} test")

encoded = encode_papers(vocab, train_rec)
print("encoded first train paper:", encoded[0].elements)
