import numpy as np

from bibvec.corpus import (CategorySpec, CategoryVocab, EncodedPaper,
                           Vocabulary)


def make_vocab(cats, min_freq=1):
    """Build a Vocabulary from {name: (kind, tokens)} or
    {name: (kind, tokens, freqs)} entries."""
    out = {}
    for name, entry in cats.items():
        kind, tokens = entry[0], list(entry[1])
        freqs = list(entry[2]) if len(entry) > 2 else [1] * len(tokens)
        out[name] = CategoryVocab(
            spec=CategorySpec(name, kind, min_freq),
            tokens=tokens,
            index={tok: i for i, tok in enumerate(tokens)},
            freqs=np.asarray(freqs, dtype=np.int64),
        )
    return Vocabulary(out)


def encoded(paper_id="p", **elements):
    return EncodedPaper(paper_id=paper_id, elements=elements)
