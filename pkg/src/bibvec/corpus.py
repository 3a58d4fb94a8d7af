"""Corpus ingestion: record loading, text normalization, phrase mining,
vocabulary construction, train/test splitting, and index encoding.

A corpus is a list of :class:`PaperRecord` objects, each holding element
tokens grouped by category.  Exactly one category is textual (words and
phrases from titles/abstracts); the rest are non-textual (authors,
references, years, paper ids).  All functions here are pure: they never
mutate their inputs.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

TEXTUAL = "textual"
NON_TEXTUAL = "non_textual"

# Standard category names for bibliographic JSONL input.
TEXT = "text"
AUTHOR = "author"
REFERENCE = "reference"
YEAR = "year"
PAPER_ID = "paper-id"

UNK_TOKEN = "<unk>"

_ALPHA_RE = re.compile(r"[A-Za-z]+\Z")


@dataclass(frozen=True)
class CategorySpec:
    """Configuration for one category: its name, kind, and frequency floor."""

    name: str
    kind: str
    min_freq: int = 1

    def __post_init__(self) -> None:
        if self.kind not in (TEXTUAL, NON_TEXTUAL):
            raise ValueError(f"category {self.name!r}: kind must be "
                             f"{TEXTUAL!r} or {NON_TEXTUAL!r}, got {self.kind!r}")
        if self.min_freq < 1:
            raise ValueError(f"category {self.name!r}: min_freq must be >= 1")

    @property
    def is_textual(self) -> bool:
        return self.kind == TEXTUAL


#: Default configuration for the standard five bibliographic categories.
DEFAULT_CATEGORY_SPECS: tuple[CategorySpec, ...] = (
    CategorySpec(TEXT, TEXTUAL, 20),
    CategorySpec(AUTHOR, NON_TEXTUAL, 5),
    CategorySpec(REFERENCE, NON_TEXTUAL, 1),
    CategorySpec(YEAR, NON_TEXTUAL, 1),
    CategorySpec(PAPER_ID, NON_TEXTUAL, 1),
)


def validate_specs(specs: Sequence[CategorySpec]) -> None:
    """Check that the spec list has unique names and exactly one textual category."""
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate category names in config: {names}")
    n_textual = sum(s.is_textual for s in specs)
    if n_textual != 1:
        raise ValueError(f"exactly one textual category required, got {n_textual}")


@dataclass
class PaperRecord:
    """One bibliographic record: a unique id plus tokens grouped by category."""

    paper_id: str
    elements: dict[str, list[str]]

    def category(self, name: str) -> list[str]:
        return self.elements.get(name, [])


@dataclass
class EncodedPaper:
    """A paper with tokens replaced by vocabulary indices."""

    paper_id: str
    elements: dict[str, list[int]]

    def category(self, name: str) -> list[int]:
        return self.elements.get(name, [])


def normalize_text(raw: str) -> list[str]:
    """Tokenize free text for the textual category.

    Splits on whitespace, strips commas/periods stuck to token tails, drops
    any token still containing a character outside a-z/A-Z (numbers,
    brackets, hyphenated forms), and lowercases the survivors.
    """
    out = []
    for tok in raw.split():
        tok = tok.rstrip(".,")
        if tok and _ALPHA_RE.match(tok):
            out.append(tok.lower())
    return out


def normalize_author(name: str) -> str:
    """Whitespace-collapse and lowercase a full author name."""
    return " ".join(name.split()).lower()


def load_corpus(path: str | Path) -> list[PaperRecord]:
    """Read a JSONL corpus file into paper records.

    Each line must be an object with string fields ``id``, ``year``,
    ``title``, ``abstract`` and array-of-string fields ``authors`` and
    ``references``.  Title and abstract are normalized into the shared text
    category; author names are whitespace-collapsed and lowercased.

    Raises ``ValueError`` naming the offending line for malformed input or
    duplicated paper ids.
    """
    path = Path(path)
    records: list[PaperRecord] = []
    seen: dict[str, int] = {}
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            records.append(_parse_record(raw, path, lineno, seen))
    return records


def _parse_record(raw: object, path: Path, lineno: int,
                  seen: dict[str, int]) -> PaperRecord:
    if not isinstance(raw, dict):
        raise ValueError(f"{path}:{lineno}: expected a JSON object")
    for key, want in (("id", str), ("year", str), ("title", str),
                      ("abstract", str), ("authors", list), ("references", list)):
        if key not in raw:
            raise ValueError(f"{path}:{lineno}: missing field {key!r}")
        if not isinstance(raw[key], want):
            raise ValueError(f"{path}:{lineno}: field {key!r} must be "
                             f"{want.__name__}")
    for key in ("authors", "references"):
        if not all(isinstance(v, str) for v in raw[key]):
            raise ValueError(f"{path}:{lineno}: field {key!r} must contain strings")

    paper_id = raw["id"]
    if paper_id in seen:
        raise ValueError(f"{path}:{lineno}: duplicate paper_id {paper_id!r} "
                         f"(first seen on line {seen[paper_id]})")
    seen[paper_id] = lineno

    year = raw["year"].strip()
    elements = {
        AUTHOR: [a for a in (normalize_author(v) for v in raw["authors"]) if a],
        PAPER_ID: [paper_id],
        REFERENCE: [str(v) for v in raw["references"]],
        YEAR: [year] if year else [],
        TEXT: normalize_text(raw["title"]) + normalize_text(raw["abstract"]),
    }
    return PaperRecord(paper_id=paper_id, elements=elements)


def mine_phrases(token_streams: Sequence[Sequence[str]], threshold: float = 100.0,
                 discount: float = 5.0, passes: int = 2) -> list[list[str]]:
    """Merge frequently co-occurring adjacent tokens into phrase tokens.

    Per pass, counts unigrams and adjacent bigrams over all streams, then
    merges a pair (a, b) into ``a_b`` when

        (count(ab) - discount) * N / (count(a) * count(b)) > threshold

    with N the total token count of that pass.  Merges apply left to right
    without overlap; later passes run on the merged streams, so two passes
    can build phrases of up to four original tokens.
    """
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    if discount < 0:
        raise ValueError("discount must be >= 0")
    if passes < 1:
        raise ValueError("passes must be >= 1")

    streams = [list(s) for s in token_streams]
    for _ in range(passes):
        unigram: Counter[str] = Counter()
        bigram: Counter[tuple[str, str]] = Counter()
        total = 0
        for stream in streams:
            total += len(stream)
            unigram.update(stream)
            bigram.update(zip(stream, stream[1:]))
        if total == 0:
            break
        merged: list[list[str]] = []
        for stream in streams:
            out: list[str] = []
            i = 0
            while i < len(stream):
                if i + 1 < len(stream):
                    a, b = stream[i], stream[i + 1]
                    score = (bigram[(a, b)] - discount) * total / (
                        unigram[a] * unigram[b])
                    if score > threshold:
                        out.append(f"{a}_{b}")
                        i += 2
                        continue
                out.append(stream[i])
                i += 1
            merged.append(out)
        streams = merged
    return streams


def apply_phrases(papers: Sequence[PaperRecord], text_category: str = TEXT,
                  threshold: float = 100.0, discount: float = 5.0,
                  passes: int = 2) -> list[PaperRecord]:
    """Run phrase mining over all papers' text streams and return new records."""
    streams = [p.category(text_category) for p in papers]
    mined = mine_phrases(streams, threshold=threshold, discount=discount,
                         passes=passes)
    out = []
    for paper, stream in zip(papers, mined):
        elements = dict(paper.elements)
        elements[text_category] = stream
        out.append(PaperRecord(paper_id=paper.paper_id, elements=elements))
    return out


@dataclass
class CategoryVocab:
    """Token/index maps and raw frequencies for one category."""

    spec: CategorySpec
    tokens: list[str]
    index: dict[str, int]
    freqs: np.ndarray
    unk_index: int | None = None

    @property
    def size(self) -> int:
        return len(self.tokens)


class Vocabulary:
    """Per-category token/index bijections with occurrence frequencies.

    Category order follows the spec list used to build the vocabulary and is
    the canonical iteration order everywhere downstream (model parameter
    layout, serialization, pair generation).
    """

    def __init__(self, cats: dict[str, CategoryVocab]):
        self._cats = cats

    @property
    def specs(self) -> list[CategorySpec]:
        return [c.spec for c in self._cats.values()]

    @property
    def category_names(self) -> list[str]:
        return list(self._cats)

    @property
    def textual_category(self) -> str:
        for spec in self.specs:
            if spec.is_textual:
                return spec.name
        raise ValueError("vocabulary has no textual category")

    def __contains__(self, name: str) -> bool:
        return name in self._cats

    def cat(self, name: str) -> CategoryVocab:
        try:
            return self._cats[name]
        except KeyError:
            raise ValueError(f"unknown category {name!r}; have "
                             f"{self.category_names}") from None

    def size(self, name: str) -> int:
        return self.cat(name).size

    def token(self, name: str, idx: int) -> str:
        return self.cat(name).tokens[idx]

    def index_of(self, name: str, token: str) -> int | None:
        return self.cat(name).index.get(token)


def build_vocabulary(papers: Sequence[PaperRecord],
                     specs: Sequence[CategorySpec] = DEFAULT_CATEGORY_SPECS,
                     unknown_policy: str = "drop") -> Vocabulary:
    """Count element occurrences per category and keep tokens at or above
    each category's ``min_freq``.

    Indices are assigned by descending frequency, ties broken by token order,
    so construction is deterministic.  With ``unknown_policy="unk"`` each
    category gains a trailing ``<unk>`` entry that absorbs the dropped mass.
    """
    validate_specs(specs)
    if unknown_policy not in ("drop", "unk"):
        raise ValueError(f"unknown_policy must be 'drop' or 'unk', "
                         f"got {unknown_policy!r}")
    spec_names = {s.name for s in specs}
    for paper in papers:
        extra = set(paper.elements) - spec_names
        if extra:
            raise ValueError(f"paper {paper.paper_id!r} has categories not in "
                             f"config: {sorted(extra)}")

    cats: dict[str, CategoryVocab] = {}
    for spec in specs:
        counts: Counter[str] = Counter()
        for paper in papers:
            counts.update(paper.category(spec.name))
        kept = sorted((tok for tok, c in counts.items() if c >= spec.min_freq),
                      key=lambda tok: (-counts[tok], tok))
        freqs = [counts[tok] for tok in kept]
        unk_index = None
        if unknown_policy == "unk":
            dropped = sum(c for tok, c in counts.items() if c < spec.min_freq)
            unk_index = len(kept)
            kept = kept + [UNK_TOKEN]
            freqs = freqs + [dropped]
        cats[spec.name] = CategoryVocab(
            spec=spec,
            tokens=kept,
            index={tok: i for i, tok in enumerate(kept)},
            freqs=np.asarray(freqs, dtype=np.int64),
            unk_index=unk_index,
        )
    return Vocabulary(cats)


def split_dataset(papers: Sequence[PaperRecord], n_test: int, seed: int = 0,
                  chronological: bool = False,
                  ) -> tuple[list[PaperRecord], list[PaperRecord]]:
    """Split papers into (train, test) with ``n_test`` held-out papers.

    Default is a seeded uniform shuffle; ``chronological=True`` instead holds
    out the latest papers by year (ties by paper id).
    """
    if not 0 <= n_test <= len(papers):
        raise ValueError(f"n_test={n_test} outside [0, {len(papers)}]")
    if chronological:
        order = sorted(range(len(papers)),
                       key=lambda i: (papers[i].category(YEAR), papers[i].paper_id))
        cut = len(papers) - n_test
        train = [papers[i] for i in order[:cut]]
        test = [papers[i] for i in order[cut:]]
        return train, test
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(papers))
    test = [papers[i] for i in perm[:n_test]]
    train = [papers[i] for i in perm[n_test:]]
    return train, test


def encode_paper(vocab: Vocabulary, paper: PaperRecord,
                 unknown: str = "drop") -> EncodedPaper:
    """Map a paper's tokens to vocabulary indices.

    Out-of-vocabulary tokens are dropped (default) or mapped to the
    category's unk index when ``unknown="unk"`` and the vocabulary was built
    with one.  Order within each category is preserved.
    """
    if unknown not in ("drop", "unk"):
        raise ValueError(f"unknown must be 'drop' or 'unk', got {unknown!r}")
    elements: dict[str, list[int]] = {}
    for name in vocab.category_names:
        cv = vocab.cat(name)
        out: list[int] = []
        for tok in paper.category(name):
            idx = cv.index.get(tok)
            if idx is not None:
                out.append(idx)
            elif unknown == "unk" and cv.unk_index is not None:
                out.append(cv.unk_index)
        elements[name] = out
    extra = set(paper.elements) - set(vocab.category_names)
    if extra:
        raise ValueError(f"paper {paper.paper_id!r} has categories unknown to "
                         f"the vocabulary: {sorted(extra)}")
    return EncodedPaper(paper_id=paper.paper_id, elements=elements)


def encode_papers(vocab: Vocabulary, papers: Sequence[PaperRecord],
                  unknown: str = "drop") -> list[EncodedPaper]:
    return [encode_paper(vocab, p, unknown=unknown) for p in papers]


def decode_paper(vocab: Vocabulary, paper: EncodedPaper) -> dict[str, list[str]]:
    """Inverse of :func:`encode_paper` on the retained indices."""
    return {name: [vocab.token(name, i) for i in idxs]
            for name, idxs in paper.elements.items()}


# ---------------------------------------------------------------------------
# Ingest configuration and on-disk dataset formats
# ---------------------------------------------------------------------------

@dataclass
class PhraseConfig:
    enabled: bool = True
    threshold: float = 100.0
    discount: float = 5.0
    passes: int = 2


@dataclass
class IngestConfig:
    specs: list[CategorySpec] = field(
        default_factory=lambda: list(DEFAULT_CATEGORY_SPECS))
    phrases: PhraseConfig = field(default_factory=PhraseConfig)
    unknown_policy: str = "drop"


def load_ingest_config(path: str | Path) -> IngestConfig:
    """Parse a category/threshold configuration file.

    Accepts either a bare JSON array of category entries
    (``{"name", "kind", "min_freq"}``) or an object with a ``categories``
    array plus optional ``phrases`` and ``unknown_policy`` keys.  Defaults
    reproduce the standard five-category setup.
    """
    with Path(path).open(encoding="utf-8") as fh:
        raw = json.load(fh)
    if isinstance(raw, list):
        raw = {"categories": raw}
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a JSON array or object")

    cfg = IngestConfig()
    if "categories" in raw:
        cfg.specs = [CategorySpec(name=e["name"], kind=e["kind"],
                                  min_freq=int(e.get("min_freq", 1)))
                     for e in raw["categories"]]
        validate_specs(cfg.specs)
    if "phrases" in raw:
        p = raw["phrases"]
        cfg.phrases = PhraseConfig(
            enabled=bool(p.get("enabled", True)),
            threshold=float(p.get("threshold", 100.0)),
            discount=float(p.get("discount", 5.0)),
            passes=int(p.get("passes", 2)),
        )
    if "unknown_policy" in raw:
        cfg.unknown_policy = raw["unknown_policy"]
        if cfg.unknown_policy not in ("drop", "unk"):
            raise ValueError(f"{path}: unknown_policy must be 'drop' or 'unk'")
    return cfg


def save_vocabulary(vocab: Vocabulary, path: str | Path) -> None:
    doc = {
        "version": 1,
        "categories": [
            {
                "name": cv.spec.name,
                "kind": cv.spec.kind,
                "min_freq": cv.spec.min_freq,
                "tokens": cv.tokens,
                "freqs": cv.freqs.tolist(),
                "unk_index": cv.unk_index,
            }
            for cv in (vocab.cat(n) for n in vocab.category_names)
        ],
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False)
        fh.write("\n")


def load_vocabulary(path: str | Path) -> Vocabulary:
    with Path(path).open(encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("version") != 1:
        raise ValueError(f"{path}: unsupported vocabulary version "
                         f"{doc.get('version')!r}")
    cats: dict[str, CategoryVocab] = {}
    for entry in doc["categories"]:
        spec = CategorySpec(name=entry["name"], kind=entry["kind"],
                            min_freq=entry["min_freq"])
        tokens = list(entry["tokens"])
        cats[spec.name] = CategoryVocab(
            spec=spec,
            tokens=tokens,
            index={tok: i for i, tok in enumerate(tokens)},
            freqs=np.asarray(entry["freqs"], dtype=np.int64),
            unk_index=entry.get("unk_index"),
        )
    vocab = Vocabulary(cats)
    validate_specs(vocab.specs)
    return vocab


def save_encoded_papers(papers: Iterable[EncodedPaper], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for paper in papers:
            fh.write(json.dumps({"id": paper.paper_id, "elements": paper.elements},
                                ensure_ascii=False))
            fh.write("\n")


def load_encoded_papers(path: str | Path) -> list[EncodedPaper]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                out.append(EncodedPaper(
                    paper_id=doc["id"],
                    elements={k: [int(i) for i in v]
                              for k, v in doc["elements"].items()}))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad encoded record: {exc}") \
                    from exc
    return out
