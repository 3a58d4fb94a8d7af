"""Binary model persistence.

Layout (all integers little-endian):

    magic      4 bytes  b"BIBV"
    version    u32      currently 1
    dim        u32
    n_cats     u32
    per category:
        name       u32 length + UTF-8 bytes
        kind       u8   0 = textual, 1 = non-textual
        min_freq   u32
        size       u32
        unk_index  i64  (-1 when absent)
        tokens     size * (u32 length + UTF-8 bytes)
        freqs      size * u64
    per category:
        target vectors   size * dim * f32
        if non-textual:
            context vectors  size * dim * f32
            biases           size * f32
    checksum   u32      CRC-32 of everything above

Parameter blocks are raw little-endian float32, so a save/load round trip
reproduces every parameter bit for bit.  Noise distributions are recomputed
from the stored frequencies on load (the computation is deterministic).
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .corpus import CategorySpec, CategoryVocab, Vocabulary, NON_TEXTUAL, TEXTUAL
from .model import EmbeddingModel, noise_distribution

MAGIC = b"BIBV"
VERSION = 1


class ModelFormatError(ValueError):
    """File is not a recognizable model file."""


class UnsupportedVersionError(ModelFormatError):
    """File declares a format version this reader does not understand."""


class ChecksumError(ModelFormatError):
    """File bytes do not match the trailing checksum (truncation/corruption)."""


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def save_model(model: EmbeddingModel, vocab: Vocabulary,
               path: str | Path) -> None:
    """Write model and vocabulary to ``path``; the write is atomic
    (temp file + rename)."""
    parts: list[bytes] = [MAGIC, struct.pack("<III", VERSION, model.dim,
                                             len(vocab.category_names))]
    for name in vocab.category_names:
        cv = vocab.cat(name)
        kind = 0 if cv.spec.is_textual else 1
        unk = -1 if cv.unk_index is None else cv.unk_index
        parts.append(_pack_str(name))
        parts.append(struct.pack("<BIIq", kind, cv.spec.min_freq, cv.size, unk))
        for tok in cv.tokens:
            parts.append(_pack_str(tok))
        parts.append(cv.freqs.astype("<u8").tobytes())
    for name in vocab.category_names:
        cv = vocab.cat(name)
        vec = model.target[name]
        if vec.shape != (cv.size, model.dim):
            raise ValueError(f"target block for {name!r} has shape "
                             f"{vec.shape}, vocabulary says ({cv.size}, "
                             f"{model.dim})")
        parts.append(np.ascontiguousarray(vec, dtype="<f4").tobytes())
        if not cv.spec.is_textual:
            parts.append(np.ascontiguousarray(model.context[name],
                                              dtype="<f4").tobytes())
            parts.append(np.ascontiguousarray(model.bias[name],
                                              dtype="<f4").tobytes())
    body = b"".join(parts)
    blob = body + struct.pack("<I", zlib.crc32(body))

    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(blob)
    tmp.replace(path)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFormatError("model file ends prematurely")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack("<I")
        return self.take(n).decode("utf-8")


def load_model(path: str | Path) -> tuple[EmbeddingModel, Vocabulary]:
    """Read a model file back into an (EmbeddingModel, Vocabulary) pair.

    Validates the magic bytes, format version, and trailing CRC-32 before
    touching any content.
    """
    data = Path(path).read_bytes()
    if len(data) < 8 or data[:4] != MAGIC:
        raise ModelFormatError(f"{path}: not a model file (bad magic)")
    body, (stored,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != stored:
        raise ChecksumError(f"{path}: checksum mismatch; file is truncated "
                            f"or corrupted")

    r = _Reader(body)
    r.take(4)  # magic
    version, dim, n_cats = r.unpack("<III")
    if version != VERSION:
        raise UnsupportedVersionError(f"{path}: unsupported format version "
                                      f"{version}")

    cats: dict[str, CategoryVocab] = {}
    for _ in range(n_cats):
        name = r.string()
        kind_code, min_freq, size, unk = r.unpack("<BIIq")
        kind = TEXTUAL if kind_code == 0 else NON_TEXTUAL
        tokens = [r.string() for _ in range(size)]
        freqs = np.frombuffer(r.take(8 * size), dtype="<u8").astype(np.int64)
        cats[name] = CategoryVocab(
            spec=CategorySpec(name=name, kind=kind, min_freq=min_freq),
            tokens=tokens,
            index={tok: i for i, tok in enumerate(tokens)},
            freqs=freqs,
            unk_index=None if unk < 0 else int(unk),
        )
    vocab = Vocabulary(cats)

    target: dict[str, np.ndarray] = {}
    context: dict[str, np.ndarray] = {}
    bias: dict[str, np.ndarray] = {}
    noise: dict[str, np.ndarray] = {}
    for name in vocab.category_names:
        cv = vocab.cat(name)
        target[name] = np.frombuffer(
            r.take(4 * cv.size * dim), dtype="<f4").reshape(cv.size, dim).copy()
        if not cv.spec.is_textual:
            context[name] = np.frombuffer(
                r.take(4 * cv.size * dim),
                dtype="<f4").reshape(cv.size, dim).copy()
            bias[name] = np.frombuffer(r.take(4 * cv.size),
                                       dtype="<f4").copy()
            noise[name] = noise_distribution(cv.freqs) if cv.size else \
                np.zeros(0, dtype=np.float64)
    if r.pos != len(body):
        raise ModelFormatError(f"{path}: {len(body) - r.pos} trailing bytes")

    model = EmbeddingModel(dim=dim, specs=list(vocab.specs), target=target,
                           context=context, bias=bias, noise=noise)
    return model, vocab
