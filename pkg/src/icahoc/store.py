"""Embedding matrices: text loaders, frequency tables, normalization and a
bit-exact binary cache."""

import json
import logging
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)

CACHE_MAGIC = b"ICAHEMB\x00"
ARRAYS_MAGIC = b"ICAHARR\x00"
CACHE_VERSION = 2


@dataclass(frozen=True)
class EmbeddingMatrix:
    vectors: np.ndarray
    vocab: tuple
    freq: dict = field(default_factory=dict)

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.float64, order="C")
        if vectors.ndim != 2:
            raise DataError(f"vectors must be 2-D, got shape {vectors.shape}")
        vocab = tuple(self.vocab)
        if len(vocab) != vectors.shape[0]:
            raise DataError(
                f"vocab length {len(vocab)} != row count {vectors.shape[0]}")
        seen = set()
        for w in vocab:
            if w in seen:
                raise DataError(f"duplicate word: {w}")
            seen.add(w)
        if not np.all(np.isfinite(vectors)):
            bad = int(np.argwhere(~np.isfinite(vectors))[0, 0])
            raise DataError(f"non-finite value in row for word: {vocab[bad]}")
        freq = {w: int(self.freq.get(w, 0)) for w in vocab}
        if any(c < 0 for c in freq.values()):
            raise DataError("negative count")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)
        object.__setattr__(self, "vocab", vocab)
        object.__setattr__(self, "freq", freq)

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def d(self):
        return self.vectors.shape[1]

    def counts(self):
        """Frequencies as an int64 array aligned with the rows."""
        return np.array([self.freq[w] for w in self.vocab], dtype=np.int64)

    def index(self):
        return {w: i for i, w in enumerate(self.vocab)}


class Frequencies(dict):
    """word -> count mapping that remembers how many lines were overwritten."""

    def __init__(self, *args, duplicates=0, **kwargs):
        super().__init__(*args, **kwargs)
        self.duplicates = duplicates


def load_word2vec_text(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise DataError(f"bad header line: {header.rstrip()!r}")
        try:
            n, d = int(parts[0]), int(parts[1])
        except ValueError:
            raise DataError(f"bad header line: {header.rstrip()!r}") from None
        vocab = []
        rows = []
        seen = set()
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\r\n").rstrip(" ")
            if not line:
                continue
            fields = line.split(" ")
            word, values = fields[0], fields[1:]
            if len(values) != d:
                raise DataError(
                    f"line {lineno}: expected {d} values for {word!r}, got {len(values)}")
            if word in seen:
                raise DataError(f"duplicate word: {word}")
            seen.add(word)
            try:
                row = [float(v) for v in values]
            except ValueError as e:
                raise DataError(f"line {lineno}: {e}") from None
            if not all(np.isfinite(row)):
                raise DataError(f"line {lineno}: non-finite value for {word!r}")
            vocab.append(word)
            rows.append(row)
    if len(rows) != n:
        raise DataError(f"row count mismatch: header says {n}, found {len(rows)}")
    vectors = np.array(rows, dtype=np.float64).reshape(n, d)
    return EmbeddingMatrix(vectors, tuple(vocab))


def save_word2vec_text(m, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{m.n} {m.d}\n")
        for w, row in zip(m.vocab, m.vectors):
            fh.write(w + " " + " ".join(repr(float(v)) for v in row) + "\n")


def load_frequencies(path):
    out = Frequencies()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            try:
                word, raw = line.split("\t")
            except ValueError:
                raise DataError(f"line {lineno}: expected 'word<TAB>count'") from None
            try:
                count = int(raw.strip())
            except ValueError:
                raise DataError(f"line {lineno}: non-integer count {raw!r}") from None
            if count < 0:
                raise DataError(f"line {lineno}: negative count for {word!r}")
            if word in out:
                out.duplicates += 1
            out[word] = count
    if out.duplicates:
        warnings.warn(f"{out.duplicates} duplicate frequency lines overwritten")
    return out


def with_frequencies(m, freq, strict=False):
    missing = [w for w in m.vocab if w not in freq]
    if missing:
        if strict:
            raise DataError(f"{len(missing)} words lack a frequency, e.g. {missing[0]!r}")
        warnings.warn(f"{len(missing)} words lack a frequency; defaulting to 0")
    return EmbeddingMatrix(m.vectors, m.vocab, {w: freq.get(w, 0) for w in m.vocab})


def normalize_rows(m):
    norms = np.linalg.norm(m.vectors, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise DataError(f"zero-norm row for word: {m.vocab[zero[0]]}")
    return EmbeddingMatrix(m.vectors / norms[:, None], m.vocab, m.freq)


def row_normalize(x):
    """Rescale rows of a plain array to unit norm; zero rows stay zero."""
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return np.divide(x, norms, out=np.zeros_like(x), where=norms > 0)


# --- binary containers -------------------------------------------------------

def _read_exact(fh, size):
    buf = fh.read(size)
    if len(buf) != size:
        raise DataError("unexpected end of cache")
    return buf


def _check_header(fh, magic):
    got = fh.read(len(magic))
    if len(got) < len(magic):
        raise DataError("unexpected end of cache")
    if got != magic:
        raise DataError(f"bad magic number {got!r}; not a cache file of this kind")
    version = _read_exact(fh, 1)[0]
    if version != CACHE_VERSION:
        raise DataError(
            f"cache version {version} is not supported (reader version {CACHE_VERSION})")


def save_cache(m, path):
    with open(path, "wb") as fh:
        fh.write(CACHE_MAGIC)
        fh.write(bytes([CACHE_VERSION]))
        fh.write(struct.pack("<QQ", m.n, m.d))
        fh.write(m.vectors.astype("<f8", copy=False).tobytes(order="C"))
        for w in m.vocab:
            b = w.encode("utf-8")
            fh.write(struct.pack("<I", len(b)))
            fh.write(b)
        fh.write(m.counts().astype("<i8").tobytes())


def load_cache(path):
    with open(path, "rb") as fh:
        _check_header(fh, CACHE_MAGIC)
        n, d = struct.unpack("<QQ", _read_exact(fh, 16))
        vectors = np.frombuffer(_read_exact(fh, 8 * n * d), dtype="<f8").reshape(n, d)
        vocab = []
        for _ in range(n):
            (size,) = struct.unpack("<I", _read_exact(fh, 4))
            vocab.append(_read_exact(fh, size).decode("utf-8"))
        counts = np.frombuffer(_read_exact(fh, 8 * n), dtype="<i8")
        if fh.read(1):
            raise DataError("trailing bytes after cache payload")
    return EmbeddingMatrix(vectors.astype(np.float64), tuple(vocab),
                           dict(zip(vocab, counts.tolist())))


def save_arrays(path, arrays, meta=None):
    """Write named numeric arrays plus a JSON metadata blob. Output bytes
    depend only on the inputs (no timestamps), unlike np.savez."""
    meta_b = json.dumps(meta or {}, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(ARRAYS_MAGIC)
        fh.write(bytes([CACHE_VERSION]))
        fh.write(struct.pack("<I", len(meta_b)))
        fh.write(meta_b)
        fh.write(struct.pack("<I", len(arrays)))
        for name in sorted(arrays):
            a = np.ascontiguousarray(arrays[name])
            if a.dtype.kind == "f":
                a, code = a.astype("<f8"), b"f"
            elif a.dtype.kind in "iub":
                a, code = a.astype("<i8"), b"i"
            else:
                raise TypeError(f"unsupported dtype {a.dtype} for {name!r}")
            nb = name.encode("utf-8")
            fh.write(struct.pack("<I", len(nb)))
            fh.write(nb)
            fh.write(code)
            fh.write(struct.pack("<I", a.ndim))
            fh.write(struct.pack(f"<{a.ndim}Q", *a.shape))
            fh.write(a.tobytes(order="C"))


def load_arrays(path):
    with open(path, "rb") as fh:
        _check_header(fh, ARRAYS_MAGIC)
        (size,) = struct.unpack("<I", _read_exact(fh, 4))
        meta = json.loads(_read_exact(fh, size).decode("utf-8"))
        (count,) = struct.unpack("<I", _read_exact(fh, 4))
        arrays = {}
        for _ in range(count):
            (size,) = struct.unpack("<I", _read_exact(fh, 4))
            name = _read_exact(fh, size).decode("utf-8")
            code = _read_exact(fh, 1)
            (ndim,) = struct.unpack("<I", _read_exact(fh, 4))
            shape = struct.unpack(f"<{ndim}Q", _read_exact(fh, 8 * ndim))
            dtype = "<f8" if code == b"f" else "<i8"
            nbytes = 8 * int(np.prod(shape, dtype=np.int64))
            arrays[name] = np.frombuffer(_read_exact(fh, nbytes), dtype=dtype).reshape(shape).copy()
    return arrays, meta
