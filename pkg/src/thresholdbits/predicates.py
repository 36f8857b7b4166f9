"""Threshold predicates and packed incidence bit-vectors.

Each scaled row becomes a vector of s = n bits, bit j set iff the predicate
for column j fires. Bits are packed little-endian into uint64 words (bit j
lives in word j // 64 at position j % 64) and Hamming weights are computed
with a hardware popcount.

Other predicate families plug in by providing a ``fire(values) -> bool array``
callable and passing it to :func:`encode_matrix` via ``PredicateConfig``'s
``custom`` field.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DataError
from .ingest import Dataset

KINDS = ("t_excess", "abs_t_excess", "ref_excess")

if hasattr(np, "bitwise_count"):
    def popcount(words: np.ndarray) -> np.ndarray:
        return np.bitwise_count(words)
else:  # numpy < 2.0
    _BYTE_COUNTS = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)

    def popcount(words: np.ndarray) -> np.ndarray:
        words = np.ascontiguousarray(words, dtype=np.uint64)
        counts = _BYTE_COUNTS[words.view(np.uint8)]
        return counts.reshape(*words.shape, 8).sum(axis=-1, dtype=np.uint8)


def n_words(s: int) -> int:
    return (s + 63) // 64


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack a (..., s) boolean array into (..., ceil(s/64)) uint64 words."""
    bits = np.asarray(bits, dtype=bool)
    s = bits.shape[-1]
    packed = np.packbits(bits, axis=-1, bitorder="little")
    pad = n_words(s) * 8 - packed.shape[-1]
    if pad:
        packed = np.concatenate([packed, np.zeros(packed.shape[:-1] + (pad,), np.uint8)], axis=-1)
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False)


def unpack_bits(words: np.ndarray, s: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype="<u8")
    raw = words.view(np.uint8)
    return np.unpackbits(raw, axis=-1, count=s, bitorder="little").astype(bool)


def tail_mask(s: int) -> np.ndarray:
    """Word mask with exactly the s valid bit positions set."""
    return pack_bits(np.ones(s, dtype=bool))


@dataclass(frozen=True)
class PredicateConfig:
    kind: str = "abs_t_excess"
    t: float = 0.5
    lo: tuple[float, ...] | None = None
    hi: tuple[float, ...] | None = None
    custom: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.custom is not None:
            return
        if self.kind not in KINDS:
            raise ConfigError(f"unknown predicate kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "ref_excess":
            if self.lo is None or self.hi is None or len(self.lo) != len(self.hi):
                raise ConfigError("ref_excess needs lo and hi bounds of equal length")
            lo, hi = np.asarray(self.lo, float), np.asarray(self.hi, float)
            if (lo > hi).any():
                raise ConfigError("ref_excess bounds need lo <= hi")
            object.__setattr__(self, "lo", tuple(map(float, lo)))
            object.__setattr__(self, "hi", tuple(map(float, hi)))
        elif not (self.t > 0):
            raise ConfigError(f"threshold t must be > 0, got {self.t}")

    def fire(self, values: np.ndarray) -> np.ndarray:
        """Boolean predicate outcomes for an (..., n) array of scaled values."""
        values = np.asarray(values, dtype=np.float64)
        if self.custom is not None:
            return np.asarray(self.custom(values), dtype=bool)
        if self.kind == "t_excess":
            return values - self.t > 0
        if self.kind == "abs_t_excess":
            return np.abs(values) - self.t > 0
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        if values.shape[-1] != len(lo):
            raise DataError(f"row has {values.shape[-1]} values, reference range has {len(lo)}")
        return (values < lo) | (values > hi)

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "ref_excess":
            out.update(lo=list(self.lo), hi=list(self.hi))
        else:
            out["t"] = self.t
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "PredicateConfig":
        if d["kind"] == "ref_excess":
            return cls("ref_excess", lo=tuple(d["lo"]), hi=tuple(d["hi"]))
        return cls(d["kind"], t=float(d["t"]))


class IncidenceVector:
    """A packed 0/1 vector of predicate outcomes with cached Hamming weight."""

    __slots__ = ("words", "size", "weight")

    def __init__(self, words: np.ndarray, size: int, weight: int | None = None):
        words = np.asarray(words, dtype=np.uint64)
        if words.shape != (n_words(size),):
            raise DataError(f"{words.shape[0]} words cannot hold exactly {size} bits")
        self.words = words
        self.size = size
        self.weight = int(popcount(words).sum()) if weight is None else int(weight)

    @classmethod
    def from_bits(cls, bits: Sequence[int] | np.ndarray) -> "IncidenceVector":
        bits = np.asarray(bits, dtype=bool)
        return cls(pack_bits(bits), len(bits))

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.size)

    def indices(self) -> list[int]:
        return np.flatnonzero(self.to_bits()).tolist()

    def complement(self) -> "IncidenceVector":
        return IncidenceVector(~self.words & tail_mask(self.size), self.size, self.size - self.weight)

    def __and__(self, other: "IncidenceVector") -> "IncidenceVector":
        _check_len(self, other)
        return IncidenceVector(self.words & other.words, self.size)

    def __eq__(self, other):
        if not isinstance(other, IncidenceVector):
            return NotImplemented
        return self.size == other.size and np.array_equal(self.words, other.words)

    def __hash__(self):
        return hash((self.size, self.words.tobytes()))

    def __len__(self):
        return self.size

    def __repr__(self):
        body = "".join("1" if b else "0" for b in self.to_bits()[:64])
        return f"IncidenceVector({body}{'...' if self.size > 64 else ''}, H={self.weight})"

    def to_hex(self) -> str:
        return self.words.astype("<u8").tobytes().hex()

    @classmethod
    def from_hex(cls, text: str, size: int) -> "IncidenceVector":
        words = np.frombuffer(bytes.fromhex(text), dtype="<u8").astype(np.uint64)
        if (words & ~tail_mask(size)).any():
            raise DataError("hex row has bits set beyond its declared length")
        return cls(words, size)


def _check_len(a: IncidenceVector, b: IncidenceVector) -> None:
    if a.size != b.size:
        raise DataError(f"incidence vectors differ in length ({a.size} vs {b.size})")


@dataclass(frozen=True, eq=False)
class BitMatrix:
    """Row-stacked incidence vectors: ``words`` is (rows, ceil(size/64)) uint64."""

    words: np.ndarray
    size: int
    weights: np.ndarray

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "BitMatrix":
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim != 2:
            raise DataError("expected a 2-d bit array")
        words = pack_bits(bits)
        return cls(words, bits.shape[1], bits.sum(axis=1, dtype=np.int64))

    @classmethod
    def from_vectors(cls, vectors: Sequence[IncidenceVector], size: int | None = None) -> "BitMatrix":
        if not vectors:
            if size is None:
                raise DataError("size required for an empty BitMatrix")
            return cls(np.zeros((0, n_words(size)), np.uint64), size, np.zeros(0, np.int64))
        size = vectors[0].size
        for v in vectors:
            if v.size != size:
                raise DataError("incidence vectors differ in length")
        words = np.stack([v.words for v in vectors])
        return cls(words, size, np.array([v.weight for v in vectors], dtype=np.int64))

    def __len__(self):
        return self.words.shape[0]

    def row(self, i: int) -> IncidenceVector:
        return IncidenceVector(self.words[i].copy(), self.size, self.weights[i])

    def rows(self) -> list[IncidenceVector]:
        return [self.row(i) for i in range(len(self))]

    def take(self, idx) -> "BitMatrix":
        idx = np.asarray(idx, dtype=np.intp)
        return BitMatrix(self.words[idx], self.size, self.weights[idx])

    def to_bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.size)


def encode(row: Sequence[float], cfg: PredicateConfig) -> IncidenceVector:
    row = np.asarray(row, dtype=np.float64)
    if not np.isfinite(row).all():
        raise DataError("row contains non-finite values")
    return IncidenceVector.from_bits(cfg.fire(row))


def encode_matrix(values: np.ndarray, cfg: PredicateConfig) -> BitMatrix:
    values = np.asarray(values, dtype=np.float64)
    return BitMatrix.from_bits(cfg.fire(values))


def encode_dataset(d: Dataset, cfg: PredicateConfig) -> list[IncidenceVector]:
    return encode_matrix(d.values, cfg).rows()
