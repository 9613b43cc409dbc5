"""Prefix-free block codes ``A^k -> {0,1}*`` and canonical Huffman construction.

Bit words are plain ``str`` objects over ``"01"``.
"""
from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigurationError, CorruptionError, InputError
from .stats import FreqTable, MAX_TABLE_SIZE
from .validation import all_words, as_word, check_base, check_symbols, word_str

MAX_BLOCK_LEN = 12


@dataclass(frozen=True, eq=False)
class BlockCode:
    """One-to-one map from every block of ``A^k`` to a prefix-free set of bit words."""

    base: int
    k: int
    codewords: dict[tuple[int, ...], str]
    _decode: dict[str, tuple[int, ...]] = field(init=False, repr=False)
    _prefixes: frozenset[str] = field(init=False, repr=False)

    def __post_init__(self):
        check_base(self.base)
        if not 1 <= self.k:
            raise InputError("block length must be at least 1")
        words = {as_word(b): c for b, c in self.codewords.items()}
        expected = set(all_words(self.base, self.k))
        if set(words) != expected:
            missing = sorted(expected - set(words))[:3]
            raise ConfigurationError(f"code must cover all of A^{self.k}; missing e.g. {missing}")
        for b, c in words.items():
            if not c or set(c) - {"0", "1"}:
                raise ConfigurationError(f"codeword for block {b} must be a non-empty bit string, got {c!r}")
        inverse = {c: b for b, c in words.items()}
        if len(inverse) != len(words):
            raise ConfigurationError("code is not one-to-one")
        prefixes = {c[:i] for c in inverse for i in range(len(c))}
        clash = prefixes & inverse.keys()
        if clash:
            raise ConfigurationError(f"code is not prefix-free: {sorted(clash)[0]!r} prefixes another codeword")
        object.__setattr__(self, "codewords", words)
        object.__setattr__(self, "_decode", inverse)
        object.__setattr__(self, "_prefixes", frozenset(prefixes))

    @property
    def max_codeword_len(self) -> int:
        return max(len(c) for c in self.codewords.values())

    def lengths(self) -> dict[tuple[int, ...], int]:
        return {b: len(c) for b, c in self.codewords.items()}

    def kraft_sum(self) -> Fraction:
        return sum((Fraction(1, 2 ** len(c)) for c in self.codewords.values()), Fraction(0))

    def expected_length(self, weights) -> float:
        """Mean codeword length under block weights (mapping or index-ordered array)."""
        if isinstance(weights, dict):
            w = {as_word(b): float(v) for b, v in weights.items()}
        else:
            w = dict(zip(all_words(self.base, self.k), np.asarray(weights, dtype=float).tolist()))
        total = sum(w.values())
        return sum(w.get(b, 0.0) * len(c) for b, c in self.codewords.items()) / total

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "base": self.base,
            "codewords": {word_str(b): self.codewords[b] for b in all_words(self.base, self.k)},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "BlockCode":
        try:
            return cls(int(data["base"]), int(data["k"]), {as_word(b): c for b, c in data["codewords"].items()})
        except KeyError as exc:
            raise InputError(f"code description is missing field {exc.args[0]!r}") from None


def _aligned_weights(counts, k: int, base: int) -> np.ndarray:
    if isinstance(counts, FreqTable):
        if counts.max_len != k:
            raise InputError(f"frequency table has block length {counts.max_len}, expected {k}")
        return counts.aligned.copy()
    if isinstance(counts, dict):
        by_word = {as_word(b): v for b, v in counts.items()}
        return np.array([by_word.get(b, 0) for b in all_words(base, k)], dtype=np.float64)
    w = np.asarray(counts, dtype=np.float64)
    if w.shape != (base**k,):
        raise InputError(f"expected {base**k} block weights, got shape {w.shape}")
    return w


def huffman_lengths(weights) -> list[int]:
    """Huffman code lengths with deterministic tie-breaking.

    The queue is ordered by (weight, smallest leaf index in the subtree); leaf
    index order is the lexicographic order of blocks.
    """
    weights = list(weights)
    if any(w < 0 for w in weights):
        raise InputError("block weights must be non-negative")
    n = len(weights)
    if n == 1:
        return [1]
    depth = [0] * n
    heap = [(w, i, (i,)) for i, w in enumerate(weights)]
    heapq.heapify(heap)
    while len(heap) > 1:
        w1, m1, leaves1 = heapq.heappop(heap)
        w2, m2, leaves2 = heapq.heappop(heap)
        for leaf in leaves1 + leaves2:
            depth[leaf] += 1
        heapq.heappush(heap, (w1 + w2, min(m1, m2), leaves1 + leaves2))
    return depth


def canonical_codewords(lengths: list[int]) -> list[str]:
    """Canonical code: shorter codewords first, index order within a length."""
    order = sorted(range(len(lengths)), key=lambda i: (lengths[i], i))
    out = [""] * len(lengths)
    code = 0
    prev = lengths[order[0]]
    for i in order:
        code <<= lengths[i] - prev
        prev = lengths[i]
        out[i] = format(code, f"0{prev}b")
        code += 1
    return out


def build_huffman(counts, k: int, base: int = 2) -> BlockCode:
    """Canonical Huffman code over all of ``A^k`` (zero-count blocks included)."""
    check_base(base)
    if not 1 <= k <= MAX_BLOCK_LEN or base**k > MAX_TABLE_SIZE:
        raise InputError(f"block length {k} outside the supported range for base {base}")
    weights = _aligned_weights(counts, k, base)
    lengths = huffman_lengths(weights.tolist())
    words = canonical_codewords(lengths)
    return BlockCode(base, k, dict(zip(all_words(base, k), words)))


def encode_blocks(code: BlockCode, w) -> str:
    w = as_word(w) if not isinstance(w, np.ndarray) else tuple(w.tolist())
    k = code.k
    if len(w) % k:
        raise InputError(f"word length {len(w)} is not a multiple of block length {k}")
    cw = code.codewords
    return "".join(cw[w[i : i + k]] for i in range(0, len(w), k))


def decode_blocks(code: BlockCode, bits: str) -> tuple[tuple[int, ...], str]:
    """Greedy prefix-free parse; returns decoded symbols and the unconsumed tail."""
    inverse = code._decode
    prefixes = code._prefixes
    out: list[int] = []
    cur = ""
    for pos, bit in enumerate(bits):
        cur += bit
        block = inverse.get(cur)
        if block is not None:
            out.extend(block)
            cur = ""
        elif cur not in prefixes:
            raise CorruptionError(f"bits {cur!r} ending at offset {pos} prefix no codeword")
    return tuple(out), cur


class HuffmanBlockCoder(TransformerMixin, BaseEstimator):
    """Fit a canonical Huffman block code on a training stream, then encode/decode."""

    def __init__(self, k: int = 4, base: int = 2):
        self.k = k
        self.base = base

    def fit(self, X, y=None):
        from .stats import freq_table

        self.code_ = build_huffman(freq_table(X, None, self.k, self.base), self.k, self.base)
        return self

    def transform(self, X) -> str:
        check_is_fitted(self, "code_")
        return encode_blocks(self.code_, check_symbols(X, self.base))

    def inverse_transform(self, bits: str) -> np.ndarray:
        check_is_fitted(self, "code_")
        word, rest = decode_blocks(self.code_, bits)
        if rest:
            raise CorruptionError(f"{len(rest)} trailing bits do not form a complete codeword")
        return np.array(word, dtype=np.int64)
