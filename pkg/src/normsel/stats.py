"""Occurrence counts, frequency tables, and finite-n normality statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import InputError
from .validation import all_words, as_word, check_base, check_symbols, word_index

MAX_TABLE_SIZE = 2**12


def occ(w, u) -> int:
    """Number of (possibly overlapping) occurrences of ``u`` in ``w``."""
    w, u = as_word(w), as_word(u)
    if not u:
        raise InputError("occ: the searched word must be non-empty")
    m = len(u)
    return sum(1 for i in range(len(w) - m + 1) if w[i : i + m] == u)


def window_codes(x: np.ndarray, length: int, base: int) -> np.ndarray:
    """Index (big-endian, base ``base``) of every sliding window of ``x`` of the given length."""
    n = x.size - length + 1
    if n <= 0:
        return np.zeros(0, dtype=np.int64)
    codes = np.zeros(n, dtype=np.int64)
    for j in range(length):
        codes = codes * base + x[j : j + n]
    return codes


@dataclass(frozen=True, eq=False)
class FreqTable:
    """Sliding counts for every word length ``1..max_len`` plus aligned ``max_len``-block counts.

    ``sliding[l - 1][i]`` counts the length-``l`` word with index ``i``;
    ``aligned[i]`` counts the length-``max_len`` block with index ``i`` over the
    disjoint blocks ``x[1..k], x[k+1..2k], ...``.
    """

    base: int
    max_len: int
    n: int
    sliding: tuple[np.ndarray, ...]
    aligned: np.ndarray

    def count(self, u) -> int:
        u = self._check(u)
        return int(self.sliding[len(u) - 1][word_index(u, self.base)])

    def aligned_count(self, u) -> int:
        u = as_word(u)
        if len(u) != self.max_len:
            raise InputError(f"aligned counts exist only for length {self.max_len}")
        return int(self.aligned[word_index(u, self.base)])

    def windows(self, length: int) -> int:
        return max(self.n - length + 1, 0)

    def frequency(self, u) -> float:
        u = self._check(u)
        return self.count(u) / self.windows(len(u))

    def frequencies(self, length: int) -> np.ndarray:
        return self.sliding[length - 1] / self.windows(length)

    def counts(self) -> dict[tuple[int, ...], int]:
        return {
            u: int(self.sliding[ell - 1][i])
            for ell in range(1, self.max_len + 1)
            for i, u in enumerate(all_words(self.base, ell))
        }

    @property
    def aligned_blocks(self) -> int:
        return self.n // self.max_len

    def _check(self, u) -> tuple[int, ...]:
        u = as_word(u)
        if not 1 <= len(u) <= self.max_len:
            raise InputError(f"word length {len(u)} outside 1..{self.max_len}")
        if any(a >= self.base for a in u):
            raise InputError(f"word {u} has symbols outside base {self.base}")
        return u


def freq_table(x, n: int | None = None, k: int = 1, base: int = 2) -> FreqTable:
    """Count all words of length <= ``k`` in the first ``n`` symbols of ``x``.

    A stream shorter than ``n`` is used in full and the actual length recorded.
    """
    check_base(base)
    if k < 1:
        raise InputError("max word length must be at least 1")
    if base**k > MAX_TABLE_SIZE:
        raise InputError(f"table size {base}**{k} exceeds the cap of {MAX_TABLE_SIZE} words")
    if n is not None and n < k:
        raise InputError(f"prefix length {n} shorter than max word length {k}")
    x = check_symbols(x, base, n)
    if x.size < k:
        raise InputError(f"stream has only {x.size} symbols, fewer than max word length {k}")
    sliding = tuple(
        np.bincount(window_codes(x, ell, base), minlength=base**ell).astype(np.int64)
        for ell in range(1, k + 1)
    )
    blocks = x[: (x.size // k) * k].reshape(-1, k)
    codes = np.zeros(blocks.shape[0], dtype=np.int64)
    for j in range(k):
        codes = codes * base + blocks[:, j]
    aligned = np.bincount(codes, minlength=base**k).astype(np.int64)
    return FreqTable(base, k, int(x.size), sliding, aligned)


def max_deviation(t: FreqTable) -> float:
    """Largest ``|freq(u) - base**-|u||`` over all words with ``|u| <= max_len``."""
    return max(
        float(np.abs(t.frequencies(ell) - float(t.base) ** -ell).max())
        for ell in range(1, t.max_len + 1)
        if t.windows(ell) > 0
    )


def ps_ratio(t: FreqTable) -> dict[tuple[int, ...], float]:
    """Empirical frequency divided by the fair value ``base**-|u|``, for every stored word."""
    out = {}
    for ell in range(1, t.max_len + 1):
        ratios = t.frequencies(ell) * float(t.base) ** ell
        for u, r in zip(all_words(t.base, ell), ratios.tolist()):
            out[u] = r
    return out


class FrequencyProfile(BaseEstimator):
    """Estimator-style wrapper: ``fit`` a stream, then read its statistics."""

    def __init__(self, max_len: int = 3, base: int = 2, n: int | None = None):
        self.max_len = max_len
        self.base = base
        self.n = n

    def fit(self, X, y=None):
        self.table_ = freq_table(X, self.n, self.max_len, self.base)
        self.max_deviation_ = max_deviation(self.table_)
        return self

    def ps_ratios(self) -> dict[tuple[int, ...], float]:
        check_is_fitted(self, "table_")
        return ps_ratio(self.table_)

    def score(self, X, y=None) -> float:
        """Negative max deviation, so larger means closer to normal."""
        return -max_deviation(freq_table(X, self.n, self.max_len, self.base))
