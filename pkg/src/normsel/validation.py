"""Input validation and word helpers.

Words are handled internally as tuples of non-negative ints.  Anywhere a word
is accepted, a string of ASCII digits (``"0110"``) or any integer sequence is
also accepted and converted with :func:`as_word`.
"""
from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence

import numpy as np

from .exceptions import InputError

MAX_TEXT_BASE = 10


def as_word(w) -> tuple[int, ...]:
    """Convert a digit string or integer sequence to a tuple of ints."""
    if isinstance(w, str):
        if w and not w.isdigit():
            raise InputError(f"word {w!r} contains non-digit characters")
        return tuple(ord(c) - 48 for c in w)
    if isinstance(w, np.ndarray):
        return tuple(int(a) for a in w.tolist())
    return tuple(int(a) for a in w)


def word_str(w: Sequence[int]) -> str:
    if any(a >= MAX_TEXT_BASE for a in w):
        raise InputError("symbols >= 10 have no single-digit text form")
    return "".join(chr(48 + a) for a in w)


def word_index(w: Sequence[int], base: int) -> int:
    """Big-endian base-``base`` value of ``w`` (first symbol most significant)."""
    idx = 0
    for a in w:
        idx = idx * base + a
    return idx


def index_word(idx: int, base: int, k: int) -> tuple[int, ...]:
    out = [0] * k
    for j in range(k - 1, -1, -1):
        idx, out[j] = divmod(idx, base)
    return tuple(out)


def all_words(base: int, k: int) -> Iterator[tuple[int, ...]]:
    """All words of length ``k`` in lexicographic (= index) order."""
    return itertools.product(range(base), repeat=k)


def check_base(base: int) -> int:
    if int(base) != base or base < 2:
        raise InputError(f"alphabet size must be an integer >= 2, got {base!r}")
    return int(base)


def check_symbols(x, base: int, n: int | None = None) -> np.ndarray:
    """Materialise (a prefix of) ``x`` as an int64 array with symbols < base.

    ``x`` may be a digit string, a numpy array, or any iterable of ints
    (possibly unbounded, in which case ``n`` must be given).
    """
    if isinstance(x, str):
        if n is not None:
            x = x[:n]
        arr = np.frombuffer(x.encode("ascii"), dtype=np.uint8).astype(np.int64) - 48
    elif isinstance(x, np.ndarray):
        arr = np.asarray(x[:n] if n is not None else x, dtype=np.int64)
    else:
        it: Iterable[int] = x if n is None else itertools.islice(x, n)
        arr = np.fromiter((int(a) for a in it), dtype=np.int64)
    if arr.ndim != 1:
        raise InputError("symbol sequence must be one-dimensional")
    bad = np.flatnonzero((arr < 0) | (arr >= base))
    if bad.size:
        i = int(bad[0])
        raise InputError(f"symbol {int(arr[i])} at position {i + 1} is outside alphabet of size {base}")
    return arr


def check_symbol(a: int, base: int) -> int:
    if not 0 <= a < base:
        raise InputError(f"symbol {a} outside alphabet of size {base}")
    return a


def parse_digits(text: str, base: int) -> np.ndarray:
    """Parse a digit stream from text, ignoring whitespace."""
    cleaned = "".join(text.split())
    if cleaned and not cleaned.isdigit():
        pos = next(i for i, c in enumerate(cleaned) if not c.isdigit())
        raise InputError(f"non-digit character {cleaned[pos]!r} at position {pos + 1}")
    return check_symbols(cleaned, base)


def format_digits(x) -> str:
    arr = np.asarray(x, dtype=np.int64)
    if arr.size and arr.max() >= MAX_TEXT_BASE:
        raise InputError("symbols >= 10 have no single-digit text form")
    return (arr.astype(np.uint8) + 48).tobytes().decode("ascii")
