"""Deterministic symbol sources: Champernowne, periodic, and splitmix64 Bernoulli bits."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .exceptions import InputError
from .validation import as_word, check_base

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB

KINDS = ("champernowne", "periodic", "bernoulli")


class SplitMix64:
    """Scalar splitmix64 generator (64-bit state, one output per call)."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def __iter__(self) -> Iterator[int]:
        while True:
            yield self.next()


def splitmix64_array(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Outputs ``offset .. offset + count - 1`` of splitmix64 seeded with ``seed``, vectorised.

    The i-th state is simply ``seed + (i + 1) * gamma`` modulo 2**64.
    """
    with np.errstate(over="ignore"):
        i = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
        z = np.uint64(seed & MASK64) + i * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX2)
        return z ^ (z >> np.uint64(31))


def bernoulli_threshold(p: float) -> int:
    """A 64-bit output ``z`` yields bit 1 iff ``z < floor(p * 2**64)``."""
    return int(p * 2.0**64)


def _digits(i: int, base: int) -> list[int]:
    out = []
    while i:
        i, r = divmod(i, base)
        out.append(r)
    return out[::-1]


def iter_champernowne(base: int = 2) -> Iterator[int]:
    for i in itertools.count(1):
        yield from _digits(i, base)


def champernowne(base: int, length: int) -> np.ndarray:
    """First ``length`` symbols of the base-``base`` representations of 1, 2, 3, ... concatenated."""
    check_base(base)
    if base <= 10:
        fmt = {2: "b", 8: "o", 10: "d"}.get(base)
        chunks = []
        total = 0
        i = 1
        while total < length:
            s = format(i, fmt) if fmt else "".join(map(str, _digits(i, base)))
            chunks.append(s)
            total += len(s)
            i += 1
        text = "".join(chunks)[:length]
        return np.frombuffer(text.encode("ascii"), dtype=np.uint8).astype(np.int64) - 48
    return np.fromiter(itertools.islice(iter_champernowne(base), length), dtype=np.int64, count=length)


def iter_periodic(pattern) -> Iterator[int]:
    return itertools.cycle(as_word(pattern))


def periodic(pattern, length: int) -> np.ndarray:
    word = np.array(as_word(pattern), dtype=np.int64)
    if word.size == 0:
        raise InputError("periodic pattern must be non-empty")
    reps = -(-length // word.size)
    return np.tile(word, reps)[:length]


def iter_bernoulli(p: float, seed: int) -> Iterator[int]:
    threshold = bernoulli_threshold(p)
    for z in SplitMix64(seed):
        yield int(z < threshold)


def bernoulli(p: float, seed: int, length: int) -> np.ndarray:
    if not 0.0 < p < 1.0:
        raise InputError(f"bias p must lie strictly between 0 and 1, got {p}")
    z = splitmix64_array(seed, length)
    return (z < np.uint64(bernoulli_threshold(p))).astype(np.int64)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    length: int
    base: int = 2
    pattern: str | None = None
    p: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"generator kind must be one of {KINDS}, got {self.kind!r}")
        check_base(self.base)
        if self.length < 0:
            raise InputError("length must be non-negative")
        if self.kind == "periodic":
            if not self.pattern:
                raise InputError("periodic generator needs a non-empty pattern")
            if any(a >= self.base for a in as_word(self.pattern)):
                raise InputError(f"pattern {self.pattern!r} has symbols outside base {self.base}")
        if self.kind == "bernoulli":
            if self.base != 2:
                raise InputError("bernoulli generator supports only base 2")
            if self.p is None or not 0.0 < self.p < 1.0:
                raise InputError(f"bias p must lie strictly between 0 and 1, got {self.p}")

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "base": self.base,
            "length": self.length,
            "pattern": self.pattern,
            "p": self.p,
            "seed": self.seed,
        }


def generate(spec: GeneratorSpec) -> np.ndarray:
    if spec.kind == "champernowne":
        return champernowne(spec.base, spec.length)
    if spec.kind == "periodic":
        return periodic(spec.pattern, spec.length)
    return bernoulli(spec.p, spec.seed, spec.length)


def iter_generate(spec: GeneratorSpec) -> Iterator[int]:
    """Unbounded lazy variant of :func:`generate` (``spec.length`` ignored)."""
    if spec.kind == "champernowne":
        return iter_champernowne(spec.base)
    if spec.kind == "periodic":
        return iter_periodic(spec.pattern)
    return iter_bernoulli(spec.p, spec.seed)
