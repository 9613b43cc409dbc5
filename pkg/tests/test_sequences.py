import itertools
import math

import numpy as np
import pytest

from normsel.exceptions import InputError
from normsel.sequences import (
    GeneratorSpec,
    SplitMix64,
    bernoulli,
    champernowne,
    generate,
    iter_bernoulli,
    iter_champernowne,
    iter_generate,
    splitmix64_array,
)
from normsel.validation import format_digits

# Published reference outputs of splitmix64 for seed 1234567.
SPLITMIX_1234567 = [
    6457827717110365317,
    3203168211198807973,
    9817491932198370423,
    4593380528125082431,
    16408922859458223821,
]


def test_splitmix64_reference_vector():
    g = SplitMix64(1234567)
    assert [g.next() for _ in range(5)] == SPLITMIX_1234567
    assert splitmix64_array(1234567, 5).tolist() == SPLITMIX_1234567
    assert splitmix64_array(1234567, 2, offset=3).tolist() == SPLITMIX_1234567[3:]


def test_champernowne_binary_prefix():
    assert format_digits(generate(GeneratorSpec("champernowne", 13))) == "1101110010111"


def test_champernowne_other_bases_match_lazy():
    for base in (3, 10, 12):
        lazy = list(itertools.islice(iter_champernowne(base), 300))
        assert champernowne(base, 300).tolist() == lazy
    assert format_digits(champernowne(10, 15)) == "123456789101112"


def test_periodic():
    assert format_digits(generate(GeneratorSpec("periodic", 5, pattern="01"))) == "01010"
    assert list(itertools.islice(iter_generate(GeneratorSpec("periodic", 0, pattern="01")), 3)) == [0, 1, 0]


def test_bernoulli_frequency():
    n = 200_000
    x = generate(GeneratorSpec("bernoulli", n, p=0.9, seed=42))
    assert abs(x.mean() - 0.9) <= 3 * math.sqrt(0.09 / n)


def test_bernoulli_lazy_matches_vectorised():
    assert list(itertools.islice(iter_bernoulli(0.3, 9), 500)) == bernoulli(0.3, 9, 500).tolist()


def test_determinism():
    spec = GeneratorSpec("bernoulli", 1000, p=0.25, seed=7)
    assert generate(spec).tobytes() == generate(spec).tobytes()
    assert generate(spec).tobytes() != generate(GeneratorSpec("bernoulli", 1000, p=0.25, seed=8)).tobytes()


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="bernoulli", length=5, base=3, p=0.5),
        dict(kind="bernoulli", length=5, p=1.0),
        dict(kind="periodic", length=5, pattern=""),
        dict(kind="periodic", length=5, pattern="02"),
        dict(kind="champernowne", length=5, base=1),
        dict(kind="other", length=5),
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(InputError):
        GeneratorSpec(**kwargs)
