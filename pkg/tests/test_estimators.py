import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from normsel.augmented import BufferAutomatonAnalyzer
from normsel.coding import HuffmanBlockCoder
from normsel.pipeline import PipelineCompressor
from normsel.selection import PrefixSelector, select_array
from normsel.sequences import bernoulli, champernowne
from normsel.stats import FrequencyProfile, freq_table, max_deviation


@pytest.mark.parametrize(
    "est, params",
    [
        (PrefixSelector(), {"automaton", "mode", "complement"}),
        (FrequencyProfile(), {"max_len", "base", "n"}),
        (HuffmanBlockCoder(), {"k", "base"}),
        (PipelineCompressor(), {"automaton", "k", "m", "train"}),
        (BufferAutomatonAnalyzer(), {"automaton", "k", "probe", "depth", "strict"}),
    ],
)
def test_params_and_clone(est, params):
    assert set(est.get_params()) == params
    twin = clone(est)
    assert twin is not est and twin.get_params() == est.get_params()


def test_set_params_round_trip(group3):
    sel = PrefixSelector().set_params(automaton=group3, complement=True)
    assert sel.get_params()["complement"] is True
    assert clone(sel).automaton == group3


def test_not_fitted(group3):
    with pytest.raises(NotFittedError):
        PrefixSelector(group3).transform([0, 1])
    with pytest.raises(NotFittedError):
        HuffmanBlockCoder().transform([0, 1, 0, 1])


def test_selector_then_profile_pipeline(group3):
    x = champernowne(2, 2**16)
    pipe = Pipeline([("select", PrefixSelector(group3)), ("profile", FrequencyProfile(max_len=2))]).fit(x)
    y = select_array(group3, x)
    assert pipe.score(x) == -max_deviation(freq_table(y, None, 2))


def test_selector_then_coder(group3):
    x = bernoulli(0.85, 9, 40_000)
    y = PrefixSelector(group3).fit_transform(x)
    y = y[: y.size // 3 * 3]
    coder = HuffmanBlockCoder(k=3).fit(y)
    bits = coder.transform(y)
    assert len(bits) < y.size
    assert np.array_equal(coder.inverse_transform(bits), y)


def test_selector_mask_and_profile(group3):
    x = champernowne(2, 4096)
    sel = PrefixSelector(group3).fit()
    assert np.array_equal(x[sel.mask(x)], sel.transform(x))
    prof = FrequencyProfile(max_len=2).fit(sel.transform(x))
    assert prof.max_deviation_ == max_deviation(freq_table(sel.transform(x), None, 2))
    assert prof.score(x) <= 0
