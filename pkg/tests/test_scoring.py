import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybrid_al.errors import ConfigurationError, MalformedPosteriorError
from hybrid_al.scoring import ScoreVector, least_confidence, max_confidence, rank, top_k


@pytest.mark.parametrize(
    "row, high, low",
    [
        ([1.0, 0.0, 0.0], 1.0, 0.0),
        ([0.25, 0.25, 0.25, 0.25], 0.25, 0.75),
        ([0.6, 0.3, 0.1], 0.6, 0.4),
        ([0.5, 0.5], 0.5, 0.5),
    ],
)
def test_confidence_values(row, high, low):
    assert max_confidence([row]).scores[0] == pytest.approx(high, abs=1e-15)
    assert least_confidence([row]).scores[0] == pytest.approx(low, abs=1e-15)


def test_binary_least_confidence_is_bounded_by_half():
    p = np.linspace(0, 1, 101)
    probs = np.stack([p, 1 - p], axis=1)
    assert least_confidence(probs).scores.max() == 0.5


@pytest.mark.parametrize(
    "probs",
    [[[0.5, 0.6]], [[1.2, -0.2]], [[np.nan, 1.0]], [0.5, 0.5]],
)
def test_malformed(probs):
    with pytest.raises(MalformedPosteriorError):
        max_confidence(probs)
    with pytest.raises(MalformedPosteriorError):
        least_confidence(probs)


def test_not_renormalized():
    with pytest.raises(MalformedPosteriorError):
        max_confidence([[0.2, 0.2]])


class TestTopK:
    def test_tie_goes_to_lower_id(self):
        s = ScoreVector(np.array([0.9, 0.9, 0.1]))
        assert top_k([0, 1, 2], s, 1).tolist() == [0]
        assert top_k([1, 0, 2], ScoreVector(np.array([0.9, 0.9, 0.1])), 1).tolist() == [0]

    def test_saturation(self):
        s = ScoreVector(np.array([0.2, 0.8, 0.5]))
        assert top_k([10, 11, 12], s, 99).tolist() == [11, 12, 10]

    def test_lower_is_selected(self):
        s = ScoreVector(np.array([0.2, 0.8, 0.2]), higher_is_selected=False)
        assert top_k([5, 6, 7], s, 2).tolist() == [5, 7]

    def test_zero_k(self):
        with pytest.raises(ConfigurationError):
            top_k([0], ScoreVector(np.array([1.0])), 0)

    def test_length_mismatch(self):
        with pytest.raises(ConfigurationError):
            top_k([0, 1], ScoreVector(np.array([1.0])), 1)

    def test_against_full_sort(self, rng):
        for _ in range(100):
            n = int(rng.integers(1, 201))
            ids = rng.permutation(1000)[:n]
            # coarse grid forces plenty of ties
            scores = rng.integers(0, 7, size=n) / 6.0
            expected = sorted(ids.tolist(), key=lambda i: (-scores[list(ids).index(i)], i))[:5]
            assert top_k(ids, ScoreVector(scores), 5).tolist() == expected


probability_rows = st.lists(
    st.lists(st.floats(0.0, 1.0), min_size=2, max_size=5), min_size=1, max_size=30
).map(lambda rows: [np.array(r) + 1e-3 for r in rows])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 40), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_identity_and_permutation_invariance(n, C, seed):
    r = np.random.default_rng(seed)
    probs = r.dirichlet(np.ones(C), size=n)
    hi, lo = max_confidence(probs), least_confidence(probs)
    np.testing.assert_allclose(hi.scores + lo.scores, 1.0, atol=1e-12)
    ids = np.arange(n)
    perm = r.permutation(n)
    for s in (hi, lo):
        shuffled = ScoreVector(s.scores[perm], s.higher_is_selected)
        assert rank(ids[perm], shuffled).tolist() == rank(ids, s).tolist()


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 30), st.integers(0, 2**32 - 1), st.floats(1e-3, 0.49))
def test_monotone_in_max_probability(n, seed, bump):
    r = np.random.default_rng(seed)
    probs = r.dirichlet(np.ones(3), size=n)
    before = rank(np.arange(n), max_confidence(probs)).tolist()
    target = int(r.integers(n))
    row = probs[target]
    k = int(np.argmax(row))
    new_max = min(1.0, row[k] + bump)
    rest = row.sum() - row[k]
    scaled = row * ((1 - new_max) / rest) if rest > 0 else row * 0
    scaled[k] = new_max
    probs[target] = scaled
    after = rank(np.arange(n), max_confidence(probs)).tolist()
    assert after.index(target) <= before.index(target)
