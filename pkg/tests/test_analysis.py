from fractions import Fraction

import pytest

from qkdlab.analysis import (
    AggregateStats,
    EmptySiftWarning,
    TrialResult,
    aggregate,
    detection_probability,
    knowledge,
    qber,
)
from qkdlab.core import ContractError
from qkdlab.protocols import SiftedKey


def _key(bits):
    return SiftedKey(bits, tuple(range(len(bits))))


def test_qber_identical_keys():
    assert qber(_key("010101"), _key("010101")) == 0


def test_qber_complementary_keys():
    assert qber(_key("0000"), _key("1111")) == 1


def test_qber_counts_hamming_fraction():
    assert qber(_key("0011"), _key("0010")) == Fraction(1, 4)


def test_qber_is_symmetric():
    a, b = _key("001101"), _key("101001")
    assert qber(a, b) == qber(b, a)


def test_qber_rejects_length_mismatch():
    with pytest.raises(ContractError):
        qber(_key("01"), _key("010"))


def test_qber_empty_keys_warn_and_return_zero():
    with pytest.warns(EmptySiftWarning):
        assert qber(_key(""), _key("")) == 0


def test_knowledge_full_agreement():
    assert knowledge("0110", _key("0110")) == 1


def test_knowledge_no_agreement():
    assert knowledge("1111", _key("0000")) == 0


def test_knowledge_empty_reference_warns():
    with pytest.warns(EmptySiftWarning):
        assert knowledge("", _key("")) == 0


def test_detection_probability_spot_values():
    assert detection_probability(0) == 0
    assert detection_probability(1) == 0.25
    assert abs(detection_probability(10) - 0.943686) < 1e-4


def test_detection_probability_monotone_to_one():
    values = [detection_probability(k) for k in range(60)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert values[-1] > 1 - 1e-7


def test_detection_probability_rejects_negative():
    with pytest.raises(ContractError):
        detection_probability(-1)


def _trial(i, qber_value, matches, sifted=100):
    return TrialResult(
        trial=i,
        raw_len=200,
        sifted_len=sifted,
        qber=Fraction(qber_value),
        knowledge_alice=None,
        knowledge_bob=None,
        matches_control=matches,
    )


def test_aggregate_means_and_match_rate():
    stats = aggregate([_trial(0, 0, True), _trial(1, Fraction(1, 2), False)])
    assert isinstance(stats, AggregateStats)
    assert stats.trials == 2
    assert stats.mean_qber == Fraction(1, 4)
    assert stats.match_rate == Fraction(1, 2)
    assert stats.mean_sift_fraction == Fraction(1, 2)
    assert stats.mean_knowledge_alice is None


def test_aggregate_identical_no_eve_trials():
    stats = aggregate([_trial(i, 0, True) for i in range(25)])
    assert stats.mean_qber == 0
    assert stats.match_rate == 1


def test_aggregate_mean_stays_within_trial_range():
    trials = [_trial(i, Fraction(i, 10), True, sifted=100 + i) for i in range(5)]
    stats = aggregate(trials)
    assert min(t.qber for t in trials) <= stats.mean_qber <= max(t.qber for t in trials)
    assert 100 <= stats.mean_sifted_len <= 104


def test_aggregate_rejects_empty_list():
    with pytest.raises(ContractError):
        aggregate([])


def test_trial_result_validates_fractions():
    with pytest.raises(ContractError):
        TrialResult(0, 200, 100, Fraction(3, 2), None, None, True)


def test_sift_fraction_property():
    assert _trial(0, 0, True, sifted=109).sift_fraction == Fraction(109, 200)
