"""Per-trial and aggregate statistics for key-exchange runs.

Fractions are kept exact (``fractions.Fraction``) so that repeated runs and
aggregations are bit-for-bit reproducible; rendering to percentages happens
only at the output layer.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from .core import ContractError


class EmptySiftWarning(UserWarning):
    """Raised when a statistic is computed over an empty sifted key."""


def _bits(key) -> str:
    return key.bits if hasattr(key, "bits") else key


def qber(alice, bob) -> Fraction:
    """Differing-bit fraction between the two sifted keys (0 on empty keys)."""
    a, b = _bits(alice), _bits(bob)
    if len(a) != len(b):
        raise ContractError(f"sifted key lengths differ: {len(a)} vs {len(b)}")
    if not a:
        warnings.warn("QBER of an empty sifted key treated as 0", EmptySiftWarning)
        return Fraction(0)
    return Fraction(sum(x != y for x, y in zip(a, b)), len(a))


def knowledge(eve_bits, reference) -> Fraction:
    """Fraction of sifted positions where the eavesdropper's bit agrees."""
    e, r = _bits(eve_bits), _bits(reference)
    if len(e) != len(r):
        raise ContractError(f"bit string lengths differ: {len(e)} vs {len(r)}")
    if not r:
        warnings.warn("knowledge of an empty sifted key treated as 0", EmptySiftWarning)
        return Fraction(0)
    return Fraction(sum(x == y for x, y in zip(e, r)), len(r))


def detection_probability(compared_bits: int) -> float:
    """Chance that comparing this many sifted bits exposes an intercept-resend
    eavesdropper: 1 - (3/4)^K."""
    if compared_bits < 0:
        raise ContractError("compared bit count must be non-negative")
    return 1.0 - 0.75**compared_bits


def _validate_fraction(name: str, value) -> None:
    if value is not None and not 0 <= value <= 1:
        raise ContractError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class TrialResult:
    """Statistics of a single key-exchange trial."""

    trial: int
    raw_len: int
    sifted_len: int
    qber: Fraction
    knowledge_alice: Fraction | None
    knowledge_bob: Fraction | None
    matches_control: bool

    def __post_init__(self) -> None:
        _validate_fraction("qber", self.qber)
        _validate_fraction("knowledge_alice", self.knowledge_alice)
        _validate_fraction("knowledge_bob", self.knowledge_bob)

    @property
    def sift_fraction(self) -> Fraction:
        return Fraction(self.sifted_len, self.raw_len)


@dataclass(frozen=True)
class AggregateStats:
    """Arithmetic means over a list of trials plus the match rate."""

    trials: int
    mean_sifted_len: Fraction
    mean_sift_fraction: Fraction
    mean_qber: Fraction
    mean_knowledge_alice: Fraction | None
    mean_knowledge_bob: Fraction | None
    match_rate: Fraction


def _mean_optional(values) -> Fraction | None:
    present = [v for v in values if v is not None]
    if not present:
        return None
    return sum(present, Fraction(0)) / len(present)


def aggregate(results) -> AggregateStats:
    results = list(results)
    if not results:
        raise ContractError("cannot aggregate an empty result list")
    n = len(results)
    return AggregateStats(
        trials=n,
        mean_sifted_len=Fraction(sum(r.sifted_len for r in results), n),
        mean_sift_fraction=sum((r.sift_fraction for r in results), Fraction(0)) / n,
        mean_qber=sum((r.qber for r in results), Fraction(0)) / n,
        mean_knowledge_alice=_mean_optional(r.knowledge_alice for r in results),
        mean_knowledge_bob=_mean_optional(r.knowledge_bob for r in results),
        match_rate=Fraction(sum(r.matches_control for r in results), n),
    )
