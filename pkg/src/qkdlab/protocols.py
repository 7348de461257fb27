"""Key-exchange orchestration for BB84, its dim-4 variant, and the six-state
protocol, under three measurement scenarios and three eavesdropper models.

Scenarios
---------
control     The textbook protocol at the particle dimension d_ab.
conv        Alice's particle is carried by a qudit of the eavesdropper
            dimension d_e = d_ab * bases; a conversion circuit maps it back to
            a physical d_ab-dimensional state which Bob decodes as usual.
relabel     Bob measures the d_e qudit directly after his basis gate and
            relabels outcomes: in-basis outcomes give the deterministic value,
            off-basis outcomes are replaced by uniformly random bits.

Both high-dimensional scenarios are behaviourally equivalent to the control
run: with a fixed seed they produce identical sifted keys.  The high-
dimensional eavesdropper measures the d_e qudit in its computational basis,
which never disturbs the channel and reads off Alice's (value, basis) pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from . import analysis, gates
from .core import (
    ConfigError,
    ContractError,
    RandomSource,
    _sample,
    apply_to_slot,
    basis_state,
    measure,
    measure_slot,
)


class Scenario(str, Enum):
    CONTROL = "control"
    CONVERSION = "conv"
    RELABEL = "relabel"


class EveModel(str, Enum):
    NONE = "none"
    STANDARD = "standard"
    HD = "hd"


# Stream coordinates; Alice's and Bob's draws depend only on (seed, trial,
# party), never on the scenario or eavesdropper, so cross-scenario key
# comparisons are meaningful.
PARTY_ALICE = 0
PARTY_BOB_BASIS = 1
PARTY_BOB_MEASURE = 2
PARTY_EVE = 3


@dataclass(frozen=True)
class ProtocolSpec:
    """Static description of one protocol.

    The eavesdropper dimension is ``d_ab * basis_count`` and its basis states
    enumerate (value, basis) pairs as ``index = value * basis_count + basis``.
    """

    name: str
    d_ab: int
    basis_count: int
    bits_per_particle: int
    basis_names: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.basis_names) != self.basis_count:
            raise ContractError("basis name count != basis count")

    @property
    def d_e(self) -> int:
        return self.d_ab * self.basis_count

    @property
    def values_per_particle(self) -> int:
        return 2**self.bits_per_particle

    def state_index(self, value: int, basis: int) -> int:
        return value * self.basis_count + basis

    def value_basis(self, index: int) -> tuple[int, int]:
        return divmod(index, self.basis_count)

    def value_bits(self, value: int) -> str:
        return format(value, f"0{self.bits_per_particle}b")


BB84 = ProtocolSpec("bb84", 2, 2, 1, ("rectilinear", "diagonal"))
HDBB84 = ProtocolSpec("hdbb84", 4, 2, 2, ("psi", "phi"))
SSP = ProtocolSpec("ssp", 2, 3, 1, ("z", "x", "y"))

PROTOCOLS = {spec.name: spec for spec in (BB84, HDBB84, SSP)}


def validate_pairing(scenario: Scenario, eve: EveModel) -> None:
    """Standard intercept-resend runs only in the control scenario; the
    high-dimensional eavesdropper needs a d_e channel."""
    scenario, eve = Scenario(scenario), EveModel(eve)
    if eve is EveModel.STANDARD and scenario is not Scenario.CONTROL:
        raise ConfigError("a standard eavesdropper only applies to the control scenario")
    if eve is EveModel.HD and scenario is Scenario.CONTROL:
        raise ConfigError("a high-dimensional eavesdropper needs the conv or relabel scenario")


class _Engine:
    """Per-protocol cache of encode states and decode matrices."""

    def __init__(self, spec: ProtocolSpec):
        self.spec = spec
        eye_ab = np.eye(spec.d_ab, dtype=np.complex128)
        if spec.name == "bb84":
            basis_mats = [eye_ab, gates.standard_gate("H").matrix]
            value_seqs = [(), (gates.standard_gate("X").matrix,)]
            hd_value = [(), (gates.qid_gate_bb84("QidX1").matrix,)]
            hd_basis = [None, gates.qid_gate_bb84("QidH1").matrix]
        elif spec.name == "hdbb84":
            basis_mats = [eye_ab, gates.hdbb84_phi_gate("fixed").matrix]
            value_seqs = [
                tuple(entry.matrix for entry in gates.hdbb84_psi_prep(symbol))
                for symbol in gates.PSI_SYMBOLS
            ]
            hd_value = [
                (gates.qid_gate_hdbb84(f"Qid{symbol.capitalize()}").matrix,)
                for symbol in gates.PSI_SYMBOLS
            ]
            hd_basis = [None, gates.qid_gate_hdbb84("QidPhi").matrix]
        elif spec.name == "ssp":
            basis_mats = [
                eye_ab,
                gates.standard_gate("H").matrix,
                gates.standard_gate("J").matrix,
            ]
            value_seqs = [(), (gates.standard_gate("X").matrix,)]
            hd_value = [(), (gates.qid_gate_ssp("QidX2").matrix,)]
            hd_basis = [
                None,
                gates.qid_gate_ssp("QidH2").matrix,
                gates.qid_gate_ssp("QidJ").matrix,
            ]
        else:
            raise ConfigError(f"unknown protocol {spec.name!r}")

        # Basis gates double as decode gates: all are self-inverse up to a
        # global phase, which measurement statistics cannot see.
        self.decode = basis_mats
        self.encode = {}
        self.hd_encode = {}
        for value in range(spec.values_per_particle):
            for basis in range(spec.basis_count):
                state = basis_state(spec.d_ab, 0)
                for gate in value_seqs[value]:
                    state = gate @ state
                self.encode[value, basis] = basis_mats[basis] @ state

                hd_state = basis_state(spec.d_e, 0)
                for gate in hd_value[value]:
                    hd_state = gate @ hd_state
                if hd_basis[basis] is not None:
                    hd_state = hd_basis[basis] @ hd_state
                self.hd_encode[value, basis] = hd_state
        self.hd_decode = [
            np.eye(spec.d_e, dtype=np.complex128) if gate is None else gate
            for gate in hd_basis
        ]
        self.conversion = gates.conversion_gate(spec.name)
        self._conversion_probs: dict = {}

    def conversion_outcome_probs(self, state: np.ndarray, basis: int):
        """Outcome distribution of convert-decode-measure for basis-state
        inputs, cached per (source index, basis); None for superpositions."""
        populated = np.flatnonzero(np.abs(state) > 1e-12)
        if len(populated) != 1 or abs(abs(state[populated[0]]) - 1.0) > 1e-12:
            return None
        key = (int(populated[0]), basis)
        probs = self._conversion_probs.get(key)
        if probs is None:
            conv = self.conversion
            reg = conv.apply(conv.input_register(key[0]))
            reg = apply_to_slot(self.decode[basis], reg, conv.output_slot)
            psi = np.moveaxis(reg.state.reshape(conv.slots), conv.output_slot, 0)
            probs = np.sum(np.abs(psi) ** 2, axis=tuple(range(1, psi.ndim)))
            self._conversion_probs[key] = probs
        return probs


@lru_cache(maxsize=None)
def _engine(spec: ProtocolSpec) -> _Engine:
    return _Engine(spec)


def alice_draws(
    spec: ProtocolSpec, raw_bits: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw the raw key bits and one encoding basis per particle."""
    if raw_bits <= 0 or raw_bits % spec.bits_per_particle:
        raise ConfigError(
            f"raw_bits must be a positive multiple of {spec.bits_per_particle}"
        )
    bits = rng.integers(0, 2, size=raw_bits)
    bases = rng.integers(0, spec.basis_count, size=raw_bits // spec.bits_per_particle)
    return bits, bases


def pack_values(spec: ProtocolSpec, bits: np.ndarray) -> np.ndarray:
    """Group raw bits into per-particle values, first bit most significant."""
    chunks = np.asarray(bits).reshape(-1, spec.bits_per_particle)
    weights = 2 ** np.arange(spec.bits_per_particle - 1, -1, -1)
    return chunks @ weights


def encode_particle_control(spec: ProtocolSpec, value: int, basis: int) -> np.ndarray:
    """Alice's d_ab-dimensional state for a (value, basis) choice."""
    return _engine(spec).encode[int(value), int(basis)]


def encode_particle_hd(spec: ProtocolSpec, value: int, basis: int) -> np.ndarray:
    """Alice's d_e-dimensional state: the basis state indexing (value, basis)."""
    return _engine(spec).hd_encode[int(value), int(basis)]


def eve_standard(
    spec: ProtocolSpec, state: np.ndarray, rng: np.random.Generator
) -> tuple[int, int, np.ndarray]:
    """Intercept-resend at the particle dimension: guess a basis, decode,
    measure, and re-encode the measured value in the guessed basis."""
    engine = _engine(spec)
    basis = int(rng.integers(spec.basis_count))
    outcome, _ = measure(engine.decode[basis] @ state, rng)
    return outcome, basis, engine.encode[outcome, basis]


def eve_hd(
    spec: ProtocolSpec, state: np.ndarray, rng: np.random.Generator
) -> tuple[tuple[int, int], np.ndarray]:
    """Measure the d_e qudit in its computational basis and resend it.

    The channel state is a basis state, so the outcome is deterministic and
    the resent state is identical: nothing downstream can notice the tap.
    """
    outcome, collapsed = measure(state, rng)
    return spec.value_basis(outcome), collapsed


def bob_decode_control(
    spec: ProtocolSpec, state: np.ndarray, basis: int, rng: np.random.Generator
) -> int:
    """Apply the basis gate and measure; the outcome is the particle value."""
    engine = _engine(spec)
    outcome, _ = measure(engine.decode[basis] @ state, rng)
    return outcome


def bob_decode_scenario1(
    spec: ProtocolSpec, state: np.ndarray, basis: int, rng: np.random.Generator
) -> int:
    """Convert the d_e qudit down to d_ab, then decode as in the control run."""
    engine = _engine(spec)
    probs = engine.conversion_outcome_probs(state, basis)
    if probs is not None:
        # Channel states are basis states, so the distribution is cacheable.
        return _sample(probs, rng)
    conv = engine.conversion
    reg = conv.apply(conv.input_register(state))
    reg = apply_to_slot(engine.decode[basis], reg, conv.output_slot)
    outcome, _ = measure_slot(reg, conv.output_slot, rng)
    return outcome


def bob_decode_scenario2(
    spec: ProtocolSpec, state: np.ndarray, basis: int, rng: np.random.Generator
) -> int:
    """Measure the d_e qudit after Bob's basis gate and relabel the outcome.

    After the decode gate, an outcome whose basis component is 0 means the
    particle was encoded in Bob's basis and carries its value deterministically;
    any other outcome stands for an off-basis measurement and is replaced by
    uniformly random value bits drawn from Bob's stream.
    """
    engine = _engine(spec)
    outcome, _ = measure(engine.hd_decode[basis] @ state, rng)
    value, basis_flag = spec.value_basis(outcome)
    if basis_flag == 0:
        return value
    return int(rng.integers(spec.values_per_particle))


@dataclass(frozen=True)
class Transcript:
    """Every random choice and measurement outcome of one trial."""

    spec: ProtocolSpec
    scenario: Scenario
    eve: EveModel
    alice_values: tuple[int, ...]
    alice_bases: tuple[int, ...]
    eve_values: tuple[int, ...] | None
    eve_bases: tuple[int, ...] | None
    bob_bases: tuple[int, ...]
    bob_values: tuple[int, ...]
    kept: tuple[bool, ...]


@dataclass(frozen=True)
class SiftedKey:
    bits: str
    positions: tuple[int, ...]


def sift(spec: ProtocolSpec, transcript: Transcript):
    """Keep whole particles measured in matching bases.

    Returns Alice's and Bob's sifted keys plus the eavesdropper's bits aligned
    to the kept positions (None without an eavesdropper).  Multi-bit particles
    are kept or discarded as whole chunks.
    """
    positions = tuple(i for i, keep in enumerate(transcript.kept) if keep)
    alice = "".join(spec.value_bits(transcript.alice_values[i]) for i in positions)
    bob = "".join(spec.value_bits(transcript.bob_values[i]) for i in positions)
    eve = None
    if transcript.eve_values is not None:
        eve = "".join(spec.value_bits(transcript.eve_values[i]) for i in positions)
    return SiftedKey(alice, positions), SiftedKey(bob, positions), eve


def run_trial(
    spec: ProtocolSpec,
    scenario: Scenario,
    eve: EveModel,
    raw_bits: int,
    seed: int,
    trial: int = 0,
) -> Transcript:
    """Execute one full trial: draw, encode, optional intercept, decode, sift."""
    scenario, eve = Scenario(scenario), EveModel(eve)
    validate_pairing(scenario, eve)
    source = RandomSource(seed)
    alice_rng = source.stream(trial, PARTY_ALICE)
    bob_basis_rng = source.stream(trial, PARTY_BOB_BASIS)
    bob_measure_rng = source.stream(trial, PARTY_BOB_MEASURE)
    eve_rng = source.stream(trial, PARTY_EVE)

    bits, alice_bases = alice_draws(spec, raw_bits, alice_rng)
    alice_values = pack_values(spec, bits)
    particles = len(alice_bases)
    bob_bases = bob_basis_rng.integers(0, spec.basis_count, size=particles)

    eve_values: list[int] | None = [] if eve is not EveModel.NONE else None
    eve_bases: list[int] | None = [] if eve is not EveModel.NONE else None
    bob_values = []
    for i in range(particles):
        value, basis = int(alice_values[i]), int(alice_bases[i])
        if scenario is Scenario.CONTROL:
            state = encode_particle_control(spec, value, basis)
            if eve is EveModel.STANDARD:
                ev, eb, state = eve_standard(spec, state, eve_rng)
                eve_values.append(ev)
                eve_bases.append(eb)
            bob_values.append(
                bob_decode_control(spec, state, int(bob_bases[i]), bob_measure_rng)
            )
        else:
            state = encode_particle_hd(spec, value, basis)
            if eve is EveModel.HD:
                (ev, eb), state = eve_hd(spec, state, eve_rng)
                eve_values.append(ev)
                eve_bases.append(eb)
            decode = (
                bob_decode_scenario1
                if scenario is Scenario.CONVERSION
                else bob_decode_scenario2
            )
            bob_values.append(decode(spec, state, int(bob_bases[i]), bob_measure_rng))

    kept = tuple(bool(a == b) for a, b in zip(alice_bases, bob_bases))
    return Transcript(
        spec=spec,
        scenario=scenario,
        eve=eve,
        alice_values=tuple(int(v) for v in alice_values),
        alice_bases=tuple(int(b) for b in alice_bases),
        eve_values=None if eve_values is None else tuple(eve_values),
        eve_bases=None if eve_bases is None else tuple(eve_bases),
        bob_bases=tuple(int(b) for b in bob_bases),
        bob_values=tuple(int(v) for v in bob_values),
        kept=kept,
    )


def run_experiment(
    spec: ProtocolSpec,
    scenario: Scenario,
    eve: EveModel,
    trials: int,
    raw_bits: int,
    seed: int,
) -> list[analysis.TrialResult]:
    """Run several trials and score each against its same-seed control run.

    The reference for the "matches" flag is the control-scenario trial without
    an eavesdropper, which shares Alice's and Bob's randomness by construction.
    """
    scenario, eve = Scenario(scenario), EveModel(eve)
    validate_pairing(scenario, eve)
    if trials < 1:
        raise ConfigError("trial count must be at least 1")
    results = []
    for trial in range(trials):
        reference = run_trial(
            spec, Scenario.CONTROL, EveModel.NONE, raw_bits, seed, trial
        )
        _, reference_key, _ = sift(spec, reference)
        if scenario is Scenario.CONTROL and eve is EveModel.NONE:
            transcript = reference
        else:
            transcript = run_trial(spec, scenario, eve, raw_bits, seed, trial)
        alice_key, bob_key, eve_bits = sift(spec, transcript)
        results.append(
            analysis.TrialResult(
                trial=trial,
                raw_len=raw_bits,
                sifted_len=len(alice_key.bits),
                qber=analysis.qber(alice_key, bob_key),
                knowledge_alice=(
                    None if eve_bits is None else analysis.knowledge(eve_bits, alice_key)
                ),
                knowledge_bob=(
                    None if eve_bits is None else analysis.knowledge(eve_bits, bob_key)
                ),
                matches_control=bob_key.bits == reference_key.bits,
            )
        )
    return results
