"""qkdlab: a qudit state-vector laboratory for QKD protocols.

Simulates BB84, a 4-dimensional BB84 variant, and the six-state protocol,
with standard intercept-resend and high-dimensional eavesdropping models,
and reports sifted-key statistics (QBER, eavesdropper knowledge, sift
fraction, cross-scenario key matches).
"""

__version__ = "0.1.0"

from .analysis import (
    AggregateStats,
    TrialResult,
    aggregate,
    detection_probability,
    knowledge,
    qber,
)
from .core import (
    ConfigError,
    ContractError,
    RandomSource,
    Register,
    SimulationError,
    ValidationError,
    apply,
    apply_to_slot,
    basis_state,
    equal_up_to_global_phase,
    measure,
    measure_slot,
)
from .gates import (
    BasisCandidate,
    GateCatalogEntry,
    basis_candidate,
    catalog,
    catalog_fingerprint,
    conditional_gate,
    conversion_gate,
    hdbb84_phi_gate,
    hdbb84_psi_prep,
    qid_gate_bb84,
    qid_gate_hdbb84,
    qid_gate_ssp,
    standard_gate,
    validate_basis_candidate,
    validate_catalog,
)
from .protocols import (
    BB84,
    HDBB84,
    PROTOCOLS,
    SSP,
    EveModel,
    ProtocolSpec,
    Scenario,
    SiftedKey,
    Transcript,
    run_experiment,
    run_trial,
    sift,
)

__all__ = [
    "AggregateStats",
    "BB84",
    "BasisCandidate",
    "ConfigError",
    "ContractError",
    "EveModel",
    "GateCatalogEntry",
    "HDBB84",
    "PROTOCOLS",
    "ProtocolSpec",
    "RandomSource",
    "Register",
    "SSP",
    "Scenario",
    "SiftedKey",
    "SimulationError",
    "Transcript",
    "TrialResult",
    "ValidationError",
    "aggregate",
    "apply",
    "apply_to_slot",
    "basis_candidate",
    "basis_state",
    "catalog",
    "catalog_fingerprint",
    "conditional_gate",
    "conversion_gate",
    "detection_probability",
    "equal_up_to_global_phase",
    "hdbb84_phi_gate",
    "hdbb84_psi_prep",
    "knowledge",
    "measure",
    "measure_slot",
    "qber",
    "qid_gate_bb84",
    "qid_gate_hdbb84",
    "qid_gate_ssp",
    "run_experiment",
    "run_trial",
    "sift",
    "standard_gate",
    "validate_basis_candidate",
    "validate_catalog",
]
