"""Graph-state quantum secret sharing: simulator and protocol engine.

Builds the five-qubit resource state, runs the CQ, QQ, hybrid and verified
(SQQ) sharing protocols among a dealer and four players, and computes the
associated access-structure and security quantities.
"""

__version__ = "0.1.0"

from .graphs import (
    GraphSpec,
    LocalComplementationRecord,
    build_graph_state,
    canonical_resource,
    local_complement,
    stabilizer_generators,
)
from .linalg import (
    CapacityError,
    DensityMatrix,
    PauliString,
    StateVector,
    expectation,
    fidelity_pure,
    hermitian_eig,
    kron,
    partial_trace,
    von_neumann_entropy,
)
from .measures import (
    ClassicalQuantumEnsemble,
    WitnessSpec,
    fidelity_via_pauli_terms,
    holevo_chi,
    mutual_information,
    witness_value,
)
from .cq import AccessVerdict, classify_access, dealer_measure, ensemble_for, run_cq_session
from .qq import (
    BlochChannel,
    SecretQubit,
    channel_tomography,
    pair_reduced_state,
    plane_sweep,
    qq_encode_direct,
    qq_encode_teleport,
    qq_retrieve,
)
from .hybrid import (
    PadBits,
    ShareBundle,
    ThresholdError,
    hybrid_encode,
    hybrid_retrieve,
    shamir_reconstruct,
    shamir_share,
)
from .sqq import SqqOutcome, TestSet, fidelity_lower_bound, pass_probability, run_sqq_session, test_set
from .noise import CountRecord, NoiseSpec, apply_noise, monte_carlo_error, sample_counts, tomography_reconstruct
from .session import Message, ProtocolTranscript, ProtocolViolation, QuantumRegistry, run_session
