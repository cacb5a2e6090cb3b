"""Classical secret sharing over the quantum resource.

The dealer measures qubit 0 in Z or Y; access of a player subset is the
Holevo quantity of the conditional reduced states.  Key sessions run the
triplet retrieval with feedforward and sift on matching basis choices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .graphs import canonical_resource
from .linalg import (
    BASIS_EIGENSTATES,
    DensityMatrix,
    PAULI_X,
    PAULI_Z,
    StateVector,
    apply_single_qubit_dm,
    project_qubit,
    project_qubit_dm,
    _partial_trace_raw,
)
from .measures import ClassicalQuantumEnsemble, holevo_chi
from .noise import NoiseSpec, apply_noise

DEALER_BASES = ("Z", "Y")
PLAYERS = (1, 2, 3, 4)

SINGLETONS = tuple((p,) for p in PLAYERS)
ADJACENT_PAIRS = ((1, 3), (1, 4), (2, 3), (2, 4))
OPPOSITE_PAIRS = ((1, 2), (3, 4))
TRIPLETS = ((1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4))

# Retrieval roles per triplet: (designated, Z-helper, X-helper).  The base
# assignment for (1,2,4) propagates to the other triplets along the square's
# cyclic automorphism 1 -> 3 -> 2 -> 4 -> 1.
TRIPLET_ROLES = {
    (1, 2, 4): (1, 2, 4),
    (2, 3, 4): (4, 3, 2),
    (1, 2, 3): (2, 1, 3),
    (1, 3, 4): (3, 4, 1),
}

# Correction applied to the designated qubit given helper outcomes (s_z, s_x):
# X^{s_z} (XZ)^{s_x} Z, as a matrix product acting right to left.
def retrieval_correction(s_z: int, s_x: int) -> np.ndarray:
    out = PAULI_Z.copy()
    if s_x:
        out = (PAULI_X @ PAULI_Z) @ out
    if s_z:
        out = PAULI_X @ out
    return out


@dataclass(frozen=True)
class AccessVerdict:
    """Access classification of one player subset from both dealer bases."""

    subset: tuple
    chi_z: float
    chi_y: float
    classification: str


def all_player_subsets():
    for size in range(1, 5):
        yield from itertools.combinations(PLAYERS, size)


def dealer_measure(state: StateVector, basis: str, rng: np.random.Generator):
    """Measure the dealer qubit; returns (bit, post-measurement player state).

    Bit 0 is the +1 eigenstate of the chosen Pauli.
    """
    if basis not in DEALER_BASES:
        raise ValueError(f"dealer basis must be one of {DEALER_BASES}")
    if state.n != 5:
        raise ValueError("dealer_measure expects the 5-qubit resource")
    e0, e1 = BASIS_EIGENSTATES[basis]
    p0, post0 = project_qubit(state.amplitudes, 0, e0, 5)
    if rng.random() < p0:
        bit, eig, post = 0, e0, post0
    else:
        p1, post1 = project_qubit(state.amplitudes, 0, e1, 5)
        if post1 is None:
            raise RuntimeError("zero-probability branch requested")
        bit, eig, post = 1, e1, post1
    players = eig.conj() @ post.reshape(2, 16)
    return bit, StateVector(players)


def ensemble_for(subset, basis: str, state: DensityMatrix) -> ClassicalQuantumEnsemble:
    """Conditional reduced states of `subset` given the dealer's outcome."""
    subset = tuple(sorted(set(subset)))
    if not subset or any(p not in PLAYERS for p in subset):
        raise ValueError(f"subset {subset} must be a nonempty set of players 1..4")
    if basis not in DEALER_BASES:
        raise ValueError(f"dealer basis must be one of {DEALER_BASES}")
    items = []
    for bit in (0, 1):
        eig = BASIS_EIGENSTATES[basis][bit]
        p, post = project_qubit_dm(state.entries, 0, eig, 5)
        red = _partial_trace_raw(post, 5, sorted(subset))
        items.append((p, DensityMatrix(red)))
    return ClassicalQuantumEnsemble(tuple(items))


def classify_access(state: DensityMatrix, tol: float = 1e-6):
    """Access verdict for all 15 nonempty player subsets."""
    if state.n != 5:
        raise ValueError("classify_access expects the 5-qubit resource")
    verdicts = []
    for subset in all_player_subsets():
        chis = {}
        for basis in DEALER_BASES:
            chis[basis] = holevo_chi(ensemble_for(subset, basis, state))
        chi_z, chi_y = chis["Z"], chis["Y"]
        if min(chi_z, chi_y) >= 1 - tol:
            cls = "authorized"
        elif max(chi_z, chi_y) <= tol:
            cls = "unauthorized"
        else:
            cls = "partial"
        verdicts.append(AccessVerdict(subset, chi_z, chi_y, cls))
    return verdicts


@dataclass
class CqRound:
    dealer_basis: str
    guess: str
    dealer_bit: int
    helper_bits: tuple
    player_bit: int
    kept: bool


@dataclass
class CqSessionResult:
    sifted_key_bits: list
    qber_same_basis: float
    qber_cross_basis: float
    transcript: dict


def _branch_distribution(rho5: np.ndarray, triplet, guess: str):
    """Joint Born probabilities over (dealer_bit, s_z, s_x, raw_player_bit).

    The dealer factor is measured last here; the operators commute so the
    distribution matches the protocol's actual announcement order.
    """
    designated, z_helper, x_helper = TRIPLET_ROLES[tuple(sorted(triplet))]
    probs = np.zeros((2, 2, 2, 2, 2))  # dealer basis Z/Y, i, s_z, s_x, raw
    for bi, basis in enumerate(DEALER_BASES):
        for i in (0, 1):
            p_i, post_i = project_qubit_dm(rho5.copy(), 0, BASIS_EIGENSTATES[basis][i], 5)
            if post_i is None:
                continue
            for s_z in (0, 1):
                p_z, post_z = project_qubit_dm(
                    post_i, z_helper, BASIS_EIGENSTATES["Z"][s_z], 5
                )
                if post_z is None:
                    continue
                for s_x in (0, 1):
                    p_x, post_x = project_qubit_dm(
                        post_z, x_helper, BASIS_EIGENSTATES["X"][s_x], 5
                    )
                    if post_x is None:
                        continue
                    corr = retrieval_correction(s_z, s_x)
                    corrected = apply_single_qubit_dm(post_x, corr, designated, 5)
                    for raw in (0, 1):
                        p_r, _ = project_qubit_dm(
                            corrected, designated, BASIS_EIGENSTATES[guess][raw], 5
                        )
                        probs[bi, i, s_z, s_x, raw] = p_i * p_z * p_x * p_r
    return probs


def corrected_bit(raw: int, measured_basis: str) -> int:
    """Designated player's bit in the dealer's frame.

    The retrieval maps the dealer-player correlation onto a fixed Bell pair
    whose Y-Y correlations are inverted, so Y-basis outcomes flip.
    """
    return raw ^ 1 if measured_basis == "Y" else raw


def run_cq_session(
    rounds: int,
    noise: NoiseSpec | None = None,
    rng: np.random.Generator | None = None,
    triplet=(1, 2, 4),
) -> CqSessionResult:
    """Random-basis key session between the dealer and an authorized triplet."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    triplet = tuple(sorted(triplet))
    if triplet not in TRIPLETS:
        raise ValueError(f"{triplet} is not an authorized triplet")
    rng = np.random.default_rng() if rng is None else rng

    _, psi = canonical_resource()
    rho = psi.density()
    flip_p = 0.0
    if noise is not None:
        if noise.kind == "qber-flip":
            flip_p = noise.parameter
        else:
            rho = apply_noise(rho, noise)

    # Exact per-branch Born probabilities for each (dealer basis, guess) pair.
    dists = {guess: _branch_distribution(rho.entries, triplet, guess) for guess in DEALER_BASES}

    basis_idx = rng.integers(0, 2, size=rounds)
    guess_idx = rng.integers(0, 2, size=rounds)
    flips = rng.random(rounds) < flip_p if flip_p > 0 else np.zeros(rounds, dtype=bool)

    sifted = []
    rounds_log = []
    same = [0, 0]  # errors, total
    cross = [0, 0]
    for k in range(rounds):
        basis = DEALER_BASES[basis_idx[k]]
        guess = DEALER_BASES[guess_idx[k]]
        table = dists[guess][basis_idx[k]].reshape(-1)
        branch = rng.choice(16, p=table / table.sum())
        i, s_z, s_x, raw = (branch >> 3) & 1, (branch >> 2) & 1, (branch >> 1) & 1, branch & 1
        bit = corrected_bit(raw, guess)
        if flips[k]:
            bit ^= 1
        kept = basis == guess
        if kept:
            sifted.append(i)
            same[1] += 1
            same[0] += int(bit != i)
        else:
            cross[1] += 1
            cross[0] += int(bit != i)
        rounds_log.append(
            CqRound(basis, guess, int(i), (int(s_z), int(s_x)), int(bit), kept)
        )

    qber_same = same[0] / same[1] if same[1] else float("nan")
    qber_cross = cross[0] / cross[1] if cross[1] else float("nan")
    transcript = {
        "protocol": "CQ",
        "triplet": list(triplet),
        "rounds": rounds,
        "noise": None if noise is None else [noise.kind, noise.parameter],
        "round_records": [
            [r.dealer_basis, r.guess, r.dealer_bit, list(r.helper_bits), r.player_bit, r.kept]
            for r in rounds_log
        ],
    }
    return CqSessionResult(sifted, qber_same, qber_cross, transcript)


def qber_superoperator(e: ClassicalQuantumEnsemble, p: float) -> ClassicalQuantumEnsemble:
    """Mix each conditional state with its bit-flipped partner at rate p."""
    (p0, r0), (p1, r1) = e.items
    m0 = DensityMatrix((1 - p) * r0.entries + p * r1.entries)
    m1 = DensityMatrix((1 - p) * r1.entries + p * r0.entries)
    return ClassicalQuantumEnsemble(((p0, m0), (p1, m1)))


SECURE_QBER_BOUND = 0.11
