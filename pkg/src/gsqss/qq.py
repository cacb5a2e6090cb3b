"""Quantum secret sharing: encoding, retrieval, pair analysis and tomography.

A secret qubit alpha|0> + beta|1> is carried by the players' four-qubit state
alpha|phi> + beta|phi'> where |phi> is the square graph state and
|phi'> = Z1 Z2 Z3 Z4 |phi>.  Logical operators on that code space:
Z1 Z2 Z3 Z4 acts as logical X (it swaps |phi> and |phi'>) and Z1 Z2 X3 I4
acts as logical Z (it fixes |phi> and negates |phi'>).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import canonical_resource, square_graph_state
from .linalg import (
    BASIS_EIGENSTATES,
    DensityMatrix,
    KET_0,
    KET_1,
    PAULIS,
    PauliString,
    StateVector,
    apply_pauli,
    apply_single_qubit,
    apply_single_qubit_dm,
    fidelity_pure,
    hermitian_eig,
    project_qubit,
    project_qubit_dm,
    states_equal_up_to_phase,
    _partial_trace_raw,
)
from .cq import ADJACENT_PAIRS, OPPOSITE_PAIRS, TRIPLETS, TRIPLET_ROLES, retrieval_correction
from .noise import NoiseSpec, apply_noise

LOGICAL_X = PauliString("ZZZZ")
LOGICAL_Z = PauliString("ZZXI")

PLANES = ("zy", "zx", "xy")


@dataclass(frozen=True)
class SecretQubit:
    """Bloch-sphere parametrization: alpha = cos(theta/2), beta = e^{i phi} sin(theta/2)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi + 1e-12:
            raise ValueError(f"theta {self.theta} outside [0, pi]")
        object.__setattr__(self, "phi", float(self.phi) % (2 * np.pi))

    @property
    def alpha(self) -> complex:
        return complex(np.cos(self.theta / 2))

    @property
    def beta(self) -> complex:
        return np.exp(1j * self.phi) * np.sin(self.theta / 2)

    def amplitudes(self) -> np.ndarray:
        return np.array([self.alpha, self.beta], dtype=complex)

    def bloch(self) -> np.ndarray:
        return np.array(
            [
                np.sin(self.theta) * np.cos(self.phi),
                np.sin(self.theta) * np.sin(self.phi),
                np.cos(self.theta),
            ]
        )

    def density(self) -> np.ndarray:
        a = self.amplitudes()
        return np.outer(a, a.conj())

    @staticmethod
    def from_bloch(vec) -> "SecretQubit":
        x, y, z = np.asarray(vec, dtype=float)
        theta = float(np.arccos(np.clip(z, -1.0, 1.0)))
        phi = float(np.arctan2(y, x)) % (2 * np.pi) if abs(np.sin(theta)) > 1e-12 else 0.0
        return SecretQubit(theta, phi)


CARDINAL_SECRETS = {
    "0": SecretQubit(0.0, 0.0),
    "1": SecretQubit(np.pi, 0.0),
    "+": SecretQubit(np.pi / 2, 0.0),
    "-": SecretQubit(np.pi / 2, np.pi),
    "+y": SecretQubit(np.pi / 2, np.pi / 2),
    "-y": SecretQubit(np.pi / 2, 3 * np.pi / 2),
}

PROBE_SECRETS = {k: CARDINAL_SECRETS[k] for k in ("0", "1", "+", "+y")}


def _code_states():
    phi = square_graph_state().amplitudes
    phi_prime = apply_pauli(phi, PauliString("ZZZZ"))
    return phi, phi_prime


_PHI, _PHI_PRIME = _code_states()


def encode_amplitudes(alpha: complex, beta: complex) -> np.ndarray:
    """Players' four-qubit state alpha|phi> + beta|phi'>."""
    return alpha * _PHI + beta * _PHI_PRIME


def encoded_state(secret: SecretQubit) -> StateVector:
    return StateVector(encode_amplitudes(secret.alpha, secret.beta))


def _check_canonical(resource: StateVector | None) -> StateVector:
    _, psi = canonical_resource()
    if resource is None:
        return psi
    if resource.n != 5 or not states_equal_up_to_phase(
        resource.amplitudes, psi.amplitudes, 1e-9
    ):
        raise ValueError("resource must be the canonical 5-qubit state")
    return psi


def qq_encode_direct(
    secret: SecretQubit,
    resource: StateVector | None = None,
    rng: np.random.Generator | None = None,
):
    """Direct encoding: qubit 0 prepared in the secret, measured in X.

    The feedforward (Z1 Z2 X3 I4)^{s0} is the logical-Z correction for the
    |-> branch.  Returns (players_state, s0).
    """
    _check_canonical(resource)
    rng = np.random.default_rng() if rng is None else rng
    pre = np.kron(KET_0, _PHI) * secret.alpha + np.kron(KET_1, _PHI_PRIME) * secret.beta
    s0 = int(rng.random() < 0.5)
    eig = BASIS_EIGENSTATES["X"][s0]
    _, post = project_qubit(pre, 0, eig, 5)
    players = eig.conj() @ post.reshape(2, 16)
    players /= np.linalg.norm(players)
    if s0:
        players = apply_pauli(players, LOGICAL_Z)
    return StateVector(players), s0


BELL_OUTCOMES = ((0, 0), (0, 1), (1, 0), (1, 1))


def bell_state(a: int, b: int) -> np.ndarray:
    """|beta_ab> = (|0>|b> + (-1)^a |1>|1 xor b>) / sqrt(2)."""
    k = [KET_0, KET_1]
    return (np.kron(KET_0, k[b]) + (-1) ** a * np.kron(KET_1, k[1 - b])) / np.sqrt(2)


def teleport_correction(a: int, b: int) -> PauliString:
    """Players' logical correction for Bell outcome (a, b): Z_L^a X_L^b."""
    corr = PauliString("IIII")
    if b:
        corr = corr * LOGICAL_X
    if a:
        corr = LOGICAL_Z * corr
    return corr


def qq_encode_teleport(
    secret: SecretQubit,
    resource: StateVector | None = None,
    rng: np.random.Generator | None = None,
):
    """Teleportation encoding via a Bell measurement of (secret, dealer qubit).

    Returns (players_state, (a, b)); after the correction the state equals the
    direct encoding up to global phase for every outcome.
    """
    psi = _check_canonical(resource)
    rng = np.random.default_rng() if rng is None else rng
    joint = np.kron(secret.amplitudes(), psi.amplitudes)  # secret, dealer, players
    t = joint.reshape(4, 16)
    branches = []
    for a, b in BELL_OUTCOMES:
        players = bell_state(a, b).conj() @ t
        branches.append(float(np.vdot(players, players).real))
    idx = rng.choice(4, p=np.asarray(branches) / sum(branches))
    a, b = BELL_OUTCOMES[idx]
    players = bell_state(a, b).conj() @ t
    players /= np.linalg.norm(players)
    players = apply_pauli(players, teleport_correction(a, b))
    return StateVector(players), (a, b)


def retrieve_branches(triplet, encoded: np.ndarray):
    """All helper-outcome branches of the triplet retrieval on a 16x16 state.

    Returns [(probability, (s_z, s_x), recovered 2x2 density matrix), ...].
    Player k occupies qubit k-1 of the encoded register.
    """
    triplet = tuple(sorted(triplet))
    if triplet not in TRIPLETS:
        raise ValueError(f"{triplet} is not an authorized triplet")
    designated, z_helper, x_helper = TRIPLET_ROLES[triplet]
    out = []
    for s_z in (0, 1):
        p_z, post_z = project_qubit_dm(encoded, z_helper - 1, BASIS_EIGENSTATES["Z"][s_z], 4)
        if post_z is None:
            continue
        for s_x in (0, 1):
            p_x, post_x = project_qubit_dm(post_z, x_helper - 1, BASIS_EIGENSTATES["X"][s_x], 4)
            if post_x is None:
                continue
            corr = retrieval_correction(s_z, s_x)
            corrected = apply_single_qubit_dm(post_x, corr, designated - 1, 4)
            recovered = _partial_trace_raw(corrected, 4, [designated - 1])
            out.append((p_z * p_x, (s_z, s_x), recovered))
    return out


def qq_retrieve(triplet, encoded, rng: np.random.Generator | None = None) -> DensityMatrix:
    """Sample helper outcomes and return the designated player's recovered qubit."""
    rng = np.random.default_rng() if rng is None else rng
    mat = encoded.density().entries if isinstance(encoded, StateVector) else encoded.entries
    branches = retrieve_branches(triplet, mat)
    probs = np.array([p for p, _, _ in branches])
    idx = rng.choice(len(branches), p=probs / probs.sum())
    return DensityMatrix(branches[idx][2])


def retrieve_average(triplet, encoded: np.ndarray) -> np.ndarray:
    """Outcome-averaged retrieval channel output (2x2 matrix)."""
    return sum(p * dm for p, _, dm in retrieve_branches(triplet, encoded))


# --- pair access analysis ------------------------------------------------


def pair_class(pair) -> str:
    pair = tuple(sorted(pair))
    if pair in ADJACENT_PAIRS:
        return "adjacent"
    if pair in OPPOSITE_PAIRS:
        return "opposite"
    raise ValueError(f"{pair} is not a player pair")


def pair_reduced_state(pair, secret: SecretQubit) -> DensityMatrix:
    """Two players' joint state for a given encoded secret (qubits sorted)."""
    pair = tuple(sorted(pair))
    pair_class(pair)
    st = encode_amplitudes(secret.alpha, secret.beta)
    dm = np.outer(st, st.conj())
    return DensityMatrix(_partial_trace_raw(dm, 4, [p - 1 for p in pair]))


def adjacent_pair_closed_form(secret: SecretQubit) -> DensityMatrix:
    """Block mixture over the first player's X basis; depends only on <X>.

    1/4 [ |+><+| (x) (Z psi Z + XZ psi ZX) + |-><-| (x) (X psi X + psi) ].
    """
    p = secret.density()
    X, Z = PAULIS["X"], PAULIS["Z"]
    plus = np.outer(BASIS_EIGENSTATES["X"][0], BASIS_EIGENSTATES["X"][0].conj())
    minus = np.outer(BASIS_EIGENSTATES["X"][1], BASIS_EIGENSTATES["X"][1].conj())
    block_plus = Z @ p @ Z + X @ Z @ p @ Z @ X
    block_minus = X @ p @ X + p
    return DensityMatrix(0.25 * (np.kron(plus, block_plus) + np.kron(minus, block_minus)))


def opposite_pair_closed_form(secret: SecretQubit) -> DensityMatrix:
    """1/2 [ |A><A| + |B><B| + i sin(theta) sin(phi) (|A><B| - |B><A|) ]."""
    plus, minus = BASIS_EIGENSTATES["X"]
    A = (np.kron(plus, plus) + np.kron(minus, minus)) / np.sqrt(2)
    B = (np.kron(plus, plus) - np.kron(minus, minus)) / np.sqrt(2)
    y = np.sin(secret.theta) * np.sin(secret.phi)
    mat = 0.5 * (
        np.outer(A, A.conj())
        + np.outer(B, B.conj())
        + 1j * y * (np.outer(A, B.conj()) - np.outer(B, A.conj()))
    )
    return DensityMatrix(mat)


def pair_closed_form(pair, secret: SecretQubit) -> DensityMatrix:
    return (
        adjacent_pair_closed_form(secret)
        if pair_class(pair) == "adjacent"
        else opposite_pair_closed_form(secret)
    )


def opposite_pair_retrieve_branches(pair, secret: SecretQubit):
    """Partial retrieval by an opposite pair: Z on the lower player, then
    Z^{s xor 1} on the partner.  Yields (prob, s, partner 2x2 state)."""
    pair = tuple(sorted(pair))
    if pair_class(pair) != "opposite":
        raise ValueError(f"{pair} is not an opposite pair")
    a, b = pair
    st = encode_amplitudes(secret.alpha, secret.beta)
    dm = np.outer(st, st.conj())
    out = []
    for s in (0, 1):
        p, post = project_qubit_dm(dm, a - 1, BASIS_EIGENSTATES["Z"][s], 4)
        if post is None:
            continue
        if s == 0:
            post = apply_single_qubit_dm(post, PAULIS["Z"], b - 1, 4)
        out.append((p, s, _partial_trace_raw(post, 4, [b - 1])))
    return out


# --- channels and tomography ---------------------------------------------

_BALL_SAMPLE = None


def _ball_sample() -> np.ndarray:
    global _BALL_SAMPLE
    if _BALL_SAMPLE is None:
        # Deterministic spread of unit vectors (spherical Fibonacci lattice).
        k = np.arange(64)
        z = 1 - (2 * k + 1) / 64
        r = np.sqrt(1 - z**2)
        th = np.pi * (1 + 5**0.5) * k
        _BALL_SAMPLE = np.stack([r * np.cos(th), r * np.sin(th), z], axis=1)
    return _BALL_SAMPLE


@dataclass(frozen=True)
class BlochChannel:
    """Affine Bloch-ball map r -> M r + t of a single-qubit channel."""

    affine_matrix: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.affine_matrix, dtype=float).reshape(3, 3)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        images = _ball_sample() @ m.T + t
        worst = float(np.linalg.norm(images, axis=1).max())
        if worst > 1 + 1e-6:
            raise ValueError(f"affine map sends the Bloch ball outside itself ({worst:.6f})")
        m.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "affine_matrix", m)
        object.__setattr__(self, "translation", t)

    def apply(self, vec) -> np.ndarray:
        return self.affine_matrix @ np.asarray(vec, dtype=float) + self.translation


def _bloch_of(dm: np.ndarray) -> np.ndarray:
    return np.array(
        [float(np.trace(dm @ PAULIS[c]).real) for c in "XYZ"]
    )


def chi_matrix(channel: BlochChannel) -> np.ndarray:
    """Trace-1 process matrix in the normalized Pauli basis {I,X,Y,Z}/sqrt(2)."""
    m, t = channel.affine_matrix, channel.translation
    lam = {"I": np.eye(2, dtype=complex) + t[0] * PAULIS["X"] + t[1] * PAULIS["Y"] + t[2] * PAULIS["Z"]}
    for k, c in enumerate("XYZ"):
        lam[c] = sum(m[j, k] * PAULIS[d] for j, d in enumerate("XYZ"))
    # Choi matrix J = 1/2 sum_m Lambda(B_m) (x) conj(B_m); chi follows by
    # projecting onto the vectorized normalized Paulis.
    J = np.zeros((4, 4), dtype=complex)
    for c in "IXYZ":
        J += 0.5 * np.kron(lam[c], PAULIS[c].conj())
    vecs = [PAULIS[c].reshape(-1) / np.sqrt(2) for c in "IXYZ"]
    chi = np.array([[v1.conj() @ (J / 2) @ v2 for v2 in vecs] for v1 in vecs])
    return chi


def process_fidelity(channel: BlochChannel, ideal: str) -> float:
    """Fidelity of the reconstructed process matrix with a named ideal channel.

    `ideal` is "identity" or "depolarizing" (the fully mixing channel).
    """
    chi = chi_matrix(channel)
    if ideal == "identity":
        return float(chi[0, 0].real)
    if ideal == "depolarizing":
        evals, _ = hermitian_eig(chi)
        return float((np.sqrt(np.clip(evals, 0, None)).sum()) ** 2 / 4)
    raise ValueError(f"unknown ideal channel {ideal!r}")


def channel_tomography(channel, probes=None, ideal: str = "identity"):
    """Reconstruct the affine Bloch map of `channel` from four probe secrets.

    `channel` maps SecretQubit -> 2x2 density matrix (numpy).  Returns
    (BlochChannel, process_fidelity vs the named ideal channel, average
    fidelity over the six cardinal secrets).
    """
    probes = PROBE_SECRETS if probes is None else probes
    out = {name: _bloch_of(np.asarray(channel(sec))) for name, sec in probes.items()}
    t = (out["0"] + out["1"]) / 2
    m = np.column_stack([out["+"] - t, out["+y"] - t, (out["0"] - out["1"]) / 2])
    bloch = BlochChannel(m, t)
    fp = process_fidelity(bloch, ideal)
    avg = float(
        np.mean(
            [
                float(np.real(s.amplitudes().conj() @ np.asarray(channel(s)) @ s.amplitudes()))
                for s in CARDINAL_SECRETS.values()
            ]
        )
    )
    return bloch, fp, avg


def single_player_channel(player: int, noise: NoiseSpec | None = None):
    """Dealer-to-one-player map for the encoded secret."""
    if player not in (1, 2, 3, 4):
        raise ValueError("player must be 1..4")

    def channel(secret: SecretQubit) -> np.ndarray:
        st = encode_amplitudes(secret.alpha, secret.beta)
        dm = DensityMatrix(np.outer(st, st.conj()))
        if noise is not None:
            dm = apply_noise(dm, noise)
        return _partial_trace_raw(dm.entries, 4, [player - 1])

    return channel


def triplet_channel(triplet, noise: NoiseSpec | None = None):
    """Dealer-to-designated-player map through the triplet retrieval."""
    triplet = tuple(sorted(triplet))

    def channel(secret: SecretQubit) -> np.ndarray:
        st = encode_amplitudes(secret.alpha, secret.beta)
        dm = DensityMatrix(np.outer(st, st.conj()))
        if noise is not None:
            dm = apply_noise(dm, noise)
        return retrieve_average(triplet, dm.entries)

    return channel


def retrieval_fidelity(triplet, secret: SecretQubit, noise: NoiseSpec | None = None) -> float:
    recovered = triplet_channel(triplet, noise)(secret)
    a = secret.amplitudes()
    return float(np.real(a.conj() @ recovered @ a))


# --- Bloch-plane sweeps ---------------------------------------------------


def secret_in_plane(plane: str, angle: float) -> SecretQubit:
    if plane == "zy":
        vec = (0.0, np.sin(angle), np.cos(angle))
    elif plane == "zx":
        vec = (np.sin(angle), 0.0, np.cos(angle))
    elif plane == "xy":
        vec = (np.cos(angle), np.sin(angle), 0.0)
    else:
        raise ValueError(f"plane must be one of {PLANES}")
    return SecretQubit.from_bloch(vec)


def reference_overlap(rho: DensityMatrix, ref: DensityMatrix) -> float:
    """Normalized overlap Tr(rho sigma) / Tr(sigma^2); equals 1 at rho = sigma."""
    num = float(np.trace(rho.entries @ ref.entries).real)
    den = float(np.trace(ref.entries @ ref.entries).real)
    return num / den


def default_sweep_references(pair, plane: str):
    cls = pair_class(pair)
    I4 = np.eye(4, dtype=complex)
    XX = PauliString("XX").matrix()
    ZY = PauliString("ZY").matrix() + PauliString("YZ").matrix()
    if cls == "adjacent":
        if plane == "zy":
            return [DensityMatrix(I4 / 4)]
        return [DensityMatrix((I4 + XX) / 4), DensityMatrix((I4 - XX) / 4)]
    if plane == "zx":
        return [DensityMatrix((I4 + XX) / 4)]
    return [DensityMatrix((I4 + XX + ZY) / 4), DensityMatrix((I4 + XX - ZY) / 4)]


def plane_sweep(pair, plane: str, steps: int, references=None, pad_average: bool = False):
    """Fidelity of the pair's state against fixed references along one plane.

    Returns rows (angle_radians, [overlap per reference]).  With
    `pad_average` the four one-time-pad variants are mixed uniformly.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    pair = tuple(sorted(pair))
    refs = default_sweep_references(pair, plane) if references is None else list(references)
    from .hybrid import pad_averaged_pair_state  # local import to avoid a cycle

    rows = []
    for angle in np.linspace(0.0, 2 * np.pi, steps, endpoint=False):
        secret = secret_in_plane(plane, angle)
        rho = (
            pad_averaged_pair_state(pair, secret)
            if pad_average
            else pair_reduced_state(pair, secret)
        )
        rows.append((float(angle), [reference_overlap(rho, r) for r in refs]))
    return rows


def sweep_csv(rows, n_refs: int) -> str:
    header = "angle_radians," + ",".join(f"fidelity_ref{i+1}" for i in range(n_refs))
    lines = [header]
    for angle, vals in rows:
        lines.append(f"{angle:.12f}," + ",".join(f"{v:.12f}" for v in vals))
    return "\n".join(lines) + "\n"
