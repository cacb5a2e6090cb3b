"""Dense complex linear algebra for small multi-qubit systems.

States, operators, partial trace, Hermitian eigendecomposition, entropies
and fidelities, all capped at 6 qubits.  Qubit 0 is the leftmost tensor
factor, i.e. the most significant bit of a computational basis index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 6

NORM_ATOL = 1e-10
HERM_ATOL = 1e-10
EIG_FLOOR = -1e-9

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULIS = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

KET_0 = np.array([1, 0], dtype=complex)
KET_1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
KET_PLUS_Y = np.array([1, 1j], dtype=complex) / np.sqrt(2)
KET_MINUS_Y = np.array([1, -1j], dtype=complex) / np.sqrt(2)

# Eigenvector pairs per measurement basis; slot 0 is the +1 eigenstate and
# measurement outcome bit 0.
BASIS_EIGENSTATES = {
    "Z": (KET_0, KET_1),
    "X": (KET_PLUS, KET_MINUS),
    "Y": (KET_PLUS_Y, KET_MINUS_Y),
}

# Single-factor product table: _PROD[a][b] = (phase, label) with ab = phase * label.
_PROD = {
    "I": {"I": (1, "I"), "X": (1, "X"), "Y": (1, "Y"), "Z": (1, "Z")},
    "X": {"I": (1, "X"), "X": (1, "I"), "Y": (1j, "Z"), "Z": (-1j, "Y")},
    "Y": {"I": (1, "Y"), "X": (-1j, "Z"), "Y": (1, "I"), "Z": (1j, "X")},
    "Z": {"I": (1, "Z"), "X": (1j, "Y"), "Y": (-1j, "X"), "Z": (1, "I")},
}


class CapacityError(ValueError):
    """Raised when an operation would exceed the 6-qubit cap."""


def _check_qubits(n: int) -> None:
    if n > MAX_QUBITS:
        raise CapacityError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit cap")


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of n qubits as a normalized complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        n = int(round(np.log2(amps.size)))
        if 2**n != amps.size:
            raise ValueError(f"amplitude vector length {amps.size} is not a power of 2")
        _check_qubits(n)
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"state vector is not normalized (|norm-1| = {abs(norm - 1.0):.2e})")
        # Tighten to exact unit norm so downstream checks hold at 1e-10.
        amps = amps / norm
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n(self) -> int:
        return int(round(np.log2(self.amplitudes.size)))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    @staticmethod
    def computational(n: int, index: int) -> "StateVector":
        _check_qubits(n)
        amps = np.zeros(2**n, dtype=complex)
        amps[index] = 1.0
        return StateVector(amps)

    @staticmethod
    def plus_states(n: int) -> "StateVector":
        _check_qubits(n)
        return StateVector(np.full(2**n, 2 ** (-n / 2), dtype=complex))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Mixed state of n qubits: Hermitian, unit-trace, PSD up to -1e-9 slack."""

    entries: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("density matrix must be square")
        n = int(round(np.log2(mat.shape[0])))
        if 2**n != mat.shape[0]:
            raise ValueError("density matrix dimension is not a power of 2")
        _check_qubits(n)
        if np.max(np.abs(mat - mat.conj().T)) > HERM_ATOL:
            raise ValueError("density matrix is not Hermitian within 1e-10")
        if abs(np.trace(mat).real - 1.0) > 1e-8 or abs(np.trace(mat).imag) > HERM_ATOL:
            raise ValueError("density matrix trace is not 1")
        evals = np.linalg.eigvalsh(mat)
        if evals.min() < EIG_FLOOR:
            raise ValueError(f"density matrix has eigenvalue {evals.min():.2e} < -1e-9")
        mat = mat / np.trace(mat).real
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

    @property
    def n(self) -> int:
        return int(round(np.log2(self.entries.shape[0])))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @staticmethod
    def from_state(psi: StateVector) -> "DensityMatrix":
        return psi.density()

    @staticmethod
    def maximally_mixed(n: int) -> "DensityMatrix":
        _check_qubits(n)
        return DensityMatrix(np.eye(2**n, dtype=complex) / 2**n)


@dataclass(frozen=True)
class PauliString:
    """Signed n-qubit tensor product of Pauli factors.

    `factors` is a string over {I, X, Y, Z}; `sign` is one of {1, -1, 1j, -1j}.
    Hermitian exactly when the sign is real.
    """

    factors: str
    sign: complex = 1

    def __post_init__(self):
        if not self.factors or any(c not in "IXYZ" for c in self.factors):
            raise ValueError(f"invalid Pauli factors {self.factors!r}")
        _check_qubits(len(self.factors))
        if self.sign not in (1, -1, 1j, -1j):
            raise ValueError(f"sign must be a fourth root of unity, got {self.sign!r}")
        object.__setattr__(self, "sign", complex(self.sign))

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def hermitian(self) -> bool:
        return self.sign.imag == 0

    @property
    def weight(self) -> int:
        return sum(1 for c in self.factors if c != "I")

    def matrix(self) -> np.ndarray:
        out = np.array([[self.sign]], dtype=complex)
        for c in self.factors:
            out = np.kron(out, PAULIS[c])
        return out

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise ValueError("Pauli string lengths differ")
        phase = self.sign * other.sign
        labels = []
        for a, b in zip(self.factors, other.factors):
            p, lab = _PROD[a][b]
            phase *= p
            labels.append(lab)
        return PauliString("".join(labels), phase)

    def __str__(self) -> str:
        prefix = {1 + 0j: "+", -1 + 0j: "-", 1j: "+i", -1j: "-i"}[self.sign]
        return prefix + self.factors


def kron(a, b):
    """Tensor product; qubit indices of `a` precede those of `b`."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        _check_qubits(a.n + b.n)
        return StateVector(np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        _check_qubits(a.n + b.n)
        return DensityMatrix(np.kron(a.entries, b.entries))
    if isinstance(a, PauliString) and isinstance(b, PauliString):
        _check_qubits(a.n + b.n)
        return PauliString(a.factors + b.factors, a.sign * b.sign)
    a_arr = np.asarray(a, dtype=complex)
    b_arr = np.asarray(b, dtype=complex)
    combined = int(round(np.log2(a_arr.shape[0]))) + int(round(np.log2(b_arr.shape[0])))
    _check_qubits(combined)
    return np.kron(a_arr, b_arr)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out all qubits not in `keep`; kept qubits stay in sorted order."""
    keep = sorted(set(keep))
    n = rho.n
    if not keep:
        raise ValueError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep indices {keep} out of range for {n} qubits")
    return DensityMatrix(_partial_trace_raw(rho.entries, n, keep))


def _partial_trace_raw(mat: np.ndarray, n: int, keep: list) -> np.ndarray:
    # Contract highest qubits first so lower axis indices stay valid.
    traced = sorted((q for q in range(n) if q not in keep), reverse=True)
    t = mat.reshape([2] * (2 * n))
    remaining = n
    for q in traced:
        t = np.trace(t, axis1=q, axis2=q + remaining)
        remaining -= 1
    d = 2 ** len(keep)
    return t.reshape(d, d)


def hermitian_eig(h):
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending."""
    mat = h.entries if isinstance(h, DensityMatrix) else np.asarray(h, dtype=complex)
    if np.max(np.abs(mat - mat.conj().T)) > 1e-8:
        raise ValueError("input is not Hermitian within 1e-8")
    evals, evecs = np.linalg.eigh(mat)
    order = np.argsort(evals)[::-1]
    return evals[order].real, evecs[:, order]


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy in bits, with 0*log(0) = 0 and tiny negative eigenvalues clamped."""
    evals = np.linalg.eigvalsh(rho.entries)
    evals = np.clip(evals, 0.0, None)
    nz = evals[evals > 0]
    return float(-(nz * np.log2(nz)).sum())


def fidelity_pure(psi: StateVector, rho: DensityMatrix) -> float:
    """Overlap <psi|rho|psi> of a pure target with a (possibly mixed) state."""
    if psi.dim != rho.dim:
        raise ValueError(f"dimension mismatch: {psi.dim} vs {rho.dim}")
    val = psi.amplitudes.conj() @ rho.entries @ psi.amplitudes
    return float(val.real)


def expectation(rho: DensityMatrix, p: PauliString) -> float:
    """Tr(rho * P) for a Hermitian Pauli string."""
    if not p.hermitian:
        raise ValueError("expectation requires a Hermitian Pauli string (real sign)")
    if p.n != rho.n:
        raise ValueError(f"qubit count mismatch: {p.n} vs {rho.n}")
    val = np.trace(rho.entries @ p.matrix())
    if abs(val.imag) > 1e-9:
        raise ValueError(f"expectation has imaginary part {val.imag:.2e}")
    return float(val.real)


# ---------------------------------------------------------------------------
# Raw-array helpers used by the protocol modules.  These operate on plain
# numpy vectors/matrices so hot loops avoid re-validating wrapper invariants.


def apply_single_qubit(amps: np.ndarray, u: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Apply a 2x2 operator to one qubit of an n-qubit state vector."""
    t = amps.reshape([2] * n)
    t = np.tensordot(u, t, axes=([1], [qubit]))
    t = np.moveaxis(t, 0, qubit)
    return t.reshape(-1)


def apply_single_qubit_dm(mat: np.ndarray, u: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Conjugate one qubit of an n-qubit density matrix by a 2x2 operator."""
    t = mat.reshape([2] * (2 * n))
    t = np.tensordot(u, t, axes=([1], [qubit]))
    t = np.moveaxis(t, 0, qubit)
    t = np.tensordot(u.conj(), t, axes=([1], [n + qubit]))
    t = np.moveaxis(t, 0, n + qubit)
    return t.reshape(mat.shape)


def apply_two_qubit_dm(mat: np.ndarray, u: np.ndarray, qa: int, qb: int, n: int) -> np.ndarray:
    """Conjugate two qubits of an n-qubit density matrix by a 4x4 operator."""
    t = mat.reshape([2] * (2 * n))
    u_t = u.reshape(2, 2, 2, 2)
    t = np.tensordot(u_t, t, axes=([2, 3], [qa, qb]))
    t = np.moveaxis(t, [0, 1], [qa, qb])
    t = np.tensordot(u_t.conj(), t, axes=([2, 3], [n + qa, n + qb]))
    t = np.moveaxis(t, [0, 1], [n + qa, n + qb])
    return t.reshape(mat.shape)


def apply_pauli(amps: np.ndarray, p: PauliString) -> np.ndarray:
    """Apply a signed Pauli string to a state vector."""
    out = amps.copy()
    n = p.n
    for q, c in enumerate(p.factors):
        if c != "I":
            out = apply_single_qubit(out, PAULIS[c], q, n)
    return out * p.sign


def cz(amps: np.ndarray, u: int, v: int, n: int) -> np.ndarray:
    """Controlled-phase gate between qubits u and v of a state vector."""
    out = amps.copy()
    idx = np.arange(out.size)
    bu = (idx >> (n - 1 - u)) & 1
    bv = (idx >> (n - 1 - v)) & 1
    out[(bu & bv) == 1] *= -1
    return out


def project_qubit(amps: np.ndarray, qubit: int, eigvec: np.ndarray, n: int):
    """Project one qubit onto `eigvec`; returns (probability, normalized post-state).

    The projected qubit is kept in place (its state becomes `eigvec`).
    """
    proj = np.outer(eigvec, eigvec.conj())
    post = apply_single_qubit(amps, proj, qubit, n)
    p = float(np.vdot(post, post).real)
    if p < 1e-14:
        return 0.0, None
    return p, post / np.sqrt(p)


def project_qubit_dm(mat: np.ndarray, qubit: int, eigvec: np.ndarray, n: int):
    """Density-matrix version of `project_qubit`."""
    proj = np.outer(eigvec, eigvec.conj())
    post = apply_single_qubit_dm(mat, proj, qubit, n)
    p = float(np.trace(post).real)
    if p < 1e-14:
        return 0.0, None
    return p, post / p


def measure_qubit_dm(mat: np.ndarray, qubit: int, basis: str, n: int, rng: np.random.Generator):
    """Sample a Pauli-basis measurement of one qubit of a density matrix.

    Returns (bit, probability_of_bit, post_state); bit 0 is the +1 eigenstate.
    """
    e0, e1 = BASIS_EIGENSTATES[basis]
    p0, post0 = project_qubit_dm(mat, qubit, e0, n)
    if rng.random() < p0:
        return 0, p0, post0
    p1, post1 = project_qubit_dm(mat, qubit, e1, n)
    return 1, p1, post1


def align_global_phase(amps: np.ndarray) -> np.ndarray:
    """Rotate a global phase so the largest-magnitude amplitude is real positive."""
    k = int(np.argmax(np.abs(amps)))
    ph = amps[k] / abs(amps[k])
    return amps / ph


def states_equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-9) -> bool:
    """Ray equality: compare after aligning each state's global phase."""
    return bool(np.max(np.abs(align_global_phase(a) - align_global_phase(b))) <= atol)
