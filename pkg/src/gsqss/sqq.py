"""Verified quantum secret sharing over untrusted dealer-player channels.

Each round the dealer either tests the distributed state with one of seven
stabilizer measurements (probability s) or uses it for QQ (probability 1-s).
The acceptance projector Gamma_B is rank 2; a state that passes the test
with high probability transports the secret with fidelity f >= 2P - 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cq import TRIPLETS, TRIPLET_ROLES
from .graphs import GraphSpec, build_graph_state, canonical_graph, canonical_resource
from .linalg import DensityMatrix, PauliString, StateVector, apply_pauli
from .noise import NoiseSpec, apply_noise
from .qq import (
    SecretQubit,
    bell_state,
    retrieve_branches,
    teleport_correction,
    BELL_OUTCOMES,
)

# Base test set for triplet (1, 2, 3): unsigned measurement bases on qubits
# 0..4 (identity on the idle player) and the accepted product sign.
_BASE_MEASUREMENTS = (
    ("ZZZXI", +1),
    ("YYZII", +1),
    ("YZYII", +1),
    ("XXIXI", -1),
    ("XIXXI", -1),
    ("IXXII", +1),
    ("ZYYXI", -1),
)

# Square automorphism used to relabel test sets; cyclic on players 1->3->2->4.
_CYCLE = {1: 3, 3: 2, 2: 4, 4: 1}


def _player_permutation(base, target):
    """Power of the cyclic automorphism sending triplet `base` to `target`."""
    perm = {q: q for q in range(5)}
    for _ in range(4):
        if tuple(sorted(perm[q] for q in base)) == tuple(target):
            return dict(perm)
        perm = {q: (_CYCLE[perm[q]] if perm[q] != 0 else 0) for q in perm}
    raise ValueError(f"no square automorphism maps {base} to {target}")


def _relabel(factors: str, perm: dict) -> str:
    out = ["I"] * 5
    for q, c in enumerate(factors):
        out[perm[q]] = c
    return "".join(out)


@dataclass(frozen=True)
class TestSet:
    """Seven-measurement verification test for one authorized triplet.

    `measurements` are unsigned Pauli bases; `accept_signs` give the outcome
    product that counts as a pass.  `gamma` is the rank-2 projector
    (1/8)(I + sum_i sign_i M_i) on the four measured qubits, certified at
    construction, and `gamma_full` embeds it on all five qubits.
    """

    subset: tuple
    measurements: tuple
    accept_signs: tuple
    gamma: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "gamma", self._certified_gamma())

    def _measured_qubits(self):
        return (0,) + self.subset

    def _certified_gamma(self) -> np.ndarray:
        qubits = self._measured_qubits()
        acc = np.eye(16, dtype=complex)
        for m, s in zip(self.measurements, self.accept_signs):
            sub = "".join(m.factors[q] for q in qubits)
            acc += s * PauliString(sub).matrix()
        acc /= 8
        evals = np.linalg.eigvalsh(acc)
        if np.max(np.abs(acc @ acc - acc)) > 1e-10 or abs(evals.sum() - 2) > 1e-10:
            raise RuntimeError(
                f"test-set certification failed for {self.subset}: "
                "acceptance operator is not a rank-2 projector"
            )
        return acc

    def _conjugator_qubits(self) -> tuple:
        # Z lands on the dealer, the designated player and the Z-helper; the
        # X-helper stays untouched.  This commutes with all seven measurements
        # and maps the subgraph state to an orthogonal one.
        designated, z_helper, _ = TRIPLET_ROLES[self.subset]
        return (0, designated, z_helper)

    def gamma_full(self) -> np.ndarray:
        """Rank-2 projector on the full 5-qubit space: span of the resource
        state and its invisible logical twin (a pure-Z flip on three of the
        measured qubits, equal to a Pauli error on the idle qubit)."""
        _, psi = canonical_resource()
        flip = ["I"] * 5
        for q in self._conjugator_qubits():
            flip[q] = "Z"
        twin = apply_pauli(psi.amplitudes, PauliString("".join(flip)))
        base = np.outer(psi.amplitudes, psi.amplitudes.conj())
        return base + np.outer(twin, twin.conj())

    def subgraph_state(self) -> StateVector:
        """Graph state of the induced subgraph on the measured qubits."""
        qubits = self._measured_qubits()
        pos = {q: i for i, q in enumerate(qubits)}
        g = canonical_graph()
        edges = [
            (pos[u], pos[v]) for u, v in g.edges if u in pos and v in pos
        ]
        sub = GraphSpec(4, edges, dealer=0)
        return build_graph_state(sub)

    def subgraph_conjugator(self) -> PauliString:
        """Pauli C with gamma = |g><g| + C |g><g| C, in subgraph coordinates."""
        qubits = self._measured_qubits()
        pos = {q: i for i, q in enumerate(qubits)}
        factors = ["I"] * 4
        for q in self._conjugator_qubits():
            factors[pos[q]] = "Z"
        return PauliString("".join(factors))


def test_set(B) -> TestSet:
    """Test set for a triplet, relabeled from the (1,2,3) base set by the
    square automorphism and certified by the rank-2 projector identity."""
    B = tuple(sorted(B))
    if B not in TRIPLETS:
        raise ValueError(f"{B} is not an authorized triplet")
    perm = _player_permutation((1, 2, 3), B)
    measurements = tuple(
        PauliString(_relabel(f, perm)) for f, _ in _BASE_MEASUREMENTS
    )
    signs = tuple(s for _, s in _BASE_MEASUREMENTS)
    return TestSet(subset=B, measurements=measurements, accept_signs=signs)


def pass_probability(rho: DensityMatrix, B) -> float:
    """P = (1 + Tr(rho Gamma_B)) / 2 with the 5-qubit rank-2 Gamma_B.

    This is the acceptance figure of merit entering the fidelity bound; see
    `uniform_pass_rate` for the raw frequency of passed test rounds, which
    weights the two invisible idle-qubit error directions differently.
    """
    if rho.n != 5:
        raise ValueError("pass_probability expects the 5-qubit resource state")
    ts = test_set(B)
    val = float(np.trace(rho.entries @ ts.gamma_full()).real)
    return (1 + val) / 2


def uniform_pass_rate(rho: DensityMatrix, B) -> float:
    """Expected pass frequency under a uniformly chosen test measurement."""
    ts = test_set(B)
    acc = 0.0
    for m, s in zip(ts.measurements, ts.accept_signs):
        acc += (1 + s * float(np.trace(rho.entries @ m.matrix()).real)) / 2
    return acc / 7


def fidelity_lower_bound(P: float) -> float:
    """f >= 2P - 1, clamped at zero."""
    if not -1e-12 <= P <= 1 + 1e-12:
        raise ValueError(f"P = {P} outside [0, 1]")
    return max(2 * P - 1, 0.0)


def analytic_white_noise_pass_probability(v: float) -> float:
    """Gamma-form P for v|Psi><Psi| + (1-v) I/32: (1 + v + (1-v)/16) / 2."""
    return (1 + v + (1 - v) / 16) / 2


def teleport_use_branches(rho5: np.ndarray, secret: SecretQubit, B):
    """QQ through an arbitrary 5-qubit state: Bell outcome and helper branches.

    Returns [(probability, fidelity to the secret), ...] over all 16 branches.
    """
    a = secret.amplitudes()
    joint = np.kron(np.outer(a, a.conj()), rho5)  # secret qubit 0, resource 1..5
    t = joint.reshape(4, 16, 4, 16)
    out = []
    for (ba, bb) in BELL_OUTCOMES:
        bell = bell_state(ba, bb)
        players = np.einsum("i,ijkl,k->jl", bell.conj(), t, bell)
        p_bell = float(np.trace(players).real)
        if p_bell < 1e-14:
            continue
        players = players / p_bell
        corr = teleport_correction(ba, bb).matrix()
        players = corr @ players @ corr.conj().T
        for p_h, _, recovered in retrieve_branches(B, players):
            f = float(np.real(a.conj() @ recovered @ a))
            out.append((p_bell * p_h, f))
    return out


def use_fidelity(rho5: np.ndarray, secret: SecretQubit, B) -> float:
    """Branch-averaged retrieved fidelity of QQ through a given resource."""
    branches = teleport_use_branches(rho5, secret, B)
    return float(sum(p * f for p, f in branches))


@dataclass
class SqqOutcome:
    """Statistics of one verified session."""

    rounds: int
    tests_run: int
    tests_passed: int
    uses: int
    aborted: bool
    empirical_p: float
    fidelity_bound: float
    mean_fidelity: float
    use_fidelities: list = field(default_factory=list)
    event_rate: float = 0.0
    event_bound: float = float("inf")


def run_sqq_session(
    s: float,
    rounds: int,
    noise: NoiseSpec | None,
    secret: SecretQubit,
    B,
    rng: np.random.Generator,
    abort_on_fail: bool = True,
) -> SqqOutcome:
    """Run the test-or-use protocol on fresh copies of the (noisy) resource.

    Aborts at the first failed test unless `abort_on_fail` is False (a
    statistics-gathering mode, not the protocol).  The event bound reported
    is 2s / (1 - f^2) for the mean use fidelity f, vacuous at f = 1.
    """
    if not 0 < s < 1:
        raise ValueError("s must lie strictly between 0 and 1")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    B = tuple(sorted(B))
    _, psi = canonical_resource()
    rho = psi.density()
    if noise is not None:
        rho = apply_noise(rho, noise)

    ts = test_set(B)
    pass_probs = np.array(
        [
            (1 + sign * float(np.trace(rho.entries @ m.matrix()).real)) / 2
            for m, sign in zip(ts.measurements, ts.accept_signs)
        ]
    )
    branches = teleport_use_branches(rho.entries, secret, B)
    branch_p = np.array([p for p, _ in branches])
    branch_p /= branch_p.sum()
    branch_f = np.array([f for _, f in branches])

    is_test = rng.random(rounds) < s
    choices = rng.integers(0, 7, size=rounds)
    test_draws = rng.random(rounds)
    use_draws = rng.choice(len(branches), size=rounds, p=branch_p)

    tests_run = tests_passed = uses = 0
    aborted = False
    fidelities = []
    for k in range(rounds):
        if is_test[k]:
            tests_run += 1
            if test_draws[k] < pass_probs[choices[k]]:
                tests_passed += 1
            elif abort_on_fail:
                aborted = True
                break
        else:
            uses += 1
            fidelities.append(float(branch_f[use_draws[k]]))

    empirical_p = tests_passed / tests_run if tests_run else float("nan")
    mean_f = float(np.mean(fidelities)) if fidelities else float("nan")
    bound = fidelity_lower_bound(min(max(empirical_p, 0.0), 1.0)) if tests_run else 0.0
    event_rate = uses / rounds
    event_bound = 2 * s / (1 - mean_f**2) if fidelities and mean_f < 1 - 1e-12 else float("inf")
    return SqqOutcome(
        rounds=rounds,
        tests_run=tests_run,
        tests_passed=tests_passed,
        uses=uses,
        aborted=aborted,
        empirical_p=empirical_p,
        fidelity_bound=bound,
        mean_fidelity=mean_f,
        use_fidelities=fidelities,
        event_rate=event_rate,
        event_bound=event_bound,
    )
