"""Noise channels, finite-shot sampling and tomographic reconstruction.

The experimental-state stand-in used throughout the reports is white noise
fitted to a target fidelity; Poissonian resampling of count records supplies
the error bars.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    BASIS_EIGENSTATES,
    DensityMatrix,
    PauliString,
    apply_single_qubit_dm,
    PAULIS,
)

NOISE_KINDS = ("white", "depolarizing-per-qubit", "qber-flip")


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model: kind, strength parameter in [0,1], optional target qubits."""

    kind: str
    parameter: float
    targets: tuple = ()

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if not 0.0 <= self.parameter <= 1.0:
            raise ValueError(f"noise parameter {self.parameter} outside [0, 1]")
        object.__setattr__(self, "targets", tuple(self.targets))

    @staticmethod
    def parse(text: str) -> "NoiseSpec":
        """Parse 'kind:param[:q1,q2,...]' as used by the CLI.

        Accepted kind aliases: white, depol, qber.
        """
        parts = text.split(":")
        if len(parts) < 2:
            raise ValueError(f"noise spec {text!r} must look like kind:param")
        alias = {"white": "white", "depol": "depolarizing-per-qubit", "qber": "qber-flip"}
        kind = alias.get(parts[0], parts[0])
        targets = tuple(int(t) for t in parts[2].split(",")) if len(parts) > 2 else ()
        return NoiseSpec(kind, float(parts[1]), targets)


# White-noise weight that models a given fidelity to the ideal n-qubit state:
# F(v) = v + (1 - v) / 2**n.
def white_weight_for_fidelity(fidelity: float, n: int = 5) -> float:
    d = 2**n
    return (fidelity - 1 / d) / (1 - 1 / d)


@dataclass(frozen=True)
class CountRecord:
    """Measured counts for one basis setting: outcome bitstring -> count."""

    setting: str
    counts: dict
    shots: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts must sum to shots")
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("counts must be non-negative")


def apply_noise(state: DensityMatrix, spec: NoiseSpec) -> DensityMatrix:
    """Apply the configured channel to a density matrix."""
    n = state.n
    mat = state.entries
    if spec.kind == "white":
        v = spec.parameter
        out = v * mat + (1 - v) * np.eye(2**n) / 2**n
        return DensityMatrix(out)
    if spec.kind == "depolarizing-per-qubit":
        p = spec.parameter
        targets = spec.targets or tuple(range(n))
        out = mat
        for q in targets:
            mixed = np.zeros_like(out)
            for label in "XYZ":
                mixed += apply_single_qubit_dm(out, PAULIS[label], q, n)
            out = (1 - p) * out + (p / 3) * mixed
        return DensityMatrix(out)
    if spec.kind == "qber-flip":
        p = spec.parameter
        targets = spec.targets or (n - 1,)
        out = mat
        for q in targets:
            out = (1 - p) * out + p * apply_single_qubit_dm(out, PAULIS["X"], q, n)
        return DensityMatrix(out)
    raise ValueError(f"unknown noise kind {spec.kind!r}")


def born_distribution(state: DensityMatrix, setting: str) -> np.ndarray:
    """Outcome probabilities for measuring each qubit in the given Pauli basis."""
    n = state.n
    if len(setting) != n or any(c not in "XYZ" for c in setting):
        raise ValueError(f"setting {setting!r} must give X/Y/Z per qubit")
    # Rotate each qubit's basis eigenvectors into the computational basis.
    rot = np.ones((1, 1), dtype=complex)
    for c in setting:
        e0, e1 = BASIS_EIGENSTATES[c]
        u = np.vstack([e0.conj(), e1.conj()])
        rot = np.kron(rot, u)
    probs = np.diag(rot @ state.entries @ rot.conj().T).real
    probs = np.clip(probs, 0.0, None)
    return probs / probs.sum()


def sample_counts(
    state: DensityMatrix, setting: str, shots: int, rng: np.random.Generator
) -> CountRecord:
    """Draw measurement outcomes from the Born distribution."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    probs = born_distribution(state, setting)
    draws = rng.multinomial(shots, probs)
    n = state.n
    counts = {
        format(i, f"0{n}b"): int(c) for i, c in enumerate(draws) if c > 0
    }
    return CountRecord(setting=setting, counts=counts, shots=shots)


def expectation_from_counts(record: CountRecord, pauli: PauliString) -> float:
    """Empirical expectation of a Pauli compatible with the record's setting."""
    for t, b in zip(pauli.factors, record.setting):
        if t != "I" and t != b:
            raise ValueError(f"term {pauli} incompatible with setting {record.setting}")
    total = 0.0
    support = [i for i, c in enumerate(pauli.factors) if c != "I"]
    for outcome, count in record.counts.items():
        parity = sum(int(outcome[i]) for i in support) % 2
        total += count * (-1) ** parity
    return float(pauli.sign.real * total / record.shots)


def monte_carlo_error(records, statistic, resamples: int, rng: np.random.Generator):
    """Poissonian bootstrap of a derived statistic over count records.

    Each resample replaces every count c by a Poisson(c) draw and recomputes
    `statistic(records)`.  Resamples where the statistic is undefined are
    discarded; fewer than 90% retained is an error.
    """
    if resamples < 100:
        raise ValueError("resamples must be >= 100")
    values = []
    for _ in range(resamples):
        jittered = []
        for rec in records:
            counts = {k: int(rng.poisson(c)) for k, c in rec.counts.items()}
            shots = sum(counts.values())
            if shots == 0:
                jittered = None
                break
            jittered.append(CountRecord(rec.setting, counts, shots))
        if jittered is None:
            continue
        try:
            values.append(float(statistic(jittered)))
        except (ValueError, ZeroDivisionError, FloatingPointError):
            continue
    if len(values) < 0.9 * resamples:
        raise ValueError(
            f"only {len(values)}/{resamples} resamples produced a defined statistic"
        )
    arr = np.asarray(values)
    return float(arr.mean()), float(arr.std(ddof=1))


def all_pauli_strings(n: int):
    """All 4^n - 1 non-identity Pauli strings on n qubits."""
    for combo in itertools.product("IXYZ", repeat=n):
        label = "".join(combo)
        if label != "I" * n:
            yield PauliString(label)


def tomography_reconstruct(expectations: dict, n: int) -> DensityMatrix:
    """Linear-inversion state reconstruction with PSD projection.

    `expectations` maps PauliString (or label string) to a real value; strings
    not provided are assumed to have zero expectation.  Negative eigenvalues
    of the raw inversion are clipped and the trace renormalized.
    """
    if n > 3:
        raise ValueError("tomography supports up to 3 qubits")
    dim = 2**n
    rho = np.eye(dim, dtype=complex)
    for key, value in expectations.items():
        p = key if isinstance(key, PauliString) else PauliString(key)
        if p.n != n:
            raise ValueError(f"term {p} does not act on {n} qubits")
        rho += float(value) * p.matrix()
    rho /= dim
    evals, evecs = np.linalg.eigh(rho)
    evals = np.clip(evals, 0.0, None)
    rho = (evecs * evals) @ evecs.conj().T
    rho /= np.trace(rho).real
    return DensityMatrix(rho)


def exact_expectations(state: DensityMatrix) -> dict:
    """Expectation of every non-identity Pauli string on the state."""
    return {
        p: float(np.trace(state.entries @ p.matrix()).real)
        for p in all_pauli_strings(state.n)
    }


def counts_to_expectations(records) -> dict:
    """All Pauli expectations obtainable from a set of count records.

    Each setting yields estimates for every I-substituted substring; when a
    term is measurable in several settings the estimates are averaged.
    """
    sums: dict = {}
    hits: dict = {}
    for rec in records:
        n = len(rec.setting)
        for mask in range(1, 2**n):
            label = "".join(
                rec.setting[i] if (mask >> (n - 1 - i)) & 1 else "I" for i in range(n)
            )
            p = PauliString(label)
            val = expectation_from_counts(rec, p)
            sums[label] = sums.get(label, 0.0) + val
            hits[label] = hits.get(label, 0) + 1
    return {PauliString(k): sums[k] / hits[k] for k in sums}


def records_to_csv(records) -> str:
    lines = ["setting,outcome_bitstring,count"]
    for rec in records:
        for outcome in sorted(rec.counts):
            lines.append(f"{rec.setting},{outcome},{rec.counts[outcome]}")
    return "\n".join(lines) + "\n"


def records_from_csv(text: str):
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "setting,outcome_bitstring,count":
        raise ValueError("counts CSV must start with header setting,outcome_bitstring,count")
    grouped: dict = {}
    for ln in lines[1:]:
        setting, outcome, count = ln.strip().split(",")
        grouped.setdefault(setting, {})[outcome] = int(count)
    return [
        CountRecord(setting, counts, sum(counts.values()))
        for setting, counts in grouped.items()
    ]
