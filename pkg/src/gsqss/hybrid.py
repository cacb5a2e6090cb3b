"""Hybrid secret sharing: quantum one-time pad plus classical Shamir shares.

The dealer pads the secret with X^x Z^z before encoding and shares the pad
bits via two independent (3, 4) Shamir instances, lifting the (3, 1, 4) ramp
access structure to a proper (3, 4) threshold scheme.  Production shares
live in GF(251); GF(5) is used for exhaustive verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import DensityMatrix, PAULIS, StateVector, apply_pauli, _partial_trace_raw
from .qq import (
    LOGICAL_X,
    LOGICAL_Z,
    SecretQubit,
    encode_amplitudes,
    pair_reduced_state,
    qq_retrieve,
    retrieve_average,
)

FIELD_PRIME = 251
TEST_FIELD_PRIME = 5

PAD_OPERATORS = {
    (0, 0): "I",
    (1, 0): "X",
    (0, 1): "Z",
    (1, 1): "XZ",
}


class ThresholdError(ValueError):
    """Raised when fewer shares than the threshold are supplied."""


@dataclass(frozen=True)
class PadBits:
    x: int
    z: int

    def __post_init__(self):
        if self.x not in (0, 1) or self.z not in (0, 1):
            raise ValueError("pad bits must be 0 or 1")


@dataclass(frozen=True)
class ShareBundle:
    """Shamir shares of one field element, one share per player."""

    k: int
    player_shares: dict
    field_modulus: int = FIELD_PRIME

    def __post_init__(self):
        points = list(self.player_shares)
        if len(points) != len(set(points)):
            raise ValueError("evaluation points must be distinct")
        if any(p <= 0 or p >= self.field_modulus for p in points):
            raise ValueError("evaluation points must be nonzero field elements")
        if self.k > len(points):
            raise ValueError("threshold exceeds the number of shares")

    def subset(self, players) -> dict:
        return {p: self.player_shares[p] for p in players}


def _poly_eval(coeffs, x: int, q: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def shamir_share(
    secret: int, k: int, n: int, rng: np.random.Generator, field_modulus: int = FIELD_PRIME
) -> ShareBundle:
    """Evaluate a random degree-(k-1) polynomial with constant term `secret`."""
    if not 0 < k <= n:
        raise ValueError("need 0 < k <= n")
    if n >= field_modulus:
        raise ValueError("n must be smaller than the field modulus")
    if not 0 <= secret < field_modulus:
        raise ValueError("secret must be a field element")
    coeffs = [secret] + [int(rng.integers(0, field_modulus)) for _ in range(k - 1)]
    shares = {x: _poly_eval(coeffs, x, field_modulus) for x in range(1, n + 1)}
    return ShareBundle(k=k, player_shares=shares, field_modulus=field_modulus)


def shamir_reconstruct(shares, k: int, field_modulus: int = FIELD_PRIME) -> int:
    """Lagrange interpolation at 0 from at least k distinct share points.

    `shares` is a point -> value mapping or an iterable of (point, value).
    """
    points = list(shares.items()) if hasattr(shares, "items") else list(shares)
    xs = [x for x, _ in points]
    if len(set(xs)) != len(xs):
        raise ValueError("duplicate evaluation points")
    if len(points) < k:
        raise ThresholdError(f"need at least {k} shares, got {len(points)}")
    q = field_modulus
    total = 0
    for i, (xi, yi) in enumerate(points):
        num, den = 1, 1
        for j, (xj, _) in enumerate(points):
            if i == j:
                continue
            num = (num * (-xj)) % q
            den = (den * (xi - xj)) % q
        total = (total + yi * num * pow(den, q - 2, q)) % q
    return total % q


def share_to_bytes(point: int, value: int, field_modulus: int = FIELD_PRIME) -> bytes:
    """Wire format: evaluation point, share value, field marker, one byte each."""
    return bytes([point, value, field_modulus])


def share_from_bytes(data: bytes):
    if len(data) != 3:
        raise ValueError("share record must be exactly 3 bytes")
    point, value, modulus = data
    if point == 0 or point >= modulus or value >= modulus:
        raise ValueError("malformed share record")
    return point, value, modulus


def pad_operator_matrix(x: int, z: int) -> np.ndarray:
    out = np.eye(2, dtype=complex)
    if z:
        out = PAULIS["Z"] @ out
    if x:
        out = PAULIS["X"] @ out
    return out


def padded_amplitudes(secret: SecretQubit, pad: PadBits) -> np.ndarray:
    return pad_operator_matrix(pad.x, pad.z) @ secret.amplitudes()


def logical_pad(pad: PadBits) -> np.ndarray:
    """X_L^x Z_L^z on the code space; X_L = Z1Z2Z3Z4, Z_L = Z1Z2X3I4."""
    op = np.eye(16, dtype=complex)
    if pad.z:
        op = LOGICAL_Z.matrix() @ op
    if pad.x:
        op = LOGICAL_X.matrix() @ op
    return op


def hybrid_encode(
    secret: SecretQubit,
    rng: np.random.Generator,
    pad: PadBits | None = None,
    k: int = 3,
):
    """Pad, encode and share: (players_state, PadBits, x-bundle, z-bundle)."""
    if pad is None:
        pad = PadBits(int(rng.integers(0, 2)), int(rng.integers(0, 2)))
    a, b = padded_amplitudes(secret, pad)
    players = StateVector(encode_amplitudes(a, b))
    bundle_x = shamir_share(pad.x, k, 4, rng)
    bundle_z = shamir_share(pad.z, k, 4, rng)
    return players, pad, bundle_x, bundle_z


def hybrid_retrieve(
    triplet,
    encoded,
    shares_x: dict,
    shares_z: dict,
    k: int = 3,
    field_modulus: int = FIELD_PRIME,
    rng: np.random.Generator | None = None,
) -> DensityMatrix:
    """Reconstruct the pad, undo it on the code space, then retrieve."""
    if len(shares_x) < k or len(shares_z) < k:
        raise ThresholdError(f"triplet must hold at least {k} shares of each pad bit")
    x = shamir_reconstruct(shares_x, k, field_modulus)
    z = shamir_reconstruct(shares_z, k, field_modulus)
    if x not in (0, 1) or z not in (0, 1):
        raise ValueError("reconstructed pad values are not bits")
    amps = encoded.amplitudes if isinstance(encoded, StateVector) else None
    if amps is None:
        raise ValueError("hybrid_retrieve expects a pure encoded state")
    # Inverse pad: (X_L^x Z_L^z)^dagger = Z_L^z X_L^x.
    if x:
        amps = apply_pauli(amps, LOGICAL_X)
    if z:
        amps = apply_pauli(amps, LOGICAL_Z)
    return qq_retrieve(triplet, StateVector(amps), rng)


def pad_averaged_pair_state(pair, secret: SecretQubit) -> DensityMatrix:
    """Pair state mixed uniformly over the four one-time-pad values."""
    acc = np.zeros((4, 4), dtype=complex)
    for x in (0, 1):
        for z in (0, 1):
            a, b = padded_amplitudes(secret, PadBits(x, z))
            st = encode_amplitudes(a, b)
            dm = np.outer(st, st.conj())
            acc += 0.25 * _partial_trace_raw(dm, 4, [p - 1 for p in sorted(pair)])
    return DensityMatrix(acc)


def hybrid_retrieval_fidelity(triplet, secret: SecretQubit, pad: PadBits) -> float:
    """Outcome-averaged retrieval fidelity with the pad undone."""
    a, b = padded_amplitudes(secret, pad)
    amps = encode_amplitudes(a, b)
    if pad.x:
        amps = apply_pauli(amps, LOGICAL_X)
    if pad.z:
        amps = apply_pauli(amps, LOGICAL_Z)
    dm = np.outer(amps, amps.conj())
    recovered = retrieve_average(tuple(sorted(triplet)), dm)
    s = secret.amplitudes()
    return float(np.real(s.conj() @ recovered @ s))
