"""Multiparty protocol execution with transcripts and quantum locality.

Dealer and player actors exchange classical messages over an in-process bus;
a registry holds each round's joint quantum state and rejects measurement or
correction requests on qubits a party does not own.  Identical seed and
config reproduce a transcript byte for byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .cq import DEALER_BASES, TRIPLETS, TRIPLET_ROLES, corrected_bit, retrieval_correction
from .graphs import canonical_resource
from .hybrid import (
    FIELD_PRIME,
    PadBits,
    pad_operator_matrix,
    shamir_reconstruct,
    shamir_share,
    share_to_bytes,
)
from .linalg import (
    BASIS_EIGENSTATES,
    KET_0,
    KET_1,
    PAULIS,
    apply_single_qubit_dm,
    apply_two_qubit_dm,
    measure_qubit_dm,
    _partial_trace_raw,
)
from .noise import NoiseSpec, apply_noise
from .qq import (
    BELL_OUTCOMES,
    LOGICAL_X,
    LOGICAL_Z,
    SecretQubit,
    bell_state,
    encode_amplitudes,
)
from .sqq import test_set

MESSAGE_KINDS = (
    "basis-announcement",
    "result-announcement",
    "test-or-use",
    "sift",
    "correction",
    "share-delivery",
    "pass-fail",
    "abort",
)

PROTOCOLS = ("CQ", "QQ", "HYBRID", "SQQ")

DEALER = "dealer"


def player(k: int) -> str:
    return f"player{k}"


class ProtocolViolation(RuntimeError):
    """A party attempted an operation on a qubit it does not own."""


@dataclass(frozen=True)
class Message:
    seq: int
    sender: str
    recipient: str
    kind: str
    payload: dict

    def to_list(self):
        return [self.seq, self.sender, self.recipient, self.kind, self.payload]


class MessageBus:
    """Ordered, logged classical channel (authenticated and lossless)."""

    def __init__(self):
        self.messages: list[Message] = []

    def post(self, sender: str, recipient: str, kind: str, payload: dict) -> Message:
        if kind not in MESSAGE_KINDS:
            raise ValueError(f"unknown message kind {kind!r}")
        msg = Message(len(self.messages), sender, recipient, kind, dict(payload))
        self.messages.append(msg)
        return msg


class QuantumRegistry:
    """Per-round joint state with qubit ownership enforcement."""

    def __init__(self):
        self.state: np.ndarray | None = None
        self.n = 0
        self.ownership: dict = {}
        self.state_ids: list = []

    def new_round(self, entries: np.ndarray, ownership: dict, state_id: str):
        self.state = np.array(entries, dtype=complex)
        self.n = int(round(np.log2(entries.shape[0])))
        self.ownership = dict(ownership)
        self.state_ids.append(state_id)

    def _check(self, party: str, qubit: int):
        owner = self.ownership.get(qubit)
        if owner != party:
            raise ProtocolViolation(
                f"{party} attempted to act on qubit {qubit} owned by {owner}"
            )

    def measure(self, party: str, qubit: int, basis: str, rng: np.random.Generator) -> int:
        self._check(party, qubit)
        bit, _, post = measure_qubit_dm(self.state, qubit, basis, self.n, rng)
        self.state = post
        return bit

    def measure_bell(self, party: str, qa: int, qb: int, rng: np.random.Generator):
        self._check(party, qa)
        self._check(party, qb)
        probs, posts = [], []
        for a, b in BELL_OUTCOMES:
            vec = bell_state(a, b)
            proj = np.outer(vec, vec.conj())
            post = apply_two_qubit_dm(self.state, proj, qa, qb, self.n)
            p = float(np.trace(post).real)
            probs.append(max(p, 0.0))
            posts.append(post)
        probs = np.asarray(probs)
        idx = rng.choice(4, p=probs / probs.sum())
        self.state = posts[idx] / probs[idx]
        return BELL_OUTCOMES[idx]

    def apply_op(self, party: str, qubit: int, u: np.ndarray):
        self._check(party, qubit)
        self.state = apply_single_qubit_dm(self.state, u, qubit, self.n)

    def reduced(self, qubits) -> np.ndarray:
        """Simulator introspection for metrics; not a party action."""
        return _partial_trace_raw(self.state, self.n, sorted(qubits))


@dataclass
class ProtocolTranscript:
    session_id: str
    protocol: str
    seed: int
    config: dict
    messages: list
    rounds: list
    metrics: dict
    state_ids: list

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "protocol": self.protocol,
            "seed": self.seed,
            "config": self.config,
            "messages": [m.to_list() for m in self.messages],
            "rounds": self.rounds,
            "metrics": self.metrics,
            "state_ids": self.state_ids,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _session_id(protocol: str, seed: int, config: dict) -> str:
    blob = json.dumps({"protocol": protocol, "seed": seed, "config": config}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _resource_dm(noise: NoiseSpec | None) -> np.ndarray:
    _, psi = canonical_resource()
    rho = psi.density()
    if noise is not None:
        rho = apply_noise(rho, noise)
    return rho.entries


def _parse_noise(config: dict) -> NoiseSpec | None:
    noise = config.get("noise")
    if noise is None:
        return None
    if isinstance(noise, NoiseSpec):
        return noise
    return NoiseSpec.parse(noise)


def run_session(protocol: str, config: dict, rng: np.random.Generator | None = None) -> ProtocolTranscript:
    """Execute one protocol session through the actor harness."""
    if protocol not in PROTOCOLS:
        raise ValueError(f"protocol must be one of {PROTOCOLS}")
    config = dict(config)
    seed = int(config.get("seed", 0))
    rng = np.random.default_rng(seed) if rng is None else rng
    runner = {
        "CQ": _run_cq,
        "QQ": _run_qq,
        "HYBRID": _run_hybrid,
        "SQQ": _run_sqq,
    }[protocol]
    return runner(config, seed, rng)


def _ownership_resource() -> dict:
    own = {0: DEALER}
    for k in range(1, 5):
        own[k] = player(k)
    return own


def _triplet(config) -> tuple:
    trip = tuple(sorted(config.get("triplet", (1, 2, 4))))
    if trip not in TRIPLETS:
        raise ValueError(f"{trip} is not an authorized triplet")
    return trip


def _secret(config) -> SecretQubit:
    sec = config.get("secret", (np.pi / 2, np.pi / 2))
    if isinstance(sec, SecretQubit):
        return sec
    theta, phi = sec
    return SecretQubit(float(theta), float(phi))


def _run_cq(config: dict, seed: int, rng) -> ProtocolTranscript:
    rounds = int(config.get("rounds", 100))
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    triplet = _triplet(config)
    noise = _parse_noise(config)
    designated, z_helper, x_helper = TRIPLET_ROLES[triplet]
    sid = _session_id("CQ", seed, {"rounds": rounds, "triplet": list(triplet)})
    bus, registry = MessageBus(), QuantumRegistry()
    rho = _resource_dm(noise)
    own = _ownership_resource()

    rounds_log = []
    same = [0, 0]
    cross = [0, 0]
    sifted = []
    for k in range(rounds):
        registry.new_round(rho, own, f"{sid}-r{k}")
        basis = DEALER_BASES[rng.integers(0, 2)]
        guess = DEALER_BASES[rng.integers(0, 2)]
        dealer_bit = registry.measure(DEALER, 0, basis, rng)
        s_z = registry.measure(player(z_helper), z_helper, "Z", rng)
        bus.post(player(z_helper), player(designated), "result-announcement",
                 {"round": k, "bit": s_z, "basis": "Z"})
        s_x = registry.measure(player(x_helper), x_helper, "X", rng)
        bus.post(player(x_helper), player(designated), "result-announcement",
                 {"round": k, "bit": s_x, "basis": "X"})
        registry.apply_op(player(designated), designated, retrieval_correction(s_z, s_x))
        bus.post(player(designated), "*", "correction",
                 {"round": k, "op": f"X^{s_z}(XZ)^{s_x}Z"})
        raw = registry.measure(player(designated), designated, guess, rng)
        bit = corrected_bit(raw, guess)
        bus.post(DEALER, "*", "basis-announcement", {"round": k, "basis": basis})
        kept = basis == guess
        bus.post(player(designated), "*", "sift", {"round": k, "kept": kept})
        if kept:
            sifted.append(dealer_bit)
            same[1] += 1
            same[0] += int(bit != dealer_bit)
        else:
            cross[1] += 1
            cross[0] += int(bit != dealer_bit)
        rounds_log.append(
            {"round": k, "dealer_basis": basis, "guess": guess,
             "dealer_bit": dealer_bit, "player_bit": bit, "kept": kept}
        )
    metrics = {
        "qber_same_basis": same[0] / same[1] if same[1] else None,
        "qber_cross_basis": cross[0] / cross[1] if cross[1] else None,
        "sifted_bits": len(sifted),
    }
    cfg = {"rounds": rounds, "triplet": list(triplet),
           "noise": None if noise is None else [noise.kind, noise.parameter]}
    return ProtocolTranscript(sid, "CQ", seed, cfg, bus.messages, rounds_log, metrics, registry.state_ids)


def _run_qq(config: dict, seed: int, rng) -> ProtocolTranscript:
    rounds = int(config.get("rounds", 1))
    triplet = _triplet(config)
    secret = _secret(config)
    noise = _parse_noise(config)
    sid = _session_id("QQ", seed, {"rounds": rounds, "triplet": list(triplet),
                                   "secret": [secret.theta, secret.phi]})
    bus, registry = MessageBus(), QuantumRegistry()
    rho5 = _resource_dm(noise)
    amps = secret.amplitudes()
    rho6 = np.kron(np.outer(amps, amps.conj()), rho5)

    fidelities = []
    rounds_log = []
    for k in range(rounds):
        f = _qq_round_with_sid(registry, bus, rng, k, rho6, triplet, secret, sid)
        fidelities.append(f)
        rounds_log.append({"round": k, "fidelity": f})
    metrics = {
        "mean_fidelity": float(np.mean(fidelities)),
        "min_fidelity": float(np.min(fidelities)),
        "designated_player": TRIPLET_ROLES[triplet][0],
    }
    cfg = {"rounds": rounds, "triplet": list(triplet),
           "secret": [secret.theta, secret.phi],
           "noise": None if noise is None else [noise.kind, noise.parameter]}
    return ProtocolTranscript(sid, "QQ", seed, cfg, bus.messages, rounds_log, metrics, registry.state_ids)


def _qq_round_with_sid(registry, bus, rng, k, rho6, triplet, secret, sid) -> float:
    designated, z_helper, x_helper = TRIPLET_ROLES[triplet]
    own = {0: DEALER, 1: DEALER}
    for p in range(1, 5):
        own[p + 1] = player(p)
    registry.new_round(rho6, own, f"{sid}-r{k}")
    a, b = registry.measure_bell(DEALER, 0, 1, rng)
    bus.post(DEALER, "*", "result-announcement", {"round": k, "bell": [int(a), int(b)]})
    ops = []
    if b:
        ops.append(LOGICAL_X.factors)
    if a:
        ops.append(LOGICAL_Z.factors)
    corr = {p: np.eye(2, dtype=complex) for p in range(1, 5)}
    for factors in ops:
        for p in range(1, 5):
            c = factors[p - 1]
            if c != "I":
                corr[p] = PAULIS[c] @ corr[p]
    for p in range(1, 5):
        if not np.allclose(corr[p], np.eye(2)):
            registry.apply_op(player(p), p + 1, corr[p])
    bus.post(DEALER, "*", "correction", {"round": k, "op": f"ZL^{a} XL^{b}"})
    s_z = registry.measure(player(z_helper), z_helper + 1, "Z", rng)
    bus.post(player(z_helper), player(designated), "result-announcement",
             {"round": k, "bit": s_z, "basis": "Z"})
    s_x = registry.measure(player(x_helper), x_helper + 1, "X", rng)
    bus.post(player(x_helper), player(designated), "result-announcement",
             {"round": k, "bit": s_x, "basis": "X"})
    registry.apply_op(player(designated), designated + 1, retrieval_correction(s_z, s_x))
    bus.post(player(designated), "*", "correction", {"round": k, "op": f"X^{s_z}(XZ)^{s_x}Z"})
    recovered = registry.reduced([designated + 1])
    amps = secret.amplitudes()
    return float(np.real(amps.conj() @ recovered @ amps))


def _run_hybrid(config: dict, seed: int, rng) -> ProtocolTranscript:
    rounds = int(config.get("rounds", 1))
    triplet = _triplet(config)
    secret = _secret(config)
    sid = _session_id("HYBRID", seed, {"rounds": rounds, "triplet": list(triplet),
                                       "secret": [secret.theta, secret.phi]})
    bus, registry = MessageBus(), QuantumRegistry()
    designated, z_helper, x_helper = TRIPLET_ROLES[triplet]
    own = _ownership_resource()

    fidelities = []
    rounds_log = []
    for k in range(rounds):
        pad = PadBits(int(rng.integers(0, 2)), int(rng.integers(0, 2)))
        padded = pad_operator_matrix(pad.x, pad.z) @ secret.amplitudes()
        pre = np.kron(KET_0, encode_amplitudes(1, 0)) * padded[0] + np.kron(
            KET_1, encode_amplitudes(0, 1)
        ) * padded[1]
        rho5 = np.outer(pre, pre.conj())
        registry.new_round(rho5, own, f"{sid}-r{k}")
        # Dealer encodes: X measurement plus announced feedforward.
        s0 = registry.measure(DEALER, 0, "X", rng)
        bus.post(DEALER, "*", "result-announcement", {"round": k, "s0": s0})
        if s0:
            for p, c in enumerate(LOGICAL_Z.factors, start=1):
                if c != "I":
                    registry.apply_op(player(p), p, PAULIS[c])
            bus.post(DEALER, "*", "correction", {"round": k, "op": "ZL"})
        # Dealer shares both pad bits: exactly 8 share-delivery messages.
        bundle_x = shamir_share(pad.x, 3, 4, rng)
        bundle_z = shamir_share(pad.z, 3, 4, rng)
        for p in range(1, 5):
            for name, bundle in (("x", bundle_x), ("z", bundle_z)):
                blob = share_to_bytes(p, bundle.player_shares[p])
                bus.post(DEALER, player(p), "share-delivery",
                         {"round": k, "pad_bit": name, "share": blob.hex()})
        # Retrieval: triplet members disclose shares to the designated player.
        for p in triplet:
            if p != designated:
                for name, bundle in (("x", bundle_x), ("z", bundle_z)):
                    bus.post(player(p), player(designated), "result-announcement",
                             {"round": k, "share_of": name, "point": p,
                              "value": bundle.player_shares[p]})
        x = shamir_reconstruct(bundle_x.subset(triplet), 3)
        z = shamir_reconstruct(bundle_z.subset(triplet), 3)
        s_z = registry.measure(player(z_helper), z_helper, "Z", rng)
        bus.post(player(z_helper), player(designated), "result-announcement",
                 {"round": k, "bit": s_z, "basis": "Z"})
        s_x = registry.measure(player(x_helper), x_helper, "X", rng)
        bus.post(player(x_helper), player(designated), "result-announcement",
                 {"round": k, "bit": s_x, "basis": "X"})
        registry.apply_op(player(designated), designated, retrieval_correction(s_z, s_x))
        # The retrieved qubit carries X^x Z^z |psi>; undo the pad locally.
        unpad = pad_operator_matrix(x, z).conj().T
        registry.apply_op(player(designated), designated, unpad)
        bus.post(player(designated), "*", "correction",
                 {"round": k, "op": f"X^{s_z}(XZ)^{s_x}Z then unpad X^{x}Z^{z}"})
        recovered = registry.reduced([designated])
        amps = secret.amplitudes()
        f = float(np.real(amps.conj() @ recovered @ amps))
        fidelities.append(f)
        rounds_log.append({"round": k, "pad": [pad.x, pad.z], "fidelity": f})
    metrics = {
        "mean_fidelity": float(np.mean(fidelities)),
        "share_delivery_messages": sum(
            1 for m in bus.messages if m.kind == "share-delivery"
        ) // rounds,
        "designated_player": designated,
    }
    cfg = {"rounds": rounds, "triplet": list(triplet), "secret": [secret.theta, secret.phi]}
    return ProtocolTranscript(sid, "HYBRID", seed, cfg, bus.messages, rounds_log, metrics, registry.state_ids)


def _run_sqq(config: dict, seed: int, rng) -> ProtocolTranscript:
    rounds = int(config.get("rounds", 100))
    s = float(config.get("s", 0.5))
    if not 0 < s < 1:
        raise ValueError("s must lie strictly between 0 and 1")
    triplet = _triplet(config)
    secret = _secret(config)
    noise = _parse_noise(config)
    sid = _session_id("SQQ", seed, {"rounds": rounds, "s": s, "triplet": list(triplet)})
    bus, registry = MessageBus(), QuantumRegistry()
    rho5 = _resource_dm(noise)
    ts = test_set(triplet)
    own5 = _ownership_resource()
    amps = secret.amplitudes()
    rho6 = np.kron(np.outer(amps, amps.conj()), rho5)

    tests_run = tests_passed = uses = 0
    aborted = False
    fidelities = []
    rounds_log = []
    for k in range(rounds):
        do_test = bool(rng.random() < s)
        bus.post(DEALER, "*", "test-or-use", {"round": k, "test": do_test})
        if do_test:
            registry.new_round(rho5, own5, f"{sid}-r{k}")
            idx = int(rng.integers(0, 7))
            m = ts.measurements[idx]
            dealer_factor = m.factors[0]
            if dealer_factor == "I":
                dealer_out = 1
            else:
                dealer_out = 1 - 2 * registry.measure(DEALER, 0, dealer_factor, rng)
            bus.post(DEALER, "*", "basis-announcement",
                     {"round": k, "measurement": idx + 1, "dealer_result": dealer_out})
            product = dealer_out
            for p in triplet:
                factor = m.factors[p]
                if factor == "I":
                    out = 1
                else:
                    out = 1 - 2 * registry.measure(player(p), p, factor, rng)
                bus.post(player(p), "*", "result-announcement",
                         {"round": k, "result": out})
                product *= out
            passed = product == ts.accept_signs[idx]
            tests_run += 1
            bus.post(player(triplet[0]), "*", "pass-fail", {"round": k, "pass": bool(passed)})
            if passed:
                tests_passed += 1
            else:
                bus.post(DEALER, "*", "abort", {"round": k})
                aborted = True
                rounds_log.append({"round": k, "test": True, "pass": False})
                break
            rounds_log.append({"round": k, "test": True, "pass": True})
        else:
            uses += 1
            f = _qq_round_with_sid(registry, bus, rng, k, rho6, triplet, secret, sid)
            fidelities.append(f)
            rounds_log.append({"round": k, "test": False, "fidelity": f})
    empirical_p = tests_passed / tests_run if tests_run else None
    metrics = {
        "tests_run": tests_run,
        "tests_passed": tests_passed,
        "uses": uses,
        "aborted": aborted,
        "empirical_p": empirical_p,
        "fidelity_bound": max(2 * empirical_p - 1, 0.0) if empirical_p is not None else None,
        "mean_fidelity": float(np.mean(fidelities)) if fidelities else None,
    }
    cfg = {"rounds": rounds, "s": s, "triplet": list(triplet),
           "secret": [secret.theta, secret.phi],
           "noise": None if noise is None else [noise.kind, noise.parameter]}
    return ProtocolTranscript(sid, "SQQ", seed, cfg, bus.messages, rounds_log, metrics, registry.state_ids)


# Causal-order templates per protocol, asserted on transcripts.  In CQ the
# dealer's basis announcement deliberately follows the players' committed
# measurements; in the other protocols the dealer's announcement leads.
def verify_causal_order(transcript: ProtocolTranscript) -> bool:
    per_round: dict = {}
    for m in transcript.messages:
        rnd = m.payload.get("round")
        per_round.setdefault(rnd, []).append(m)
    for rnd, msgs in per_round.items():
        kinds = [m.kind for m in msgs]
        if transcript.protocol == "CQ":
            ann = [m.seq for m in msgs if m.kind == "basis-announcement"]
            results = [m.seq for m in msgs if m.kind in ("result-announcement", "correction")]
            sift = [m.seq for m in msgs if m.kind == "sift"]
            if not ann or not sift:
                return False
            if results and max(results) > ann[0]:
                return False
            if ann[0] > sift[0]:
                return False
        else:
            leads = [m.seq for m in msgs if m.kind in ("test-or-use", "basis-announcement")
                     or (m.kind == "result-announcement" and m.sender == DEALER)]
            follows = [m.seq for m in msgs if m.sender != DEALER
                       and m.kind in ("result-announcement", "correction", "pass-fail")]
            if leads and follows and min(follows) < min(leads):
                return False
    return True
