import itertools

import numpy as np
import pytest

from gsqss.cq import TRIPLETS
from gsqss.hybrid import (
    FIELD_PRIME,
    PadBits,
    ShareBundle,
    TEST_FIELD_PRIME,
    ThresholdError,
    hybrid_encode,
    hybrid_retrieval_fidelity,
    hybrid_retrieve,
    logical_pad,
    pad_averaged_pair_state,
    padded_amplitudes,
    shamir_reconstruct,
    shamir_share,
    share_from_bytes,
    share_to_bytes,
    _poly_eval,
)
from gsqss.linalg import PauliString, StateVector, states_equal_up_to_phase
from gsqss.qq import (
    CARDINAL_SECRETS,
    LOGICAL_X,
    LOGICAL_Z,
    SecretQubit,
    encode_amplitudes,
    retrieve_branches,
    secret_in_plane,
)


class TestShamir:
    def test_zero_polynomial_gives_zero_shares(self):
        class ZeroRng:
            def integers(self, lo, hi):
                return 0

        bundle = shamir_share(0, 3, 4, ZeroRng())
        assert all(v == 0 for v in bundle.player_shares.values())

    def test_reconstruct_from_any_three(self, rng):
        bundle = shamir_share(3, 3, 4, rng)
        for subset in itertools.combinations((1, 2, 3, 4), 3):
            shares = {p: bundle.player_shares[p] for p in subset}
            assert shamir_reconstruct(shares, 3) == 3

    def test_overdetermined_consistent(self, rng):
        bundle = shamir_share(77, 3, 4, rng)
        assert shamir_reconstruct(bundle.player_shares, 3) == 77

    def test_two_shares_insufficient(self, rng):
        bundle = shamir_share(5, 3, 4, rng)
        with pytest.raises(ThresholdError):
            shamir_reconstruct({1: bundle.player_shares[1], 2: bundle.player_shares[2]}, 3)

    def test_duplicate_points_rejected(self):
        with pytest.raises(ValueError):
            shamir_reconstruct([(1, 2), (1, 3), (2, 5)], 3)
        with pytest.raises(ValueError):
            ShareBundle(2, {0: 1, 1: 2})

    def test_parameter_validation(self, rng):
        with pytest.raises(ValueError):
            shamir_share(1, 5, 4, rng)
        with pytest.raises(ValueError):
            shamir_share(1, 2, 300, rng)

    def test_round_trip_random(self, rng):
        for _ in range(200):
            secret = int(rng.integers(0, FIELD_PRIME))
            k = int(rng.integers(1, 5))
            bundle = shamir_share(secret, k, 4, rng)
            pts = list(rng.choice([1, 2, 3, 4], size=k, replace=False))
            shares = {int(p): bundle.player_shares[int(p)] for p in pts}
            assert shamir_reconstruct(shares, k) == secret

    def test_gf5_exhaustive_uniform_posterior(self):
        # Over GF(5) with k = 3: for every secret, enumerate all 25 coefficient
        # pairs; every 2-share view at points (1, 2) appears exactly once per
        # secret, so any 2 shares are consistent with every secret equally.
        q = TEST_FIELD_PRIME
        for secret in range(q):
            views = {}
            for c1 in range(q):
                for c2 in range(q):
                    coeffs = [secret, c1, c2]
                    view = (_poly_eval(coeffs, 1, q), _poly_eval(coeffs, 2, q))
                    views[view] = views.get(view, 0) + 1
            assert len(views) == q * q
            assert set(views.values()) == {1}

    def test_gf251_below_threshold_views_look_uniform(self, rng):
        # 10^4 random bundles for one fixed secret: a single share value is
        # uniform over the field, so a below-threshold view reveals nothing.
        q = FIELD_PRIME
        counts = np.zeros(q, dtype=int)
        trials = 10_000
        for _ in range(trials):
            bundle = shamir_share(123, 3, 4, rng, q)
            counts[bundle.player_shares[1]] += 1
        expected = trials / q
        assert counts.min() > 0.2 * expected
        assert counts.max() < 3.0 * expected

    def test_gf251_view_consistent_with_every_secret(self, rng):
        # For any 2-share view there is exactly one completing polynomial per
        # candidate secret: interpolating through (0, c), (1, y1), (2, y2)
        # always reproduces c, for every c.
        q = FIELD_PRIME
        for _ in range(50):
            y1, y2 = int(rng.integers(0, q)), int(rng.integers(0, q))
            for candidate in rng.integers(0, q, size=20):
                rec = shamir_reconstruct([(0, int(candidate)), (1, y1), (2, y2)], 3, q)
                assert rec == int(candidate)

    def test_wire_format_round_trip(self):
        blob = share_to_bytes(3, 200)
        assert blob == bytes([3, 200, 251])
        assert share_from_bytes(blob) == (3, 200, 251)
        with pytest.raises(ValueError):
            share_from_bytes(bytes([0, 1, 251]))


class TestPadding:
    def test_logical_operators_act_as_pauli_on_code_space(self):
        phi = encode_amplitudes(1, 0)
        phi_prime = encode_amplitudes(0, 1)
        xl, zl = LOGICAL_X.matrix(), LOGICAL_Z.matrix()
        np.testing.assert_allclose(xl @ phi, phi_prime, atol=1e-12)
        np.testing.assert_allclose(xl @ phi_prime, phi, atol=1e-12)
        np.testing.assert_allclose(zl @ phi, phi, atol=1e-12)
        np.testing.assert_allclose(zl @ phi_prime, -phi_prime, atol=1e-12)
        anti = xl @ zl + zl @ xl
        np.testing.assert_allclose(anti, np.zeros((16, 16)), atol=1e-12)

    def test_encoding_commutes_with_padding(self, rng):
        # Enc(X^x Z^z psi) equals X_L^x Z_L^z Enc(psi) up to global phase.
        for _ in range(20):
            secret = SecretQubit(float(rng.uniform(0, np.pi)), float(rng.uniform(0, 2 * np.pi)))
            for x, z in itertools.product((0, 1), (0, 1)):
                a, b = padded_amplitudes(secret, PadBits(x, z))
                direct = encode_amplitudes(a, b)
                logical = logical_pad(PadBits(x, z)) @ encode_amplitudes(
                    secret.alpha, secret.beta
                )
                assert states_equal_up_to_phase(direct, logical, 1e-9)

    def test_pad_bits_validated(self):
        with pytest.raises(ValueError):
            PadBits(2, 0)


class TestHybridEncode:
    def test_trivial_pad_matches_plain_encoding(self, rng):
        secret = CARDINAL_SECRETS["+"]
        players, pad, _, _ = hybrid_encode(secret, rng, pad=PadBits(0, 0))
        target = encode_amplitudes(secret.alpha, secret.beta)
        assert states_equal_up_to_phase(players.amplitudes, target, 1e-10)

    def test_x_pad_flips_retrieved_bit(self, rng):
        # Pad x = 1 on |0>: without undoing the pad the triplet retrieves |1>.
        secret = CARDINAL_SECRETS["0"]
        players, _, _, _ = hybrid_encode(secret, rng, pad=PadBits(1, 0))
        one = CARDINAL_SECRETS["1"].amplitudes()
        for p, _, recovered in retrieve_branches((1, 2, 4), players.density().entries):
            fid = float(np.real(one.conj() @ recovered @ one))
            assert fid == pytest.approx(1.0, abs=1e-9)

    def test_share_bundles_reconstruct_pad(self, rng):
        secret = CARDINAL_SECRETS["+y"]
        _, pad, bx, bz = hybrid_encode(secret, rng)
        assert shamir_reconstruct(bx.player_shares, 3) == pad.x
        assert shamir_reconstruct(bz.player_shares, 3) == pad.z


class TestHybridRetrieve:
    def test_plus_secret_random_pad(self, rng):
        secret = CARDINAL_SECRETS["+"]
        players, pad, bx, bz = hybrid_encode(secret, rng)
        triplet = (1, 2, 4)
        recovered = hybrid_retrieve(
            triplet,
            players,
            bx.subset(triplet),
            bz.subset(triplet),
            rng=rng,
        )
        amps = secret.amplitudes()
        fid = float(np.real(amps.conj() @ recovered.entries @ amps))
        assert fid == pytest.approx(1.0, abs=1e-9)

    def test_exhaustive_96_cases(self):
        # 4 triplets x 4 pads x 6 cardinal secrets, outcome averaged.
        for triplet in TRIPLETS:
            for x, z in itertools.product((0, 1), (0, 1)):
                for secret in CARDINAL_SECRETS.values():
                    fid = hybrid_retrieval_fidelity(triplet, secret, PadBits(x, z))
                    assert fid == pytest.approx(1.0, abs=1e-9)

    def test_threshold_enforced(self, rng):
        secret = CARDINAL_SECRETS["0"]
        players, pad, bx, bz = hybrid_encode(secret, rng)
        with pytest.raises(ThresholdError):
            hybrid_retrieve((1, 2, 4), players, bx.subset((1, 2)), bz.subset((1, 2)))


class TestPadAveraging:
    def test_pair_states_lose_all_secret_dependence(self):
        # 24 sweep angles per plane: the pad-averaged adjacent state is I/4
        # and the opposite one is (I + XX)/4, independent of the secret.
        eye = np.eye(4) / 4
        opp = (np.eye(4) + PauliString("XX").matrix()) / 4
        for plane in ("zy", "zx", "xy"):
            for angle in np.linspace(0, 2 * np.pi, 24, endpoint=False):
                secret = secret_in_plane(plane, angle)
                adj = pad_averaged_pair_state((1, 4), secret)
                np.testing.assert_allclose(adj.entries, eye, atol=1e-9)
                both = pad_averaged_pair_state((1, 2), secret)
                np.testing.assert_allclose(both.entries, opp, atol=1e-9)

    def test_pair_without_shares_learns_nothing(self, rng):
        # A pair holding fewer than k shares hits the threshold error and its
        # pad-averaged state carries zero secret dependence.
        secret_a = CARDINAL_SECRETS["0"]
        secret_b = CARDINAL_SECRETS["+y"]
        players, pad, bx, bz = hybrid_encode(secret_a, rng)
        with pytest.raises(ThresholdError):
            hybrid_retrieve((1, 2, 4), players, bx.subset((1, 2)), bz.subset((1, 2)))
        for pair in ((1, 2), (1, 4)):
            a = pad_averaged_pair_state(pair, secret_a)
            b = pad_averaged_pair_state(pair, secret_b)
            np.testing.assert_allclose(a.entries, b.entries, atol=1e-9)
