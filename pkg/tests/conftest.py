import numpy as np
import pytest

from gsqss.linalg import DensityMatrix, StateVector


def random_state_vector(rng, n: int) -> StateVector:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(v / np.linalg.norm(v))


def random_density_matrix(rng, n: int, rank: int | None = None) -> DensityMatrix:
    dim = 2**n
    rank = dim if rank is None else rank
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = a @ a.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_product_amplitudes(rng, n: int) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for _ in range(n):
        q = rng.normal(size=2) + 1j * rng.normal(size=2)
        out = np.kron(out, q / np.linalg.norm(q))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
