import numpy as np
import pytest

from collapsekit import AlgebraicState
from collapsekit.measurement import observable

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])


def random_hermitian(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (m + m.conj().T)


def random_density(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return AlgebraicState(rho / np.trace(rho).real)


def random_unit_vector(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_observable(rng, dim, name="A"):
    return observable(name, random_hermitian(rng, dim))


def direction_observable(name, theta):
    """Spin measurement along an angle in the Z-X plane: +/-1 outcomes."""
    return observable(name, np.cos(theta) * PAULI_Z + np.sin(theta) * PAULI_X)


def singlet_state():
    psi = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2.0)
    return AlgebraicState.pure(psi)


@pytest.fixture
def rng():
    return np.random.default_rng(20260824)
