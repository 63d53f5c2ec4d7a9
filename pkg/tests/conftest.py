import numpy as np
import pytest
from hypothesis import settings

from qotpetz.objects import complex_gaussian, make_rng

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)
KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KETP = np.array([1, 1], dtype=complex) / np.sqrt(2)


def rand_hermitian(d, seed):
    g = complex_gaussian(make_rng(seed), (d, d))
    return (g + g.conj().T) / 2


def rand_psd(d, rank, seed):
    g = complex_gaussian(make_rng(seed), (d, rank))
    return g @ g.conj().T


def rand_unitary(d, seed):
    q, r = np.linalg.qr(complex_gaussian(make_rng(seed), (d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rand_unit_vector(d, seed):
    v = complex_gaussian(make_rng(seed), d)
    return v / np.linalg.norm(v)


@pytest.fixture
def sz():
    return SZ.copy()
