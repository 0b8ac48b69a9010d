import numpy as np
import pytest


def make_hpd(rng, scale=1.0, jitter=0.25):
    """Random well-conditioned Hermitian positive definite 3x3 matrix.

    Built independently of the package (plain numpy): A A^H is PSD, the
    jitter bounds the condition number away from infinity.
    """
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    m = a @ a.conj().T / 3.0 + jitter * np.eye(3)
    return scale * 0.5 * (m + m.conj().T)


def make_hermitian(rng, scale=1.0):
    """Random Hermitian (not necessarily definite) 3x3 matrix."""
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    return scale * 0.5 * (a + a.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def hpd(rng):
    def factory(scale=1.0, jitter=0.25):
        return make_hpd(rng, scale=scale, jitter=jitter)
    return factory
