import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_complex(rng, n, m=None):
    m = n if m is None else m
    return rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))


def random_hermitian(rng, n):
    a = random_complex(rng, n)
    return (a + a.conj().T) / 2


def random_normal(rng, n):
    """U diag(z) U* with a Haar-ish unitary U and complex eigenvalues z."""
    q, _ = np.linalg.qr(random_complex(rng, n))
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return q @ np.diag(z) @ q.conj().T, z


K3 = np.ones((3, 3)) - np.eye(3)
P3 = np.array([[0.0, 1, 0], [1, 0, 1], [0, 1, 0]])
