import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def taylor_expm(a, terms=60):
    """Truncated Taylor series; only for small-norm arguments."""
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


def power_iteration_norm(a, iters=2000, seed=0):
    """Largest singular value of ``a`` via power iteration on ``a^dagger a``."""
    g = np.random.default_rng(seed)
    v = g.normal(size=a.shape[1]) + 1j * g.normal(size=a.shape[1])
    ata = a.conj().T @ a
    lam = 0.0
    for _ in range(iters):
        w = ata @ v
        nrm = np.linalg.norm(w)
        if nrm == 0:
            return 0.0
        v = w / nrm
        lam = np.real(np.vdot(v, ata @ v))
    return float(np.sqrt(max(lam, 0.0)))
