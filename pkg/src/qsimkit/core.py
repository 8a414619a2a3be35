"""Dense linear algebra, exact evolution and state metrics.

Operators are square ``complex128`` numpy arrays and states are 1-D
``complex128`` arrays of length ``2**n``. Qubit 0 is the most significant bit
of a basis index, so ``kron(A0, A1, ...)`` acts with ``A0`` on qubit 0.
Evolution is always ``exp(-iHt)`` with hbar = 1.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import HermiticityError, InvariantError, ResourceCapError, UnitarityError

MAX_QUBITS = 12
MAX_DIM = 2**MAX_QUBITS

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-8
NORM_TOL = 1e-10


class Eigensystem(NamedTuple):
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # orthonormal columns


def as_operator(a, name="operator"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvariantError(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise ResourceCapError(f"{name} dimension {a.shape[0]} exceeds cap {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise InvariantError(f"{name} has non-finite entries")
    return a


def num_qubits(dim):
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        raise InvariantError(f"dimension {dim} is not a power of two")
    return n


def hermiticity_residual(h):
    h = np.asarray(h)
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def check_hermitian(h, name="operator", tol=HERMITIAN_TOL):
    """Return ``h`` as a complex array or raise with the worst offending entry."""
    h = as_operator(h, name)
    diff = np.abs(h - h.conj().T)
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    worst = float(diff.max()) if h.size else 0.0
    if worst > tol * scale:
        i, j = np.unravel_index(np.argmax(diff), diff.shape)
        raise HermiticityError(
            f"{name} is not Hermitian: |H[{i},{j}] - conj(H[{j},{i}])| = {worst:.3e}"
        )
    return h


def unitarity_deviation(u):
    u = np.asarray(u)
    return float(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]), 2))


def eigendecompose_hermitian(h):
    h = check_hermitian(h)
    # eigh reads one triangle only; symmetrize so both halves count
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return Eigensystem(w, v)


def evolution_from_eigensystem(eig, t):
    w, v = eig
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def exact_evolution(h, t):
    """``exp(-iHt)`` through the Hermitian eigendecomposition of ``h``."""
    return evolution_from_eigensystem(eigendecompose_hermitian(h), t)


def spectral_distance(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise InvariantError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a - b, 2))


def state_distance(a, b):
    """Euclidean distance between two state vectors."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise InvariantError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def as_state(psi, tol=NORM_TOL):
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1:
        raise InvariantError(f"state must be 1-D, got shape {psi.shape}")
    num_qubits(psi.shape[0])
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise InvariantError(f"state norm {norm:.12g} differs from 1")
    return psi


def normalize(v):
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise InvariantError("cannot normalize the zero vector")
    return v / norm


def basis_state(n_qubits, index=0):
    psi = np.zeros(2**n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def expectation(o, psi):
    """``<psi|O|psi>`` for Hermitian ``O``; the imaginary residue must vanish."""
    o = check_hermitian(o, "observable")
    psi = np.asarray(psi, dtype=complex)
    if o.shape[0] != psi.shape[0]:
        raise InvariantError(f"observable dim {o.shape[0]} vs state dim {psi.shape[0]}")
    val = np.vdot(psi, o @ psi)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise InvariantError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def apply_unitary(u, psi):
    u = as_operator(u, "unitary")
    psi = np.asarray(psi, dtype=complex)
    if u.shape[0] != psi.shape[0]:
        raise InvariantError(f"unitary dim {u.shape[0]} vs state dim {psi.shape[0]}")
    dev = unitarity_deviation(u)
    if dev > UNITARY_TOL:
        raise UnitarityError(f"operator deviates from unitary by {dev:.3e}")
    return u @ psi


def random_hermitian(dim, rng, scale=1.0):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (a + a.conj().T)


def random_unitary(dim, rng):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(n_qubits, rng):
    return normalize(rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits))
