"""Trotter and Suzuki product formulas over a set of Hamiltonian terms.

A product formula is a ``TermSequence`` of ``(term index, duration)`` steps.
Steps act in list order: the first step is applied to the state first, so
the evaluated unitary is ``U_last @ ... @ U_first``. Each step is the exact
exponential ``exp(-i * duration * H_j)``; negative durations are allowed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import (
    MAX_DIM,
    eigendecompose_hermitian,
    evolution_from_eigensystem,
    exact_evolution,
    spectral_distance,
)
from .decomposition import OneSparseTerm
from .errors import InvariantError, ResourceCapError
from .hamiltonians import PauliString, PauliSum, SparseHamiltonian


def _term_qubits(term):
    if isinstance(term, (OneSparseTerm, PauliString, PauliSum, SparseHamiltonian)):
        return term.n_qubits
    term = np.asarray(term)
    return int(term.shape[0]).bit_length() - 1


class TermSet:
    """Ordered Hamiltonian terms sharing one register.

    Terms may be ``OneSparseTerm``, ``PauliString``, ``PauliSum``,
    ``SparseHamiltonian`` or dense arrays. The last three are exponentiated
    through a cached eigendecomposition.
    """

    def __init__(self, terms):
        self.terms = tuple(terms)
        if not self.terms:
            raise InvariantError("a TermSet needs at least one term")
        sizes = {_term_qubits(t) for t in self.terms}
        if len(sizes) != 1:
            raise InvariantError(f"terms act on different register sizes {sorted(sizes)}")
        self.n_qubits = sizes.pop()
        self._eig = {}

    @property
    def m(self):
        return len(self.terms)

    @property
    def dim(self):
        return 2**self.n_qubits

    def __len__(self):
        return len(self.terms)

    def dense(self, j):
        t = self.terms[j]
        if hasattr(t, "to_dense"):
            return t.to_dense()
        return np.asarray(t, dtype=complex)

    @cached_property
    def total(self):
        return sum(self.dense(j) for j in range(self.m))

    def _eigensystem(self, j):
        if j not in self._eig:
            self._eig[j] = eigendecompose_hermitian(self.dense(j))
        return self._eig[j]

    def step_unitary(self, j, duration):
        term = self.terms[j]
        if isinstance(term, OneSparseTerm):
            return term.evolution(duration)
        if isinstance(term, PauliString):
            angle = term.coefficient * duration
            p = PauliString(1.0, term.word).to_dense()
            return np.cos(angle) * np.eye(self.dim) - 1j * np.sin(angle) * p
        return evolution_from_eigensystem(self._eigensystem(j), duration)

    def apply_step(self, j, duration, psi):
        term = self.terms[j]
        if isinstance(term, OneSparseTerm):
            return term.apply_evolution(psi, duration)
        if isinstance(term, PauliString):
            angle = term.coefficient * duration
            return np.cos(angle) * psi - 1j * np.sin(angle) * term.apply(psi)
        w, v = self._eigensystem(j)
        return v @ (np.exp(-1j * w * duration) * (v.conj().T @ psi))


@dataclass(frozen=True)
class TermSequence:
    steps: tuple  # (term index, duration)
    t: float
    r: int
    order: int  # 1, or 2k for Suzuki

    def __len__(self):
        return len(self.steps)

    def durations_per_term(self, m):
        total = np.zeros(m)
        for j, dur in self.steps:
            total[j] += dur
        return total


def _check_r(r):
    if not isinstance(r, (int, np.integer)) or r < 1:
        raise InvariantError(f"slice count r must be a positive integer, got {r!r}")


def trotter_sequence(ts, t, r) -> TermSequence:
    """First-order Trotter splitting: ``r`` slices of terms ``0..m-1`` at ``t/r``."""
    _check_r(r)
    dt = t / r
    steps = tuple((j, dt) for _ in range(r) for j in range(len(ts)))
    return TermSequence(steps, float(t), int(r), 1)


def suzuki_weight(k):
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * k - 1)))


def _suzuki_slice(m, lam, k):
    if k == 1:
        half = [(j, lam / 2) for j in range(m)]
        return half + half[::-1]
    p = suzuki_weight(k)
    outer = _suzuki_slice(m, p * lam, k - 1)
    inner = _suzuki_slice(m, (1 - 4 * p) * lam, k - 1)
    return outer + outer + inner + outer + outer


def merge_adjacent(steps):
    """Fuse consecutive steps on the same term; exact since they commute."""
    merged = []
    for j, dur in steps:
        if merged and merged[-1][0] == j:
            merged[-1] = (j, merged[-1][1] + dur)
        else:
            merged.append((j, dur))
    return merged


def suzuki_sequence(ts, t, r, k, merge=True) -> TermSequence:
    """Order-2k Suzuki formula, ``r`` slices.

    Unmerged, a slice holds ``2 * 5**(k-1) * m`` steps. With ``merge`` the
    neighbouring half steps of the same term are fused, giving the usual
    Strang form ``A/2, B, A/2`` for k=1.
    """
    _check_r(r)
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise InvariantError(f"Suzuki order parameter k must be a positive integer, got {k!r}")
    steps = _suzuki_slice(len(ts), t / r, int(k)) * r
    if merge:
        steps = merge_adjacent(steps)
    return TermSequence(tuple(steps), float(t), int(r), 2 * int(k))


def product_formula(ts, t, r, order=1, k=None) -> TermSequence:
    if order == 1:
        return trotter_sequence(ts, t, r)
    if order % 2 or order < 2:
        raise InvariantError(f"order must be 1 or even, got {order}")
    return suzuki_sequence(ts, t, r, order // 2 if k is None else k)


def evaluate_unitary(ts: TermSet, seq: TermSequence) -> np.ndarray:
    if ts.dim > MAX_DIM:
        raise ResourceCapError(f"register of dimension {ts.dim} exceeds cap {MAX_DIM}")
    cache = {}
    u = np.eye(ts.dim, dtype=complex)
    for j, dur in seq.steps:
        key = (j, dur)
        if key not in cache:
            cache[key] = ts.step_unitary(j, dur)
        u = cache[key] @ u
    return u


def evaluate_state(ts: TermSet, seq: TermSequence, psi0) -> np.ndarray:
    if ts.dim > MAX_DIM:
        raise ResourceCapError(f"register of dimension {ts.dim} exceeds cap {MAX_DIM}")
    psi = np.asarray(psi0, dtype=complex)
    if psi.shape[0] != ts.dim:
        raise InvariantError(f"state dim {psi.shape[0]} vs register dim {ts.dim}")
    for j, dur in seq.steps:
        psi = ts.apply_step(j, dur, psi)
    return psi


@dataclass(frozen=True)
class ErrorEstimate:
    commutator_norm: float
    leading_bound: float


def commutator_error(ts: TermSet, t, r) -> ErrorEstimate:
    """Leading first-order term ``||sum_{j>j'} [H_j, H_j']|| t^2 / (2r)``."""
    _check_r(r)
    if ts.dim > MAX_DIM:
        raise ResourceCapError(f"register of dimension {ts.dim} exceeds cap {MAX_DIM}")
    mats = [ts.dense(j) for j in range(ts.m)]
    acc = np.zeros((ts.dim, ts.dim), dtype=complex)
    running = np.zeros_like(acc)  # sum of H_j' for j' < j
    for h in mats:
        acc += h @ running - running @ h
        running += h
    norm = float(np.linalg.norm(acc, 2))
    return ErrorEstimate(norm, norm * t**2 / (2 * r))


def formula_error(ts: TermSet, seq: TermSequence, exact=None) -> float:
    """Spectral distance between the compiled product and ``exp(-iHt)``."""
    if exact is None:
        exact = exact_evolution(ts.total, seq.t)
    return spectral_distance(evaluate_unitary(ts, seq), exact)


def fit_loglog_slope(xs, ys, floor=None):
    """Least-squares slope of ``log y`` against ``log x``.

    Points with ``y <= floor`` are dropped; fewer than two points give nan.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = ys > (0.0 if floor is None else floor)
    if keep.sum() < 2:
        return float("nan")
    slope, _ = np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)
    return float(slope)
