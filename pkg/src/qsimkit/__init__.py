"""Sparse-Hamiltonian simulation compiler with dense verification oracles."""

from .core import (
    eigendecompose_hermitian,
    exact_evolution,
    expectation,
    apply_unitary,
    spectral_distance,
)
from .hamiltonians import (
    ModelParams,
    PauliString,
    PauliSum,
    SparseHamiltonian,
    build_model,
    load_sparse,
    pauli_to_dense,
    pauli_to_sparse,
    save_sparse,
)
from .decomposition import OneSparseTerm, decompose, validate
from .formulas import TermSet, evaluate_state, evaluate_unitary, suzuki_sequence, trotter_sequence
from .hhl import LinearSystemProblem, solve

__version__ = "0.1.0"
