import numpy as np
import pytest
from hypothesis import given, strategies as st

from qsimkit.core import exact_evolution, random_unitary
from qsimkit.errors import InvariantError, SingularityError
from qsimkit.hhl import (
    LinearSystemProblem,
    choose_parameters,
    classical_solve,
    decode_register,
    invert_eigenvalues,
    phase_estimation,
    prepare_b,
    random_problem,
    solve,
    uncompute_and_postselect,
)

from conftest import Z

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def grid_instance(g, eigenvalues, m_bits):
    """Hermitian A = V diag(eigenvalues) V^dagger with t0 putting integers on the grid."""
    lam = np.asarray(eigenvalues, dtype=float)
    v = random_unitary(len(lam), g)
    A = (v * lam) @ v.conj().T
    return 0.5 * (A + A.conj().T), v, 2 * np.pi / 2**m_bits


def register_view(joint, dim, m_bits, flag=False):
    shape = (dim, 2**m_bits, 2) if flag else (dim, 2**m_bits)
    return np.asarray(joint).reshape(shape)


# --- state preparation ---------------------------------------------------------


def test_prepare_b_examples():
    assert np.array_equal(prepare_b([1, 0]), [1, 0])
    assert np.allclose(prepare_b([1, 1]), np.array([1, 1]) / np.sqrt(2))
    assert np.allclose(prepare_b([3, 4, 0]), [0.6, 0.8, 0, 0])
    with pytest.raises(InvariantError):
        prepare_b([0, 0])


@given(seeds, st.integers(1, 9))
def test_prepare_b_normalizes(seed, size):
    g = np.random.default_rng(seed)
    b = g.normal(size=size) + 1j * g.normal(size=size)
    s = prepare_b(b)
    assert abs(np.linalg.norm(s) - 1) <= 1e-12
    assert np.allclose(s[:size] * np.linalg.norm(b), b, atol=1e-12)


# --- phase estimation ------------------------------------------------------------


def test_phase_estimation_diag_zero_pi():
    A = np.diag([0.0, np.pi])
    joint = register_view(phase_estimation(A, np.array([1, 1]) / np.sqrt(2), 1, 1.0), 2, 1)
    assert np.allclose(joint, np.diag([1, 1]) / np.sqrt(2), atol=1e-14)


def test_phase_estimation_eigenvector_is_deterministic(rng):
    A, v, t0 = grid_instance(rng, [1, 2, 5, 7], 3)
    for j, ell in enumerate([1, 2, 5, 7]):
        joint = register_view(phase_estimation(A, v[:, j], 3, t0), 4, 3)
        pops = np.sum(np.abs(joint) ** 2, axis=0)
        assert pops[ell] == pytest.approx(1.0, abs=1e-12)


@given(st.floats(0.05, 0.95), st.integers(2, 7), st.integers(0, 60))
def test_off_grid_peak_mass(delta, m_bits, base):
    M = 2**m_bits
    ell = base % (M - 1)
    t0 = 1.0
    lam = 2 * np.pi * (ell + delta) / (M * t0)
    joint = register_view(phase_estimation(np.array([[lam]]), [1.0], m_bits, t0), 1, m_bits)
    pops = np.abs(joint[0]) ** 2
    nearest = int(np.rint(ell + delta)) % M
    assert pops[nearest] >= 4 / np.pi**2 - 1e-12
    assert pops.sum() == pytest.approx(1.0, abs=1e-12)


def test_phase_estimation_window_violation_names_eigenvalue():
    with pytest.raises(InvariantError, match="-0.5"):
        phase_estimation(np.diag([-0.5, 1.0]), [1, 0], 3, 1.0)
    with pytest.raises(InvariantError):
        phase_estimation(np.diag([0.1, 2 * np.pi]), [1, 0], 3, 1.0)


def test_decode_register_grid():
    assert np.allclose(decode_register(2, np.pi / 2), [0, 1, 2, 3])
    assert np.allclose(decode_register(2, np.pi / 2, shift=1.5), [-1.5, -0.5, 0.5, 1.5])


# --- inversion -----------------------------------------------------------------------


def _single_register(ell, m_bits):
    joint = np.zeros((1, 2**m_bits), dtype=complex)
    joint[0, ell] = 1.0
    return joint.ravel()


def test_inversion_full_rotation_and_half():
    m, t0 = 3, 2 * np.pi / 8  # register value l decodes to l
    out = register_view(invert_eigenvalues(_single_register(3, m), 3.0, t0, m), 1, m, flag=True)
    assert out[0, 3, 1] == pytest.approx(1.0) and abs(out[0, 3, 0]) <= 1e-15
    out = register_view(invert_eigenvalues(_single_register(4, m), 2.0, t0, m), 1, m, flag=True)
    assert out[0, 4, 1] == pytest.approx(0.5) and out[0, 4, 0] == pytest.approx(np.sqrt(0.75))


def test_inversion_amplitude_table(rng):
    lam = [1, 2, 3, 4]
    A, v, t0 = grid_instance(rng, lam, 3)
    b = prepare_b(rng.normal(size=4) + 1j * rng.normal(size=4))
    beta = v.conj().T @ b
    flagged = invert_eigenvalues(phase_estimation(A, b, 3, t0), 1.0, t0, 3)
    out = register_view(flagged, 4, 3, flag=True)
    for j, ell in enumerate(lam):
        assert np.allclose(out[:, ell, 1], beta[j] / lam[j] * v[:, j], atol=1e-12)
    assert np.sum(np.abs(out) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_inversion_rejects_zero_register():
    with pytest.raises(SingularityError):
        invert_eigenvalues(_single_register(0, 2), 0.5, np.pi / 2, 2)


def test_inversion_filters_below_C():
    out = register_view(invert_eigenvalues(_single_register(1, 2), 2.0, np.pi / 2, 2), 1, 2, flag=True)
    assert out[0, 1, 0] == 1 and out[0, 1, 1] == 0


# --- uncompute and postselection -------------------------------------------------------


def _pipeline(A, b, m, t0, C):
    flagged = invert_eigenvalues(phase_estimation(A, b, m, t0), C, t0, m)
    return uncompute_and_postselect(flagged, A, m, t0)


def test_identity_returns_b_with_success_C_squared(rng):
    b = prepare_b(rng.normal(size=4) + 1j * rng.normal(size=4))
    post = _pipeline(np.eye(4), b, 2, np.pi / 2, 0.7)
    assert abs(abs(np.vdot(post.state, b)) - 1) <= 1e-12
    assert post.success_probability == pytest.approx(0.49, abs=1e-12)
    assert post.register_leakage <= 1e-12


def test_diag_one_two_output():
    post = _pipeline(np.diag([1.0, 2.0]), np.array([1, 1]) / np.sqrt(2), 2, np.pi / 2, 1.0)
    x = np.linalg.solve(np.diag([1.0, 2.0]), [1, 1])
    assert np.allclose(post.state, x / np.linalg.norm(x), atol=1e-12)
    assert post.success_probability == pytest.approx(0.5 * (1 + 0.25), abs=1e-12)


@given(seeds)
def test_exact_grid_bookkeeping(seed):
    g = np.random.default_rng(seed)
    m = int(g.integers(3, 6))
    lam = g.choice(np.arange(1, 2**m), size=4, replace=False).astype(float)
    A, v, t0 = grid_instance(g, lam, m)
    b = prepare_b(g.normal(size=4) + 1j * g.normal(size=4))
    C = float(lam.min())
    post = _pipeline(A, b, m, t0, C)
    beta = v.conj().T @ b
    assert post.success_probability == pytest.approx(np.sum(np.abs(beta * C / lam) ** 2), abs=1e-8)
    assert post.register_leakage <= 1e-8
    x = np.linalg.solve(A, b)
    assert abs(abs(np.vdot(post.state, x / np.linalg.norm(x))) - 1) <= 1e-8


def test_degenerate_postselection_rejected():
    joint = np.zeros(2 * 4 * 2, dtype=complex)
    joint[0] = 1.0  # everything on flag 0
    with pytest.raises(SingularityError):
        uncompute_and_postselect(joint, np.eye(2), 2, np.pi / 2)


# --- full solve ------------------------------------------------------------------------


def test_solve_identity_z():
    res = solve(LinearSystemProblem(np.eye(2), np.array([1.0, 0.0]), Z))
    assert res.estimate == pytest.approx(1.0, abs=1e-14)


def test_solve_diag_one_two():
    A, b = np.diag([1.0, 2.0]), np.array([1, 1]) / np.sqrt(2)
    res = solve(LinearSystemProblem(A, b, np.eye(2), m_bits=2, t0=np.pi / 2, C=1.0))
    x = np.linalg.solve(A, b)
    assert res.estimate == pytest.approx(1.0, abs=1e-12)
    assert res.rescaled_estimate == pytest.approx(np.vdot(x, x).real, abs=1e-12)
    assert res.m_bits == 2 and 0 < res.success_probability <= 1


def test_solve_random_problems_m8():
    g = np.random.default_rng(77)
    for _ in range(10):
        p = random_problem(2, g, m_bits=8)
        res = solve(p)
        truth = classical_solve(p.A, p.b, p.M)
        assert abs(res.estimate - truth.normalized) <= 0.05
        assert abs(res.rescaled_estimate - truth.raw) <= 0.2 * max(1.0, abs(truth.raw))


def test_solve_with_substituted_evolution(rng):
    A, _, t0 = grid_instance(rng, [1, 3], 2)
    b = np.array([0.6, 0.8])
    p = LinearSystemProblem(A, b, Z, m_bits=2, t0=t0, C=1.0)
    exact = solve(p, evolution=lambda tau: exact_evolution(A, tau))
    default = solve(p)
    assert exact.estimate == pytest.approx(default.estimate, abs=1e-13)
    assert exact.estimate == pytest.approx(classical_solve(A, b, Z).normalized, abs=1e-10)


def test_choose_parameters_keeps_spectrum_in_window():
    g = np.random.default_rng(5)
    for _ in range(20):
        p = random_problem(2, g, m_bits=6)
        t0, shift, C = choose_parameters(p.A, 6)
        lam = np.linalg.eigvalsh(p.A)
        phases = (lam + shift) * t0 / (2 * np.pi)
        assert np.all((phases > 0) & (phases < 1))
        assert 0 < C <= np.min(np.abs(lam))
        assert np.min(np.abs(decode_register(6, t0, shift))) > 0


def test_problem_validation():
    with pytest.raises(InvariantError):
        LinearSystemProblem(np.eye(2), np.zeros(2), np.eye(2))
    with pytest.raises(InvariantError):
        LinearSystemProblem(np.eye(2), np.ones(3), np.eye(2))
    with pytest.raises(SingularityError):
        solve(LinearSystemProblem(np.diag([0.0, 1.0]), np.ones(2), np.eye(2)))


# --- classical oracle ----------------------------------------------------------------------


def test_classical_examples():
    b = np.array([0.3, -1.2j])
    assert np.allclose(classical_solve(np.eye(2), b, np.eye(2)).x, b)
    assert np.allclose(classical_solve(np.diag([2.0, 4.0]), [2, 4], np.eye(2)).x, [1, 1])
    with pytest.raises(SingularityError):
        classical_solve(np.zeros((2, 2)), [1, 1], np.eye(2))


@given(seeds)
def test_classical_residual(seed):
    p = random_problem(2, np.random.default_rng(seed))
    sol = classical_solve(p.A, p.b, p.M)
    assert np.linalg.norm(p.A @ sol.x - p.b) <= 1e-10 * np.linalg.norm(p.b)
    bounds = np.linalg.eigvalsh(p.M)
    assert bounds[0] - 1e-12 <= sol.normalized <= bounds[-1] + 1e-12


def test_random_problem_condition_number():
    g = np.random.default_rng(0)
    for _ in range(20):
        lam = np.abs(np.linalg.eigvalsh(random_problem(2, g).A))
        assert lam.max() / lam.min() <= 10 + 1e-9
