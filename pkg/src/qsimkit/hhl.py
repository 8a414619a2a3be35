"""State-vector simulation of the HHL linear-system pipeline.

Registers: system (``N = 2**n``), an ``m``-bit phase register and one flag
qubit. Joint states are flat arrays in the order system, register, flag.

Phase estimation runs on ``exp(-i (A + shift) t0)``; register value ``l``
decodes to the eigenvalue ``2 pi l / (t0 2**m) - shift``. The shift moves
the spectrum into the representable window and is removed again at decoding,
so negative eigenvalues are inverted with the correct sign.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .core import (
    as_state,
    check_hermitian,
    eigendecompose_hermitian,
    expectation,
    exact_evolution,
    normalize,
    num_qubits,
)
from .errors import InvariantError, SingularityError

TWO_PI = 2 * np.pi
SINGULAR_TOL = 1e-8  # population allowed on a register decoding to lambda = 0
MIN_SUCCESS = 1e-12


@dataclass(frozen=True)
class LinearSystemProblem:
    """``A x = b`` with observable ``M``.

    ``t0``, ``shift`` and ``C`` left as None are filled in by
    :func:`choose_parameters`.
    """

    A: np.ndarray
    b: np.ndarray
    M: np.ndarray
    m_bits: int = 8
    t0: Optional[float] = None
    C: Optional[float] = None
    shift: Optional[float] = None

    def __post_init__(self):
        A = check_hermitian(self.A, "A")
        M = check_hermitian(self.M, "M")
        b = np.asarray(self.b, dtype=complex)
        if b.ndim != 1 or np.linalg.norm(b) == 0:
            raise InvariantError("b must be a nonzero vector")
        if A.shape[0] != b.shape[0] or M.shape != A.shape:
            raise InvariantError(f"shape mismatch: A {A.shape}, b {b.shape}, M {M.shape}")
        if self.m_bits < 1:
            raise InvariantError(f"m_bits must be positive, got {self.m_bits}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class HHLResult:
    estimate: float  # x^ M x^ for the normalized output state
    success_probability: float
    rescaled_estimate: float  # estimate of x^dagger M x for the unnormalized x
    m_bits: int
    register_leakage: float
    filtered_population: float
    t0: float
    C: float
    shift: float


class Postselected(NamedTuple):
    state: np.ndarray
    success_probability: float
    register_leakage: float


class ClassicalSolution(NamedTuple):
    x: np.ndarray
    normalized: float  # x^ M x^ with x^ = x / |x|
    raw: float  # x^dagger M x


def prepare_b(b):
    """Amplitude-encode ``b``; lengths that are not powers of two are zero-padded."""
    b = np.asarray(b, dtype=complex).ravel()
    if b.size == 0 or np.linalg.norm(b) == 0:
        raise InvariantError("cannot encode the zero vector")
    size = 1 << max(0, (b.size - 1).bit_length())
    if size != b.size:
        b = np.concatenate([b, np.zeros(size - b.size, dtype=complex)])
    return normalize(b)


def decode_register(m_bits, t0, shift=0.0):
    """Eigenvalue represented by each register value."""
    return TWO_PI * np.arange(2**m_bits) / (t0 * 2**m_bits) - shift


def choose_parameters(A, m_bits, margin=0.1):
    """Pick ``(t0, shift, C)`` from the spectral range of ``A``.

    The range ``[lo, hi]`` is widened by ``margin`` on each side and mapped
    onto the phase window [0, 1). The shift is nudged by half a grid step if
    needed so that no register value decodes to exactly zero. ``C`` is 0.9
    times the smallest-magnitude eigenvalue rounded to the register grid.
    """
    w = eigendecompose_hermitian(A).eigenvalues
    lo, hi = float(w[0]), float(w[-1])
    width = hi - lo
    pad = margin * width if width > 0 else 0.5 * max(abs(hi), 1.0)
    lo, hi = lo - pad, hi + pad
    M = 2**m_bits
    t0 = TWO_PI * (M - 1) / (M * (hi - lo))  # hi lands on the top register value
    step = TWO_PI / (t0 * M)
    shift = -lo
    zero_pos = shift / step
    if lo < 0 < hi and abs(zero_pos - round(zero_pos)) < 0.25:
        shift += step * (0.5 - (zero_pos - round(zero_pos)))
    return t0, shift, default_C(A, m_bits, t0, shift)


def _check_window(A, t0, shift, m_bits):
    w = eigendecompose_hermitian(A).eigenvalues
    phases = (w + shift) * t0 / TWO_PI
    bad = (phases < 0) | (phases >= 1)
    if np.any(bad):
        lam = w[np.argmax(bad)]
        raise InvariantError(
            f"eigenvalue {lam:.6g} has phase {(lam + shift) * t0 / TWO_PI:.6g} outside [0, 1) "
            f"(t0={t0}, shift={shift})"
        )


def _powers(A, t0, m_bits, shift, evolution):
    """``U**w`` for each register bit weight ``w``, most significant first."""
    if evolution is None:
        shifted = A + shift * np.eye(A.shape[0])
        evolution = lambda tau: exact_evolution(shifted, tau)  # noqa: E731
    return [(2 ** (m_bits - 1 - j), evolution(2 ** (m_bits - 1 - j) * t0)) for j in range(m_bits)]


def _controlled_powers(psi_reg, powers, inverse=False):
    M = psi_reg.shape[1]
    k = np.arange(M)
    for weight, u in (reversed(powers) if inverse else powers):
        cols = (k & weight) != 0
        psi_reg[:, cols] = (u.conj().T if inverse else u) @ psi_reg[:, cols]
    return psi_reg


def phase_estimation(A, psi, m_bits, t0, shift=0.0, evolution: Callable = None):
    """Joint system-register state after textbook phase estimation.

    Hadamards on the register, controlled ``U**(2**j)`` and an inverse QFT
    chosen so that eigenphase ``l / 2**m`` of ``exp(+i(A+shift)t0)`` lands
    on ``|l>``. ``evolution(tau)`` may supply an approximate
    ``exp(-i (A + shift) tau)``, e.g. a compiled product formula.
    """
    A = check_hermitian(A, "A")
    psi = as_state(psi)
    _check_window(A, t0, shift, m_bits)
    M = 2**m_bits
    joint = np.repeat(psi[:, None], M, axis=1) / np.sqrt(M)
    joint = _controlled_powers(joint, _powers(A, t0, m_bits, shift, evolution))
    # amplitude of |k> carries exp(-i lambda t0 k); the forward DFT kernel
    # exp(+2 pi i k l / M) refocuses it on l = M lambda t0 / (2 pi)
    joint = np.fft.ifft(joint, axis=1, norm="ortho")
    return joint.ravel()


def invert_eigenvalues(joint, C, t0, m_bits, shift=0.0, singular_tol=SINGULAR_TOL):
    """Controlled rotation of a flag qubit by ``C / lambda`` per register value.

    Register values decoding to ``|lambda| < C`` fall outside the invertible
    window and are sent wholly to flag |0>. Population on a value decoding to
    exactly zero beyond ``singular_tol`` is an error.
    """
    M = 2**m_bits
    psi = np.asarray(joint, dtype=complex).reshape(-1, M)
    lam = decode_register(m_bits, t0, shift)
    scale = TWO_PI / (t0 * M)
    zero = np.abs(lam) < 1e-12 * max(scale, abs(shift))
    pops = np.sum(np.abs(psi) ** 2, axis=0)
    if zero.any() and pops[zero].sum() > singular_tol:
        l = int(np.argmax(zero))
        raise SingularityError(
            f"register value {l} decodes to eigenvalue 0 with population {pops[zero].sum():.3e}"
        )
    inside = np.abs(lam) >= C * (1 - 1e-12)
    ratio = np.zeros(M)
    ratio[inside] = C / lam[inside]
    if np.any(np.abs(ratio) > 1 + 1e-12):
        raise InvariantError(f"C={C} exceeds a decoded eigenvalue")
    ratio = np.clip(ratio, -1.0, 1.0)
    out = np.empty(psi.shape + (2,), dtype=complex)
    out[..., 0] = psi * np.sqrt(1 - ratio**2)
    out[..., 1] = psi * ratio
    return out.ravel()


def filtered_population(joint, C, t0, m_bits, shift=0.0):
    psi = np.asarray(joint).reshape(-1, 2**m_bits)
    lam = decode_register(m_bits, t0, shift)
    return float(np.sum(np.abs(psi[:, np.abs(lam) < C * (1 - 1e-12)]) ** 2))


def uncompute_and_postselect(
    joint, A, m_bits, t0, shift=0.0, evolution: Callable = None
) -> Postselected:
    """Inverse phase estimation, then keep flag |1> and register |0>.

    Postselection is done by renormalizing the branch, not by sampling.
    ``success_probability`` is the flag-|1> probability; ``register_leakage``
    is the fraction of that branch not returned to register |0>.
    """
    A = check_hermitian(A, "A")
    M = 2**m_bits
    psi = np.asarray(joint, dtype=complex).reshape(A.shape[0], M, 2)
    branch = psi[..., 1].copy()
    success = float(np.sum(np.abs(branch) ** 2))
    if success < MIN_SUCCESS:
        raise SingularityError(f"degenerate postselection: success probability {success:.3e}")
    branch = np.fft.fft(branch, axis=1, norm="ortho")
    branch = _controlled_powers(branch, _powers(A, t0, m_bits, shift, evolution), inverse=True)
    branch = branch @ _hadamard(m_bits)
    kept = branch[:, 0]
    leak = 1.0 - float(np.sum(np.abs(kept) ** 2)) / success
    return Postselected(normalize(kept), success, max(leak, 0.0))


def _hadamard(m_bits):
    h = np.ones((1, 1))
    for _ in range(m_bits):
        h = np.kron(h, np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    return h


def default_C(A, m_bits, t0, shift=0.0):
    """0.9 times the smallest |eigenvalue| of ``A`` as resolved by the register."""
    w = eigendecompose_hermitian(A).eigenvalues
    gap = float(np.min(np.abs(w)))
    if gap == 0:
        raise SingularityError("A has a zero eigenvalue")
    grid = decode_register(m_bits, t0, shift)
    grid = grid[np.abs(grid) > 0]
    nearest = grid[np.argmin(np.abs(np.abs(grid) - gap))]
    return 0.9 * min(abs(nearest), gap)


def resolve_parameters(p: LinearSystemProblem):
    """``(t0, shift, C)`` with unset values filled in.

    ``t0`` and ``shift`` are chosen together; a given ``t0`` without a shift
    means shift 0.
    """
    t0, shift, C = p.t0, p.shift, p.C
    if t0 is None:
        if shift is not None:
            raise InvariantError("a shift needs an explicit t0")
        t0, shift, auto_C = choose_parameters(p.A, p.m_bits)
    else:
        shift = 0.0 if shift is None else shift
        auto_C = None
    if C is None:
        C = auto_C if auto_C is not None else default_C(p.A, p.m_bits, t0, shift)
    if C <= 0:
        raise InvariantError(f"inversion constant C must be positive, got {C}")
    return float(t0), float(shift), float(C)


def solve(p: LinearSystemProblem, evolution: Callable = None) -> HHLResult:
    """Full pipeline; ``rescaled_estimate = estimate * P_success * |b|^2 / C^2``."""
    t0, shift, C = resolve_parameters(p)
    num_qubits(p.A.shape[0])
    b_state = prepare_b(p.b)
    joint = phase_estimation(p.A, b_state, p.m_bits, t0, shift, evolution)
    flagged = invert_eigenvalues(joint, C, t0, p.m_bits, shift)
    filtered = filtered_population(joint, C, t0, p.m_bits, shift)
    post = uncompute_and_postselect(flagged, p.A, p.m_bits, t0, shift, evolution)
    estimate = expectation(p.M, post.state)
    b_norm2 = float(np.linalg.norm(p.b) ** 2)
    rescaled = estimate * post.success_probability * b_norm2 / C**2
    return HHLResult(
        estimate, post.success_probability, rescaled, p.m_bits,
        post.register_leakage, filtered, t0, C, shift,
    )


def classical_solve(A, b, M) -> ClassicalSolution:
    """LU with partial pivoting (LAPACK ``gesv``), then the quadratic forms."""
    A = np.asarray(A, dtype=complex)
    b = np.asarray(b, dtype=complex)
    M = check_hermitian(M, "M")
    try:
        x = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(f"A is singular: {exc}") from None
    if not np.all(np.isfinite(x)):
        raise SingularityError("A is numerically singular")
    xn = x / np.linalg.norm(x)
    return ClassicalSolution(
        x, float(np.real(np.vdot(xn, M @ xn))), float(np.real(np.vdot(x, M @ x)))
    )


def random_problem(n_qubits, rng, kappa=10.0, m_bits=8, signs=True):
    """Seeded Hermitian ``A`` with condition number at most ``kappa``.

    Eigenvalue magnitudes are uniform on ``[s, s * kappa]`` for a random
    scale ``s``; ``signs`` allows negative eigenvalues. ``M`` is a random
    Hermitian observable of unit spectral norm.
    """
    N = 2**n_qubits
    s = float(np.exp(rng.uniform(-1.0, 1.0)))
    mags = s * rng.uniform(1.0, kappa, size=N)
    if signs:
        mags = mags * rng.choice([-1.0, 1.0], size=N)
    q, _ = np.linalg.qr(rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N)))
    A = (q * mags) @ q.conj().T
    A = 0.5 * (A + A.conj().T)
    b = rng.normal(size=N) + 1j * rng.normal(size=N)
    obs = rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N))
    obs = 0.5 * (obs + obs.conj().T)
    obs = obs / np.linalg.norm(obs, 2)
    return LinearSystemProblem(A, b, obs, m_bits=m_bits)
