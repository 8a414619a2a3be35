"""Gate-level circuits, synthesis routines and a state-vector executor.

Qubits ``0 .. n_system-1`` form the system register, ancillas follow. Joint
basis indices are big-endian, so a joint index is ``system * 2**n_ancilla +
ancilla``. Every circuit must leave its ancillas in |0>; the executor checks
this and drops them.

Gate kinds
----------
``h``, ``s``, ``sdg``          single-qubit Cliffords
``p`` (angle)                  diag(1, e^{i angle})
``rz`` (angle)                 diag(e^{-i angle/2}, e^{i angle/2})
``cx``                         controls=(c,), targets=(t,)
``mcp`` (angle, pattern)       phase e^{i angle} on the basis state of
                               ``targets`` equal to ``pattern``
``pair`` (x, y, theta, phi)    two-level rotation on basis states x, y of
                               ``targets``: exp(-i theta [[0, e^{i phi}],
                               [e^{-i phi}, 0]])
``gphase`` (angle)             global phase e^{i angle}
``oracle``                     |a, z> -> |a, z xor table[a]>, ``controls`` are
                               the address qubits, ``targets`` the k-bit
                               output register (most significant first)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import MAX_QUBITS, unitarity_deviation
from .decomposition import OneSparseTerm
from .errors import InvariantError, ResourceCapError, UncomputeError
from .hamiltonians import PauliString, PauliSum

ANCILLA_TOL = 1e-10
MAX_TABLE_BITS = 16

_SINGLE = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
}
KINDS = ("h", "s", "sdg", "p", "rz", "cx", "mcp", "pair", "gphase", "oracle")


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple = ()
    params: tuple = ()
    controls: tuple = ()
    table: tuple = None

    def qubits(self):
        return tuple(self.controls) + tuple(self.targets)

    def dump(self):
        if self.kind == "oracle":
            head = (
                f"ORACLE k={len(self.targets)} address={_fmt_list(self.controls)} "
                f"targets={_fmt_list(self.targets)}"
            )
            return "\n".join([head] + [f"{a} -> {f}" for a, f in enumerate(self.table)])
        targets = self.qubits() if self.kind == "cx" else self.targets
        return f"GATE {self.kind} targets={_fmt_list(targets)} params={_fmt_list(self.params)}"


def _fmt_list(xs):
    return "[" + ",".join(repr(float(x)) if isinstance(x, float) else str(x) for x in xs) + "]"


@dataclass(frozen=True)
class Circuit:
    n_system: int
    n_ancilla: int = 0
    gates: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        total = self.n_qubits
        for g in self.gates:
            if g.kind not in KINDS:
                raise InvariantError(f"unknown gate kind {g.kind!r}")
            qs = g.qubits()
            if len(set(qs)) != len(qs):
                raise InvariantError(f"gate {g.kind} repeats a qubit: {qs}")
            if any(not 0 <= q < total for q in qs):
                raise InvariantError(f"gate {g.kind} on {qs} outside {total} qubits")
            if g.kind == "oracle":
                k = len(g.targets)
                if g.table is None or len(g.table) != 2 ** len(g.controls):
                    raise InvariantError("oracle table must list f(a) for every address")
                if any(not 0 <= int(v) < 2**k for v in g.table):
                    raise InvariantError(f"oracle value does not fit in {k} bits")

    @property
    def n_qubits(self):
        return self.n_system + self.n_ancilla

    def __add__(self, other):
        if other.n_system != self.n_system:
            raise InvariantError("cannot join circuits on different system registers")
        return Circuit(self.n_system, max(self.n_ancilla, other.n_ancilla), self.gates + other.gates)

    def dump(self):
        lines = [f"CIRCUIT n_system={self.n_system} n_ancilla={self.n_ancilla}"]
        lines += [g.dump() for g in self.gates]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# executor


def _subindex(idx, qubits, n):
    out = np.zeros_like(idx)
    for q in qubits:
        out = (out << 1) | ((idx >> (n - 1 - q)) & 1)
    return out


def _scatter(values, qubits, n):
    """Inverse of ``_subindex``: place the bits of ``values`` on ``qubits``."""
    out = np.zeros_like(values)
    m = len(qubits)
    for i, q in enumerate(qubits):
        out |= ((values >> (m - 1 - i)) & 1) << (n - 1 - q)
    return out


def apply_gate(g: Gate, psi, n):
    """Apply one gate to a ``(2**n, batch)`` array of joint states."""
    dim = psi.shape[0]
    idx = np.arange(dim)
    if g.kind in _SINGLE or g.kind in ("p", "rz"):
        if g.kind == "p":
            u = np.diag([1.0, np.exp(1j * g.params[0])])
        elif g.kind == "rz":
            u = np.diag([np.exp(-0.5j * g.params[0]), np.exp(0.5j * g.params[0])])
        else:
            u = _SINGLE[g.kind]
        (q,) = g.targets
        view = psi.reshape(2**q, 2, 2 ** (n - q - 1), -1)
        return np.einsum("ab,ibjk->iajk", u, view).reshape(psi.shape)
    if g.kind == "cx":
        (c,), (t,) = g.controls, g.targets
        src = idx ^ (((idx >> (n - 1 - c)) & 1) << (n - 1 - t))
        return psi[src]
    if g.kind == "oracle":
        table = np.asarray(g.table, dtype=np.int64)
        flips = _scatter(table[_subindex(idx, g.controls, n)], g.targets, n)
        # XOR is an involution, so the source of each index is index ^ flip
        return psi[idx ^ flips]
    if g.kind == "gphase":
        return np.exp(1j * g.params[0]) * psi
    if g.kind == "mcp":
        angle, pattern = g.params
        phase = np.where(_subindex(idx, g.targets, n) == int(pattern), np.exp(1j * angle), 1.0)
        return phase[:, None] * psi
    if g.kind == "pair":
        x, y, theta, phi = g.params
        sub = _subindex(idx, g.targets, n)
        ix = idx[sub == int(x)]
        iy = ix ^ _scatter(np.full_like(ix, int(x) ^ int(y)), g.targets, n)
        c, s, e = np.cos(theta), np.sin(theta), np.exp(1j * phi)
        out = psi.copy()
        a, b = psi[ix], psi[iy]
        out[ix] = c * a - 1j * s * e * b
        out[iy] = c * b - 1j * s * np.conj(e) * a
        return out
    raise InvariantError(f"unknown gate kind {g.kind!r}")


def _run_joint(c: Circuit, joint):
    for g in c.gates:
        joint = apply_gate(g, joint, c.n_qubits)
    return joint


def _embed(c: Circuit, psi):
    ns = 2**c.n_system
    if psi.shape[0] != ns:
        raise InvariantError(f"input has dimension {psi.shape[0]}, system register {ns}")
    joint = np.zeros((ns, 2**c.n_ancilla, psi.shape[1]), dtype=complex)
    joint[:, 0, :] = psi
    return joint.reshape(ns * 2**c.n_ancilla, -1)


def ancilla_leakage(c: Circuit, psi):
    """Run ``psi`` (system register only) and return (joint output, leaked norm)."""
    out = _run_joint(c, _embed(c, psi))
    view = out.reshape(2**c.n_system, 2**c.n_ancilla, -1)
    return view, float(np.linalg.norm(view[:, 1:, :]))


def run_circuit(c: Circuit, psi0, tol=ANCILLA_TOL):
    if c.n_qubits > MAX_QUBITS:
        raise ResourceCapError(f"{c.n_qubits} qubits exceeds the {MAX_QUBITS}-qubit cap")
    psi0 = np.asarray(psi0, dtype=complex)
    batch = psi0.ndim == 2
    view, leak = ancilla_leakage(c, psi0 if batch else psi0[:, None])
    if leak > tol:
        raise UncomputeError(f"ancilla register not restored to |0>: leaked norm {leak:.3e}")
    out = view[:, 0, :]
    return out if batch else out[:, 0]


def check_uncompute(c: Circuit) -> float:
    """Largest ancilla amplitude left over any computational-basis input."""
    view, _ = ancilla_leakage(c, np.eye(2**c.n_system, dtype=complex))
    return float(np.max(np.abs(view[:, 1:, :]), initial=0.0))


def circuit_unitary(c: Circuit) -> np.ndarray:
    """System-register unitary, i.e. the ancilla-|0> block of the joint unitary."""
    u = run_circuit(c, np.eye(2**c.n_system, dtype=complex))
    dev = unitarity_deviation(u)
    if dev > 1e-9:
        raise UncomputeError(f"projected circuit block is not unitary (deviation {dev:.3e})")
    return u


# ---------------------------------------------------------------------------
# synthesis


@dataclass(frozen=True)
class DiagonalTable:
    """k-bit integer table ``values[a]`` with energies ``scale * values[a]``."""

    k: int
    values: tuple
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if not 1 <= self.k <= MAX_TABLE_BITS:
            raise InvariantError(f"bit width k={self.k} outside [1, {MAX_TABLE_BITS}]")
        n = len(self.values).bit_length() - 1
        if len(self.values) != 2**n:
            raise InvariantError(f"table length {len(self.values)} is not a power of two")
        for a, v in enumerate(self.values):
            if not 0 <= v < 2**self.k:
                raise InvariantError(f"d({a})={v} overflows {self.k} bits")

    @property
    def n_qubits(self):
        return len(self.values).bit_length() - 1

    def energies(self):
        return self.scale * np.asarray(self.values, dtype=float)

    @classmethod
    def from_energies(cls, energies, k, scale=None):
        """Round nonnegative energies onto a k-bit grid.

        Returns ``(table, max_rounding_error)``. The default scale puts the
        largest energy on the top grid value.
        """
        e = np.asarray(energies, dtype=float)
        if np.any(e < 0):
            raise InvariantError("diagonal energies must be nonnegative for a k-bit table")
        if scale is None:
            top = float(e.max(initial=0.0))
            scale = top / (2**k - 1) if top > 0 else 1.0
        ints = np.rint(e / scale).astype(np.int64)
        if np.any(ints >= 2**k):
            raise InvariantError(f"energy {e.max()} overflows {k} bits at scale {scale}")
        return cls(k, tuple(ints), float(scale)), float(np.max(np.abs(ints * scale - e), initial=0.0))


def diagonal_circuit(table: DiagonalTable, t) -> Circuit:
    """Load d(a) into k ancillas, phase each bit, unload.

    Ancilla j carries weight ``2**(k-1-j)`` and gets ``p(-t*scale*2**(k-1-j))``.
    """
    n, k = table.n_qubits, table.k
    anc = tuple(range(n, n + k))
    load = Gate("oracle", targets=anc, controls=tuple(range(n)), table=table.values)
    phases = [Gate("p", (q,), (-t * table.scale * 2 ** (k - 1 - j),)) for j, q in enumerate(anc)]
    return Circuit(n, k, [load, *phases, load])


def one_sparse_circuit(term: OneSparseTerm, t) -> Circuit:
    """Two-level rotation per pair, controlled phase per fixed point."""
    qs = tuple(range(term.n_qubits))
    gates = []
    for x, y, w in term.pairs:
        gates.append(Gate("pair", qs, (int(x), int(y), abs(w) * t, float(np.angle(w)))))
    for x, v in term.fixed_points:
        gates.append(Gate("mcp", qs, (-t * float(np.real(v)), int(x))))
    return Circuit(term.n_qubits, 0, gates)


def pauli_exponential_circuit(p, theta, n_qubits=None) -> Circuit:
    """``exp(-i theta P)`` for the word of ``p``; its coefficient is ignored.

    X sites are rotated to Z by ``h``, Y sites by ``sdg`` then ``h``. A CNOT
    ladder collects the parity on the highest-index site, which takes
    ``rz(2 theta)``; the ladder and basis changes are then undone.
    """
    word = p.word if isinstance(p, PauliString) else str(p).upper()
    if n_qubits is not None and len(word) != n_qubits:
        raise InvariantError(f"word {word!r} has length {len(word)}, register has {n_qubits}")
    if set(word) - set("IXYZ"):
        raise InvariantError(f"invalid Pauli word {word!r}")
    n = len(word)
    support = [q for q, c in enumerate(word) if c != "I"]
    if not support:
        return Circuit(n, 0, [Gate("gphase", (), (-theta,))])
    into, back = [], []
    for q in support:
        if word[q] == "X":
            into.append(Gate("h", (q,)))
            back.append(Gate("h", (q,)))
        elif word[q] == "Y":
            into += [Gate("sdg", (q,)), Gate("h", (q,))]
            back += [Gate("h", (q,)), Gate("s", (q,))]
    target = support[-1]
    ladder = [Gate("cx", (target,), controls=(q,)) for q in support[:-1]]
    gates = into + ladder + [Gate("rz", (target,), (2 * theta,))] + ladder[::-1] + back
    return Circuit(n, 0, gates)


def _commute(a: PauliString, b: PauliString):
    clashes = sum(1 for x, y in zip(a.word, b.word) if "I" not in (x, y) and x != y)
    return clashes % 2 == 0


def step_circuit(term, duration, n_qubits) -> Circuit:
    if isinstance(term, OneSparseTerm):
        return one_sparse_circuit(term, duration)
    if isinstance(term, PauliString):
        return pauli_exponential_circuit(term, term.coefficient * duration, n_qubits)
    if isinstance(term, PauliSum):
        strings = term.terms
        if not all(_commute(a, b) for i, a in enumerate(strings) for b in strings[i + 1 :]):
            raise InvariantError("Pauli-sum term has non-commuting strings; split it first")
        c = Circuit(n_qubits)
        for s in strings:
            c = c + pauli_exponential_circuit(s, s.coefficient * duration, n_qubits)
        return c
    raise InvariantError(f"no circuit synthesis for term type {type(term).__name__}")


def compile_sequence(ts, seq) -> Circuit:
    """Concatenate one exact sub-circuit per product-formula step."""
    gates, n_anc = [], 0
    for j, dur in seq.steps:
        sub = step_circuit(ts.terms[j], dur, ts.n_qubits)
        gates += sub.gates
        n_anc = max(n_anc, sub.n_ancilla)
    return Circuit(ts.n_qubits, n_anc, gates)
