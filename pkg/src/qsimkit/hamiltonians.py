"""Hamiltonian representations and the many-body model builders.

Three forms are supported: the row-oracle ``SparseHamiltonian`` (each row
lists its nonzero ``(column, value)`` pairs), the ``PauliSum`` with real
coefficients, and dense arrays. Pauli words are read left to right as qubit
0, 1, ..., matching the big-endian basis convention of :mod:`qsimkit.core`.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field

import numpy as np

from .core import MAX_QUBITS
from .errors import HermiticityError, InvariantError, ParseError, ResourceCapError, SparsityError

SPARSE_HERMITIAN_TOL = 1e-12

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _check_register(n):
    if n < 0:
        raise InvariantError(f"negative register size {n}")
    if n > MAX_QUBITS:
        raise ResourceCapError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit cap")


@dataclass(frozen=True)
class SparseHamiltonian:
    """Hermitian matrix in row-oracle form.

    ``rows[x]`` is a tuple of ``(y, value)`` pairs sorted by column. Explicit
    zeros are not stored.
    """

    n_qubits: int
    d: int
    rows: tuple

    def __post_init__(self):
        _check_register(self.n_qubits)
        if len(self.rows) != 2**self.n_qubits:
            raise InvariantError(f"expected {2**self.n_qubits} rows, got {len(self.rows)}")
        if self.d < 0 or self.d > 2**self.n_qubits:
            raise InvariantError(f"sparsity d={self.d} outside [0, {2**self.n_qubits}]")
        for x, row in enumerate(self.rows):
            if len(row) > self.d:
                raise SparsityError(f"row {x} has {len(row)} nonzeros, declared d={self.d}")
        check_sparse_hermitian(self.rows)

    @property
    def dim(self):
        return 2**self.n_qubits

    @classmethod
    def from_entries(cls, n_qubits, entries, d=None):
        """Build from ``(row, col, value)`` triples; duplicates are an error."""
        _check_register(n_qubits)
        dim = 2**n_qubits
        rows = [dict() for _ in range(dim)]
        for x, y, v in entries:
            if not (0 <= x < dim and 0 <= y < dim):
                raise InvariantError(f"entry ({x},{y}) outside a {dim}-dimensional space")
            if y in rows[x]:
                raise InvariantError(f"duplicate entry ({x},{y})")
            if v != 0:
                rows[x][y] = complex(v)
        packed = tuple(tuple(sorted(r.items())) for r in rows)
        occupancy = max((len(r) for r in packed), default=0)
        return cls(n_qubits, occupancy if d is None else d, packed)

    @classmethod
    def from_dense(cls, h, d=None):
        h = np.asarray(h, dtype=complex)
        n = int(h.shape[0]).bit_length() - 1
        xs, ys = np.nonzero(h)
        return cls.from_entries(n, ((int(x), int(y), h[x, y]) for x, y in zip(xs, ys)), d)

    def entries(self):
        for x, row in enumerate(self.rows):
            for y, v in row:
                yield x, y, v

    def nnz(self):
        return sum(len(r) for r in self.rows)

    def to_dense(self):
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for x, y, v in self.entries():
            h[x, y] = v
        return h


def check_sparse_hermitian(rows, tol=SPARSE_HERMITIAN_TOL):
    lookup = [dict(r) for r in rows]
    for x, row in enumerate(lookup):
        for y, v in row.items():
            partner = lookup[y].get(x) if y < len(lookup) else None
            if partner is None:
                raise HermiticityError(f"entry ({x},{y}) has no conjugate partner ({y},{x})")
            if abs(partner - np.conj(v)) > tol * max(1.0, abs(v)):
                raise HermiticityError(
                    f"entries ({x},{y})={v} and ({y},{x})={partner} are not conjugate"
                )


def max_norm(h: SparseHamiltonian) -> float:
    values = np.fromiter((v for _, _, v in h.entries()), dtype=complex)
    return float(np.max(np.abs(values), initial=0.0))


def random_sparse_hamiltonian(n_qubits, d, rng, diagonal_prob=0.5, complex_entries=True):
    """Seeded random Hermitian matrix with at most ``d`` nonzeros per row.

    The diagonal entry, when present, counts toward the row budget.
    """
    dim = 2**n_qubits
    d = min(d, dim)
    budget = np.full(dim, d)
    entries = []
    for x in range(dim):
        if budget[x] > 0 and rng.random() < diagonal_prob:
            entries.append((x, x, rng.normal()))
            budget[x] -= 1
    partners = set()
    for x in rng.permutation(dim):
        x = int(x)
        for y in rng.permutation(dim):
            y = int(y)
            if budget[x] == 0:
                break
            if y == x or budget[y] == 0 or (min(x, y), max(x, y)) in partners:
                continue
            if rng.random() < 0.5:
                continue
            w = rng.normal() + (1j * rng.normal() if complex_entries else 0.0)
            partners.add((min(x, y), max(x, y)))
            entries.append((x, y, w))
            entries.append((y, x, np.conj(w)))
            budget[x] -= 1
            budget[y] -= 1
    return SparseHamiltonian.from_entries(n_qubits, entries, d=d)


# ---------------------------------------------------------------------------
# sparse text format


def _fmt_float(v):
    return repr(float(v))


def save_sparse(h: SparseHamiltonian) -> str:
    lines = [f"n={h.n_qubits} d={h.d}"]
    for x, y, v in h.entries():
        lines.append(f"{x} {y} {_fmt_float(v.real)} {_fmt_float(v.imag)}")
    return "\n".join(lines) + "\n"


def _strip_comment(line):
    return line.split("#", 1)[0].strip()


def load_sparse(text: str) -> SparseHamiltonian:
    header = None
    entries = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if header is None:
            try:
                fields = dict(tok.split("=", 1) for tok in line.split())
                header = int(fields["n"]), int(fields["d"])
            except (ValueError, KeyError):
                raise ParseError(f"expected header 'n=<int> d=<int>', got {line!r}", lineno)
            n, d = header
            if n > MAX_QUBITS:
                raise ResourceCapError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit cap")
            if n < 0 or d < 0:
                raise ParseError("negative n or d in header", lineno)
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(f"expected '<row> <col> <re> <im>', got {line!r}", lineno)
        try:
            x, y = int(parts[0]), int(parts[1])
            v = complex(float(parts[2]), float(parts[3]))
        except ValueError:
            raise ParseError(f"cannot parse entry {line!r}", lineno)
        dim = 2 ** header[0]
        if not (0 <= x < dim and 0 <= y < dim):
            raise ParseError(f"index ({x},{y}) outside [0, {dim})", lineno)
        if (x, y) in seen:
            raise ParseError(f"duplicate entry ({x},{y})", lineno)
        seen.add((x, y))
        entries.append((x, y, v))
    if header is None:
        raise ParseError("missing header line 'n=<int> d=<int>'")
    n, d = header
    h = SparseHamiltonian.from_entries(n, entries)
    occupancy = h.d
    if occupancy > d:
        worst = max(range(h.dim), key=lambda x: len(h.rows[x]))
        raise SparsityError(f"row {worst} holds {occupancy} nonzeros but header declares d={d}")
    return dataclasses.replace(h, d=d)


# ---------------------------------------------------------------------------
# Pauli sums


@dataclass(frozen=True)
class PauliString:
    coefficient: float
    word: str

    def __post_init__(self):
        if not isinstance(self.coefficient, (int, float, np.floating, np.integer)):
            raise InvariantError(f"Pauli coefficient must be real, got {self.coefficient!r}")
        object.__setattr__(self, "coefficient", float(self.coefficient))
        word = self.word.upper()
        if set(word) - set("IXYZ"):
            raise InvariantError(f"invalid Pauli word {self.word!r}")
        object.__setattr__(self, "word", word)

    @property
    def n_qubits(self):
        return len(self.word)

    @property
    def support(self):
        return tuple(q for q, c in enumerate(self.word) if c != "I")

    def masks(self):
        """Bit masks ``(flip, sign)`` over basis indices.

        ``flip`` marks X/Y sites; ``sign`` marks Y/Z sites, whose row bit
        contributes a factor of -1.
        """
        n = len(self.word)
        flip = sign = 0
        for q, c in enumerate(self.word):
            bit = 1 << (n - 1 - q)
            if c in "XY":
                flip |= bit
            if c in "YZ":
                sign |= bit
        return flip, sign

    def row_action(self, rows):
        """Column index and value of the single nonzero in each of ``rows``.

        Uses ``<x|P|x^flip> = (-i)^{#Y} (-1)^{popcount(x & sign)}``.
        """
        rows = np.asarray(rows, dtype=np.int64)
        flip, sign = self.masks()
        parity = _popcount(rows & sign) & 1
        phase = (-1j) ** self.word.count("Y")
        vals = self.coefficient * phase * np.where(parity == 1, -1.0, 1.0)
        return rows ^ flip, vals

    def apply(self, psi):
        """``P psi`` without the coefficient."""
        psi = np.asarray(psi, dtype=complex)
        idx = np.arange(psi.shape[0])
        cols, vals = dataclasses.replace(self, coefficient=1.0).row_action(idx)
        # (P psi)[x] = sum_y P[x, y] psi[y] with the single y = x ^ flip
        return vals * psi[cols]

    def to_dense(self):
        return pauli_to_dense(PauliSum.from_terms(len(self.word), [self]))


def _popcount(a):
    a = np.asarray(a, dtype=np.int64)
    count = np.zeros_like(a)
    while np.any(a):
        count += a & 1
        a = a >> 1
    return count


@dataclass(frozen=True)
class PauliSum:
    n_qubits: int
    terms: tuple = field(default=())

    def __post_init__(self):
        _check_register(self.n_qubits)
        words = [p.word for p in self.terms]
        for w in words:
            if len(w) != self.n_qubits:
                raise InvariantError(f"word {w!r} does not match {self.n_qubits} qubits")
        if len(set(words)) != len(words):
            raise InvariantError("duplicate Pauli words; build with PauliSum.from_terms")

    @classmethod
    def from_terms(cls, n_qubits, terms):
        """Merge duplicate words, keeping first-seen order; zero sums are dropped."""
        merged = {}
        for p in terms:
            if not isinstance(p, PauliString):
                p = PauliString(*p)
            merged[p.word] = merged.get(p.word, 0.0) + p.coefficient
        return cls(n_qubits, tuple(PauliString(c, w) for w, c in merged.items() if c != 0.0))

    def __add__(self, other):
        return PauliSum.from_terms(self.n_qubits, self.terms + other.terms)

    def to_dense(self):
        return pauli_to_dense(self)


def pauli_to_dense(ps: PauliSum) -> np.ndarray:
    """Kronecker-product expansion."""
    _check_register(ps.n_qubits)
    dim = 2**ps.n_qubits
    h = np.zeros((dim, dim), dtype=complex)
    for p in ps.terms:
        m = np.ones((1, 1), dtype=complex)
        for c in p.word:
            m = np.kron(m, PAULI_MATRICES[c])
        h += p.coefficient * m
    return h


def pauli_to_sparse(ps: PauliSum) -> SparseHamiltonian:
    """Row lists from per-term bit masks, without forming dense matrices."""
    _check_register(ps.n_qubits)
    dim = 2**ps.n_qubits
    rows = np.arange(dim)
    acc = [dict() for _ in range(dim)]
    for p in ps.terms:
        cols, vals = p.row_action(rows)
        for x, y, v in zip(rows.tolist(), cols.tolist(), vals.tolist()):
            acc[x][y] = acc[x].get(y, 0.0) + v
    entries = [(x, y, v) for x, r in enumerate(acc) for y, v in r.items() if v != 0]
    return SparseHamiltonian.from_entries(ps.n_qubits, entries)


def format_pauli_sum(ps: PauliSum) -> str:
    return "".join(f"{_fmt_float(p.coefficient)} {p.word}\n" for p in ps.terms)


def parse_pauli_sum(text: str) -> PauliSum:
    terms = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected '<coeff> <word>', got {line!r}", lineno)
        try:
            coeff = float(parts[0])
        except ValueError:
            raise ParseError(f"bad coefficient {parts[0]!r}", lineno)
        word = parts[1].upper()
        if set(word) - set("IXYZ"):
            raise ParseError(f"bad Pauli word {parts[1]!r}", lineno)
        if n is None:
            n = len(word)
        elif len(word) != n:
            raise ParseError(f"word {word!r} has length {len(word)}, expected {n}", lineno)
        terms.append(PauliString(coeff, word))
    if n is None:
        raise ParseError("no Pauli terms found")
    return PauliSum.from_terms(n, terms)


# ---------------------------------------------------------------------------
# model builders

MODEL_KINDS = ("ising", "xy", "heisenberg", "honeycomb")


@dataclass(frozen=True)
class ModelParams:
    """Model specification with an explicit coupling graph.

    ``links`` is only used by the honeycomb model and holds one of ``x``,
    ``y``, ``z`` per edge.
    """

    kind: str
    n_qubits: int
    edges: tuple = ()
    J: float = 1.0
    B: float = 0.0
    Jx: float = 1.0
    Jy: float = 1.0
    Jz: float = 1.0
    links: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", self.kind.lower())
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        object.__setattr__(self, "links", tuple(self.links))


def chain_edges(n, periodic=False):
    edges = [(i, i + 1) for i in range(n - 1)]
    if periodic and n > 2:
        edges.append((n - 1, 0))
    return tuple(edges)


def _two_site(n, i, j, a, b):
    w = ["I"] * n
    w[i], w[j] = a, b
    return "".join(w)


def _one_site(n, i, a):
    w = ["I"] * n
    w[i] = a
    return "".join(w)


def build_model(params: ModelParams) -> PauliSum:
    n = params.n_qubits
    _check_register(n)
    if params.kind not in MODEL_KINDS:
        raise InvariantError(f"unknown model kind {params.kind!r}; expected one of {MODEL_KINDS}")
    for e in params.edges:
        if len(e) != 2 or e[0] == e[1] or not all(0 <= q < n for q in e):
            raise InvariantError(f"malformed edge {e!r} for {n} qubits")
    terms = []
    if params.kind == "ising":
        terms += [PauliString(params.J, _two_site(n, i, j, "Z", "Z")) for i, j in params.edges]
        terms += [PauliString(params.B, _one_site(n, i, "X")) for i in range(n)]
    elif params.kind in ("xy", "heisenberg"):
        couplings = [("X", params.Jx), ("Y", params.Jy)]
        if params.kind == "heisenberg":
            couplings.append(("Z", params.Jz))
        for (i, j), (a, c) in itertools.product(params.edges, couplings):
            terms.append(PauliString(c, _two_site(n, i, j, a, a)))
    else:
        if len(params.links) != len(params.edges):
            raise InvariantError("honeycomb needs exactly one link label per edge")
        signed = {"x": ("X", params.Jx), "y": ("Y", -params.Jy), "z": ("Z", -params.Jz)}
        for (i, j), label in zip(params.edges, params.links):
            if label not in signed:
                raise InvariantError(f"link label {label!r} is not one of x, y, z")
            a, c = signed[label]
            terms.append(PauliString(c, _two_site(n, i, j, a, a)))
    return PauliSum.from_terms(n, [p for p in terms if p.coefficient != 0.0])


def split_by_letter(ps: PauliSum) -> list:
    """Group terms by their set of non-identity letters.

    The transverse-field Ising model splits into its ZZ part and X part.
    Groups are ordered by first appearance.
    """
    groups = {}
    for p in ps.terms:
        key = frozenset(p.word) - {"I"}
        groups.setdefault(key, []).append(p)
    return [PauliSum.from_terms(ps.n_qubits, g) for g in groups.values()]


def to_sparse(h) -> SparseHamiltonian:
    if isinstance(h, SparseHamiltonian):
        return h
    if isinstance(h, PauliSum):
        return pauli_to_sparse(h)
    return SparseHamiltonian.from_dense(h)


def to_dense(h) -> np.ndarray:
    if isinstance(h, (SparseHamiltonian, PauliSum, PauliString)):
        return h.to_dense()
    return np.asarray(h, dtype=complex)

