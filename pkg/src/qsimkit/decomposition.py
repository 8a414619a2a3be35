"""Graph construction, greedy edge coloring and 1-sparse decomposition.

Each basis state is a vertex, each Hermitian off-diagonal pair an undirected
edge weighted by ``<x|H|y>`` with ``x < y``. A proper edge coloring splits
the edges into matchings; every matching is a 1-sparse Hamiltonian. The
diagonal is collected into one extra term.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .hamiltonians import check_sparse_hermitian, to_sparse
from .errors import InvariantError


@dataclass(frozen=True)
class HamiltonianGraph:
    n_vertices: int
    edges: tuple  # (x, y, weight) with x < y, lexicographic
    loops: tuple  # (x, real weight)

    def max_degree(self):
        deg = Counter()
        for x, y, _ in self.edges:
            deg[x] += 1
            deg[y] += 1
        return max(deg.values(), default=0)


@dataclass(frozen=True)
class OneSparseTerm:
    """Weighted partial pairing of basis states plus diagonal fixed points.

    A pair ``(x, y, w)`` stands for ``w|x><y| + conj(w)|y><x|``.
    """

    n_qubits: int
    pairs: tuple = ()
    fixed_points: tuple = ()

    def __post_init__(self):
        dim = 2**self.n_qubits
        used = Counter()
        for x, y, _ in self.pairs:
            if x == y:
                raise InvariantError(f"pair ({x},{y}) is a loop; use a fixed point")
            used[x] += 1
            used[y] += 1
        for x, v in self.fixed_points:
            if abs(np.imag(v)) > 0:
                raise InvariantError(f"fixed point {x} carries non-real weight {v}")
            used[x] += 1
        for x, c in used.items():
            if not 0 <= x < dim:
                raise InvariantError(f"basis state {x} outside [0, {dim})")
            if c > 1:
                raise InvariantError(f"basis state {x} appears {c} times in a 1-sparse term")

    @property
    def dim(self):
        return 2**self.n_qubits

    def to_dense(self):
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for x, y, w in self.pairs:
            h[x, y] = w
            h[y, x] = np.conj(w)
        for x, v in self.fixed_points:
            h[x, x] = np.real(v)
        return h

    def _arrays(self):
        xs = np.array([p[0] for p in self.pairs], dtype=np.int64)
        ys = np.array([p[1] for p in self.pairs], dtype=np.int64)
        ws = np.array([p[2] for p in self.pairs], dtype=complex)
        fx = np.array([f[0] for f in self.fixed_points], dtype=np.int64)
        fv = np.array([np.real(f[1]) for f in self.fixed_points], dtype=float)
        return xs, ys, ws, fx, fv

    def apply_evolution(self, psi, t):
        """``exp(-i t H) psi`` block by block; states outside the term are untouched.

        Works on a 1-D state or on a ``(dim, batch)`` array of states.
        """
        psi = np.asarray(psi, dtype=complex)
        out = psi.copy()
        xs, ys, ws, fx, fv = self._arrays()
        if len(xs):
            mag = np.abs(ws)
            unit = np.where(mag > 0, ws / np.where(mag > 0, mag, 1), 0)
            c = np.cos(mag * t)
            s = np.sin(mag * t)
            if psi.ndim == 2:
                c, s, unit = c[:, None], s[:, None], unit[:, None]
            a, b = psi[xs], psi[ys]
            out[xs] = c * a - 1j * s * unit * b
            out[ys] = c * b - 1j * s * np.conj(unit) * a
        if len(fx):
            phase = np.exp(-1j * fv * t)
            out[fx] = (phase[:, None] if psi.ndim == 2 else phase) * psi[fx]
        return out

    def evolution(self, t):
        return self.apply_evolution(np.eye(self.dim, dtype=complex), t)


@dataclass(frozen=True)
class ColoredDecomposition:
    terms: tuple  # OneSparseTerm, color classes first, diagonal term last
    color_count: int


@dataclass(frozen=True)
class ValidationReport:
    max_residual: float
    term_is_one_sparse: tuple
    term_is_hermitian: tuple
    color_count: int
    tol: float

    @property
    def passed(self):
        return (
            self.max_residual <= self.tol
            and all(self.term_is_one_sparse)
            and all(self.term_is_hermitian)
        )


def build_graph(h) -> HamiltonianGraph:
    h = to_sparse(h)
    check_sparse_hermitian(h.rows)
    edges, loops = [], []
    for x, y, v in h.entries():
        if x < y:
            edges.append((x, y, v))
        elif x == y:
            loops.append((x, float(v.real)))
    edges.sort(key=lambda e: (e[0], e[1]))
    return HamiltonianGraph(h.dim, tuple(edges), tuple(loops))


def color_edges(g: HamiltonianGraph) -> list:
    """Greedy proper edge coloring in lexicographic edge order.

    Each edge takes the smallest color free at both endpoints. An endpoint
    blocks at most ``deg - 1`` colors, so at most ``2*Delta - 1`` are used.
    """
    used_at = {}
    classes = []
    for x, y, w in sorted(g.edges, key=lambda e: (e[0], e[1])):
        busy = used_at.setdefault(x, set()) | used_at.setdefault(y, set())
        c = 0
        while c in busy:
            c += 1
        if c == len(classes):
            classes.append([])
        classes[c].append((x, y, w))
        used_at[x].add(c)
        used_at[y].add(c)
    return classes


def decompose(h) -> ColoredDecomposition:
    h = to_sparse(h)
    g = build_graph(h)
    classes = color_edges(g)
    terms = [OneSparseTerm(h.n_qubits, pairs=tuple(c)) for c in classes]
    loops = tuple((x, v) for x, v in g.loops if v != 0)
    if loops:
        terms.append(OneSparseTerm(h.n_qubits, fixed_points=loops))
    return ColoredDecomposition(tuple(terms), len(classes))


def validate(dec: ColoredDecomposition, h, tol=1e-12) -> ValidationReport:
    h = to_sparse(h)
    target = h.to_dense()
    total = np.zeros_like(target)
    sparse_ok, herm_ok = [], []
    for term in dec.terms:
        if term.n_qubits != h.n_qubits:
            raise InvariantError(
                f"term acts on {term.n_qubits} qubits, Hamiltonian on {h.n_qubits}"
            )
        m = term.to_dense()
        total += m
        sparse_ok.append(bool(np.all(np.count_nonzero(m, axis=1) <= 1)))
        herm_ok.append(bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= 1e-14))
    residual = float(np.max(np.abs(total - target), initial=0.0))
    return ValidationReport(residual, tuple(sparse_ok), tuple(herm_ok), dec.color_count, tol)


def is_matching(edges) -> bool:
    seen = Counter()
    for x, y, _ in edges:
        seen[x] += 1
        seen[y] += 1
    return all(c == 1 for c in seen.values())
