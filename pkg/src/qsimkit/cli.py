"""Command-line experiment driver.

Subcommands: ``model``, ``decompose``, ``evolve``, ``sweep``, ``circuit`` and
``hhl``. Errors print one line ``error: <Class>: <message>`` on stderr and
exit with 1 (parse), 2 (invariant violation) or 3 (resource cap).
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import circuits, decomposition, formulas, hamiltonians, hhl
from .core import exact_evolution, state_distance
from .errors import InvariantError, ParseError, QSimError
from .hamiltonians import ModelParams, PauliSum, SparseHamiltonian

SLOPE_FLOOR = 1e-11


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: Optional[str] = None
    n: int = 2
    edges: Optional[str] = None
    periodic: bool = False
    links: Optional[str] = None
    J: float = 1.0
    B: float = 0.0
    Jx: float = 1.0
    Jy: float = 1.0
    Jz: float = 1.0
    input: Optional[str] = None
    pauli: Optional[str] = None
    random_d: Optional[int] = None
    split: Optional[str] = None
    t: float = 1.0
    r: tuple = (1,)
    order: tuple = (1,)
    k: tuple = ()
    seed: int = 0
    eps: float = 1e-3
    out: Optional[str] = None
    fmt: str = "pauli"
    state: Optional[int] = None
    kind: str = "pauli"
    word: Optional[str] = None
    theta: float = 0.0
    bits: int = 4
    A: Optional[str] = None
    b: Optional[str] = None
    M: Optional[str] = None
    mbits: tuple = (8,)
    t0: Optional[float] = None
    C: Optional[float] = None
    shift: Optional[float] = None

    def __post_init__(self):
        if not self.r or not (self.order or self.k):
            raise ParseError("r and order grids must be nonempty")
        if self.eps <= 0:
            raise ParseError(f"eps must be positive, got {self.eps}")
        if not 0 <= self.seed < 2**64:
            raise ParseError("seed must be a 64-bit unsigned integer")


# ---------------------------------------------------------------------------
# inputs


def _read(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _is_sparse_text(text):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            return line.startswith("n=")
    return False


def _edges(cfg):
    if cfg.edges:
        try:
            return tuple(tuple(int(q) for q in e.split("-")) for e in cfg.edges.split(","))
        except ValueError:
            raise ParseError(f"cannot parse edge list {cfg.edges!r}") from None
    return hamiltonians.chain_edges(cfg.n, cfg.periodic)


def load_hamiltonian(cfg):
    """PauliSum or SparseHamiltonian from the config's source options."""
    sources = [cfg.model, cfg.input, cfg.pauli, cfg.random_d]
    if sum(s is not None for s in sources) != 1:
        raise ParseError("give exactly one of --model, --input, --pauli, --random-d")
    if cfg.model is not None:
        links = tuple(cfg.links.split(",")) if cfg.links else ()
        params = ModelParams(
            cfg.model, cfg.n, _edges(cfg), cfg.J, cfg.B, cfg.Jx, cfg.Jy, cfg.Jz, links
        )
        return hamiltonians.build_model(params)
    if cfg.pauli is not None:
        return hamiltonians.parse_pauli_sum(cfg.pauli.replace(";", "\n"))
    if cfg.random_d is not None:
        rng = np.random.default_rng(cfg.seed)
        return hamiltonians.random_sparse_hamiltonian(cfg.n, cfg.random_d, rng)
    text = _read(cfg.input)
    if _is_sparse_text(text):
        return hamiltonians.load_sparse(text)
    return hamiltonians.parse_pauli_sum(text)


def build_terms(h, split=None):
    if split is None:
        split = "letter" if isinstance(h, PauliSum) else "decompose"
    if split == "decompose":
        return formulas.TermSet(decomposition.decompose(hamiltonians.to_sparse(h)).terms)
    if not isinstance(h, PauliSum):
        raise InvariantError(f"split {split!r} needs a Pauli-sum Hamiltonian")
    if split == "letter":
        return formulas.TermSet(hamiltonians.split_by_letter(h))
    if split == "pauli":
        return formulas.TermSet(h.terms)
    raise ParseError(f"unknown split {split!r}")


def _describe(cfg):
    if cfg.model:
        return f"model={cfg.model} n={cfg.n}"
    if cfg.pauli:
        return f"pauli={cfg.pauli!r}"
    if cfg.random_d is not None:
        return f"random n={cfg.n} d={cfg.random_d}"
    return f"input={Path(cfg.input).name}"


def _num(x):
    return f"{x:.12e}"


# ---------------------------------------------------------------------------
# subcommands


def run_model(cfg):
    h = load_hamiltonian(cfg)
    if cfg.fmt == "sparse":
        return hamiltonians.save_sparse(hamiltonians.to_sparse(h))
    if not isinstance(h, PauliSum):
        raise InvariantError("Pauli output needs a Pauli-sum source")
    return hamiltonians.format_pauli_sum(h)


def term_to_sparse(term: decomposition.OneSparseTerm) -> SparseHamiltonian:
    entries = []
    for x, y, w in term.pairs:
        entries += [(x, y, w), (y, x, np.conj(w))]
    entries += [(x, x, v) for x, v in term.fixed_points]
    return SparseHamiltonian.from_entries(term.n_qubits, entries, d=1)


def run_decompose(cfg):
    """Listing text; with ``--out PREFIX`` also writes ``PREFIX.term<k>`` files."""
    h = hamiltonians.to_sparse(load_hamiltonian(cfg))
    dec = decomposition.decompose(h)
    report = decomposition.validate(dec, h)
    lines = [f"# colors={dec.color_count} terms={len(dec.terms)} residual={report.max_residual:.3e}"]
    for k, term in enumerate(dec.terms):
        lines.append(f"term {k} pairs={len(term.pairs)} fixed={len(term.fixed_points)}")
        for x, y, w in term.pairs:
            lines.append(f"  pair {x} {y} {w.real!r} {w.imag!r}")
        for x, v in term.fixed_points:
            lines.append(f"  fixed {x} {float(v)!r}")
        if cfg.out:
            Path(f"{cfg.out}.term{k}").write_text(hamiltonians.save_sparse(term_to_sparse(term)))
    if not report.passed:
        raise InvariantError(f"decomposition failed validation: residual {report.max_residual:.3e}")
    return "\n".join(lines) + "\n"


def _grid(cfg):
    points = [(o, 0 if o == 1 else o // 2) for o in cfg.order]
    points += [(2 * k, k) for k in cfg.k if (2 * k, k) not in points]
    for o, _ in points:
        if o != 1 and (o < 2 or o % 2):
            raise InvariantError(f"order {o} is neither 1 nor even")
    return points


def run_evolve(cfg):
    h = load_hamiltonian(cfg)
    ts = build_terms(h, cfg.split)
    (order, k), r = _grid(cfg)[0], cfg.r[0]
    seq = formulas.product_formula(ts, cfg.t, r, order, k or None)
    if cfg.state is None:
        rng = np.random.default_rng(cfg.seed)
        psi0 = rng.normal(size=ts.dim) + 1j * rng.normal(size=ts.dim)
        psi0 /= np.linalg.norm(psi0)
    else:
        psi0 = np.zeros(ts.dim, dtype=complex)
        psi0[cfg.state] = 1.0
    psi = formulas.evaluate_state(ts, seq, psi0)
    exact = exact_evolution(ts.total, cfg.t) @ psi0
    err = state_distance(psi, exact)
    out = io.StringIO()
    out.write(f"# qsimkit evolve {_describe(cfg)} seed={cfg.seed} order={order} k={k} r={r}\n")
    out.write("index,re,im,exact_re,exact_im\n")
    for i, (a, e) in enumerate(zip(psi, exact)):
        out.write(f"{i},{_num(a.real)},{_num(a.imag)},{_num(e.real)},{_num(e.imag)}\n")
    out.write(f"# state_error={_num(err)} eps={cfg.eps!r} within_eps={str(err <= cfg.eps).lower()}\n")
    return out.getvalue()


def sweep_rows(ts, t, rs, points):
    """``(order, k, r, t, error, bound)`` tuples in grid order."""
    exact = exact_evolution(ts.total, t)
    rows = []
    for order, k in points:
        for r in rs:
            seq = formulas.product_formula(ts, t, r, order, k or None)
            err = formulas.formula_error(ts, seq, exact)
            bound = formulas.commutator_error(ts, t, r).leading_bound if order == 1 else math.nan
            rows.append((order, k, r, t, err, bound))
    return rows


def run_sweep(cfg):
    h = load_hamiltonian(cfg)
    ts = build_terms(h, cfg.split)
    points = _grid(cfg)
    rows = sweep_rows(ts, cfg.t, cfg.r, points)
    out = io.StringIO()
    out.write(f"# qsimkit sweep {_describe(cfg)} seed={cfg.seed} terms={ts.m}\n")
    out.write("order,k,r,t,error,bound\n")
    for order, k, r, t, err, bound in rows:
        out.write(f"{order},{k},{r},{_num(t)},{_num(err)},{_num(bound)}\n")
    for order, k in points:
        sel = [row for row in rows if row[0] == order and row[1] == k]
        slope = formulas.fit_loglog_slope([s[2] for s in sel], [s[4] for s in sel], SLOPE_FLOOR)
        out.write(f"# slope order={order} k={k} value={_num(slope)}\n")
    return out.getvalue()


def parse_sweep_csv(text):
    """Rows and slope comments back from ``run_sweep`` output."""
    rows, slopes = [], {}
    for line in text.splitlines():
        if line.startswith("# slope"):
            f = dict(tok.split("=") for tok in line.split()[2:])
            slopes[(int(f["order"]), int(f["k"]))] = float(f["value"])
        elif line and not line.startswith("#") and not line.startswith("order"):
            o, k, r, t, e, b = line.split(",")
            rows.append((int(o), int(k), int(r), float(t), float(e), float(b)))
    return rows, slopes


def run_circuit(cfg):
    if cfg.kind == "pauli":
        if not cfg.word:
            raise ParseError("--word is required for a Pauli circuit")
        c = circuits.pauli_exponential_circuit(hamiltonians.PauliString(1.0, cfg.word), cfg.theta)
        return c.dump()
    h = load_hamiltonian(cfg)
    if cfg.kind == "sequence":
        ts = build_terms(h, cfg.split)
        (order, k), r = _grid(cfg)[0], cfg.r[0]
        seq = formulas.product_formula(ts, cfg.t, r, order, k or None)
        return circuits.compile_sequence(ts, seq).dump()
    h = hamiltonians.to_sparse(h)
    if cfg.kind == "diagonal":
        if any(x != y for x, y, _ in h.entries()):
            raise InvariantError("diagonal circuit needs a diagonal Hamiltonian")
        energies = np.zeros(h.dim)
        for x, _, v in h.entries():
            energies[x] = v.real
        table, rounding = circuits.DiagonalTable.from_energies(energies, cfg.bits)
        return f"# rounding_error={_num(rounding)}\n" + circuits.diagonal_circuit(table, cfg.t).dump()
    if cfg.kind == "one-sparse":
        dec = decomposition.decompose(h)
        if len(dec.terms) != 1:
            raise InvariantError(f"Hamiltonian is not 1-sparse ({len(dec.terms)} terms)")
        return circuits.one_sparse_circuit(dec.terms[0], cfg.t).dump()
    raise ParseError(f"unknown circuit kind {cfg.kind!r}")


def _parse_vector(text):
    tokens = text.replace(",", " ").split()
    try:
        return np.array([complex(tok) for tok in tokens], dtype=complex)
    except ValueError as exc:
        raise ParseError(f"cannot parse vector: {exc}") from None


def _load_matrix(path, dim):
    text = _read(path)
    if _is_sparse_text(text):
        return hamiltonians.load_sparse(text).to_dense()
    lines = [ln.split("#", 1)[0].split() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if lines and all(len(ln) == 2 and set(ln[1].upper()) <= set("IXYZ") for ln in lines):
        return hamiltonians.parse_pauli_sum(text).to_dense()
    try:
        m = np.array([[complex(tok) for tok in ln] for ln in lines], dtype=complex)
    except ValueError as exc:
        raise ParseError(f"cannot parse dense matrix in {path}: {exc}") from None
    if m.shape != (dim, dim):
        raise ParseError(f"matrix in {path} has shape {m.shape}, expected {(dim, dim)}")
    return m


def run_hhl(cfg):
    if not (cfg.A and cfg.b and cfg.M):
        raise ParseError("--A, --b and --M are required")
    A = hamiltonians.load_sparse(_read(cfg.A)).to_dense()
    b = _parse_vector(_read(cfg.b))
    M = _load_matrix(cfg.M, A.shape[0])
    classical = hhl.classical_solve(A, b, M)
    out = io.StringIO()
    out.write("mbits,estimate,rescaled,success_prob,classical,abs_err\n")
    for m in cfg.mbits:
        p = hhl.LinearSystemProblem(A, b, M, m_bits=m, t0=cfg.t0, C=cfg.C, shift=cfg.shift)
        res = hhl.solve(p)
        err = abs(res.estimate - classical.normalized)
        out.write(
            f"{m},{_num(res.estimate)},{_num(res.rescaled_estimate)},"
            f"{_num(res.success_probability)},{_num(classical.normalized)},{_num(err)}\n"
        )
    return out.getvalue()


COMMANDS = {
    "model": run_model,
    "decompose": run_decompose,
    "evolve": run_evolve,
    "sweep": run_sweep,
    "circuit": run_circuit,
    "hhl": run_hhl,
}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_source(p):
    g = p.add_argument_group("Hamiltonian source")
    g.add_argument("--model", choices=hamiltonians.MODEL_KINDS)
    g.add_argument("--input", help="sparse or Pauli-sum text file")
    g.add_argument("--pauli", help="inline Pauli sum, terms separated by ';'")
    g.add_argument("--random-d", type=int, dest="random_d", help="seeded random d-sparse H")
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--edges", help="e.g. 0-1,1-2")
    g.add_argument("--periodic", action="store_true")
    g.add_argument("--links", help="honeycomb link labels per edge, e.g. x,y,z")
    for name, default in (("J", 1.0), ("B", 0.0), ("Jx", 1.0), ("Jy", 1.0), ("Jz", 1.0)):
        g.add_argument(f"--{name}", type=float, default=default)
    g.add_argument("--split", choices=("letter", "pauli", "decompose"))


def _add_formula(p):
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--r", type=_int_list, default=(1,))
    p.add_argument("--order", type=_int_list, default=(1,))
    p.add_argument("--k", type=_int_list, default=())


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out")
    common.add_argument("--eps", type=float, default=1e-3)
    parser = _Parser(prog="qsimkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    add = lambda name, help: sub.add_parser(name, help=help, parents=[common])  # noqa: E731

    p = add("model", "print a model Hamiltonian")
    _add_source(p)
    p.add_argument("--format", dest="fmt", choices=("pauli", "sparse"), default="pauli")

    p = add("decompose", "split H into 1-sparse terms")
    _add_source(p)

    p = add("evolve", "evolve a state with a product formula")
    _add_source(p)
    _add_formula(p)
    p.add_argument("--state", type=int, help="basis-state index (default: seeded random)")

    p = add("sweep", "error versus r for each formula order")
    _add_source(p)
    _add_formula(p)

    p = add("circuit", "dump a synthesized circuit")
    _add_source(p)
    _add_formula(p)
    p.add_argument("--kind", choices=("pauli", "diagonal", "one-sparse", "sequence"), default="pauli")
    p.add_argument("--word")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--bits", type=int, default=4)

    p = add("hhl", "run the linear-system pipeline")
    p.add_argument("--A", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--M", required=True)
    p.add_argument("--mbits", type=_int_list, default=(8,))
    p.add_argument("--t0", type=float)
    p.add_argument("--C", type=float)
    p.add_argument("--shift", type=float)
    return parser


def config_from_args(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    return RunConfig(**{k: v for k, v in ns.items() if k in fields})


def execute(cfg: RunConfig) -> str:
    text = COMMANDS[cfg.command](cfg)
    if cfg.out and cfg.command != "decompose":
        Path(cfg.out).write_text(text)
    return text


def main(argv=None):
    try:
        cfg = config_from_args(sys.argv[1:] if argv is None else argv)
        text = execute(cfg)
    except QSimError as exc:
        print(f"error: {type(exc).__name__}: {exc}".replace("\n", " "), file=sys.stderr)
        return exc.exit_code
    if not cfg.out or cfg.command == "decompose":
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
