from functools import reduce

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qsimkit.errors import HermiticityError, InvariantError, ParseError, ResourceCapError, SparsityError
from qsimkit.hamiltonians import (
    ModelParams,
    PauliString,
    PauliSum,
    SparseHamiltonian,
    build_model,
    chain_edges,
    format_pauli_sum,
    load_sparse,
    max_norm,
    parse_pauli_sum,
    pauli_to_dense,
    pauli_to_sparse,
    random_sparse_hamiltonian,
    save_sparse,
    split_by_letter,
)

from conftest import I2, X, Y, Z

LETTERS = {"I": I2, "X": X, "Y": Y, "Z": Z}
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def kron_word(word):
    return reduce(np.kron, [LETTERS[c] for c in word])


def two_site(n, i, j, m):
    ops = [I2] * n
    ops[i], ops[j] = m, m
    return reduce(np.kron, ops)


def one_site(n, i, m):
    ops = [I2] * n
    ops[i] = m
    return reduce(np.kron, ops)


def random_model(kind, n, g):
    edges = chain_edges(n, periodic=bool(g.integers(2)))
    links = tuple(g.choice(["x", "y", "z"], size=len(edges))) if kind == "honeycomb" else ()
    c = g.normal(size=5)
    return ModelParams(kind, n, edges, J=c[0], B=c[1], Jx=c[2], Jy=c[3], Jz=c[4], links=links)


# --- model builders -------------------------------------------------------


def test_ising_single_edge():
    ps = build_model(ModelParams("ising", 2, [(0, 1)], J=1, B=0))
    assert [(p.coefficient, p.word) for p in ps.terms] == [(1.0, "ZZ")]
    assert np.array_equal(pauli_to_dense(ps), np.diag([1, -1, -1, 1]).astype(complex))


def test_ising_single_site_field():
    ps = build_model(ModelParams("ising", 1, [], J=1, B=1))
    assert np.array_equal(pauli_to_dense(ps), X)


def test_heisenberg_spectrum_matches_direct_sum():
    ps = build_model(ModelParams("heisenberg", 3, chain_edges(3), Jx=1, Jy=1, Jz=1))
    direct = sum(two_site(3, i, i + 1, m) for i in range(2) for m in (X, Y, Z))
    assert np.allclose(np.linalg.eigvalsh(pauli_to_dense(ps)), np.linalg.eigvalsh(direct), atol=1e-12)


def test_honeycomb_signs_per_link():
    edges, links = [(0, 1), (1, 2), (2, 3)], ["x", "y", "z"]
    ps = build_model(ModelParams("honeycomb", 4, edges, Jx=0.3, Jy=0.7, Jz=1.1, links=links))
    direct = 0.3 * two_site(4, 0, 1, X) - 0.7 * two_site(4, 1, 2, Y) - 1.1 * two_site(4, 2, 3, Z)
    assert np.allclose(pauli_to_dense(ps), direct, atol=1e-15)


def test_xy_has_no_zz_term():
    ps = build_model(ModelParams("xy", 2, [(0, 1)], Jx=0.5, Jy=2.0))
    assert sorted(p.word for p in ps.terms) == ["XX", "YY"]


@pytest.mark.parametrize(
    "params",
    [
        ModelParams("potts", 2, [(0, 1)]),
        ModelParams("ising", 2, [(0, 2)]),
        ModelParams("ising", 2, [(1, 1)]),
        ModelParams("honeycomb", 2, [(0, 1)], links=()),
        ModelParams("honeycomb", 2, [(0, 1)], links=("w",)),
    ],
)
def test_build_model_rejects_bad_params(params):
    with pytest.raises(InvariantError):
        build_model(params)


def test_ising_without_field_is_diagonal():
    g = np.random.default_rng(3)
    for n in range(1, 7):
        p = random_model("ising", n, g)
        h = pauli_to_dense(build_model(ModelParams("ising", n, p.edges, J=p.J, B=0.0)))
        assert np.count_nonzero(h - np.diag(np.diag(h))) == 0


@given(st.sampled_from(["ising", "xy", "heisenberg", "honeycomb"]), st.integers(2, 8), seeds)
def test_model_forms_agree_and_are_hermitian(kind, n, seed):
    ps = build_model(random_model(kind, n, np.random.default_rng(seed)))
    dense = pauli_to_dense(ps)
    assert np.max(np.abs(dense - dense.conj().T)) <= 1e-14
    assert np.max(np.abs(pauli_to_sparse(ps).to_dense() - dense)) <= 1e-14


# --- Pauli forms ------------------------------------------------------------


def test_pauli_to_dense_examples():
    assert np.array_equal(pauli_to_dense(PauliSum(1, (PauliString(1.0, "Z"),))), np.diag([1, -1]))
    h = pauli_to_dense(PauliSum.from_terms(2, [PauliString(0.5, "XI"), PauliString(0.5, "IX")]))
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(swap @ h @ swap, h)


def test_pauli_to_dense_uses_left_to_right_qubit_order():
    assert np.array_equal(pauli_to_dense(PauliSum(2, (PauliString(1.0, "XI"),))), np.kron(X, I2))


@given(seeds)
def test_random_pauli_sum_dense_matches_kron_oracle(seed):
    g = np.random.default_rng(seed)
    words = ["".join(g.choice(list("IXYZ"), size=3)) for _ in range(5)]
    coeffs = g.normal(size=5)
    ps = PauliSum.from_terms(3, [PauliString(c, w) for c, w in zip(coeffs, words)])
    oracle = sum(c * kron_word(w) for c, w in zip(coeffs, words))
    dense = pauli_to_dense(ps)
    assert np.max(np.abs(dense - oracle)) <= 1e-14
    assert np.max(np.abs(dense - dense.conj().T)) <= 1e-14
    assert np.max(np.abs(pauli_to_sparse(ps).to_dense() - oracle)) <= 1e-14


def test_pauli_to_sparse_examples():
    hx = pauli_to_sparse(PauliSum(1, (PauliString(1.0, "X"),)))
    assert hx.d == 1 and [list(r) for r in hx.rows] == [[(1, 1)], [(0, 1)]]
    hzz = pauli_to_sparse(PauliSum(2, (PauliString(1.0, "ZZ"),)))
    assert hzz.d == 1 and all(r[0][0] == x for x, r in enumerate(hzz.rows))


def test_pauli_to_sparse_ising_chain():
    ps = build_model(ModelParams("ising", 3, chain_edges(3), J=1, B=0.5))
    oracle = sum(two_site(3, i, i + 1, Z) for i in range(2)) + 0.5 * sum(one_site(3, i, X) for i in range(3))
    sp = pauli_to_sparse(ps)
    assert np.max(np.abs(sp.to_dense() - oracle)) <= 1e-14
    assert sp.d == 4  # diagonal plus three single flips


def test_pauli_sum_merges_duplicates_and_checks_lengths():
    ps = PauliSum.from_terms(2, [PauliString(1, "XZ"), PauliString(2, "xz"), PauliString(1, "ZZ"), PauliString(-1, "ZZ")])
    assert [(p.coefficient, p.word) for p in ps.terms] == [(3.0, "XZ")]
    with pytest.raises(InvariantError):
        PauliSum.from_terms(2, [PauliString(1, "X")])
    with pytest.raises(InvariantError):
        PauliString(1j, "X")
    with pytest.raises(InvariantError):
        PauliString(1.0, "XA")


def test_register_cap():
    with pytest.raises(ResourceCapError):
        pauli_to_dense(PauliSum(13, (PauliString(1.0, "Z" * 13),)))


def test_pauli_text_round_trip():
    ps = PauliSum.from_terms(3, [PauliString(0.5, "XIZ"), PauliString(-1.25, "YYI")])
    again = parse_pauli_sum(format_pauli_sum(ps))
    assert again == ps
    with pytest.raises(ParseError, match="line 2"):
        parse_pauli_sum("0.5 XIZ\nfoo XIZ\n")


def test_split_by_letter_groups_ising():
    ps = build_model(ModelParams("ising", 3, chain_edges(3), J=1, B=0.5))
    groups = split_by_letter(ps)
    assert sorted(sorted(p.word for p in g.terms) for g in groups) == [
        ["IIX", "IXI", "XII"],
        ["IZZ", "ZZI"],
    ]


# --- sparse file format -----------------------------------------------------


def test_load_sparse_pauli_x():
    h = load_sparse("n=1 d=1\n0 1 1 0\n1 0 1 0\n")
    assert np.array_equal(h.to_dense(), X)


def test_load_sparse_missing_partner_names_rows():
    with pytest.raises(HermiticityError, match=r"\(0, ?1\)|0.*1"):
        load_sparse("n=1 d=1\n0 1 1 0\n")


def test_load_sparse_errors():
    with pytest.raises(ParseError, match="line 3"):
        load_sparse("n=1 d=1\n0 1 1 0\n1 0 one 0\n")
    with pytest.raises(ParseError, match="line 1"):
        load_sparse("d=1\n")
    with pytest.raises(SparsityError):
        load_sparse("n=1 d=1\n0 0 1 0\n0 1 1 0\n1 0 1 0\n")
    with pytest.raises(ParseError):
        load_sparse("n=1 d=1\n0 1 1 0\n0 1 1 0\n1 0 1 0\n")
    with pytest.raises(ResourceCapError):
        load_sparse("n=13 d=1\n")


def test_load_sparse_comments_and_blank_lines():
    h = load_sparse("# header\nn=1 d=2  # trailing\n\n0 0 0.5 0\n1 1 -0.5 0 # z\n")
    assert np.array_equal(h.to_dense(), 0.5 * Z) and h.d == 2


def test_save_load_round_trip_twenty_files():
    g = np.random.default_rng(11)
    for _ in range(20):
        n, d = int(g.integers(1, 6)), int(g.integers(1, 5))
        h = random_sparse_hamiltonian(n, d, g)
        back = load_sparse(save_sparse(h))
        assert back == h


def test_sparse_invariants_enforced():
    with pytest.raises(HermiticityError):
        SparseHamiltonian.from_entries(1, [(0, 1, 1j), (1, 0, 1j)])
    with pytest.raises(SparsityError):
        SparseHamiltonian.from_entries(1, [(0, 0, 1), (0, 1, 1), (1, 0, 1)], d=1)


def test_max_norm():
    assert max_norm(SparseHamiltonian.from_entries(2, [])) == 0
    assert max_norm(pauli_to_sparse(PauliSum(1, (PauliString(1.0, "X"),)))) == 1
    g = np.random.default_rng(5)
    for _ in range(10):
        h = random_sparse_hamiltonian(4, 3, g)
        assert max_norm(h) == np.max(np.abs(h.to_dense()))


@given(st.integers(1, 6), st.integers(1, 5), seeds)
def test_random_sparse_respects_d(n, d, seed):
    h = random_sparse_hamiltonian(n, d, np.random.default_rng(seed))
    dense = h.to_dense()
    assert np.max(np.count_nonzero(dense, axis=1)) <= d
    assert np.array_equal(dense, dense.conj().T)
