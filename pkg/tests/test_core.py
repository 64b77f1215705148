import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gainloss.core import (SystemParams, basis_state, check_density_matrix, embed, hamiltonian,
                           lowering_operator, number_operators, site_operators)

rates = st.floats(min_value=0.0, max_value=10.0, allow_nan=False)


def test_lowering_qubit():
    assert np.array_equal(lowering_operator(2), np.array([[0, 1], [0, 0]]))


def test_lowering_three_levels():
    a = lowering_operator(3)
    assert a[0, 1] == 1 and np.isclose(a[1, 2], np.sqrt(2))
    assert np.count_nonzero(a) == 2


def test_qubit_anticommutator_exact():
    s = lowering_operator(2)
    assert np.array_equal(s @ s.conj().T + s.conj().T @ s, np.eye(2))


@pytest.mark.parametrize("n", [0, 1, 2.5])
def test_lowering_rejects(n):
    with pytest.raises(ValueError):
        lowering_operator(n)


def test_embed_identity_and_commute():
    assert np.array_equal(embed(np.eye(2), 1, 2), np.eye(4))
    s1, s2 = site_operators(2)
    assert np.array_equal(s1 @ s2, s2 @ s1)


def test_embed_site1_entries():
    s1 = embed(lowering_operator(2), 1, 2)
    assert set(zip(*np.nonzero(s1))) == {(0, 2), (1, 3)}


def test_embed_errors():
    with pytest.raises(ValueError):
        embed(np.eye(2), 3, 2)
    with pytest.raises(ValueError):
        embed(np.eye(3), 1, 2)


@pytest.mark.parametrize("n", [2, 3, 5])
def test_embed_preserves_spectrum(n):
    op = np.diag(np.arange(n, dtype=float)) + lowering_operator(n)
    for site in (1, 2):
        ev = np.sort(np.linalg.eigvals(embed(op, site, n)).real)
        assert np.allclose(ev, np.sort(np.repeat(np.linalg.eigvals(op).real, n)))


def test_hamiltonian_decoupled():
    h = hamiltonian(SystemParams(omega0=3.0, g=0.0))
    assert np.array_equal(h, np.diag([0, 3.0, 3.0, 6.0]).astype(complex))


def test_hamiltonian_spectrum():
    ev = np.linalg.eigvalsh(hamiltonian(SystemParams(omega0=1.0, g=0.5)))
    assert np.allclose(ev, [0, 0.5, 1.5, 2])


@settings(max_examples=30, deadline=None)
@given(w=rates, g=rates, n=st.integers(2, 5))
def test_hamiltonian_hermitian_exact(w, g, n):
    h = hamiltonian(SystemParams(omega0=w, g=g, n_levels=n))
    assert np.array_equal(h, h.conj().T)


def test_basis_states():
    n1, n2 = number_operators(2)
    rho = basis_state((1, 0), 2)
    assert np.linalg.matrix_rank(rho) == 1
    assert np.trace(n1 @ rho) == 1 and np.trace(n2 @ rho) == 0
    assert np.trace(n1 @ n2 @ basis_state((1, 1), 2)) == 1
    for n in (2, 4):
        g = basis_state((0, 0), n)
        assert np.trace(g) == 1 and np.trace(g @ g) == 1
        check_density_matrix(g)
    with pytest.raises(ValueError):
        basis_state((2, 0), 2)


@pytest.mark.parametrize("bad", [dict(g=-1), dict(kappa=-0.1), dict(s=-2), dict(n_levels=1),
                                 dict(n_levels=2.5), dict(omega0=float("nan"))])
def test_params_validation(bad):
    with pytest.raises(ValueError):
        SystemParams(**bad)


def test_params_helpers():
    p = SystemParams()
    assert p.is_qubit and p.dim == 4 and p.is_pt_symmetric
    q = p.with_(s=2.0, n_levels=3)
    assert not q.is_pt_symmetric and q.dim == 9 and p.s == 1.0


def test_check_density_matrix_rejects():
    with pytest.raises(ValueError, match="Hermitian"):
        check_density_matrix(np.array([[1, 1], [0, 0]], dtype=complex))
    with pytest.raises(ValueError, match="trace"):
        check_density_matrix(np.eye(2))
    with pytest.raises(ValueError, match="negative"):
        check_density_matrix(np.diag([1.5, -0.5]))
