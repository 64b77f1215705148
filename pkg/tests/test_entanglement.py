import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gainloss.core import SystemParams, basis_state
from gainloss.entanglement import (MeasureReport, concurrence, critical_points, epr_from_state,
                                   epr_measure, linear_entropy, linear_entropy_closed,
                                   locate_qubit_scp, max_concurrence, measures, negativity,
                                   negativity_closed, partial_transpose, purity, purity_closed,
                                   steady_measures)
from gainloss.liouvillian import solve_steady_state
from gainloss.moments import PointKind

GRID = [(s, g) for s in (0.5, 1.0, 2.0) for g in np.linspace(0.03, 3.0, 100)]


def bell():
    psi = np.zeros(4, dtype=complex)
    psi[1] = psi[2] = 1 / np.sqrt(2)
    return np.outer(psi, psi.conj())


def test_bell_state():
    rho = bell()
    assert concurrence(rho) == pytest.approx(1.0)
    assert negativity(rho) == pytest.approx(0.5)
    assert purity(rho) == pytest.approx(1.0)


def test_product_state_separable():
    rho = basis_state((1, 0), 2)
    assert concurrence(rho) == 0.0
    assert negativity(rho) == 0.0
    assert linear_entropy(rho) == pytest.approx(0.0)


def test_maximally_mixed():
    for d in (4, 9):
        rho = np.eye(d) / d
        assert linear_entropy(rho) == pytest.approx(1.0)
        assert purity(rho) == pytest.approx(1 / d)


def test_input_validation():
    with pytest.raises(ValueError):
        concurrence(np.eye(9) / 9)
    with pytest.raises(ValueError):
        partial_transpose(np.eye(4) / 4, (3, 3))


def test_partial_transpose_involution():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    assert np.allclose(partial_transpose(partial_transpose(a, (2, 3)), (2, 3)), a)


def test_closed_forms_match_state_measures():
    worst = 0.0
    for s, g in GRID:
        p = SystemParams(g=g, s=s)
        rho = solve_steady_state(p)
        pairs = [(epr_measure(p), epr_from_state(rho)),
                 (linear_entropy_closed(p), linear_entropy(rho)),
                 (negativity_closed(p), negativity(rho)),
                 (purity_closed(p), purity(rho))]
        worst = max(worst, max(abs(a - b) for a, b in pairs))
    assert worst <= 1e-9


@settings(max_examples=40, deadline=None)
@given(s=st.floats(0.05, 5), g=st.floats(0.01, 6))
def test_concurrence_zero_iff_negativity_zero(s, g):
    rho = solve_steady_state(SystemParams(g=g, s=s))
    c, n = concurrence(rho), negativity(rho)
    assert (c <= 1e-8) == (n <= 1e-8)


def test_measure_ranges():
    for s, g in GRID[::7]:
        rep = steady_measures(SystemParams(g=g, s=s))
        assert 0 <= rep.linear_entropy <= 1 and 0 <= rep.concurrence <= 1
        assert 0.25 - 1e-12 <= rep.purity <= 1 and rep.negativity >= 0


def test_epr_examples():
    assert epr_measure(SystemParams(g=0.5, s=1.0)) == pytest.approx(1 / 16)
    assert epr_measure(SystemParams(g=np.sqrt(2) / 2, s=2.0)) == pytest.approx(1 / 18)
    assert epr_measure(SystemParams(g=1e-6)) == pytest.approx(0, abs=1e-10)
    assert epr_measure(SystemParams(g=1e6)) == pytest.approx(0, abs=1e-10)


def test_linear_entropy_limits():
    assert linear_entropy_closed(SystemParams(g=1e4, s=1.0)) == pytest.approx(1.0, abs=1e-6)
    assert linear_entropy_closed(SystemParams(g=1e4, s=2.0)) == pytest.approx(224 / 243, abs=1e-6)
    assert linear_entropy_closed(SystemParams(g=1e-6)) == pytest.approx(0.0, abs=1e-9)


def test_purity_examples():
    assert purity_closed(SystemParams(g=0.0, s=0.7)) == 1.0
    p = SystemParams(g=0.5, s=1.0)
    # s = 1, g = 1/2: (16/4 (4 + 1) + 16) / (16 * 4) = 9/16
    assert purity_closed(p) == pytest.approx(9 / 16)
    assert purity(solve_steady_state(p)) == pytest.approx(9 / 16, abs=1e-12)


def test_negativity_maximum_balanced():
    gs = np.linspace(0.2, 0.45, 2001)
    vals = [negativity_closed(SystemParams(g=g, s=1.0)) for g in gs]
    i = int(np.argmax(vals))
    assert vals[i] == pytest.approx(1 / (2 + 2 * np.sqrt(5)), abs=1e-8)
    assert gs[i] == pytest.approx(1 / (1 + np.sqrt(5)), abs=2e-4)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_negativity_continuous_at_edge(s):
    edge = (s + 1) / 2
    for g in (edge - 1e-12, edge, edge + 1e-12):
        assert abs(negativity_closed(SystemParams(g=g, s=s))) <= 1e-9
        assert negativity(solve_steady_state(SystemParams(g=g, s=s))) <= 1e-9


def test_balanced_concurrence_zero_from_kappa():
    # the concurrence vanishes for g >= kappa at s = 1 (not from kappa/2)
    assert concurrence(solve_steady_state(SystemParams(g=0.6))) > 0.05
    assert concurrence(solve_steady_state(SystemParams(g=1.0))) <= 1e-9
    assert concurrence(solve_steady_state(SystemParams(g=1.5))) == 0.0


def test_max_concurrence():
    g, c = max_concurrence(1.0)
    assert c == pytest.approx(1 / (1 + np.sqrt(5)), abs=1e-6)
    assert g == pytest.approx(1 / (1 + np.sqrt(5)), abs=1e-4)


@pytest.mark.parametrize("s,expected", [(0.5, 0.75), (1.0, 1.0), (2.0, 1.5)])
def test_qubit_scp(s, expected):
    (pt,) = critical_points(s, "qubit")
    assert pt.kind == PointKind.SCP and pt.g_over_kappa == expected and pt.verified
    assert locate_qubit_scp(s) == pytest.approx(expected, abs=1e-3)
    assert locate_qubit_scp(s, measure=concurrence) == pytest.approx(expected, abs=1e-3)


def test_qubit_scp_no_gain():
    (pt,) = critical_points(0.0, "qubit")
    assert pt.g_over_kappa == 0.5 and "vacuum" in pt.evidence["note"]
    with pytest.raises(ValueError):
        locate_qubit_scp(0.0)


@pytest.mark.parametrize("s,expected", [(0.5, 1 / (2 * np.sqrt(2))), (1.0, 0.5),
                                        (2.0, 1 / np.sqrt(2))])
def test_oscillator_points_location(s, expected):
    pts = critical_points(s, "oscillator")
    assert {p.kind for p in pts} == {PointKind.MMCP, PointKind.SCP, PointKind.LGCP}
    assert all(p.g_over_kappa == pytest.approx(expected) for p in pts)


def test_critical_points_errors():
    with pytest.raises(ValueError):
        critical_points(-1.0)
    with pytest.raises(ValueError):
        critical_points(1.0, "trimer")


def test_oscillator_measures_report():
    rep = measures(solve_steady_state(SystemParams(g=0.6, s=0.5, n_levels=4)), 4)
    assert isinstance(rep, MeasureReport) and np.isnan(rep.concurrence)
    assert 1 / 16 <= rep.purity <= 1 and rep.negativity >= 0
    assert set(rep.as_dict()) == {"epr", "linear_entropy", "concurrence", "negativity", "purity"}
