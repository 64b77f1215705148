import numpy as np
import pytest

from gainloss.core import SystemParams
from gainloss.entanglement import critical_points, negativity, purity
from gainloss.liouvillian import liouvillian_gap, solve_steady_state
from gainloss.moments import PointKind
from gainloss.thermo import (approaches_monotonically, gap_minimum, negativity_edge,
                             oscillator_trend, purity_minimum)


def test_purity_minimum_is_a_minimum():
    g, val = purity_minimum(0.5, 5)
    for dg in (-0.02, 0.02):
        assert purity(solve_steady_state(SystemParams(omega0=0, g=g + dg, s=0.5,
                                                      n_levels=5))) >= val
    assert val >= 1 / 25


def test_negativity_edge_beyond_maximum():
    edge = negativity_edge(0.5, 5)
    grid = np.linspace(0.1, 1.0, 46)
    vals = [negativity(solve_steady_state(SystemParams(omega0=0, g=g, s=0.5, n_levels=5)))
            for g in grid]
    assert edge > grid[int(np.argmax(vals))]


def test_gap_minimum_brackets():
    g, val = gap_minimum(0.5, 4)
    assert 0.2 < g < 0.6
    for dg in (-0.01, 0.01):
        assert liouvillian_gap(SystemParams(omega0=0, g=g + dg, s=0.5, n_levels=4)) >= val - 1e-9


def test_trend_rows():
    rows = oscillator_trend(0.5, (4, 5), include_gap=False)
    assert [r["n_levels"] for r in rows] == [4, 5]
    assert all("gap_min" not in r for r in rows)


def test_monotone_helper():
    assert approaches_monotonically([0.5, 0.45, 0.36], 0.354)
    assert approaches_monotonically([0.30, 0.33, 0.36], 0.354)
    assert not approaches_monotonically([0.5, 0.45, 0.45], 0.354)


def test_critical_points_with_trend():
    pts = critical_points(0.5, "oscillator", trend_levels=(3, 5))
    by_kind = {p.kind: p for p in pts}
    scp = by_kind[PointKind.SCP]
    assert scp.evidence["levels"] == [3, 5] and len(scp.evidence["locations"]) == 2
    assert scp.verified == approaches_monotonically(scp.evidence["locations"], 1 / np.sqrt(8))
