"""Finite-N locators for the oscillator critical points.

For truncated oscillators the MMCP, SCP and LGCP coincide at ``g/kappa =
sqrt(s)/2`` only as ``N -> inf``.  These routines locate the finite-N
counterparts (purity minimum, negativity edge, gap minimum) so the trend in
``N`` can be inspected.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar

from .core import SystemParams
from .entanglement import negativity, purity
from .liouvillian import liouvillian_gap, solve_steady_state


def _params(g, s, n_levels, kappa):
    return SystemParams(omega0=0.0, g=float(g), kappa=kappa, s=s, n_levels=n_levels)


def _refined_min(f, grid, xatol):
    """Grid scan followed by bounded golden/Brent refinement around the best node."""
    vals = np.array([f(g) for g in grid])
    i = int(np.argmin(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": xatol})
    if res.fun <= vals[i]:
        return float(res.x), float(res.fun)
    return float(grid[i]), float(vals[i])


def purity_minimum(s: float, n_levels: int, kappa: float = 1.0,
                   grid=None, xatol: float = 1e-4) -> tuple[float, float]:
    """``(g, purity)`` at the minimum of the steady-state purity."""
    grid = np.arange(0.1, 1.0 + 1e-9, 0.02) * kappa if grid is None else np.asarray(grid)
    return _refined_min(lambda g: purity(solve_steady_state(_params(g, s, n_levels, kappa))),
                        grid, xatol)


def negativity_edge(s: float, n_levels: int, kappa: float = 1.0, grid=None) -> float:
    """Coupling where the negativity collapses, from the steepest-descent tangent.

    At finite ``N`` the negativity never vanishes exactly: a truncation tail
    survives past the collapse and drifts to larger ``g`` with ``N``.  The edge
    is instead taken as the zero of the tangent line at the steepest point of
    the descent that follows the negativity maximum.
    """
    grid = np.arange(0.1, 1.0 + 1e-9, 0.01) * kappa if grid is None else np.asarray(grid)
    vals = np.array([negativity(solve_steady_state(_params(g, s, n_levels, kappa)))
                     for g in grid])
    i = int(np.argmax(vals))
    slope = np.gradient(vals, grid)
    j = i + int(np.argmin(slope[i:]))
    if slope[j] >= 0:
        raise ValueError(f"negativity does not decrease after its maximum (s={s}, N={n_levels})")
    return float(grid[j] - vals[j] / slope[j])


def gap_minimum(s: float, n_levels: int, kappa: float = 1.0, grid=None,
                xatol: float = 1e-3) -> tuple[float, float]:
    """``(g, gap)`` at the minimum of the Liouvillian gap.

    The default coarse grid spans ``[0.2, 0.6] kappa`` in steps of ``0.05``,
    which brackets the dip for ``s`` near 1/2; supply ``grid`` otherwise.
    """
    grid = np.arange(0.2, 0.6 + 1e-9, 0.05) * kappa if grid is None else np.asarray(grid)
    return _refined_min(lambda g: liouvillian_gap(_params(g, s, n_levels, kappa)), grid, xatol)


def oscillator_trend(s: float, levels=(4, 8, 12, 16, 20), kappa: float = 1.0,
                     include_gap: bool = True) -> list[dict]:
    """One row per ``N`` with the three finite-N critical-point locations."""
    rows = []
    for n in levels:
        row = {"n_levels": int(n)}
        row["purity_min"], row["purity_value"] = purity_minimum(s, n, kappa)
        row["negativity_edge"] = negativity_edge(s, n, kappa)
        if include_gap:
            row["gap_min"], row["gap_value"] = gap_minimum(s, n, kappa)
        rows.append(row)
    return rows


def approaches_monotonically(locations, target) -> bool:
    """Distance to ``target`` is strictly decreasing along ``locations``."""
    dist = np.abs(np.asarray(locations, dtype=float) - target)
    return bool(np.all(np.diff(dist) < 0))


def gap_plateau_onset(s: float, kappa: float = 1.0, grid=None, tol: float = 1e-6) -> float:
    """Start of the flat tail of the qubit gap-vs-g curve.

    The onset is the first grid coupling from which ``|d gap / d g|`` stays
    below ``tol`` up to the end of the grid.
    """
    grid = np.arange(0.05, 3.0 + 1e-9, 0.005) * kappa if grid is None else np.asarray(grid)
    gaps = np.array([liouvillian_gap(_params(g, s, 2, kappa)) for g in grid])
    slope = np.abs(np.gradient(gaps, grid))
    steep = np.flatnonzero(slope >= tol)
    if steep.size == 0:
        return float(grid[0])
    if steep[-1] == len(grid) - 1:
        raise ValueError(f"gap still varies at the end of the grid (s={s})")
    return float(grid[steep[-1] + 1])
