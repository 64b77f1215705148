"""Steady-state information measures and separable critical points.

Generic measures act on any density matrix; the ``*_closed`` functions are the
qubit steady-state formulas and serve as cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core import SystemParams, number_operators
from .liouvillian import solve_steady_state
from .moments import PointKind, PointList, PointReport

_PAULI_Y = np.array([[0, -1j], [1j, 0]])
_YY = np.kron(_PAULI_Y, _PAULI_Y)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))


def linear_entropy(rho: np.ndarray) -> float:
    """``D/(D-1) (1 - Tr rho^2)``, normalized to [0, 1] (``4/3`` for two qubits)."""
    d = rho.shape[0]
    return d / (d - 1) * (1 - purity(rho))


def concurrence(rho: np.ndarray) -> float:
    """Wootters concurrence of a two-qubit state (computational basis)."""
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError(f"concurrence needs a 4x4 two-qubit state, got {rho.shape}")
    r = rho @ _YY @ rho.conj() @ _YY
    ev = np.sort(np.real(np.linalg.eigvals(r)))[::-1]
    lam = np.sqrt(np.clip(ev, 0, None))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def partial_transpose(rho: np.ndarray, dims) -> np.ndarray:
    """Transpose on the second subsystem."""
    d1, d2 = dims
    if d1 * d2 != rho.shape[0]:
        raise ValueError(f"dims {dims} do not match state dimension {rho.shape[0]}")
    return rho.reshape(d1, d2, d1, d2).transpose(0, 3, 2, 1).reshape(d1 * d2, d1 * d2)


def negativity(rho: np.ndarray, dims=None) -> float:
    """Sum of the magnitudes of the negative partial-transpose eigenvalues."""
    if dims is None:
        n = int(round(math.sqrt(rho.shape[0])))
        dims = (n, n)
    ev = np.linalg.eigvalsh(partial_transpose(rho, dims))
    return float(-ev[ev < 0].sum())


def epr_from_state(rho: np.ndarray, n_levels: int = 2) -> float:
    """``<n1><n2> - <n1 n2>``."""
    n1, n2 = number_operators(n_levels)
    e1 = np.real(np.trace(n1 @ rho))
    e2 = np.real(np.trace(n2 @ rho))
    e12 = np.real(np.trace(n1 @ n2 @ rho))
    return float(e1 * e2 - e12)


def _check_qubit(params):
    if params.n_levels != 2:
        raise ValueError("closed-form measures hold for n_levels=2 only")


def epr_measure(params: SystemParams) -> float:
    _check_qubit(params)
    g, k, s = params.g, params.kappa, params.s
    denom = 4 * g**2 + s * k**2
    if denom == 0:
        return 0.0
    return (s / (s + 1) * 2 * g * k / denom) ** 2


def linear_entropy_closed(params: SystemParams) -> float:
    _check_qubit(params)
    g, k, s = params.g, params.kappa, params.s
    denom = 4 * g**2 + s * k**2
    if denom == 0:
        return 0.0
    brace = (1 + s**2) * (1 + s) ** 2 * k**2 + 8 * (s**2 + s + 1) * g**2
    return 32 / 3 * s / (s + 1) ** 4 * (g / denom) ** 2 * brace


def negativity_closed(params: SystemParams) -> float:
    _check_qubit(params)
    g, k, s = params.g, params.kappa, params.s
    if g >= (s + 1) * k / 2:
        return 0.0
    denom = 4 * g**2 + s * k**2
    if denom == 0:
        return 0.0
    bracket = math.sqrt((s - 1) ** 2 * g**2 + s**2 * k**2) - (s**2 + 1) / (s + 1) * g
    return 2 * g / denom * bracket / (s + 1)


def purity_closed(params: SystemParams) -> float:
    _check_qubit(params)
    g, k, s = params.g, params.kappa, params.s
    denom = (1 + s) ** 4 * (4 * g**2 + s * k**2) ** 2
    if denom == 0:
        return 1.0
    num = 16 * g**2 * (s**2 * (1 + s) ** 2 * k**2 + (1 + s**2) ** 2 * g**2) + s**2 * (1 + s) ** 4 * k**4
    return num / denom


@dataclass(frozen=True)
class MeasureReport:
    epr: float
    linear_entropy: float
    concurrence: float
    negativity: float
    purity: float

    def as_dict(self) -> dict:
        return dict(epr=self.epr, linear_entropy=self.linear_entropy,
                    concurrence=self.concurrence, negativity=self.negativity,
                    purity=self.purity)


def measures(rho: np.ndarray, n_levels: int) -> MeasureReport:
    """All measures of a state; concurrence is ``nan`` beyond qubits."""
    conc = concurrence(rho) if n_levels == 2 else float("nan")
    return MeasureReport(epr=epr_from_state(rho, n_levels), linear_entropy=linear_entropy(rho),
                         concurrence=conc, negativity=negativity(rho, (n_levels, n_levels)),
                         purity=purity(rho))


def steady_measures(params: SystemParams) -> MeasureReport:
    return measures(solve_steady_state(params), params.n_levels)


def _entanglement_edge(measure, s, kappa, lo, hi, floor=1e-12):
    """Coupling where a qubit steady-state entanglement measure first vanishes."""
    def f(g):
        rho = solve_steady_state(SystemParams(omega0=0.0, g=g, kappa=kappa, s=s))
        return measure(rho) - floor

    return brentq(f, lo, hi, xtol=1e-12)


def locate_qubit_scp(s: float, kappa: float = 1.0, measure=negativity) -> float:
    """Numeric zero crossing of a qubit entanglement measure.

    The measure vanishes identically beyond the crossing, so the root of
    ``measure - 1e-12`` is bracketed between a coupling below the analytic
    SCP and a value far above it.
    """
    if s == 0:
        raise ValueError("no entanglement at s=0: the steady state is the vacuum")
    guess = (s + 1) / 2 * kappa
    return _entanglement_edge(measure, s, kappa, 0.5 * guess, 2 * guess)


def max_concurrence(s: float, kappa: float = 1.0) -> tuple[float, float]:
    """``(g_at_max, max_concurrence)`` by bounded scalar search."""
    def neg_c(g):
        return -concurrence(solve_steady_state(SystemParams(omega0=0.0, g=g, kappa=kappa, s=s)))

    res = minimize_scalar(neg_c, bounds=(1e-3 * kappa, (s + 1) / 2 * kappa), method="bounded",
                          options={"xatol": 1e-9})
    return float(res.x), float(-res.fun)


def critical_points(s: float, model: str = "qubit", verify: bool = True,
                    trend_levels=None) -> PointList:
    """Separable / maximally mixed / gap critical points.

    qubit: SCP at ``g/kappa = (s+1)/2``, verified by locating the numeric zero
    crossing of the steady-state negativity (within ``1e-3``).
    oscillator: MMCP, SCP and LGCP coincide at ``g/kappa = sqrt(s)/2``.  They
    hold only as ``N -> inf``; pass ``trend_levels`` (e.g. ``(4, 8, 12)``)
    to attach the finite-N locations from :func:`gainloss.thermo.oscillator_trend`.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    if model == "qubit":
        g0 = (s + 1) / 2
        evidence = {}
        ok = True
        if s == 0:
            evidence["note"] = "s=0: steady state is the vacuum, negativity identically 0"
        elif verify:
            g_num = locate_qubit_scp(s)
            evidence["negativity_zero"] = g_num
            ok = abs(g_num - g0) < 1e-3
        return PointList([PointReport(PointKind.SCP, g0, "qubit", evidence, ok)])

    if model == "oscillator":
        g0 = math.sqrt(s) / 2
        evidence = {"note": "N -> infinity limit; finite N only trends toward it"}
        by_kind = {PointKind.MMCP: "purity_min", PointKind.SCP: "negativity_edge",
                   PointKind.LGCP: "gap_min"}
        trend = None
        if trend_levels:
            from .thermo import approaches_monotonically, oscillator_trend

            trend = oscillator_trend(s, trend_levels)
        out = PointList()
        for kind, key in by_kind.items():
            ev = dict(evidence)
            ok = trend is None
            if trend is not None:
                locs = [row[key] for row in trend]
                ev["levels"] = list(trend_levels)
                ev["locations"] = locs
                ok = approaches_monotonically(locs, g0)
            out.append(PointReport(kind, g0, "oscillator", ev, ok))
        return out

    raise ValueError(f"model must be 'qubit' or 'oscillator', got {model!r}")
