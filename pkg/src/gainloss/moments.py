"""Closed moment equations, their exceptional points, and steady observables.

First moments ``psi = (<s1>, <s2>, <s1^dag s1 s2>, <s1 s2^dag s2>)`` obey
``i d psi/dt = H_eff psi``; second moments
``Psi = (<n1>, <n2>, <s1^dag s2>, <s2^dag s1>)`` obey
``i d Psi/dt = M Psi + P``.  Both hierarchies close exactly for qubits.

Exceptional points are certified numerically in extended precision (mpmath):
at a genuine EP the eigenvector matrix becomes singular, whereas the
second-moment matrix also carries a permanently degenerate but diagonalizable
eigenvalue ``-i (1+s) kappa/2``, so eigenvalue distance alone cannot tell the
two apart.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .core import SystemParams, number_operators

EP_DISTANCE_TOL = 1e-6
EP_CONDITION_MIN = 1e6
_MP_DPS = 50


class PointKind(str, enum.Enum):
    TYPE_I_MEP = "TypeI_MEP"
    TYPE_II_MEP = "TypeII_MEP"
    SCP = "SCP"
    MMCP = "MMCP"
    LGCP = "LGCP"
    PT_SYMMETRIC = "PT_symmetric"


@dataclass(frozen=True)
class PointReport:
    """A located point of interest on the ``g / kappa`` axis."""

    kind: PointKind
    g_over_kappa: float
    model: str = "qubit"
    evidence: dict = field(default_factory=dict)
    verified: bool = True

    def __post_init__(self):
        if self.g_over_kappa < 0:
            raise ValueError("g_over_kappa must be >= 0")


class PointList(list):
    """List of :class:`PointReport` with an optional explanatory note."""

    def __init__(self, items=(), note: str = ""):
        super().__init__(items)
        self.note = note


def _require_qubit(params):
    if params.n_levels != 2:
        raise ValueError(f"closed moment equations need n_levels=2, got {params.n_levels}")


def _first_moment_entries(w0, g, k, s, i):
    half = k / 2
    return [
        [w0 - i * s * half, g, -2 * g, 0],
        [g, w0 - i * half, 0, -2 * g],
        [0, i * s * k, w0 - i * k * (s + 0.5), -g],
        [0, 0, -g, w0 - i * k * (1 + s / 2)],
    ]


def _second_moment_entries(g, k, s, i):
    c = -i * (1 + s) * k / 2
    return [
        [-i * s * k, 0, g, -g],
        [0, -i * k, -g, g],
        [g, -g, c, 0],
        [-g, g, 0, c],
    ]


def _osc_first_moment_entries(w0, g, k, s, i):
    return [
        [w0 + i * s * k / 2, g],
        [g, w0 - i * k / 2],
    ]


def _osc_second_moment_entries(g, k, s, i):
    c = i * (s - 1) * k / 2
    return [
        [i * s * k, 0, g, -g],
        [0, -i * k, -g, g],
        [g, -g, c, 0],
        [-g, g, 0, c],
    ]


def first_moment_matrix(params: SystemParams) -> np.ndarray:
    """4x4 effective Hamiltonian of the qubit first moments."""
    _require_qubit(params)
    p = params
    return np.array(_first_moment_entries(p.omega0, p.g, p.kappa, p.s, 1j), dtype=complex)


@dataclass(frozen=True)
class SecondMomentSystem:
    matrix: np.ndarray
    drive: np.ndarray

    def steady_solution(self) -> np.ndarray:
        """``Psi`` with ``M Psi + P = 0``."""
        return -np.linalg.solve(self.matrix, self.drive)


def second_moment_system(params: SystemParams) -> SecondMomentSystem:
    """Dynamical matrix and drive of the qubit second moments."""
    _require_qubit(params)
    p = params
    m = np.array(_second_moment_entries(p.g, p.kappa, p.s, 1j), dtype=complex)
    drive = np.array([1j * p.s * p.kappa, 0, 0, 0], dtype=complex)
    return SecondMomentSystem(matrix=m, drive=drive)


def oscillator_first_moment_matrix(params: SystemParams) -> np.ndarray:
    """2x2 matrix for ``(<a1>, <a2>)`` of untruncated oscillators."""
    p = params
    return np.array(_osc_first_moment_entries(p.omega0, p.g, p.kappa, p.s, 1j), dtype=complex)


def oscillator_second_moment_system(params: SystemParams) -> SecondMomentSystem:
    """Second-moment equations of untruncated oscillators (same basis as qubits)."""
    p = params
    m = np.array(_osc_second_moment_entries(p.g, p.kappa, p.s, 1j), dtype=complex)
    drive = np.array([1j * p.s * p.kappa, 0, 0, 0], dtype=complex)
    return SecondMomentSystem(matrix=m, drive=drive)


# --- exceptional points -----------------------------------------------------

def _mp_matrix(which, g, s, kappa, omega0=0):
    i = mpmath.mpc(0, 1)
    g, s, kappa = mpmath.mpf(g), mpmath.mpf(s), mpmath.mpf(kappa)
    if which == "first":
        rows = _first_moment_entries(mpmath.mpf(omega0), g, kappa, s, i)
    elif which == "second":
        rows = _second_moment_entries(g, kappa, s, i)
    elif which == "osc_first":
        rows = _osc_first_moment_entries(mpmath.mpf(omega0), g, kappa, s, i)
    elif which == "osc_second":
        rows = _osc_second_moment_entries(g, kappa, s, i)
    else:
        raise ValueError(f"unknown moment matrix {which!r}")
    return mpmath.matrix(rows)


def _spectral_evidence(m):
    """Minimum eigenvalue-pair distance and eigenvector condition number."""
    vals, vecs = mpmath.eig(m)
    n = len(vals)
    for j in range(n):
        norm = mpmath.sqrt(sum(abs(vecs[r, j]) ** 2 for r in range(n)))
        for r in range(n):
            vecs[r, j] /= norm
    try:
        cond = mpmath.norm(vecs, 2) * mpmath.norm(mpmath.inverse(vecs), 2)
    except ZeroDivisionError:
        cond = mpmath.inf
    dist = min(abs(vals[a] - vals[b]) for a in range(n) for b in range(a + 1, n))
    return float(dist), float(cond)


def ep_evidence(which: str, g, s, kappa=1.0) -> dict:
    """Coalescence evidence for a moment matrix at coupling ``g``.

    ``which`` is one of ``"first"``, ``"second"`` (qubit) or ``"osc_first"``,
    ``"osc_second"`` (untruncated oscillators).  ``g`` may be an mpmath
    number so that analytic roots are not rounded to double precision.
    """
    with mpmath.workdps(_MP_DPS):
        dist, cond = _spectral_evidence(_mp_matrix(which, g, s, kappa))
    return {"min_pair_distance": dist, "condition_number": cond}


def locate_ep(which: str, s, g_guess, kappa=1.0, halfwidth=1e-2, xatol=1e-12) -> float:
    """Refine an EP location by maximizing the eigenvector condition number."""
    def objective(g):
        return 1.0 / ep_evidence(which, g, s, kappa)["condition_number"]

    lo = max(g_guess - halfwidth, 0.0)
    res = minimize_scalar(objective, bounds=(lo, g_guess + halfwidth), method="bounded",
                          options={"xatol": xatol})
    return float(res.x)


def _mp_roots(kind, s, model):
    with mpmath.workdps(_MP_DPS):
        s = mpmath.mpf(s)
        if model == "oscillator":
            return [(s + 1) / 4]
        if kind == PointKind.TYPE_I_MEP:
            r2 = mpmath.sqrt(2)
            return [mpmath.sqrt(s) * (r2 - 1) / 2, mpmath.sqrt(s) * (r2 + 1) / 2]
        if kind == PointKind.TYPE_II_MEP:
            return [abs(s - 1) / 4]
    raise ValueError(f"{kind} is not an exceptional point kind")


def find_meps(s: float, kind: PointKind | str, model: str = "qubit") -> PointList:
    """Analytic exceptional-point locations, each checked numerically.

    qubit type-I: ``g/kappa = sqrt(s) (sqrt 2 -+ 1)/2``; qubit type-II:
    ``|s - 1|/4`` (absent at ``s = 1``); oscillator type-I and type-II
    coincide at ``(s + 1)/4``.  A root is ``verified`` when the relevant
    matrix has an eigenvalue pair closer than ``1e-6 kappa`` and an
    eigenvector condition number above ``1e6`` at that coupling.
    """
    kind = PointKind(kind)
    if s < 0:
        raise ValueError("s must be >= 0")
    if model not in ("qubit", "oscillator"):
        raise ValueError(f"model must be 'qubit' or 'oscillator', got {model!r}")
    if kind not in (PointKind.TYPE_I_MEP, PointKind.TYPE_II_MEP):
        raise ValueError(f"{kind.value} is not an exceptional point")
    if model == "qubit" and kind == PointKind.TYPE_II_MEP and s == 1:
        return PointList(note="degenerate: no type-II MEP at s=1 (PT-symmetric point)")
    if model == "qubit" and kind == PointKind.TYPE_I_MEP and s == 0:
        return PointList(note="degenerate: both type-I roots collapse onto g=0 at s=0")

    if model == "qubit":
        which = "first" if kind == PointKind.TYPE_I_MEP else "second"
    else:
        which = "osc_first" if kind == PointKind.TYPE_I_MEP else "osc_second"

    out = PointList()
    for root in _mp_roots(kind, s, model):
        ev = ep_evidence(which, root, s)
        ok = ev["min_pair_distance"] < EP_DISTANCE_TOL and ev["condition_number"] > EP_CONDITION_MIN
        out.append(PointReport(kind=kind, g_over_kappa=float(root), model=model,
                               evidence={"matrix": which, **ev}, verified=ok))
    return out


def track_eigenvalues(matrix_fn, gs) -> np.ndarray:
    """Eigenvalues along a sweep with branches matched between neighbours.

    Each grid point's eigenvalues are assigned to the previous point's by a
    minimum-total-distance matching, so branch labels stay continuous through
    coalescences.  Returns an array of shape ``(len(gs), n)``.
    """
    rows = []
    prev = None
    for g in gs:
        ev = np.linalg.eigvals(matrix_fn(g))
        if prev is not None:
            cost = np.abs(prev[:, None] - ev[None, :])
            _, cols = linear_sum_assignment(cost)
            ev = ev[cols]
        rows.append(ev)
        prev = ev
    return np.array(rows)


# --- populations, imbalance, current ---------------------------------------

def populations_balanced(t, g: float, kappa: float):
    """Site populations at ``s = 1`` starting from ``|1, 0>``.

    Accepts scalar or array ``t``; returns ``(n1, n2)``.
    """
    t = np.asarray(t, dtype=float)
    denom = kappa**2 + 4 * g**2
    osc = (2 * g**2 * np.cos(2 * g * t) + kappa * g * np.sin(2 * g * t)) / denom * np.exp(-kappa * t)
    n1 = (kappa**2 + 2 * g**2) / denom + osc
    n2 = 2 * g**2 / denom - osc
    return n1, n2


def imbalance_steady(params: SystemParams) -> float:
    """Steady ``(n1 - n2)/(n1 + n2) = (s+1) k^2 / (8 g^2 + (s+1) k^2)``."""
    _require_qubit(params)
    a = (params.s + 1) * params.kappa**2
    denom = 8 * params.g**2 + a
    return a / denom if denom > 0 else 1.0


def population_imbalance(rho: np.ndarray, n_levels: int = 2) -> float:
    """``(n1 - n2)/(n1 + n2)`` evaluated on a state; ``nan`` for the empty state."""
    n1_op, n2_op = number_operators(n_levels)
    n1 = np.real(np.trace(n1_op @ rho))
    n2 = np.real(np.trace(n2_op @ rho))
    if n1 + n2 <= 1e-14:
        return float("nan")
    return float((n1 - n2) / (n1 + n2))


def current_steady(params: SystemParams) -> float:
    """Steady excitation current ``J = s/(s+1) * 4 g^2 k / (4 g^2 + s k^2) * omega0``."""
    _require_qubit(params)
    g, k, s = params.g, params.kappa, params.s
    denom = 4 * g**2 + s * k**2
    if denom == 0:
        return 0.0
    return s / (s + 1) * 4 * g**2 * k / denom * params.omega0


def current_from_state(rho: np.ndarray, params: SystemParams) -> float:
    """Energy outflow through the lossy site, ``omega0 kappa <n2>``; any ``n_levels``."""
    _, n2_op = number_operators(params.n_levels)
    return float(params.omega0 * params.kappa * np.real(np.trace(n2_op @ rho)))
