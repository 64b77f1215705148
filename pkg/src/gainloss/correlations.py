"""Two-time correlations and the emission spectrum by quantum regression.

All delayed correlators are evaluated as ``Tr[B exp(L tau) X]`` where ``X``
is the steady state acted on by the first (earlier) operators, e.g.
``<s^dag(t) s(t+tau)> = Tr[s exp(L tau)(rho_ss s^dag)]``.

The balanced (``s = 1``) closed forms further down are kept as independent
references for the regression path.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .core import SystemParams, site_operators
from .liouvillian import (build_liouvillian, evolve, excitation_blocks, solve_steady_state,
                          vec)

EP_CONDITION_FALLBACK = 1e8


@dataclass(frozen=True)
class CorrelationTrace:
    taus: np.ndarray
    values: np.ndarray
    normalization: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SpectrumTrace:
    omegas: np.ndarray
    values: np.ndarray
    components: list = field(default_factory=list)
    method: str = "modes"


@functools.lru_cache(maxsize=32)
def _regression_setup(params: SystemParams):
    gen = build_liouvillian(params, sparse=params.n_levels > 6)
    rho = solve_steady_state(params)
    s1, s2 = site_operators(params.n_levels)
    pops = (float(np.real(np.trace(s1.conj().T @ s1 @ rho))),
            float(np.real(np.trace(s2.conj().T @ s2 @ rho))))
    for arr in (rho, s1, s2):
        arr.setflags(write=False)
    return gen, rho, (s1, s2), pops


def _site(site):
    if site not in (1, 2):
        raise ValueError(f"site must be 1 or 2, got {site}")
    return site - 1


def _regress(gen, x0, observable, taus):
    states = evolve(gen, x0, taus)
    return np.array([np.trace(observable @ x) for x in states])


def g1(params: SystemParams, site: int, taus) -> CorrelationTrace:
    """Normalized first-order coherence ``<s^dag(t) s(t+tau)> / <s^dag s>``."""
    gen, rho, ops, pops = _regression_setup(params)
    j = _site(site)
    s = ops[j]
    taus = np.asarray(taus, dtype=float)
    vals = _regress(gen, rho @ s.conj().T, s, taus) / pops[j]
    return CorrelationTrace(taus, vals, {"n1": pops[0], "n2": pops[1]})


def g2_direct(params: SystemParams, site: int, taus) -> CorrelationTrace:
    """Normalized ``<s^dag(t) s^dag(t+tau) s(t+tau) s(t)> / <s^dag s>^2`` for one site."""
    gen, rho, ops, pops = _regression_setup(params)
    j = _site(site)
    s = ops[j]
    taus = np.asarray(taus, dtype=float)
    vals = _regress(gen, s @ rho @ s.conj().T, s.conj().T @ s, taus) / pops[j] ** 2
    return CorrelationTrace(taus, np.real(vals), {"n1": pops[0], "n2": pops[1]})


def g2_cross(params: SystemParams, taus) -> CorrelationTrace:
    """Cross correlator with the site-1 emission first, normalized by ``n1 n2``."""
    gen, rho, (s1, s2), pops = _regression_setup(params)
    taus = np.asarray(taus, dtype=float)
    vals = _regress(gen, s1 @ rho @ s1.conj().T, s2.conj().T @ s2, taus) / (pops[0] * pops[1])
    return CorrelationTrace(taus, np.real(vals), {"n1": pops[0], "n2": pops[1]})


@functools.lru_cache(maxsize=32)
def _spectral_modes(params: SystemParams, site: int):
    """Eigenmodes of the ``k = +1`` block seen by ``Tr[s exp(L tau)(rho s^dag)]``.

    Returns ``(block, x, tr, eigenvalues, amplitudes, condition)`` where the
    first-order coherence is ``sum(amplitudes * exp(eigenvalues * tau))``.
    """
    gen, rho, ops, pops = _regression_setup(params)
    j = _site(site)
    s = ops[j]
    idx = excitation_blocks(params.n_levels)[1]
    block = gen[idx][:, idx]
    block = block.toarray() if hasattr(block, "toarray") else np.asarray(block)
    x = vec(rho @ s.conj().T)[idx] / pops[j]
    tr = vec(s.T)[idx]
    lam, v = scipy.linalg.eig(block)
    cond = np.linalg.cond(v)
    coeff = np.linalg.solve(v, x) if np.isfinite(cond) else np.full(len(lam), np.nan)
    amps = (tr @ v) * coeff
    return block, x, tr, lam, amps, cond


def optical_spectrum(params: SystemParams, site: int, omegas) -> SpectrumTrace:
    """Emission spectrum ``S(w) = (1/pi) Re int_0^inf g1(tau) exp(i w tau) dtau``.

    Evaluated as a sum of complex Lorentzians over the Liouvillian modes,
    ``S(w) = (1/pi) sum_k Re[w_k / (-i w - lambda_k)]``.  Near an exceptional
    point (eigenvector condition number above ``1e8``) the mode sum is
    replaced by the exact resolvent ``(1/pi) Re tr (-i w - L)^-1 x``.

    ``components`` lists ``(center, width, weight)`` per mode, sorted by
    ``|weight|``; for qubits there are exactly four transitions.
    """
    omegas = np.asarray(omegas, dtype=float)
    block, x, tr, lam, amps, cond = _spectral_modes(params, site)
    finite = np.all(np.isfinite(amps))
    comps = []
    if finite:
        floor = 1e-12 * np.abs(amps).max()
        comps = [(float(-lam[i].imag), float(-lam[i].real), complex(amps[i]))
                 for i in np.argsort(-np.abs(amps)) if abs(amps[i]) > floor]

    if cond > EP_CONDITION_FALLBACK or not finite:
        eye = np.eye(block.shape[0])
        vals = np.array([np.real(tr @ np.linalg.solve(-1j * w * eye - block, x)) for w in omegas])
        return SpectrumTrace(omegas, vals / np.pi, comps, method="resolvent")

    vals = np.real((amps[None, :] / (-1j * omegas[:, None] - lam[None, :])).sum(axis=1)) / np.pi
    return SpectrumTrace(omegas, vals, comps, method="modes")


def component_spectrum(component, omegas) -> np.ndarray:
    """Contribution of a single ``(center, width, weight)`` mode."""
    center, width, weight = component
    lam = -width - 1j * center
    return np.real(weight / (-1j * np.asarray(omegas) - lam)) / np.pi


def strict_local_maxima(values) -> np.ndarray:
    """Indices of grid points strictly larger than both neighbours."""
    v = np.asarray(values)
    inner = (v[1:-1] > v[:-2]) & (v[1:-1] > v[2:])
    return np.flatnonzero(inner) + 1


def slope_sign_changes(values) -> int:
    """Number of sign changes of the first difference (ignoring exact zeros)."""
    d = np.sign(np.diff(np.asarray(values)))
    d = d[d != 0]
    return int(np.sum(d[1:] != d[:-1]))


def curvature_sign_changes(values) -> int:
    """Sign changes of the second difference; shoulders add inflection pairs."""
    d2 = np.sign(np.diff(np.asarray(values), 2))
    d2 = d2[d2 != 0]
    return int(np.sum(d2[1:] != d2[:-1]))


# --- balanced closed forms --------------------------------------------------

def _sin_over(x, t):
    """``sin(x t)/x`` for complex ``x``, with the ``x -> 0`` limit ``t``."""
    x = complex(x)
    if abs(x) < 1e-14:
        return t
    return np.sin(x * t) / x


def g1_balanced(taus, g: float, kappa: float, omega0: float, site: int):
    """First-order coherence of either site at ``s = 1`` (closed form)."""
    t = np.asarray(taus, dtype=float)
    q = np.sqrt(complex(g**2 - g * kappa - kappa**2 / 4))
    p = np.sqrt(complex(g**2 + g * kappa - kappa**2 / 4))
    env = np.exp(-1j * omega0 * t - kappa * t)
    k, cq, cp = kappa, np.cos(q * t), np.cos(p * t)
    sq, sp = _sin_over(q, t), _sin_over(p, t)
    if site == 1:
        body = ((k**2 + k * g + 2 * g**2) / 2 * cq + (k**2 - k * g + 2 * g**2) / 2 * cp
                + k**2 * (3 * g + k) / 4 * sq - k**2 * (3 * g - k) / 4 * sp)
        return env * body / (k**2 + 2 * g**2)
    if site == 2:
        body = ((2 * g + k) * cq + (2 * g - k) * cp
                + k * (4 * g + k) / 2 * sq + k * (4 * g - k) / 2 * sp)
        return env * body / (4 * g)
    raise ValueError(f"site must be 1 or 2, got {site}")


def g2_balanced(taus, g: float, kappa: float, which):
    """Second-order correlators at ``s = 1``; ``which`` is 1, 2 or ``"X"``."""
    t = np.asarray(taus, dtype=float)
    c, s = np.cos(g * t), np.sin(g * t)
    decay = np.exp(-kappa * t)
    a = 2 * g**2 + kappa**2
    if which == 1:
        return 1 - (a * c - g * kappa * s) ** 2 / a**2 * decay
    if which == 2:
        return 1 - (2 * g * c + kappa * s) ** 2 / (4 * g**2) * decay
    if which == "X":
        return 1 - (g * kappa * c + a * s) ** 2 / (2 * g**2 * a) * decay
    raise ValueError(f"which must be 1, 2 or 'X', got {which!r}")


def g2_cross_zero(params: SystemParams) -> float:
    """Zero-delay cross correlation ``(4g^2 + s k^2)/(4g^2 + (s+1) k^2)`` for any ``s``."""
    g, k, s = params.g, params.kappa, params.s
    return (4 * g**2 + s * k**2) / (4 * g**2 + (s + 1) * k**2)
