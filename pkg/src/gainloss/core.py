"""Hilbert space and operator algebra for the two-site gain/loss dimer.

The joint basis is ``|n1, n2>`` with flat index ``n1 * N + n2`` (site 1 is the
major index), i.e. ``np.kron(op_site1, op_site2)``.  Every other module relies
on this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = -1e-8


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the dimer.

    Parameters
    ----------
    omega0 : float
        Common transition frequency of both sites.
    g : float
        Coherent coupling strength, ``g >= 0``.
    kappa : float
        Loss rate out of site 2, ``kappa >= 0``.
    s : float
        Gain ratio; site 1 is pumped at rate ``s * kappa``.
    n_levels : int
        Local Hilbert dimension.  2 is the qubit model, larger values give
        truncated harmonic oscillators.
    """

    omega0: float = 10.0
    g: float = 1.0
    kappa: float = 1.0
    s: float = 1.0
    n_levels: int = 2

    def __post_init__(self):
        for name in ("omega0", "g", "kappa", "s"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.g < 0:
            raise ValueError(f"coupling g must be >= 0, got {self.g}")
        if self.kappa < 0:
            raise ValueError(f"loss rate kappa must be >= 0, got {self.kappa}")
        if self.s < 0:
            raise ValueError(f"gain ratio s must be >= 0, got {self.s}")
        if int(self.n_levels) != self.n_levels or self.n_levels < 2:
            raise ValueError(f"n_levels must be an integer >= 2, got {self.n_levels}")
        object.__setattr__(self, "n_levels", int(self.n_levels))

    @property
    def is_qubit(self) -> bool:
        return self.n_levels == 2

    @property
    def dim(self) -> int:
        """Joint Hilbert space dimension ``N**2``."""
        return self.n_levels**2

    @property
    def is_pt_symmetric(self) -> bool:
        """Balanced gain and loss (``s == 1``)."""
        return self.s == 1.0

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


def lowering_operator(n_levels: int) -> np.ndarray:
    """Truncated annihilation operator, ``a[k, k+1] = sqrt(k+1)``.

    For ``n_levels == 2`` this is the qubit lowering operator ``[[0, 1], [0, 0]]``.
    """
    if int(n_levels) != n_levels or n_levels < 2:
        raise ValueError(f"n_levels must be an integer >= 2, got {n_levels}")
    return np.diag(np.sqrt(np.arange(1, n_levels, dtype=float)), 1).astype(complex)


def embed(op: np.ndarray, site: int, n_levels: int) -> np.ndarray:
    """Lift a single-site operator to the joint space (``op x 1`` or ``1 x op``)."""
    op = np.asarray(op)
    if site not in (1, 2):
        raise ValueError(f"site must be 1 or 2, got {site}")
    if op.shape != (n_levels, n_levels):
        raise ValueError(f"operator shape {op.shape} does not match n_levels={n_levels}")
    eye = np.eye(n_levels, dtype=complex)
    return np.kron(op, eye) if site == 1 else np.kron(eye, op)


def site_operators(n_levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Joint-space lowering operators ``(sigma_1, sigma_2)``."""
    a = lowering_operator(n_levels)
    return embed(a, 1, n_levels), embed(a, 2, n_levels)


def number_operators(n_levels: int) -> tuple[np.ndarray, np.ndarray]:
    s1, s2 = site_operators(n_levels)
    return s1.conj().T @ s1, s2.conj().T @ s2


def hamiltonian(params: SystemParams) -> np.ndarray:
    """``omega0 (n1 + n2) + g (s1^dag s2 + s2^dag s1)``."""
    s1, s2 = site_operators(params.n_levels)
    n1 = s1.conj().T @ s1
    n2 = s2.conj().T @ s2
    hop = s1.conj().T @ s2
    return params.omega0 * (n1 + n2) + params.g * (hop + hop.conj().T)


def basis_state(occupations: tuple[int, int], n_levels: int) -> np.ndarray:
    """Projector onto the product Fock state ``|n1, n2>``."""
    n1, n2 = occupations
    for n in (n1, n2):
        if int(n) != n or not 0 <= n < n_levels:
            raise ValueError(f"occupation {n} out of range for n_levels={n_levels}")
    rho = np.zeros((n_levels**2, n_levels**2), dtype=complex)
    idx = int(n1) * n_levels + int(n2)
    rho[idx, idx] = 1.0
    return rho


def excitation_numbers(n_levels: int) -> np.ndarray:
    """Total excitation ``n1 + n2`` of each joint basis state."""
    n = np.arange(n_levels)
    return np.add.outer(n, n).reshape(-1)


def expect(op: np.ndarray, rho: np.ndarray) -> complex:
    return complex(np.trace(op @ rho))


def check_density_matrix(rho: np.ndarray, *, hermitian_tol=HERMITIAN_TOL,
                         trace_tol=TRACE_TOL, positivity_tol=POSITIVITY_TOL) -> np.ndarray:
    """Validate a density matrix and return it unchanged.

    Raises
    ------
    ValueError
        If ``rho`` is not square, not Hermitian, not unit trace or has an
        eigenvalue below ``positivity_tol``.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
    if herm > hermitian_tol:
        raise ValueError(f"density matrix not Hermitian (max |rho - rho^dag| = {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"density matrix trace {tr:.12g} differs from 1")
    lam_min = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lam_min < positivity_tol:
        raise ValueError(f"density matrix has negative eigenvalue {lam_min:.3e}")
    return rho
