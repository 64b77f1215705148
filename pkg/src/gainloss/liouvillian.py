"""Vectorized Lindblad generator, time evolution, steady state and spectrum.

Vectorization is column stacking, ``vec(A rho B) = (B^T kron A) vec(rho)``,
which is ``rho.reshape(-1, order="F")`` in numpy.

The generator conserves the excitation-number difference ``k = n(row) - n(col)``
of a coherence ``|a><b|`` (the Hamiltonian conserves ``n1 + n2`` and each
jump moves ket and bra together).  For truncated oscillators the generator is
therefore block diagonal in ``k``; the steady state lives in ``k = 0`` and the
blocks ``k`` and ``-k`` are complex conjugates of each other.  The large-N
paths below exploit this to stay sparse.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .core import SystemParams, excitation_numbers, hamiltonian, lowering_operator

# largest local dimension for which dense superoperators are the default
DENSE_MAX_LEVELS = 6
# blocks up to this size are diagonalized densely inside block_gap
DENSE_BLOCK_MAX = 1500


class SteadyStateError(RuntimeError):
    """The generator has no (numerically acceptable) steady state."""


class DegenerateSteadyStateWarning(RuntimeWarning):
    """The generator's null space has dimension larger than one."""


class SpectrumError(RuntimeError):
    """Eigensolver failed or produced non-finite eigenvalues."""


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"vector of length {v.size} is not a vectorized square matrix")
    return np.asarray(v).reshape(d, d, order="F")


def _site_ops_sparse(n_levels):
    a = sp.csr_matrix(lowering_operator(n_levels))
    eye = sp.identity(n_levels, dtype=complex, format="csr")
    return sp.kron(a, eye, format="csr"), sp.kron(eye, a, format="csr")


def _dissipator(x, eye, kron):
    xdx = x.conj().T @ x
    return 2 * kron(x.conj(), x) - kron(eye, xdx) - kron(xdx.T, eye)


def build_liouvillian(params: SystemParams, sparse: bool = False):
    """Lindblad generator of the gain/loss dimer acting on ``vec(rho)``.

    ``d rho/dt = -i[H, rho] + (s kappa/2) D[a1^dag] rho + (kappa/2) D[a2] rho``
    with ``D[X] rho = 2 X rho X^dag - X^dag X rho - rho X^dag X``.  The
    refilling terms ``2 X rho X^dag`` are kept.

    Returns a dense ``(N**4, N**4)`` array, or a CSR matrix if ``sparse``.
    """
    n = params.n_levels
    d = n * n
    if sparse:
        s1, s2 = _site_ops_sparse(n)
        h = sp.csr_matrix(hamiltonian(params))
        eye = sp.identity(d, dtype=complex, format="csr")

        def kron(a, b):
            return sp.kron(a, b, format="csr")
    else:
        a = lowering_operator(n)
        one = np.eye(n, dtype=complex)
        s1, s2 = np.kron(a, one), np.kron(one, a)
        h = hamiltonian(params)
        eye = np.eye(d, dtype=complex)
        kron = np.kron

    gen = -1j * (kron(eye, h) - kron(h.T, eye))
    gen = gen + (params.s * params.kappa / 2) * _dissipator(s1.conj().T, eye, kron)
    gen = gen + (params.kappa / 2) * _dissipator(s2, eye, kron)
    return gen.tocsr() if sparse else gen


def excitation_blocks(n_levels: int) -> dict[int, np.ndarray]:
    """Indices of ``vec(rho)`` grouped by excitation difference ``k``."""
    n = excitation_numbers(n_levels)
    k = vec(np.subtract.outer(n, n))
    kmax = 2 * (n_levels - 1)
    return {kk: np.flatnonzero(k == kk) for kk in range(-kmax, kmax + 1)}


def _check_times(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise ValueError("times must be a 1-d sequence")
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be ascending")
    return times


def evolve(gen, rho0: np.ndarray, times, method: str = "auto",
           rtol: float = 1e-9, atol: float = 1e-12) -> list[np.ndarray]:
    """Propagate ``rho0`` under the generator and return ``rho(t)`` per time.

    ``method="expm"`` uses dense matrix exponentials of the increments between
    consecutive times, ``"ode"`` integrates ``d vec(rho)/dt = gen vec(rho)``
    with an adaptive Runge-Kutta scheme.  ``"auto"`` picks ``expm`` for dense
    generators of local dimension up to 6.
    """
    times = _check_times(times)
    rho0 = np.asarray(rho0, dtype=complex)
    dim = gen.shape[0]
    if gen.shape != (dim, dim) or rho0.size != dim:
        raise ValueError(f"state of size {rho0.size} does not match generator of shape {gen.shape}")
    if method == "auto":
        small = dim <= DENSE_MAX_LEVELS**4
        method = "expm" if small and not sp.issparse(gen) else "ode"
    v0 = vec(rho0)

    if method == "expm":
        dense = gen.toarray() if sp.issparse(gen) else np.asarray(gen)
        out = []
        v = v0
        t_prev = 0.0
        cache = {}
        for t in times:
            dt = t - t_prev
            if dt > 0:
                key = float(dt)
                if key not in cache:
                    cache[key] = scipy.linalg.expm(dense * dt)
                v = cache[key] @ v
            out.append(unvec(v).copy())
            t_prev = t
        return out

    if method == "ode":
        op = gen if sp.issparse(gen) else np.asarray(gen)
        if len(times) == 0:
            return []
        t_end = times[-1]
        if t_end == 0:
            return [rho0.copy() for _ in times]
        sol = solve_ivp(lambda _t, y: op @ y, (0.0, t_end), v0, t_eval=times,
                        method="DOP853", rtol=rtol, atol=atol)
        if not sol.success:
            raise RuntimeError(f"liouvillian.evolve: integrator failed ({sol.message})")
        out = [unvec(sol.y[:, i]).copy() for i in range(len(times))]
        # t_eval reproduces t=0 only to rounding; return rho0 exactly
        for i, t in enumerate(times):
            if t == 0:
                out[i] = rho0.copy()
        return out

    raise ValueError(f"unknown method {method!r}")


def _trace_row(d, idx=None):
    row = vec(np.eye(d, dtype=complex))
    return row if idx is None else row[idx]


def steady_state(gen, tol: float = 1e-9) -> np.ndarray:
    """Solve ``gen vec(rho) = 0`` with ``Tr rho = 1``.

    The first equation (the ``|0><0|`` component, which is linearly dependent
    on the others by trace preservation) is replaced by the trace constraint.

    Raises
    ------
    SteadyStateError
        If the generator has no null vector at tolerance ``tol`` (relative to
        its largest singular value) or the residual check fails.

    Warns
    -----
    DegenerateSteadyStateWarning
        If the null space is more than one dimensional; one element is
        returned.
    """
    dim = gen.shape[0]
    d = int(round(np.sqrt(dim)))
    norm_inf = abs(gen).sum(axis=1).max() if sp.issparse(gen) else np.abs(gen).sum(axis=1).max()
    norm_inf = float(norm_inf)

    if sp.issparse(gen):
        a = gen.tolil(copy=True)
        a[0, :] = _trace_row(d)
        b = np.zeros(dim, dtype=complex)
        b[0] = 1.0
        x = spla.spsolve(a.tocsc(), b)
        nullity = 1
    else:
        gen = np.asarray(gen)
        sv = np.linalg.svd(gen, compute_uv=False)
        scale = sv[0] if sv[0] > 0 else 1.0
        nullity = int(np.sum(sv <= tol * scale))
        if nullity == 0:
            raise SteadyStateError(
                f"no steady state: smallest singular value {sv[-1]:.3e} > {tol:.0e} * {scale:.3e}")
        a = gen.copy()
        a[0, :] = _trace_row(d)
        b = np.zeros(dim, dtype=complex)
        b[0] = 1.0
        if nullity > 1:
            warnings.warn(f"degenerate steady manifold of dimension {nullity}; returning one element",
                          DegenerateSteadyStateWarning, stacklevel=2)
            x = np.linalg.lstsq(a, b, rcond=None)[0]
            x = x / np.trace(unvec(x))
        else:
            x = np.linalg.solve(a, b)

    if not np.all(np.isfinite(x)):
        raise SteadyStateError("steady state solve produced non-finite values")
    residual = np.max(np.abs(gen @ x))
    if residual > tol * max(norm_inf, 1.0):
        raise SteadyStateError(f"steady state residual {residual:.3e} exceeds tolerance")
    rho = unvec(x)
    return (rho + rho.conj().T) / 2


def solve_steady_state(params: SystemParams) -> np.ndarray:
    """Steady state for ``params``, dense for small N, sparse ``k = 0`` block otherwise."""
    if params.n_levels <= DENSE_MAX_LEVELS:
        return steady_state(build_liouvillian(params))
    n = params.n_levels
    d = n * n
    gen = build_liouvillian(params, sparse=True)
    idx = excitation_blocks(n)[0]
    block = gen[idx][:, idx].tolil()
    row = _trace_row(d, idx)
    # idx[0] is the |0,0><0,0| component
    block[0, :] = row
    b = np.zeros(len(idx), dtype=complex)
    b[0] = 1.0
    x = spla.spsolve(block.tocsc(), b)
    if not np.all(np.isfinite(x)):
        raise SteadyStateError(f"k=0 block solve failed for {params}")
    full = np.zeros(d * d, dtype=complex)
    full[idx] = x
    residual = np.max(np.abs(gen @ full))
    scale = float(abs(gen).sum(axis=1).max())
    if residual > 1e-9 * scale:
        raise SteadyStateError(f"steady state residual {residual:.3e} exceeds tolerance for {params}")
    rho = unvec(full)
    return (rho + rho.conj().T) / 2


def boundary_occupation(rho: np.ndarray, n_levels: int) -> float:
    """Population in the top two Fock levels of either site.

    A large value means the truncated steady state is piling up at the
    truncation edge and does not represent the untruncated oscillators.
    """
    pops = np.real(np.diag(rho)).reshape(n_levels, n_levels)
    edge = np.zeros((n_levels, n_levels), dtype=bool)
    edge[n_levels - 2:, :] = True
    edge[:, n_levels - 2:] = True
    return float(pops[edge].sum())


@dataclass(frozen=True)
class LiouvillianSpectrum:
    eigenvalues: np.ndarray
    gap: float
    zero_modes: int
    zero_threshold: float


def _gap_from_eigenvalues(eigenvalues, threshold):
    nonzero = eigenvalues[np.abs(eigenvalues) > threshold]
    if nonzero.size == 0:
        return 0.0
    return float(np.min(np.abs(nonzero.real)))


def liouvillian_spectrum(gen) -> LiouvillianSpectrum:
    """Full dense eigendecomposition and the spectral gap.

    The gap is the smallest ``|Re lambda|`` over eigenvalues with
    ``|lambda| > 1e-8 * max |lambda|``.
    """
    dense = gen.toarray() if sp.issparse(gen) else np.asarray(gen)
    try:
        ev = scipy.linalg.eigvals(dense)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SpectrumError(f"eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(ev)):
        raise SpectrumError("eigensolver returned non-finite eigenvalues")
    scale = np.max(np.abs(ev)) if ev.size else 0.0
    threshold = 1e-8 * scale
    zero_modes = int(np.sum(np.abs(ev) <= threshold))
    return LiouvillianSpectrum(eigenvalues=ev, gap=_gap_from_eigenvalues(ev, threshold),
                               zero_modes=zero_modes, zero_threshold=threshold)


def _block_eigenvalues(block, nev, sigma, dense_max=DENSE_BLOCK_MAX):
    size = block.shape[0]
    if size <= dense_max or nev >= size - 2:
        ev = scipy.linalg.eigvals(block.toarray())
    else:
        try:
            ev = spla.eigs(block.tocsc(), k=nev, sigma=sigma, which="LM",
                           return_eigenvectors=False, tol=1e-10)
        except spla.ArpackNoConvergence as exc:
            raise SpectrumError(f"ARPACK did not converge on block of size {size}") from exc
    if not np.all(np.isfinite(ev)):
        raise SpectrumError("non-finite eigenvalues in block")
    return ev


def block_gap(params: SystemParams, nev: int = 12, sigma: float = 0.02,
              dense_max: int = DENSE_BLOCK_MAX) -> float:
    """Liouvillian gap via the excitation-difference blocks.

    Only ``k >= 0`` blocks are needed (``-k`` is the conjugate).  Blocks up
    to ``dense_max`` are diagonalized densely; larger ones use shift-invert
    Arnoldi around ``sigma`` (just right of the origin, where the slowest
    modes live) for ``nev`` eigenvalues.  The zero threshold is ``1e-8``
    times the infinity norm of the generator, an upper bound on its spectral
    radius.
    """
    gen = build_liouvillian(params, sparse=True)
    threshold = 1e-8 * float(abs(gen).sum(axis=1).max())
    best = np.inf
    for k, idx in excitation_blocks(params.n_levels).items():
        if k < 0:
            continue
        block = gen[idx][:, idx]
        ev = _block_eigenvalues(block, nev, sigma, dense_max)
        nonzero = ev[np.abs(ev) > threshold]
        if nonzero.size:
            best = min(best, float(np.min(np.abs(nonzero.real))))
    return float(best)


def liouvillian_gap(params: SystemParams) -> float:
    """Gap for ``params``; dense full spectrum for qubits, block path otherwise."""
    if params.n_levels == 2:
        return liouvillian_spectrum(build_liouvillian(params)).gap
    return block_gap(params)
