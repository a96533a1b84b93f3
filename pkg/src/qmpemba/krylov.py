"""Lanczos approximation of exp(z*A)|v> for Hermitian A.

Shared by the exact-diagonalization time stepper (subspace up to 30) and the
TDVP local integrators (subspace up to 10). Uses full reorthogonalization and
the standard a posteriori residual estimate to stop early.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigh_tridiagonal


def expm_krylov(matvec, v: np.ndarray, z: complex, m_max: int = 30,
                tol: float = 1e-10, return_error: bool = False):
    """Return an approximation of exp(z*A) v where A is Hermitian.

    matvec applies A to a vector. z may be complex (z = -i*dt for real-time
    evolution, which makes the result exactly norm-preserving up to the
    orthonormality of the Lanczos basis). With return_error=True also returns
    the final residual estimate so callers can subdivide the step.
    """
    v = np.ascontiguousarray(v)
    v_norm = float(np.linalg.norm(v))
    if v_norm == 0.0:
        return v.copy()

    dim = v.size
    m_max = min(m_max, dim)
    # rows, not columns: each Lanczos vector must stay contiguous or the
    # caller's GEMMs fall off the BLAS fast path
    basis = np.empty((m_max, dim), dtype=complex)
    basis[0] = v / v_norm
    alphas = np.empty(m_max)
    betas = np.empty(m_max)  # betas[j] couples vector j to j+1

    small = None
    err = 0.0
    for j in range(m_max):
        w = matvec(basis[j])
        alphas[j] = np.real(np.vdot(basis[j], w))
        w = w - alphas[j] * basis[j]
        if j > 0:
            w = w - betas[j - 1] * basis[j - 1]
        # full reorthogonalization: cheap next to the matvec at these sizes
        w = w - basis[:j + 1].T @ (basis[:j + 1].conj() @ w)
        beta = float(np.linalg.norm(w))
        betas[j] = beta

        small = _expm_tridiag(alphas[:j + 1], betas[:j], z)
        if beta < 1e-14 * v_norm:  # happy breakdown: subspace is invariant
            err = 0.0
            break
        err = abs(beta * small[-1])
        if err < tol or j == m_max - 1:
            break
        basis[j + 1] = w / beta

    m = small.shape[0]
    result = v_norm * (small @ basis[:m])
    if return_error:
        return result, err
    return result


def _expm_tridiag(diag: np.ndarray, offdiag: np.ndarray, z: complex) -> np.ndarray:
    """First column of exp(z*T) for real symmetric tridiagonal T."""
    if diag.size == 1:
        return np.array([np.exp(z * diag[0])])
    evals, evecs = eigh_tridiagonal(diag, offdiag)
    return (evecs * np.exp(z * evals)) @ evecs[0].conj()
