"""Symmetry-resolved subsystem analysis.

Entanglement asymmetry = S(dephased rho_A) - S(rho_A) with the dephasing
projectors taken from the subsystem charge operator: total sigma_z for U(1),
the quadratic Casimir sum_nu (sum_i sigma^nu_i)^2 for SU(2). Natural
logarithms throughout. Also the trace distance against a thermal reference.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError
from .pauli import SX, SY, SZ

U1 = "u1"
SU2 = "su2"

_ENTROPY_FLOOR = 1e-14
_NEGATIVITY_TOL = 1e-10


@dataclass(frozen=True)
class ChargeDecomposition:
    """Orthogonal projectors onto the eigenspaces of a subsystem charge."""

    symmetry: str
    n_sites: int
    eigenvalues: tuple
    projectors: tuple  # dense matrices, one per eigenvalue

    @property
    def dim(self) -> int:
        return 2 ** self.n_sites

    def charge_operator(self) -> np.ndarray:
        return sum(q * p for q, p in zip(self.eigenvalues, self.projectors))


def build_u1_projectors(n_a: int) -> ChargeDecomposition:
    """Eigenspaces of Q_A = sum_i sigma^z_i: charges -N_A, -N_A+2, ..., N_A."""
    if not 1 <= n_a <= 6:
        raise ValueError("dense projectors are limited to 1..6 sites")
    dim = 2 ** n_a
    idx = np.arange(dim)
    downs = np.array([bin(i).count("1") for i in idx])
    charge = n_a - 2 * downs  # |up> carries +1
    eigenvalues, projectors = [], []
    for q in range(n_a, -n_a - 1, -2):
        mask = (charge == q).astype(float)
        eigenvalues.append(float(q))
        projectors.append(np.diag(mask))
    return ChargeDecomposition(U1, n_a, tuple(eigenvalues), tuple(projectors))


def build_su2_projectors(n_a: int, cluster_tol: float = 1e-8) -> ChargeDecomposition:
    """Eigenspaces of the Casimir sum_nu (sum_i sigma^nu_i)^2.

    Eigenvalues are 4S(S+1) for total spin S; sectors are grouped numerically
    from a dense diagonalization rather than Clebsch-Gordan tables.
    """
    if not 1 <= n_a <= 6:
        raise ValueError("dense projectors are limited to 1..6 sites")
    dim = 2 ** n_a
    casimir = np.zeros((dim, dim), dtype=complex)
    for op in (SX, SY, SZ):
        total = np.zeros((dim, dim), dtype=complex)
        for i in range(n_a):
            mats = [np.eye(2)] * n_a
            mats[i] = op
            total += functools.reduce(np.kron, mats)
        casimir += total @ total
    casimir = 0.5 * (casimir + casimir.conj().T)
    evals, evecs = np.linalg.eigh(casimir)

    # split into clusters; ambiguous spacings mean the tolerance cannot
    # separate sectors
    eigenvalues, projectors = [], []
    start = 0
    for k in range(1, dim + 1):
        if k == dim or evals[k] - evals[k - 1] > cluster_tol:
            if k < dim and evals[k] - evals[k - 1] < 100 * cluster_tol:
                raise ConsistencyError(
                    "Casimir eigenvalue clusters overlap within tolerance; "
                    "increase precision")
            block = evecs[:, start:k]
            eigenvalues.append(float(np.mean(evals[start:k])))
            projectors.append(block @ block.conj().T)
            start = k
    return ChargeDecomposition(SU2, n_a, tuple(eigenvalues), tuple(projectors))


def dephase(rho: np.ndarray, decomp: ChargeDecomposition) -> np.ndarray:
    """Project out coherences between charge sectors: sum_q P_q rho P_q."""
    return sum(p @ rho @ p for p in decomp.projectors)


def von_neumann_entropy(rho: np.ndarray) -> float:
    evals = np.linalg.eigvalsh(rho)
    if evals[0] < -_NEGATIVITY_TOL:
        raise ConsistencyError(f"density matrix has eigenvalue {evals[0]:.3e} < 0")
    w = evals[evals > _ENTROPY_FLOOR]
    return float(-np.sum(w * np.log(w)))


def entanglement_asymmetry(rho: np.ndarray, decomp: ChargeDecomposition) -> float:
    """Delta S_A >= 0; zero iff rho commutes with the charge operator."""
    _validate_density_matrix(rho, decomp.dim)
    delta = von_neumann_entropy(dephase(rho, decomp)) - von_neumann_entropy(rho)
    if delta < -_NEGATIVITY_TOL:
        raise ConsistencyError(f"entanglement asymmetry came out negative: {delta:.3e}")
    return max(delta, 0.0)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(1/2)||rho - sigma||_1 from the eigenvalues of the Hermitian difference."""
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {sigma.shape}")
    evals = np.linalg.eigvalsh(rho - sigma)
    return float(0.5 * np.sum(np.abs(evals)))


def trace_distance_to_thermal(rho_t: np.ndarray, rho_th: np.ndarray) -> float:
    _validate_density_matrix(rho_t, rho_t.shape[0])
    _validate_density_matrix(rho_th, rho_t.shape[0])
    return trace_distance(rho_t, rho_th)


def asymmetry_series(rdms: np.ndarray, decomp: ChargeDecomposition) -> np.ndarray:
    """Entanglement asymmetry for each RDM in a trajectory stack (T, d, d)."""
    return np.array([entanglement_asymmetry(r, decomp) for r in rdms])


def trace_distance_series(rdms: np.ndarray, rho_th: np.ndarray) -> np.ndarray:
    return np.array([trace_distance_to_thermal(r, rho_th) for r in rdms])


def attach_asymmetry_series(record, u1: bool = True, su2: bool = False,
                            thermal_rdm: np.ndarray | None = None) -> None:
    """Compute asymmetry/trace-distance series from a record's RDM stack."""
    if record.rdms is None:
        raise ValueError("trajectory record carries no RDM stack")
    n_a = int(round(np.log2(record.rdms.shape[1])))
    if u1:
        record.add_series("u1_asym", asymmetry_series(record.rdms, build_u1_projectors(n_a)))
    if su2:
        record.add_series("su2_asym", asymmetry_series(record.rdms, build_su2_projectors(n_a)))
    if thermal_rdm is not None:
        record.add_series("trace_dist", trace_distance_series(record.rdms, thermal_rdm))


def _validate_density_matrix(rho: np.ndarray, dim: int, tol: float = 1e-8) -> None:
    if rho.shape != (dim, dim):
        raise ValueError(f"density matrix shape {rho.shape} != ({dim}, {dim})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ValueError(f"density matrix trace {tr} != 1")
