"""Finite matrix-product states with open boundaries.

Tensor layout: (left bond, physical, right bond). The state carries an
orthogonality center: tensors left of it are left-orthonormal, tensors right
of it right-orthonormal. Environment/effective-operator contractions used by
both DMRG and TDVP live here too.

Environment layout: a left environment L[a, m, abar] carries (ket bond,
MPO bond, bra bond); right environments mirror it.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ResourceError


class MatrixProductState:
    def __init__(self, tensors, center: int = 0, cutoff: float = 1e-14,
                 chi_max: int | None = None):
        self.tensors = list(tensors)
        self.center = center
        self.cutoff = cutoff
        self.chi_max = chi_max
        if self.tensors[0].shape[0] != 1 or self.tensors[-1].shape[2] != 1:
            raise ValueError("MPS boundary bonds must have dimension 1")

    # -- construction ------------------------------------------------------

    @classmethod
    def from_product_amplitudes(cls, amplitudes, dtype=complex) -> "MatrixProductState":
        """Bond-dimension-1 MPS from per-site spinors, shape (N, d).

        Spinors are normalized per site so the canonical gauge holds for any
        center choice.
        """
        amplitudes = np.asarray(amplitudes, dtype=dtype)
        tensors = []
        for a in amplitudes:
            nrm = np.linalg.norm(a)
            if nrm == 0:
                raise ValueError("zero site spinor")
            tensors.append((a / nrm).reshape(1, -1, 1))
        return cls(tensors, center=0)

    @classmethod
    def from_dense(cls, psi, n: int | None = None, cutoff: float = 1e-14,
                   chi_max: int | None = None) -> "MatrixProductState":
        """Exact (up to cutoff) MPS from a dense state vector; test utility."""
        psi = np.asarray(psi, dtype=complex)
        if n is None:
            n = int(round(np.log2(psi.size)))
        tensors = []
        rest = psi.reshape(1, -1)
        for _ in range(n - 1):
            chi_l = rest.shape[0]
            mat = rest.reshape(chi_l * 2, -1)
            u, s, vh = np.linalg.svd(mat, full_matrices=False)
            keep = _truncation_rank(s, cutoff, chi_max)
            tensors.append(u[:, :keep].reshape(chi_l, 2, keep))
            rest = (s[:keep, None] * vh[:keep])
        tensors.append(rest.reshape(rest.shape[0], 2, 1))
        return cls(tensors, center=n - 1, cutoff=cutoff, chi_max=chi_max)

    # -- basics ------------------------------------------------------------

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    def bond_dims(self) -> list:
        """Interior bond dimensions, bond b between sites b-1 and b."""
        return [t.shape[2] for t in self.tensors[:-1]]

    def max_bond_dim(self) -> int:
        return max(self.bond_dims()) if self.n_sites > 1 else 1

    def copy(self) -> "MatrixProductState":
        return MatrixProductState([t.copy() for t in self.tensors], self.center,
                                  self.cutoff, self.chi_max)

    def norm(self) -> float:
        """Norm from the center tensor (exact in canonical gauge)."""
        return float(np.linalg.norm(self.tensors[self.center]))

    def normalize(self) -> "MatrixProductState":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero state")
        self.tensors[self.center] = self.tensors[self.center] / nrm
        return self

    def to_dense(self, cap: int = 20) -> np.ndarray:
        if self.n_sites > cap:
            raise ResourceError(f"dense conversion refused for n={self.n_sites} > {cap}")
        vec = self.tensors[0]
        for t in self.tensors[1:]:
            vec = np.tensordot(vec, t, axes=([vec.ndim - 1], [0]))
        return vec.reshape(-1)

    # -- gauge -------------------------------------------------------------

    def move_center(self, site: int) -> "MatrixProductState":
        """Shift the orthogonality center by QR; exact gauge transformation."""
        while self.center < site:
            c = self.center
            t = self.tensors[c]
            chi_l, d, chi_r = t.shape
            q, r = np.linalg.qr(t.reshape(chi_l * d, chi_r))
            self.tensors[c] = q.reshape(chi_l, d, q.shape[1])
            self.tensors[c + 1] = np.tensordot(r, self.tensors[c + 1], axes=([1], [0]))
            self.center += 1
        while self.center > site:
            c = self.center
            t = self.tensors[c]
            chi_l, d, chi_r = t.shape
            q, r = np.linalg.qr(t.reshape(chi_l, d * chi_r).conj().T)
            self.tensors[c] = q.conj().T.reshape(q.shape[1], d, chi_r)
            self.tensors[c - 1] = np.tensordot(self.tensors[c - 1], r.conj().T,
                                               axes=([2], [0]))
            self.center -= 1
        return self

    def canonicalize(self, center: int = 0) -> "MatrixProductState":
        """Restore the canonical gauge from scratch (right sweep, then left)."""
        self.center = 0
        self.move_center(self.n_sites - 1)
        self.move_center(center)
        return self

    def canonical_deviation(self) -> float:
        """Largest gauge-condition violation away from the center (test hook)."""
        dev = 0.0
        for i, t in enumerate(self.tensors):
            chi_l, d, chi_r = t.shape
            if i < self.center:
                m = t.reshape(chi_l * d, chi_r)
                dev = max(dev, float(np.max(np.abs(m.conj().T @ m - np.eye(chi_r)))))
            elif i > self.center:
                m = t.reshape(chi_l, d * chi_r)
                dev = max(dev, float(np.max(np.abs(m @ m.conj().T - np.eye(chi_l)))))
        return dev

    # -- measurements ------------------------------------------------------

    def schmidt_values(self, bond: int) -> np.ndarray:
        """Descending Schmidt coefficients across bond b (sites [0..b-1 | b..N-1])."""
        if not 1 <= bond <= self.n_sites - 1:
            raise ValueError(f"bond {bond} outside [1, {self.n_sites - 1}]")
        self.move_center(bond - 1)
        t = self.tensors[bond - 1]
        chi_l, d, chi_r = t.shape
        s = np.linalg.svd(t.reshape(chi_l * d, chi_r), compute_uv=False)
        nrm = np.linalg.norm(s)
        return np.sort(s / nrm)[::-1] if nrm > 0 else s

    def bond_weights(self, bond: int) -> np.ndarray:
        """Descending Schmidt weights lambda^2 across a bond, without touching
        the gauge.

        Uses the Gram matrix of whichever block contains the orthogonality
        center (the other block is isometric, so the Gram eigenvalues are the
        Schmidt weights); canonical tensors beyond the center contract away.
        """
        if not 1 <= bond <= self.n_sites - 1:
            raise ValueError(f"bond {bond} outside [1, {self.n_sites - 1}]")
        gram = None
        if self.center < bond:  # left Gram, transferring from the center
            for i in range(self.center, bond):
                t = self.tensors[i]
                if gram is None:
                    gram = np.tensordot(t, t.conj(), axes=([0, 1], [0, 1]))
                else:
                    tmp = np.tensordot(gram, t, axes=([0], [0]))
                    gram = np.tensordot(tmp, t.conj(), axes=([0, 1], [0, 1]))
        else:  # right Gram, transferring down to the bond
            for i in range(self.center, bond - 1, -1):
                t = self.tensors[i]
                if gram is None:
                    gram = np.tensordot(t, t.conj(), axes=([1, 2], [1, 2]))
                else:
                    tmp = np.tensordot(t, gram, axes=([2], [0]))
                    gram = np.tensordot(tmp, t.conj(), axes=([1, 2], [1, 2]))
        w = np.clip(np.linalg.eigvalsh(gram).real, 0.0, None)
        total = w.sum()
        if total > 0:
            w = w / total
        return np.sort(w)[::-1]

    def expectation_mpo(self, mpo) -> float:
        env = np.ones((1, 1, 1), dtype=complex)
        for t, w in zip(self.tensors, mpo.tensors):
            env = update_left_env(env, t, w)
        val = env.reshape(-1)[0] / self.norm() ** 2
        return float(val.real) if abs(val.imag) < 1e-8 * max(abs(val), 1.0) else complex(val)

    def site_expectations(self, op: np.ndarray) -> np.ndarray:
        """<op_i> for every site, one left-to-right pass plus cached right envs."""
        n = self.n_sites
        rights = [None] * (n + 1)
        rights[n] = np.ones((1, 1), dtype=complex)
        for i in range(n - 1, 0, -1):
            t = self.tensors[i]
            tmp = np.tensordot(t, rights[i + 1], axes=([2], [0]))
            rights[i] = np.tensordot(tmp, t.conj(), axes=([1, 2], [1, 2]))
        left = np.ones((1, 1), dtype=complex)
        norm2 = self.norm() ** 2
        out = np.empty(n, dtype=complex)
        for i in range(n):
            t = self.tensors[i]
            tl = np.tensordot(left, t, axes=([0], [0]))  # (abar, p, r)
            top = np.tensordot(tl, op, axes=([1], [1]))  # (abar, r, p')
            rho = np.tensordot(top, t.conj(), axes=([0, 2], [0, 1]))  # (r, rbar)
            out[i] = np.tensordot(rho, rights[i + 1], axes=([0, 1], [0, 1])) / norm2
            left = np.tensordot(tl, t.conj(), axes=([0, 1], [0, 1]))  # (r, rbar)
        return out

    def reduced_density_matrix(self, start: int, size: int,
                               max_size: int = 6) -> np.ndarray:
        """Exact RDM of a contiguous window; pure contraction, gauge untouched.

        Environments on the side holding the orthogonality center are built by
        transfer; the opposite side is isometric and contracts to identity.
        """
        if size > max_size:
            raise ResourceError(f"window of {size} sites exceeds cap {max_size}")
        if start < 0 or start + size > self.n_sites:
            raise ValueError("window outside chain")
        end = start + size - 1

        left_env = None
        if self.center < start:
            for i in range(self.center, start):
                t = self.tensors[i]
                if left_env is None:
                    left_env = np.tensordot(t, t.conj(), axes=([0, 1], [0, 1]))
                else:
                    tmp = np.tensordot(left_env, t, axes=([0], [0]))
                    left_env = np.tensordot(tmp, t.conj(), axes=([0, 1], [0, 1]))
        right_env = None
        if self.center > end:
            for i in range(self.center, end, -1):
                t = self.tensors[i]
                if right_env is None:
                    right_env = np.tensordot(t, t.conj(), axes=([1, 2], [1, 2]))
                else:
                    tmp = np.tensordot(t, right_env, axes=([2], [0]))
                    right_env = np.tensordot(tmp, t.conj(), axes=([1, 2], [1, 2]))

        block = self.tensors[start]
        for i in range(start + 1, start + size):
            block = np.tensordot(block, self.tensors[i], axes=([block.ndim - 1], [0]))
        block = block.reshape(block.shape[0], 2 ** size, block.shape[-1])

        x = block if left_env is None else np.tensordot(left_env, block, axes=([0], [0]))
        if right_env is not None:
            x = np.tensordot(x, right_env, axes=([2], [0]))
        rho = np.tensordot(x, block.conj(), axes=([0, 2], [0, 2]))
        rho /= np.trace(rho).real
        return 0.5 * (rho + rho.conj().T)

    # -- checkpointing -----------------------------------------------------

    def save(self, path) -> None:
        arrays = {f"tensor_{i}": t for i, t in enumerate(self.tensors)}
        arrays["meta"] = np.array([self.center, self.cutoff,
                                   -1 if self.chi_max is None else self.chi_max])
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(path, **arrays)

    @classmethod
    def load(cls, path) -> "MatrixProductState":
        data = np.load(path)
        n = sum(1 for k in data.files if k.startswith("tensor_"))
        tensors = [data[f"tensor_{i}"] for i in range(n)]
        center, cutoff, chi_max = data["meta"]
        return cls(tensors, center=int(center), cutoff=float(cutoff),
                   chi_max=None if chi_max < 0 else int(chi_max))


# -- entanglement ----------------------------------------------------------

@dataclass
class EntanglementData:
    bond: int
    spectrum: np.ndarray  # descending Schmidt weights lambda_k^2
    entropy: float
    shift_applied: bool


def entanglement_entropy(state: MatrixProductState, bond: int | None = None,
                         shift_correction: bool = False) -> EntanglementData:
    """Von Neumann entropy of the bipartition at `bond` (default N//2).

    With shift_correction the bond moves to N/2 + 1 so that a peak of the
    even/odd entropy oscillation is compared against a peak when the partner
    system's central bond has the opposite parity.
    """
    n = state.n_sites
    if bond is None:
        bond = n // 2
    if shift_correction:
        bond = n // 2 + 1
    weights = state.bond_weights(bond)
    return EntanglementData(bond=bond, spectrum=weights,
                            entropy=_entropy_from_weights(weights),
                            shift_applied=shift_correction)


def half_chain_entropy_pair(state1: MatrixProductState, state2: MatrixProductState,
                            auto_shift: bool = True):
    """Half-chain entropies of two systems, shifting one bond on parity mismatch."""
    b1, b2 = state1.n_sites // 2, state2.n_sites // 2
    shift_first = auto_shift and (b1 % 2 != b2 % 2)
    e1 = entanglement_entropy(state1, shift_correction=shift_first)
    e2 = entanglement_entropy(state2)
    return e1, e2


def central_charge_estimate(s1: float, s2: float, n1: int, n2: int) -> float:
    """Open-boundary conformal scaling S = (c/6) ln N + const between two sizes."""
    if n1 == n2:
        raise ValueError("need two distinct system sizes")
    return 6.0 * (s2 - s1) / np.log(n2 / n1)


def entanglement_spectrum_ssb_flag(state: MatrixProductState,
                                   bond: int | None = None,
                                   gap_ratio: float = 0.1,
                                   floor: float = 1e-12):
    """Flag symmetry breaking from quasi-degeneracy of the entanglement spectrum.

    Sorted entanglement energies xi_k = -ln lambda_k^2; SSB is flagged when the
    two lowest levels are close relative to their separation from the third
    ((xi2 - xi1) < gap_ratio * (xi3 - xi1)). With fewer than three levels the
    cutoff scale -ln(floor) stands in for xi3.
    """
    data = entanglement_entropy(state, bond=bond)
    weights = data.spectrum[data.spectrum > floor]
    xi = -np.log(weights)
    if xi.size < 2:
        return False, {"levels": xi, "gap": None, "reference_gap": None}
    gap = float(xi[1] - xi[0])
    ref = float(xi[2] - xi[0]) if xi.size >= 3 else float(-np.log(floor) - xi[0])
    return bool(gap < gap_ratio * ref), {"levels": xi[:6], "gap": gap,
                                         "reference_gap": ref}


def mps_reduced_density_matrix(state: MatrixProductState, start: int,
                               size: int) -> np.ndarray:
    return state.reduced_density_matrix(start, size)


def _entropy_from_weights(weights: np.ndarray, floor: float = 1e-14) -> float:
    w = weights[weights > floor]
    return float(-np.sum(w * np.log(w)))


def _truncation_rank(s: np.ndarray, cutoff: float, chi_max: int | None) -> int:
    """Keep the smallest rank whose discarded weight stays below cutoff."""
    w = s ** 2
    total = w.sum()
    if total == 0.0:
        return 1
    tail = np.cumsum(w[::-1])[::-1]  # tail[k] = weight of s[k:]
    keep = int(np.searchsorted(-tail, -cutoff * total))
    keep = max(keep, 1)
    if chi_max is not None:
        keep = min(keep, chi_max)
    return min(keep, s.size)


# -- environments and effective operators (shared by DMRG/TDVP) ------------

def update_left_env(left, a, w):
    """Absorb one site into a left environment L[a, m, abar]."""
    t = np.tensordot(left, a, axes=([0], [0]))          # (m, abar, p, r)
    t = np.tensordot(t, w, axes=([0, 2], [0, 3]))       # (abar, r, m', p')
    t = np.tensordot(a.conj(), t, axes=([0, 1], [0, 3]))  # (rbar, r, m')
    return t.transpose(1, 2, 0)                          # (r, m', rbar)


def update_right_env(right, b, w):
    """Absorb one site into a right environment R[b, m, bbar]."""
    t = np.tensordot(b, right, axes=([2], [0]))          # (l, p, m, bbar)
    t = np.tensordot(t, w, axes=([2, 1], [1, 3]))        # (l, bbar, m_new, p')
    t = np.tensordot(t, b.conj(), axes=([1, 3], [2, 1]))  # (l, m_new, lbar)
    return t


def build_right_envs(state: MatrixProductState, mpo) -> list:
    """rights[i] = environment of everything strictly right of site i."""
    n = state.n_sites
    rights = [None] * n
    rights[n - 1] = np.ones((1, 1, 1), dtype=complex)
    for i in range(n - 1, 0, -1):
        rights[i - 1] = update_right_env(rights[i], state.tensors[i], mpo.tensors[i])
    return rights


def make_heff1(left, right, w):
    """GEMM-shaped single-site effective Hamiltonian.

    One reshape of the environments up front; each application is then three
    matrix products, which matters because every Lanczos/eigsh call applies
    the same operator many times.
    """
    dim_a, dim_m, _ = left.shape
    _, dim_m2, dim_bb = right.shape
    d_out, d_in = w.shape[2], w.shape[3]
    l_mat = np.ascontiguousarray(left.transpose(1, 2, 0)).reshape(dim_m * dim_a, dim_a)
    w_mat = np.ascontiguousarray(w.transpose(1, 2, 0, 3)).reshape(dim_m2 * d_out,
                                                                  dim_m * d_in)
    r_mat = np.ascontiguousarray(right.transpose(1, 0, 2)).reshape(-1, dim_bb)
    dim_b = right.shape[0]

    def matvec(x):
        t = l_mat @ x.reshape(dim_a, d_in * dim_b)
        t = t.reshape(dim_m, dim_a, d_in, dim_b).transpose(0, 2, 1, 3)
        t = w_mat @ np.ascontiguousarray(t).reshape(dim_m * d_in, dim_a * dim_b)
        t = t.reshape(dim_m2, d_out, dim_a, dim_b).transpose(2, 1, 0, 3)
        t = np.ascontiguousarray(t).reshape(dim_a * d_out, dim_m2 * dim_b) @ r_mat
        return t.reshape(dim_a, d_out, dim_bb)

    return matvec


def make_heff0(left, right):
    """GEMM-shaped zero-site (bond) effective Hamiltonian."""
    dim_a, dim_m, _ = left.shape
    dim_b, _, dim_bb = right.shape
    l_mat = np.ascontiguousarray(left.transpose(1, 2, 0)).reshape(dim_m * dim_a, dim_a)
    r_mat = np.ascontiguousarray(right.transpose(1, 0, 2)).reshape(dim_m * dim_b, dim_bb)

    def matvec(c):
        t = l_mat @ c.reshape(dim_a, dim_b)
        t = t.reshape(dim_m, dim_a, dim_b).transpose(1, 0, 2)
        return np.ascontiguousarray(t).reshape(dim_a, dim_m * dim_b) @ r_mat

    return matvec


def merge_mpo_pair(w1, w2):
    """Fuse two neighboring MPO tensors into one with a d^2 physical leg, so
    two-site updates reuse the single-site kernel."""
    t = np.tensordot(w1, w2, axes=([1], [0]))  # (m, p1o, p1i, m2, p2o, p2i)
    t = t.transpose(0, 3, 1, 4, 2, 5)
    d1o, d2o, d1i, d2i = t.shape[2], t.shape[3], t.shape[4], t.shape[5]
    return np.ascontiguousarray(t).reshape(w1.shape[0], w2.shape[1],
                                           d1o * d2o, d1i * d2i)


def apply_heff1(left, right, w, a):
    """Single-site effective Hamiltonian acting on A (l, p, r)."""
    return make_heff1(left, right, w)(a)


def apply_heff0(left, right, c):
    """Zero-site (bond) effective Hamiltonian acting on C (l, r)."""
    return make_heff0(left, right)(c)


def apply_heff2(left, right, w1, w2, theta):
    """Two-site effective Hamiltonian acting on theta (l, p1, p2, r)."""
    chi_l, d1, d2, chi_r = theta.shape
    out = make_heff1(left, right, merge_mpo_pair(w1, w2))(
        theta.reshape(chi_l, d1 * d2, chi_r))
    return out.reshape(chi_l, d1, d2, chi_r)


def split_two_site(theta, cutoff: float, chi_max: int | None,
                   sval_side: str, renormalize: bool = True):
    """SVD-split a two-site tensor (l, p1, p2, r) back into two site tensors.

    Returns (left_tensor, right_tensor, discarded_weight). `sval_side` chooses
    which side absorbs the singular values ('left' or 'right').
    """
    chi_l, d1, d2, chi_r = theta.shape
    mat = theta.reshape(chi_l * d1, d2 * chi_r)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    keep = _truncation_rank(s, cutoff, chi_max)
    total = float(np.sum(s ** 2))
    discarded = float(np.sum(s[keep:] ** 2) / total) if total > 0 else 0.0
    s_kept = s[:keep]
    if renormalize and total > 0:
        s_kept = s_kept * np.sqrt(total / np.sum(s_kept ** 2))
    u = u[:, :keep]
    vh = vh[:keep]
    if sval_side == "left":
        left = (u * s_kept).reshape(chi_l, d1, keep)
        right = vh.reshape(keep, d2, chi_r)
    elif sval_side == "right":
        left = u.reshape(chi_l, d1, keep)
        right = (s_kept[:, None] * vh).reshape(keep, d2, chi_r)
    else:
        raise ValueError("sval_side must be 'left' or 'right'")
    return left, right, discarded
