"""Real-time MPS evolution with the time-dependent variational principle.

Production scheme: symmetric one-site TDVP sweeps (fixed bond dimensions,
exactly norm-conserving local integrators) after a two-site warmup phase that
grows bond dimensions from the product start until they stall or hit the cap.
Local exponentials use the Lanczos stepper with the subspace capped at 10.

Observable sampling never touches the gauge, so the right environments
refreshed by each sweep are reused for the next step and the energy comes from
the final site contraction for free.
"""

from __future__ import annotations

import numpy as np

from .krylov import expm_krylov
from .mpo import MatrixProductOperator
from .mps import (
    MatrixProductState,
    build_right_envs,
    make_heff0,
    make_heff1,
    merge_mpo_pair,
    split_two_site,
    update_left_env,
    update_right_env,
)
from .pauli import SP
from .trajectory import TrajectoryRecord

KRYLOV_DIM_DEFAULT = 10


def tdvp_evolve(state: MatrixProductState, mpo: MatrixProductOperator,
                dt: float, t_max: float, chi_max: int | None = None,
                cutoff: float = 1e-12, *, krylov_m: int = KRYLOV_DIM_DEFAULT,
                krylov_tol: float = 1e-10, window: tuple | None = None,
                d_mpo: MatrixProductOperator | None = None,
                sigma_plus: bool = True, entropy_bond: bool = True,
                warmup_min_steps: int = 3, warmup_stall_steps: int = 10,
                warmup_t_max: float | None = None,
                progress=None) -> TrajectoryRecord:
    """Evolve `state` in place under the MPO Hamiltonian, sampling every step.

    Recorded series: energy, norm, truncation_discard, optional d_expect and
    central-bond entropy; per-site <sigma^+>; RDM stack for `window`. Hitting
    the bond cap with real discarded weight sets a warning flag in the record
    instead of aborting.

    The two-site warmup ends (bond dimensions freeze) once the largest bond
    reaches chi_max, or growth stalls for warmup_stall_steps, or t passes
    warmup_t_max.
    """
    n = state.n_sites
    if n != mpo.n_sites:
        raise ValueError("state and MPO lengths differ")
    if n < 2:
        raise ValueError("TDVP needs at least two sites")
    state.cutoff = cutoff
    state.chi_max = chi_max
    for i, t in enumerate(state.tensors):
        if not np.iscomplexobj(t):
            state.tensors[i] = t.astype(complex)
    state.move_center(0)

    n_steps = int(round(t_max / dt))
    times = np.arange(n_steps + 1) * dt
    record = TrajectoryRecord(
        times=times, window=window,
        meta={"engine": "tdvp", "dt": dt, "t_max": t_max, "chi_max": chi_max,
              "cutoff": cutoff, "krylov_m": krylov_m, "krylov_tol": krylov_tol})

    energy = np.empty(n_steps + 1)
    norm = np.empty(n_steps + 1)
    discard = np.zeros(n_steps + 1)
    d_vals = np.empty(n_steps + 1) if d_mpo is not None else None
    sp_vals = np.empty((n_steps + 1, n), dtype=complex) if sigma_plus else None
    ent_vals = np.empty(n_steps + 1) if entropy_bond else None
    rdms = None
    if window is not None:
        rdms = np.empty((n_steps + 1, 2 ** window[1], 2 ** window[1]), dtype=complex)

    def sample(k, energy_value=None):
        norm[k] = state.norm()
        energy[k] = (np.real(state.expectation_mpo(mpo))
                     if energy_value is None else energy_value)
        if d_vals is not None:
            d_vals[k] = np.real(state.expectation_mpo(d_mpo))
        if sp_vals is not None:
            sp_vals[k] = state.site_expectations(SP)
        if ent_vals is not None:
            lam = state.bond_weights(n // 2)
            lam = lam[lam > 1e-14]
            ent_vals[k] = -np.sum(lam * np.log(lam))
        if rdms is not None:
            rdms[k] = state.reduced_density_matrix(window[0], window[1])

    sample(0)
    warming = True
    stall = 0
    prev_dims = state.bond_dims()
    warmup_steps = 0
    cap_warned = False
    rights = None  # refreshed by each sweep; valid because sampling is gauge-free

    for step in range(1, n_steps + 1):
        if warming:
            e_now, rights, step_discard = _two_site_step(
                state, mpo, dt, cutoff, chi_max, krylov_m, krylov_tol)
            discard[step] = step_discard
            warmup_steps += 1
            dims = state.bond_dims()
            if dims == prev_dims and step >= warmup_min_steps:
                stall += 1
            else:
                stall = 0
            prev_dims = dims
            capped = chi_max is not None and max(dims) >= chi_max
            timed_out = warmup_t_max is not None and step * dt >= warmup_t_max
            if capped or timed_out or stall >= warmup_stall_steps:
                warming = False
            if not cap_warned and capped and step_discard > cutoff:
                record.warnings.append(
                    f"bond cap {chi_max} saturated at t={step * dt:.4g} with "
                    f"discarded weight {step_discard:.3e}")
                cap_warned = True
        else:
            e_now, rights = _one_site_step(state, mpo, dt, krylov_m,
                                           krylov_tol, rights)
        sample(step, energy_value=e_now)
        if progress is not None:
            progress(step, n_steps, state)

    record.add_series("energy", energy)
    record.add_series("norm", norm)
    record.add_series("truncation_discard", discard)
    if d_vals is not None:
        record.add_series("d_expect", d_vals)
    if sp_vals is not None:
        record.site_series["sigma_plus"] = sp_vals
        record.add_series("sigma_plus_re", sp_vals.mean(axis=1).real)
        record.add_series("sigma_plus_im", sp_vals.mean(axis=1).imag)
    if ent_vals is not None:
        record.add_series("entropy_center", ent_vals)
    record.rdms = rdms
    record.meta["warmup_steps"] = warmup_steps
    record.meta["final_bond_dims"] = state.bond_dims()
    return record


def _evolve_local(matvec, tensor, z, m_max, tol):
    flat = tensor.reshape(-1)
    out = expm_krylov(lambda x: matvec(x.reshape(tensor.shape)).reshape(-1),
                      flat, z, m_max=m_max, tol=tol)
    return out.reshape(tensor.shape)


def _qr_right(tensor):
    """tensor -> (Q, C) with Q left-orthonormal: tensor = Q . C."""
    chi_l, d, chi_r = tensor.shape
    q, c = np.linalg.qr(tensor.reshape(chi_l * d, chi_r))
    return q.reshape(chi_l, d, q.shape[1]), c


def _qr_left(tensor):
    """tensor -> (C, B) with B right-orthonormal: tensor = C . B."""
    chi_l, d, chi_r = tensor.shape
    q, r = np.linalg.qr(tensor.reshape(chi_l, d * chi_r).conj().T)
    return r.conj().T, q.conj().T.reshape(q.shape[1], d, chi_r)


def _one_site_step(state, mpo, dt, m_max, tol, rights=None):
    """Symmetric single-site sweep pair: every site advances by dt, every
    interior bond is back-evolved twice by dt/2. Returns the energy of the
    final state and its refreshed right environments."""
    n = state.n_sites
    if rights is None:
        rights = build_right_envs(state, mpo)
    lefts = [None] * n
    lefts[0] = np.ones((1, 1, 1), dtype=complex)

    for i in range(n - 1):
        w = mpo.tensors[i]
        a = _evolve_local(make_heff1(lefts[i], rights[i], w),
                          state.tensors[i], -0.5j * dt, m_max, tol)
        q, c = _qr_right(a)
        state.tensors[i] = q
        lefts[i + 1] = update_left_env(lefts[i], q, w)
        c = _evolve_local(make_heff0(lefts[i + 1], rights[i]),
                          c, +0.5j * dt, m_max, tol)
        state.tensors[i + 1] = np.tensordot(c, state.tensors[i + 1],
                                            axes=([1], [0]))
        state.center = i + 1

    state.tensors[n - 1] = _evolve_local(
        make_heff1(lefts[n - 1], rights[n - 1], mpo.tensors[n - 1]),
        state.tensors[n - 1], -1j * dt, m_max, tol)

    for i in range(n - 1, 0, -1):
        c, b = _qr_left(state.tensors[i])
        state.tensors[i] = b
        rights[i - 1] = update_right_env(rights[i], b, mpo.tensors[i])
        c = _evolve_local(make_heff0(lefts[i], rights[i - 1]),
                          c, +0.5j * dt, m_max, tol)
        a = np.tensordot(state.tensors[i - 1], c, axes=([2], [0]))
        state.tensors[i - 1] = _evolve_local(
            make_heff1(lefts[i - 1], rights[i - 1], mpo.tensors[i - 1]),
            a, -0.5j * dt, m_max, tol)
        state.center = i - 1

    a0 = state.tensors[0]
    h_a0 = make_heff1(lefts[0], rights[0], mpo.tensors[0])(a0)
    energy = float(np.real(np.sum(a0.conj() * h_a0)) / np.real(np.sum(a0.conj() * a0)))
    return energy, rights


def _two_site_step(state, mpo, dt, cutoff, chi_max, m_max, tol):
    """Symmetric two-site sweep pair with truncation; grows bond dimensions.

    Returns (energy, refreshed right environments, max discarded weight)."""
    n = state.n_sites
    rights = build_right_envs(state, mpo)
    lefts = [None] * n
    lefts[0] = np.ones((1, 1, 1), dtype=complex)
    max_disc = 0.0

    def theta_of(i):
        return np.tensordot(state.tensors[i], state.tensors[i + 1], axes=([2], [0]))

    def evolve_pair(i, z):
        w12 = merge_mpo_pair(mpo.tensors[i], mpo.tensors[i + 1])
        theta = theta_of(i)
        chi_l, d1, d2, chi_r = theta.shape
        out = _evolve_local(make_heff1(lefts[i], rights[i + 1], w12),
                            theta.reshape(chi_l, d1 * d2, chi_r), z, m_max, tol)
        return out.reshape(chi_l, d1, d2, chi_r)

    if n == 2:
        theta = evolve_pair(0, -1j * dt)
        a, b, disc = split_two_site(theta, cutoff, chi_max, "left")
        max_disc = disc
        state.tensors[0], state.tensors[1] = a, b
        state.center = 0
        rights[0] = update_right_env(rights[1], b, mpo.tensors[1])
    else:
        for i in range(n - 2):
            theta = evolve_pair(i, -0.5j * dt)
            a, b, disc = split_two_site(theta, cutoff, chi_max, "right")
            max_disc = max(max_disc, disc)
            state.tensors[i], state.tensors[i + 1] = a, b
            state.center = i + 1
            lefts[i + 1] = update_left_env(lefts[i], a, mpo.tensors[i])
            state.tensors[i + 1] = _evolve_local(
                make_heff1(lefts[i + 1], rights[i + 1], mpo.tensors[i + 1]),
                state.tensors[i + 1], +0.5j * dt, m_max, tol)

        theta = evolve_pair(n - 2, -1j * dt)
        a, b, disc = split_two_site(theta, cutoff, chi_max, "left")
        max_disc = max(max_disc, disc)
        state.tensors[n - 2], state.tensors[n - 1] = a, b
        state.center = n - 2
        rights[n - 2] = update_right_env(rights[n - 1], b, mpo.tensors[n - 1])

        for i in range(n - 3, -1, -1):
            state.tensors[i + 1] = _evolve_local(
                make_heff1(lefts[i + 1], rights[i + 1], mpo.tensors[i + 1]),
                state.tensors[i + 1], +0.5j * dt, m_max, tol)
            theta = evolve_pair(i, -0.5j * dt)
            a, b, disc = split_two_site(theta, cutoff, chi_max, "left")
            max_disc = max(max_disc, disc)
            state.tensors[i], state.tensors[i + 1] = a, b
            state.center = i
            rights[i] = update_right_env(rights[i + 1], b, mpo.tensors[i + 1])

    a0 = state.tensors[0]
    h_a0 = make_heff1(lefts[0], rights[0], mpo.tensors[0])(a0)
    energy = float(np.real(np.sum(a0.conj() * h_a0)) / np.real(np.sum(a0.conj() * a0)))
    return energy, rights, max_disc
