import numpy as np
import pytest

from qmpemba.dmrg import dmrg_ground_state, estimate_spectrum_bounds
from qmpemba.ed import build_dense_hamiltonian
from qmpemba.longrange import assemble_longrange_mpo, fit_power_law
from qmpemba.model import D_EFFECTIVE, ModelSpec

from test_ed import XXZ12_GROUND_ENERGY, XXZ12_SPEC


def xxz_mpo(n, alpha=2.0, j_z=-0.75, k=8, hz=0.0, variant=D_EFFECTIVE):
    spec = ModelSpec(j_x=-1, j_y=-1, j_z=j_z, h_z=hz, alpha=alpha, n=n,
                     variant=variant)
    fit = fit_power_law(alpha, max(n, 20), k)
    return assemble_longrange_mpo(fit, spec), spec


class TestDmrgGroundState:
    def test_two_site_dimer_exact(self):
        mpo, spec = xxz_mpo(2, k=3)
        result = dmrg_ground_state(mpo, chi_max=4, sweeps=4)
        exact = np.linalg.eigvalsh(mpo.to_dense())[0]
        assert result.energy == pytest.approx(exact, abs=1e-12)
        assert result.converged

    def test_matches_ed_oracle_at_twelve_sites(self):
        # fit error must stay below the cross-engine tolerance, so compare
        # against the dense matrix of the same fitted MPO as well
        mpo, spec = xxz_mpo(12)
        result = dmrg_ground_state(mpo, chi_max=64, sweeps=8)
        exact_fitted = np.linalg.eigvalsh(mpo.to_dense(cap=12))[0]
        assert result.energy == pytest.approx(exact_fitted, abs=1e-8)
        # and the fitted model reproduces the exact power-law oracle closely
        assert result.energy == pytest.approx(XXZ12_GROUND_ENERGY, abs=1e-5)

    def test_energy_non_increasing_across_sweeps(self):
        mpo, _ = xxz_mpo(10, alpha=1.5)
        result = dmrg_ground_state(mpo, chi_max=32, sweeps=6)
        for a, b in zip(result.sweep_energies, result.sweep_energies[1:]):
            assert b <= a + 1e-10

    def test_final_state_canonical_and_normalized(self):
        mpo, _ = xxz_mpo(8)
        result = dmrg_ground_state(mpo, chi_max=32, sweeps=6)
        assert result.state.canonical_deviation() < 1e-12
        assert result.state.norm() == pytest.approx(1.0, abs=1e-12)

    def test_real_mpo_keeps_real_tensors(self):
        mpo, _ = xxz_mpo(6)
        result = dmrg_ground_state(mpo, chi_max=16, sweeps=4)
        for t in result.state.tensors:
            assert np.isrealobj(t)

    def test_unconverged_flag_with_tiny_budget(self):
        mpo, _ = xxz_mpo(10, alpha=1.5)
        result = dmrg_ground_state(mpo, chi_max=16, sweeps=1)
        assert not result.converged

    def test_xyz_with_field(self):
        spec = ModelSpec(j_x=-0.5, j_y=-1.5, j_z=-0.75, h_z=2.0, alpha=4.0, n=8)
        fit = fit_power_law(4.0, 20, 6)
        mpo = assemble_longrange_mpo(fit, spec)
        result = dmrg_ground_state(mpo, chi_max=40, sweeps=8)
        exact = np.linalg.eigvalsh(mpo.to_dense())[0]
        assert result.energy == pytest.approx(exact, abs=1e-9)


class TestSpectrumBoundsEstimator:
    def test_matches_dense_extremes(self):
        mpo, spec = xxz_mpo(10)
        e_min, e_max = estimate_spectrum_bounds(mpo, chi_max=48, sweeps=8)
        evals = np.linalg.eigvalsh(mpo.to_dense(cap=12))
        assert e_min == pytest.approx(evals[0], abs=1e-7)
        assert e_max == pytest.approx(evals[-1], abs=1e-7)
