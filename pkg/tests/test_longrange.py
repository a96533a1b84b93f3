import numpy as np
import pytest

from qmpemba import longrange
from qmpemba.ed import build_dense_hamiltonian, operator_from_weights
from qmpemba.errors import FitError
from qmpemba.model import D_EFFECTIVE, ModelSpec


class TestFitPowerLaw:
    def test_exact_recovery_of_single_exponential(self):
        # when the target is already in the model class the refiner must nail it
        x = np.arange(39.0)
        synthetic = 0.8 * np.exp(-0.3 * x)
        amps, rates, sup, rms = longrange._refine(x, synthetic, np.array([-0.8]))
        assert abs(amps[0] - 0.8) < 1e-12
        assert abs(rates[0] + 0.3) < 1e-12
        assert sup < 1e-12

    def test_alpha_one_eight_terms_tight(self):
        fit = longrange.fit_power_law(1.0, 100, 8)
        assert fit.sup_residual < 1e-4
        assert not fit.warning

    @pytest.mark.parametrize("alpha", [1.5, 2.0, 4.0, 6.0])
    def test_paper_exponents_meet_threshold(self, alpha):
        fit = longrange.fit_power_law(alpha, 100, 8)
        assert fit.sup_residual < 1e-3

    def test_nearest_neighbor_value_targets_one(self):
        fit = longrange.fit_power_law(2.0, 60, 8)
        assert fit.evaluate([0.0])[0] == pytest.approx(1.0, abs=2 * fit.sup_residual + 1e-12)
        assert np.sum(fit.amplitudes) == pytest.approx(1.0, abs=2 * fit.sup_residual + 1e-12)

    def test_rates_strictly_decaying(self):
        fit = longrange.fit_power_law(1.5, 80, 6)
        assert np.all(fit.rates < 0)
        assert np.all(np.exp(fit.rates) <= 1.0)

    def test_residual_non_increasing_in_k(self):
        for alpha, n, ks in [(2.0, 50, [3, 4, 6, 8]), (6.0, 30, [1, 2, 3, 4])]:
            sups = [longrange.fit_power_law(alpha, n, k).sup_residual for k in ks]
            assert all(b <= a * (1 + 1e-6) + 1e-12 for a, b in zip(sups, sups[1:]))

    def test_deterministic(self):
        a = longrange.fit_power_law(1.7, 70, 5)
        b = longrange.fit_power_law(1.7, 70, 5)
        assert np.array_equal(a.amplitudes, b.amplitudes)
        assert np.array_equal(a.rates, b.rates)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            longrange.fit_power_law(1.0, 2, 4)
        with pytest.raises(ValueError):
            longrange.fit_power_law(0.0, 50, 4)
        with pytest.raises(ValueError):
            longrange.fit_power_law(1.0, 50, 0)

    def test_table_round_trip(self):
        fit = longrange.fit_power_law(2.5, 40, 4)
        back = longrange.ExponentialFit.from_table(fit.to_table())
        assert np.allclose(back.amplitudes, fit.amplitudes, rtol=1e-10)
        assert np.allclose(back.rates, fit.rates, rtol=1e-10)
        assert back.alpha == fit.alpha
        assert back.n == fit.n


class TestMpoAssembly:
    def test_bond_dimension_is_two_plus_three_k(self):
        for k in [1, 3, 8]:
            fit = longrange.fit_power_law(6.0, 30, k)
            spec = ModelSpec(j_x=-0.5, j_y=-1.5, j_z=-0.75, h_z=1.0, alpha=6.0, n=10)
            mpo = longrange.assemble_longrange_mpo(fit, spec)
            assert mpo.bond_dimension == 2 + 3 * k

    def test_two_sites_match_dense(self):
        fit = longrange.fit_power_law(2.0, 30, 4)
        spec = ModelSpec(j_x=-0.5, j_y=-1.5, j_z=-0.75, h_z=0.3, alpha=2.0, n=2)
        dense_mpo = longrange.assemble_longrange_mpo(fit, spec).to_dense()
        # distance-1 weight f(0) replaces 1^-alpha in the dense construction
        w = fit.evaluate([0.0]) / spec.kac
        h_ref = operator_from_weights(w, spec.axis_scales(), spec.field, 2).toarray()
        assert np.max(np.abs(dense_mpo - h_ref)) < 1e-12

    @pytest.mark.parametrize("variant,hz", [("xyz_full", 0.0), ("xyz_full", 2.0),
                                            (D_EFFECTIVE, 0.0), ("d_plus_field", 5.0)])
    def test_ten_sites_reconstruct_fitted_hamiltonian(self, variant, hz):
        fit = longrange.fit_power_law(2.0, 40, 6)
        spec = ModelSpec(j_x=-0.5, j_y=-1.5, j_z=-0.75, h_z=hz, alpha=2.0, n=10,
                         variant=variant)
        dense_mpo = longrange.assemble_longrange_mpo(fit, spec).to_dense()
        weights = fit.distance_weights(spec.n) / spec.kac
        h_fit = operator_from_weights(weights, spec.axis_scales(), spec.field,
                                      spec.n).toarray()
        assert np.max(np.abs(dense_mpo - h_fit)) < 1e-10

    def test_close_to_exact_power_law_within_fit_error(self):
        fit = longrange.fit_power_law(2.0, 40, 8)
        spec = ModelSpec(j_x=-1, j_y=-1, j_z=-0.75, alpha=2.0, n=8, variant=D_EFFECTIVE)
        dense_mpo = longrange.assemble_longrange_mpo(fit, spec).to_dense()
        h_exact = build_dense_hamiltonian(spec)
        # loose operator-norm bound: pairs * couplings * sup fit error
        n_pairs = spec.n * (spec.n - 1) / 2
        bound = n_pairs * np.sum(np.abs(spec.axis_scales())) / spec.kac * fit.sup_residual
        gap = np.linalg.norm(dense_mpo - h_exact, 2)
        assert gap <= bound + 1e-12

    def test_spectrum_agreement_with_fitted_dense(self):
        fit = longrange.fit_power_law(1.5, 30, 5)
        spec = ModelSpec(j_x=-1, j_y=-1, j_z=-0.75, alpha=1.5, n=8, variant=D_EFFECTIVE)
        dense_mpo = longrange.assemble_longrange_mpo(fit, spec).to_dense()
        weights = fit.distance_weights(spec.n) / spec.kac
        h_fit = operator_from_weights(weights, spec.axis_scales(), 0.0, spec.n).toarray()
        assert np.max(np.abs(np.linalg.eigvalsh(dense_mpo)
                             - np.linalg.eigvalsh(h_fit))) < 1e-10

    def test_mpo_tensors_are_real(self):
        fit = longrange.fit_power_law(2.0, 30, 4)
        spec = ModelSpec(j_x=-0.5, j_y=-1.5, j_z=-0.75, h_z=1.0, alpha=2.0, n=6)
        mpo = longrange.assemble_longrange_mpo(fit, spec)
        for t in mpo.tensors:
            assert t.dtype == np.float64

    def test_fit_domain_must_cover_chain(self):
        fit = longrange.fit_power_law(2.0, 10, 4)
        spec = ModelSpec(j_x=-1, j_y=-1, j_z=-0.75, alpha=2.0, n=20)
        with pytest.raises(ValueError):
            longrange.assemble_longrange_mpo(fit, spec)


class TestFidelityReport:
    def test_report_on_good_fit(self):
        fit = longrange.fit_power_law(3.0, 100, 8)
        spec = ModelSpec(j_x=-1, j_y=-1, j_z=-0.75, alpha=3.0, n=100,
                         variant=D_EFFECTIVE)
        report = longrange.mpo_fidelity_report(fit, spec)
        assert report.max_error == pytest.approx(fit.sup_residual, rel=1e-6)
        assert report.max_error < 1e-4
        assert report.flagged_distances.size == 0
        assert report.energy_bound_per_site < 1e-3

    def test_flags_distances_above_threshold(self):
        fit = longrange.fit_power_law(1.5, 200, 5)  # deliberately coarse fit
        spec = ModelSpec(j_x=-1, j_y=-1, j_z=-0.75, alpha=1.5, n=200,
                         variant=D_EFFECTIVE)
        report = longrange.mpo_fidelity_report(fit, spec, flag_threshold=1e-4)
        assert report.max_error > 1e-4
        assert report.flagged_distances.size > 0

    def test_fit_error_carries_residual(self):
        with pytest.raises(FitError) as err:
            longrange.fit_power_law(0.2, 400, 1)
        assert err.value.sup_residual is None or err.value.sup_residual > longrange.FAIL_RESIDUAL
