import math

import numpy as np
import pytest

from qmpemba import mps as mps_mod
from qmpemba.ed import all_site_expectations, build_dense_hamiltonian, reduced_density_matrix
from qmpemba.errors import ResourceError
from qmpemba.longrange import assemble_longrange_mpo, fit_power_law
from qmpemba.model import ModelSpec
from qmpemba.mps import MatrixProductState
from qmpemba.pauli import SP, SZ
from qmpemba.states import build_tilted_product


def random_state(rng, n):
    psi = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
    return psi / np.linalg.norm(psi)


@pytest.fixture
def rng():
    return np.random.default_rng(12)


class TestConstruction:
    def test_dense_round_trip(self, rng):
        psi = random_state(rng, 7)
        state = MatrixProductState.from_dense(psi)
        assert np.linalg.norm(state.to_dense() - psi) < 1e-12

    def test_truncation_cap_respected(self, rng):
        psi = random_state(rng, 8)
        state = MatrixProductState.from_dense(psi, chi_max=5)
        assert state.max_bond_dim() <= 5

    def test_product_state_norm_and_gauge(self):
        state = build_tilted_product(0.7, 6).to_mps()
        assert state.norm() == pytest.approx(1.0, abs=1e-14)
        assert state.canonical_deviation() < 1e-14


class TestGauge:
    def test_move_center_preserves_state(self, rng):
        psi = random_state(rng, 6)
        state = MatrixProductState.from_dense(psi)
        for target in [0, 3, 5, 1, 4]:
            state.move_center(target)
            assert state.center == target
            assert np.linalg.norm(state.to_dense() - psi) < 1e-12
            assert state.canonical_deviation() < 1e-12

    def test_canonicalize_restores_gauge(self, rng):
        psi = random_state(rng, 5)
        state = MatrixProductState.from_dense(psi)
        # wreck the gauge with a benign rescale and its inverse
        state.tensors[2] *= 2.0
        state.tensors[3] /= 2.0
        state.canonicalize(center=2)
        assert state.canonical_deviation() < 1e-12
        overlap = abs(np.vdot(state.to_dense(), psi))
        assert overlap == pytest.approx(1.0, abs=1e-12)


class TestMeasurements:
    def test_schmidt_values_match_dense_svd(self, rng):
        psi = random_state(rng, 6)
        state = MatrixProductState.from_dense(psi)
        for bond in [1, 3, 5]:
            svals = state.schmidt_values(bond)
            dense = np.linalg.svd(psi.reshape(2 ** bond, -1), compute_uv=False)
            dense = dense[dense > 1e-14]
            assert np.allclose(svals[:dense.size], dense, atol=1e-12)

    def test_expectation_mpo_matches_dense(self, rng):
        spec = ModelSpec(j_x=-0.5, j_y=-1.5, j_z=-0.75, h_z=1.3, alpha=2.0, n=6)
        fit = fit_power_law(2.0, 20, 4)
        mpo = assemble_longrange_mpo(fit, spec)
        h = mpo.to_dense()
        psi = random_state(rng, 6)
        state = MatrixProductState.from_dense(psi)
        expected = np.real(psi.conj() @ h @ psi)
        assert state.expectation_mpo(mpo) == pytest.approx(expected, abs=1e-11)

    def test_site_expectations_match_dense(self, rng):
        psi = random_state(rng, 6)
        state = MatrixProductState.from_dense(psi)
        for op in (SZ, SP):
            dense_vals = all_site_expectations(psi, op, 6)
            mps_vals = state.site_expectations(op)
            assert np.max(np.abs(dense_vals - mps_vals)) < 1e-12

    def test_rdm_matches_dense(self, rng):
        psi = random_state(rng, 8)
        state = MatrixProductState.from_dense(psi)
        for start, size in [(0, 2), (2, 4), (5, 3)]:
            expected = reduced_density_matrix(psi, 8, start, size)
            got = state.reduced_density_matrix(start, size)
            assert np.max(np.abs(expected - got)) < 1e-12

    def test_rdm_window_cap(self, rng):
        state = MatrixProductState.from_dense(random_state(rng, 8))
        with pytest.raises(ResourceError):
            state.reduced_density_matrix(0, 7)

    def test_save_load_round_trip(self, rng, tmp_path):
        state = MatrixProductState.from_dense(random_state(rng, 5), chi_max=4)
        state.save(tmp_path / "ckpt.npz")
        back = MatrixProductState.load(tmp_path / "ckpt.npz")
        assert back.center == state.center
        assert back.chi_max == state.chi_max
        assert np.linalg.norm(back.to_dense() - state.to_dense()) < 1e-14


class TestEntanglement:
    def test_product_state_has_zero_entropy(self):
        state = build_tilted_product(0.9, 6).to_mps()
        for bond in [1, 3, 5]:
            data = mps_mod.entanglement_entropy(state, bond)
            assert data.entropy == pytest.approx(0.0, abs=1e-13)

    def test_bell_pair_entropy_ln2(self):
        psi = np.zeros(4, dtype=complex)
        psi[0b00] = psi[0b11] = 1 / math.sqrt(2)
        state = MatrixProductState.from_dense(psi)
        data = mps_mod.entanglement_entropy(state, 1)
        assert data.entropy == pytest.approx(math.log(2), abs=1e-13)

    def test_entropy_from_spectrum_consistency(self, rng):
        state = MatrixProductState.from_dense(random_state(rng, 8))
        data = mps_mod.entanglement_entropy(state)
        w = data.spectrum[data.spectrum > 1e-14]
        assert data.entropy == pytest.approx(float(-np.sum(w * np.log(w))), abs=1e-12)
        assert np.all(np.diff(data.spectrum) <= 1e-15)
        assert np.sum(data.spectrum) == pytest.approx(1.0, abs=1e-12)

    def test_shift_correction_moves_bond(self):
        state = build_tilted_product(0.3, 10).to_mps()
        data = mps_mod.entanglement_entropy(state, shift_correction=True)
        assert data.bond == 6
        assert data.shift_applied

    def test_half_chain_pair_parity_logic(self, rng):
        a = MatrixProductState.from_dense(random_state(rng, 6))   # bond 3, odd
        b = MatrixProductState.from_dense(random_state(rng, 8))   # bond 4, even
        e1, e2 = mps_mod.half_chain_entropy_pair(a, b)
        assert e1.shift_applied and e1.bond == 4
        assert not e2.shift_applied and e2.bond == 4
        c = MatrixProductState.from_dense(random_state(rng, 8))
        e1, e2 = mps_mod.half_chain_entropy_pair(c, b)
        assert not e1.shift_applied

    def test_central_charge_trivial_relations(self):
        assert mps_mod.central_charge_estimate(1.0, 1.0, 64, 72) == 0.0
        s2 = 1.0 + math.log(72 / 64) / 6
        assert mps_mod.central_charge_estimate(1.0, s2, 64, 72) == pytest.approx(1.0)


class TestSsbFlag:
    def test_product_state_not_flagged(self):
        state = build_tilted_product(0.4, 8).to_mps()
        flag, info = mps_mod.entanglement_spectrum_ssb_flag(state)
        assert not flag

    def test_cat_state_flagged(self):
        # equal superposition of two polarized product states: exactly
        # twofold-degenerate Schmidt spectrum at every bond
        n = 8
        up = np.zeros(2 ** n, dtype=complex)
        up[0] = 1.0
        down = np.zeros(2 ** n, dtype=complex)
        down[-1] = 1.0
        cat = (up + down) / math.sqrt(2)
        state = MatrixProductState.from_dense(cat)
        flag, info = mps_mod.entanglement_spectrum_ssb_flag(state)
        assert flag
        assert info["gap"] == pytest.approx(0.0, abs=1e-12)

    def test_weakly_entangled_two_level_state_not_flagged(self):
        psi = np.zeros(4, dtype=complex)
        psi[0b00] = math.sqrt(0.99)
        psi[0b11] = math.sqrt(0.01)
        state = MatrixProductState.from_dense(psi)
        flag, _ = mps_mod.entanglement_spectrum_ssb_flag(state)
        assert not flag


class TestEnvironmentContractions:
    def test_effective_operators_reproduce_dense_hamiltonian(self, rng):
        # brute-force check of the env/effective-operator plumbing on 4 sites
        spec = ModelSpec(j_x=-1, j_y=-1, j_z=-0.75, h_z=0.7, alpha=2.0, n=4)
        fit = fit_power_law(2.0, 10, 3)
        mpo = assemble_longrange_mpo(fit, spec)
        h = mpo.to_dense()
        psi = random_state(rng, 4)
        state = MatrixProductState.from_dense(psi)
        state.move_center(2)
        rights = mps_mod.build_right_envs(state, mpo)
        left = np.ones((1, 1, 1), dtype=complex)
        for i in range(2):
            left = mps_mod.update_left_env(left, state.tensors[i], mpo.tensors[i])
        a = state.tensors[2]
        ha = mps_mod.apply_heff1(left, rights[2], mpo.tensors[2], a)
        # compare <psi|H|psi> assembled from the local action
        local = np.real(np.sum(a.conj() * ha))
        expected = np.real(psi.conj() @ h @ psi)
        assert local == pytest.approx(expected, abs=1e-11)

    def test_two_site_effective_operator_consistent(self, rng):
        spec = ModelSpec(j_x=-0.5, j_y=-1.5, j_z=-0.75, h_z=0.2, alpha=3.0, n=4)
        fit = fit_power_law(3.0, 10, 3)
        mpo = assemble_longrange_mpo(fit, spec)
        h = mpo.to_dense()
        psi = random_state(rng, 4)
        state = MatrixProductState.from_dense(psi)
        state.move_center(1)
        rights = mps_mod.build_right_envs(state, mpo)
        left = mps_mod.update_left_env(np.ones((1, 1, 1), dtype=complex),
                                       state.tensors[0], mpo.tensors[0])
        theta = np.tensordot(state.tensors[1], state.tensors[2], axes=([2], [0]))
        htheta = mps_mod.apply_heff2(left, rights[2], mpo.tensors[1],
                                     mpo.tensors[2], theta)
        local = np.real(np.sum(theta.conj() * htheta))
        expected = np.real(psi.conj() @ h @ psi)
        assert local == pytest.approx(expected, abs=1e-11)

    def test_split_two_site_truncates_and_renormalizes(self, rng):
        theta = rng.standard_normal((3, 2, 2, 3)) + 1j * rng.standard_normal((3, 2, 2, 3))
        theta /= np.linalg.norm(theta)
        left, right, discarded = mps_mod.split_two_site(theta, 1e-16, 2, "right")
        assert left.shape[2] == 2
        assert discarded > 0
        merged = np.tensordot(left, right, axes=([2], [0]))
        assert np.linalg.norm(merged) == pytest.approx(1.0, abs=1e-12)
