import math

import numpy as np
import pytest

from qmpemba import asymmetry
from qmpemba.errors import ConsistencyError
from qmpemba.states import build_tilted_product


def random_density_matrix(rng, dim):
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def binary_entropy(p):
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


class TestU1Projectors:
    @pytest.mark.parametrize("n_a", [1, 2, 3, 4, 5, 6])
    def test_projector_algebra(self, n_a):
        decomp = asymmetry.build_u1_projectors(n_a)
        dim = 2 ** n_a
        total = sum(decomp.projectors)
        assert np.allclose(total, np.eye(dim), atol=1e-12)
        for i, p in enumerate(decomp.projectors):
            assert np.allclose(p @ p, p, atol=1e-12)
            for q in decomp.projectors[i + 1:]:
                assert np.max(np.abs(p @ q)) < 1e-12

    def test_single_site_sectors(self):
        decomp = asymmetry.build_u1_projectors(1)
        assert decomp.eigenvalues == (1.0, -1.0)
        assert all(np.trace(p).real == 1 for p in decomp.projectors)

    def test_two_site_ranks(self):
        decomp = asymmetry.build_u1_projectors(2)
        ranks = {q: int(round(np.trace(p).real))
                 for q, p in zip(decomp.eigenvalues, decomp.projectors)}
        assert ranks == {2.0: 1, 0.0: 2, -2.0: 1}

    def test_four_site_binomial_ranks(self):
        decomp = asymmetry.build_u1_projectors(4)
        ranks = [int(round(np.trace(p).real)) for p in decomp.projectors]
        assert ranks == [1, 4, 6, 4, 1]

    def test_charge_operator_is_total_sigma_z(self):
        decomp = asymmetry.build_u1_projectors(3)
        q = decomp.charge_operator()
        diag = np.diag(q).real
        expected = [3 - 2 * bin(i).count("1") for i in range(8)]
        assert np.allclose(diag, expected)


class TestSU2Projectors:
    def test_single_site_casimir_is_three(self):
        decomp = asymmetry.build_su2_projectors(1)
        assert len(decomp.eigenvalues) == 1
        assert decomp.eigenvalues[0] == pytest.approx(3.0, abs=1e-10)

    def test_two_site_triplet_singlet(self):
        decomp = asymmetry.build_su2_projectors(2)
        sectors = {round(q): int(round(np.trace(p).real))
                   for q, p in zip(decomp.eigenvalues, decomp.projectors)}
        assert sectors == {0: 1, 8: 3}

    def test_four_site_multiplicities(self):
        # spin addition of four 1/2s: S=2 once (dim 5), S=1 thrice (dim 3),
        # S=0 twice (dim 1); eigenvalues 4S(S+1)
        decomp = asymmetry.build_su2_projectors(4)
        sectors = {round(q): int(round(np.trace(p).real))
                   for q, p in zip(decomp.eigenvalues, decomp.projectors)}
        assert sectors == {24: 5, 8: 9, 0: 2}

    @pytest.mark.parametrize("n_a", [1, 2, 3, 4])
    def test_projector_algebra(self, n_a):
        decomp = asymmetry.build_su2_projectors(n_a)
        dim = 2 ** n_a
        assert np.allclose(sum(decomp.projectors), np.eye(dim), atol=1e-10)
        for p in decomp.projectors:
            assert np.allclose(p @ p, p, atol=1e-10)


class TestEntanglementAsymmetry:
    def test_commuting_state_has_zero_asymmetry(self):
        rng = np.random.default_rng(7)
        decomp = asymmetry.build_u1_projectors(3)
        rho = asymmetry.dephase(random_density_matrix(rng, 8), decomp)
        assert asymmetry.entanglement_asymmetry(rho, decomp) == pytest.approx(0.0, abs=1e-12)

    def test_single_tilted_spin_quarter_pi_gives_ln2(self):
        psi = build_tilted_product(math.pi / 4, 1).to_vector()
        rho = np.outer(psi, psi.conj())
        decomp = asymmetry.build_u1_projectors(1)
        assert asymmetry.entanglement_asymmetry(rho, decomp) == pytest.approx(math.log(2), abs=1e-12)

    def test_single_tilted_spin_generic_angle_binary_entropy(self):
        theta = 0.3
        psi = build_tilted_product(theta, 1).to_vector()
        rho = np.outer(psi, psi.conj())
        decomp = asymmetry.build_u1_projectors(1)
        expected = binary_entropy(math.cos(theta) ** 2)
        assert asymmetry.entanglement_asymmetry(rho, decomp) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("n_a", [1, 2, 3, 4])
    def test_nonnegative_on_random_states(self, n_a):
        rng = np.random.default_rng(42 + n_a)
        decomp = asymmetry.build_u1_projectors(n_a)
        for _ in range(100):
            rho = random_density_matrix(rng, 2 ** n_a)
            assert asymmetry.entanglement_asymmetry(rho, decomp) >= 0.0

    def test_zero_iff_commuting(self):
        rng = np.random.default_rng(3)
        decomp = asymmetry.build_u1_projectors(2)
        q = decomp.charge_operator()
        for _ in range(50):
            rho = random_density_matrix(rng, 4)
            delta = asymmetry.entanglement_asymmetry(rho, decomp)
            comm = np.max(np.abs(rho @ q - q @ rho))
            if comm < 1e-12:
                assert delta < 1e-10
            if delta < 1e-12:
                assert comm < 1e-6
            rho_q = asymmetry.dephase(rho, decomp)
            assert np.max(np.abs(rho_q @ q - q @ rho_q)) < 1e-12
            assert asymmetry.entanglement_asymmetry(rho_q, decomp) < 1e-12

    def test_dephasing_idempotent(self):
        rng = np.random.default_rng(11)
        decomp = asymmetry.build_u1_projectors(3)
        rho = random_density_matrix(rng, 8)
        once = asymmetry.dephase(rho, decomp)
        twice = asymmetry.dephase(once, decomp)
        assert np.allclose(once, twice, atol=1e-13)

    def test_invariant_under_charge_rotations(self):
        rng = np.random.default_rng(5)
        decomp = asymmetry.build_u1_projectors(2)
        q = decomp.charge_operator()
        rho = random_density_matrix(rng, 4)
        base = asymmetry.entanglement_asymmetry(rho, decomp)
        for phi in [0.3, 1.1, 2.9]:
            u = np.diag(np.exp(1j * phi * np.diag(q)))
            rotated = u @ rho @ u.conj().T
            assert asymmetry.entanglement_asymmetry(rotated, decomp) == pytest.approx(base, abs=1e-11)

    @pytest.mark.parametrize("theta", [0.0, 0.2, math.pi / 8, math.pi / 4, 1.2])
    @pytest.mark.parametrize("n_a", [1, 2, 3, 4])
    def test_tilted_product_is_su2_symmetric(self, theta, n_a):
        decomp = asymmetry.build_su2_projectors(n_a)
        psi = build_tilted_product(theta, n_a).to_vector()
        rho = np.outer(psi, psi.conj())
        assert asymmetry.entanglement_asymmetry(rho, decomp) == pytest.approx(0.0, abs=1e-10)

    def test_invalid_trace_rejected(self):
        decomp = asymmetry.build_u1_projectors(1)
        with pytest.raises(ValueError):
            asymmetry.entanglement_asymmetry(np.eye(2), decomp)

    def test_significant_negativity_rejected(self):
        decomp = asymmetry.build_u1_projectors(1)
        rho = np.array([[1.5, 0.0], [0.0, -0.5]])
        with pytest.raises(ConsistencyError):
            asymmetry.entanglement_asymmetry(rho, decomp)


class TestTraceDistance:
    def test_identical_states(self):
        rho = np.diag([0.5, 0.5]).astype(complex)
        assert asymmetry.trace_distance_to_thermal(rho, rho) == 0.0

    def test_orthogonal_pure_states(self):
        rho = np.diag([1.0, 0.0]).astype(complex)
        sigma = np.diag([0.0, 1.0]).astype(complex)
        assert asymmetry.trace_distance_to_thermal(rho, sigma) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            asymmetry.trace_distance(np.eye(2) / 2, np.eye(4) / 4)

    def test_triangle_inequality_and_unitary_invariance(self):
        rng = np.random.default_rng(19)
        for _ in range(25):
            a = random_density_matrix(rng, 4)
            b = random_density_matrix(rng, 4)
            c = random_density_matrix(rng, 4)
            dab = asymmetry.trace_distance(a, b)
            dbc = asymmetry.trace_distance(b, c)
            dac = asymmetry.trace_distance(a, c)
            assert dac <= dab + dbc + 1e-12
            q, _ = np.linalg.qr(rng.standard_normal((4, 4))
                                + 1j * rng.standard_normal((4, 4)))
            assert asymmetry.trace_distance(q @ a @ q.conj().T, q @ b @ q.conj().T) \
                == pytest.approx(dab, abs=1e-11)
