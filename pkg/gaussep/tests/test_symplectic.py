import numpy as np
import pytest

from gaussep.exceptions import ConditioningError, DomainError
from gaussep.symplectic import (
    ModeLayout, Ordering, PartialTransposeMask, QCM, direct_sum, is_ppt, is_pure, is_qcm,
    is_symplectic, omega, partial_transpose, random_qcm, reorder, squeezer,
    symplectic_spectrum, thermal, tmsv, vacuum, williamson
)


class TestLayout:
    def test_single_mode_form(self):
        assert np.array_equal(omega(1), [[0, 1], [-1, 0]])

    def test_position_momentum_form(self):
        om = omega(ModeLayout(1, 1, Ordering.POSITION_MOMENTUM))
        expected = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
        assert np.array_equal(om, expected)

    def test_permutation_maps_forms(self):
        layout = ModeLayout(2, 1)
        perm = layout.permutation_to(Ordering.POSITION_MOMENTUM)
        pm = omega(layout)[np.ix_(perm, perm)]
        assert np.array_equal(pm, omega(layout.with_ordering(Ordering.POSITION_MOMENTUM)))

    def test_party_indices(self):
        layout = ModeLayout(1, 2, Ordering.POSITION_MOMENTUM)
        assert list(layout.party_indices('A')) == [0, 3]
        assert list(layout.party_indices('B')) == [1, 2, 4, 5]

    @pytest.mark.parametrize("m, n", [(0, 0), (-1, 2)])
    def test_invalid_layouts(self, m, n):
        with pytest.raises(DomainError):
            ModeLayout(m, n)

    def test_unknown_party(self):
        with pytest.raises(DomainError):
            ModeLayout(1, 1).party_modes('C')


class TestQCM:
    def test_reorder_round_trip(self, random_2v2):
        pm = reorder(random_2v2, Ordering.POSITION_MOMENTUM)
        assert pm.layout.ordering == Ordering.POSITION_MOMENTUM
        back = reorder(pm, Ordering.MODEWISE)
        assert np.array_equal(back.mat, random_2v2.mat)

    def test_party_blocks_follow_ordering(self, random_2v2):
        pm = reorder(random_2v2, Ordering.POSITION_MOMENTUM)
        assert np.allclose(reorder(pm.party('A'), Ordering.MODEWISE).mat, random_2v2.v_a)

    def test_matrix_is_read_only(self):
        V = vacuum(1, 1)
        with pytest.raises(ValueError):
            V.mat[0, 0] = 2.0

    def test_rejects_bad_input(self):
        with pytest.raises(DomainError):
            QCM(np.eye(3), ModeLayout(1, 1))
        with pytest.raises(DomainError):
            QCM(np.diag([1.0, 1.0, 1.0, -1.0]), ModeLayout(1, 1))
        with pytest.raises(DomainError):
            QCM(np.full((2, 2), np.nan), ModeLayout(1))

    def test_swap_parties(self):
        V = direct_sum(thermal(2.0), thermal(3.0, 2))
        swapped = V.swap_parties()
        assert swapped.layout == ModeLayout(2, 1)
        assert np.allclose(swapped.v_a, 3 * np.eye(4))
        assert np.allclose(swapped.v_b, 2 * np.eye(2))

    def test_regroup_keeps_matrix(self, random_2v2):
        regrouped = random_2v2.regroup(1)
        assert regrouped.layout == ModeLayout(1, 3)
        assert np.array_equal(regrouped.mat, random_2v2.mat)


class TestValidity:
    def test_vacuum_is_valid(self):
        assert is_qcm(vacuum(2)).valid

    def test_half_vacuum_is_not(self):
        validity = is_qcm(0.5 * np.eye(2))
        assert not validity.valid
        assert validity.min_eigenvalue == pytest.approx(-0.5)

    def test_asymmetric_input(self):
        with pytest.raises(DomainError):
            is_qcm(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_odd_size(self):
        with pytest.raises(DomainError):
            is_qcm(np.eye(3))

    def test_pure_states(self):
        assert is_pure(tmsv(0.7))
        assert is_pure(vacuum(3))
        assert not is_pure(thermal(2.0))

    def test_thermal_below_one(self):
        with pytest.raises(DomainError):
            thermal(0.5)


class TestSymplecticSpectrum:
    @pytest.mark.parametrize("nu", [1.0, 2.5])
    def test_thermal(self, nu):
        assert np.allclose(symplectic_spectrum(thermal(nu, 2, 1)), nu)

    def test_tmsv_is_pure(self):
        assert np.allclose(symplectic_spectrum(tmsv(1.0)), [1.0, 1.0])

    def test_squeezed_thermal_mode(self):
        s = squeezer(0.4)
        assert np.allclose(symplectic_spectrum(2.0 * s @ s.T), [2.0])

    def test_single_mode_diagonal(self):
        assert np.allclose(symplectic_spectrum(np.diag([2.0, 8.0])), [4.0])

    def test_sorted_non_increasing(self, rng):
        nu = symplectic_spectrum(random_qcm(rng, ModeLayout(4), nu_max=3.0))
        assert np.all(np.diff(nu) <= 1e-12)


class TestWilliamson:
    def test_random_state(self, random_2v2):
        decomposition = williamson(random_2v2)
        scale = random_2v2.norm()
        assert decomposition.symplectic_residual(random_2v2.layout) <= 1e-8 * scale
        assert decomposition.diagonalization_residual(random_2v2.mat) <= 1e-8 * scale
        assert np.allclose(decomposition.nu, symplectic_spectrum(random_2v2))
        assert is_symplectic(decomposition.S, random_2v2.layout)

    def test_planted_spectrum(self, rng):
        layout = ModeLayout(3)
        V = random_qcm(rng, layout, squeeze_max=0.5)
        planted = np.array([3.0, 2.0, 1.5])
        V = QCM(williamson(V).with_spectrum(planted), layout)
        assert np.allclose(williamson(V).nu, planted, atol=1e-8)

    def test_degenerate_spectrum(self, rng):
        V = random_qcm(rng, ModeLayout(2, 2), squeeze_max=0.8)
        decomposition = williamson(QCM(2.0 * V.mat, V.layout))
        assert np.allclose(decomposition.nu, 2.0)
        assert decomposition.symplectic_residual(V.layout) <= 2e-8 * V.norm()

    def test_position_momentum_input(self, random_2v2):
        pm = reorder(random_2v2, Ordering.POSITION_MOMENTUM)
        decomposition = williamson(pm)
        assert decomposition.symplectic_residual(pm.layout) <= 1e-8 * pm.norm()
        assert decomposition.diagonalization_residual(pm.mat) <= 1e-8 * pm.norm()

    def test_singular_input(self):
        with pytest.raises(ConditioningError):
            williamson(np.diag([1.0, 0.0]))

    @pytest.mark.slow
    def test_full_sample(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            layout = ModeLayout(int(rng.integers(1, 9)))
            V = random_qcm(rng, layout, nu_max=3.0, squeeze_max=0.5)
            decomposition = williamson(V)
            assert decomposition.symplectic_residual(layout) <= 1e-8 * V.norm()
            assert decomposition.diagonalization_residual(V.mat) <= 1e-8 * V.norm()


class TestPartialTranspose:
    def test_mask_flips_b_momenta(self):
        mask = PartialTransposeMask.for_modes(ModeLayout(1, 1))
        assert np.array_equal(mask.theta, [1, 1, 1, -1])

    def test_tmsv_is_not_ppt(self, entangled_tmsv):
        result = is_ppt(entangled_tmsv)
        assert not result.ppt
        assert result.distillable
        assert result.min_symplectic_eigenvalue == pytest.approx(np.exp(-2.0))

    def test_product_is_ppt(self, product_state):
        assert is_ppt(product_state).ppt

    def test_transposing_a_instead_of_b(self, entangled_tmsv):
        assert not is_ppt(entangled_tmsv, modes=[0]).ppt

    def test_partial_transpose_is_involution(self, random_2v2):
        twice = partial_transpose(partial_transpose(random_2v2))
        assert np.array_equal(twice.mat, random_2v2.mat)

    @pytest.mark.parametrize("modes", [[], [4]])
    def test_invalid_modes(self, modes):
        with pytest.raises(DomainError):
            partial_transpose(vacuum(2, 2), modes)


class TestConstructors:
    def test_tmsv_blocks(self):
        V = tmsv(0.5)
        assert np.allclose(V.v_a, np.cosh(1.0) * np.eye(2))
        assert np.allclose(V.x, np.sinh(1.0) * np.diag([1.0, -1.0]))

    def test_direct_sum_layout(self):
        V = direct_sum(tmsv(0.3), vacuum(1), m=1)
        assert V.layout == ModeLayout(1, 2)
        assert np.allclose(V.mat[4:, 4:], np.eye(2))

    def test_random_is_reproducible(self):
        layout = ModeLayout(2, 1)
        assert np.array_equal(random_qcm(3, layout).mat, random_qcm(3, layout).mat)

    def test_random_pure_and_mixed(self, rng):
        layout = ModeLayout(1, 2)
        assert is_pure(random_qcm(rng, layout))
        mixed = random_qcm(rng, layout, nu_max=3.0)
        assert is_qcm(mixed).valid
        assert np.all(symplectic_spectrum(mixed) >= 1 - 1e-9)

    def test_random_rejects_bad_ranges(self):
        with pytest.raises(DomainError):
            random_qcm(0, ModeLayout(1, 1), nu_max=0.5)
        with pytest.raises(DomainError):
            random_qcm(0, ModeLayout(1, 1), squeeze_max=-1.0)
