import numpy as np
import pytest

from gaussep.exceptions import ConditioningError, DomainError
from gaussep.matrix_analysis import (
    BlockPartition, HermitianMatrix, Positivity, arithmetic_mean, classify_by_eigenvalues,
    geometric_mean, harmonic_mean, hermitian_inverse, mean_identity_check, parallel_sum,
    positivity_via_schur, schur_complement, schur_is_supremum_check, spd_inv, spd_sqrt
)


def random_spd(rng, dim):
    g = rng.standard_normal((dim, dim))
    return g @ g.T + np.eye(dim)


def random_hermitian_pd(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    mat = g @ g.conj().T + np.eye(dim)
    return HermitianMatrix(mat.real, mat.imag)


class TestHermitianMatrix:
    def test_eigenvalues_match_complex_solver(self, rng):
        herm = random_hermitian_pd(rng, 4)
        expected = np.linalg.eigvalsh(herm.to_complex())
        assert np.allclose(herm.eigvalsh(), expected)

    def test_parts_are_symmetrized(self):
        herm = HermitianMatrix([[1.0, 2.0], [0.0, 1.0]], [[0.0, 1.0], [0.0, 0.0]])
        assert np.allclose(herm.re, [[1, 1], [1, 1]])
        assert np.allclose(herm.im, [[0, 0.5], [-0.5, 0]])

    def test_realified_round_trip(self, rng):
        herm = random_hermitian_pd(rng, 3)
        back = HermitianMatrix.from_realified(herm.realified)
        assert np.allclose(back.re, herm.re)
        assert np.allclose(back.im, herm.im)

    def test_rejects_non_square(self):
        with pytest.raises(DomainError):
            HermitianMatrix(np.zeros((2, 3)))


class TestSchurComplement:
    def test_two_by_two(self):
        mat = np.array([[2.0, 1.0], [1.0, 2.0]])
        assert np.allclose(schur_complement(mat, BlockPartition(1)), [[1.5]])

    def test_hermitian_input_stays_hermitian(self, rng):
        herm = random_hermitian_pd(rng, 4)
        complement = schur_complement(herm, BlockPartition(2))
        assert isinstance(complement, HermitianMatrix)
        full = herm.to_complex()
        expected = full[2:, 2:] - full[2:, :2] @ np.linalg.inv(full[:2, :2]) @ full[:2, 2:]
        assert np.allclose(complement.to_complex(), expected)

    def test_singular_block_needs_epsilon(self):
        mat = np.array([[0.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ConditioningError):
            schur_complement(mat, BlockPartition(1))
        assert np.allclose(schur_complement(mat, BlockPartition(1), epsilon=1e-3), [[1.0]])

    @pytest.mark.parametrize("split", [0, 4])
    def test_invalid_split(self, split):
        with pytest.raises(DomainError):
            schur_complement(np.eye(4), BlockPartition(split))

    def test_negative_epsilon(self):
        with pytest.raises(DomainError):
            schur_complement(np.eye(2), BlockPartition(1), epsilon=-1.0)


class TestPositivity:
    @pytest.mark.parametrize("mat, expected", [
        (np.eye(2), Positivity.POS_DEF),
        (np.array([[1.0, 1.0], [1.0, 1.0]]), Positivity.PSD),
        (np.array([[1.0, 2.0], [2.0, 1.0]]), Positivity.INDEFINITE),
        (np.array([[-1.0, 0.0], [0.0, 1.0]]), Positivity.INDEFINITE),
    ])
    def test_small_examples(self, mat, expected):
        assert positivity_via_schur(mat, BlockPartition(1)) == expected
        assert classify_by_eigenvalues(mat) == expected

    def test_agrees_with_eigenvalues(self, rng):
        for _ in range(50):
            g = rng.standard_normal((5, 5))
            mat = g @ g.T - rng.uniform(0, 2) * np.eye(5)
            split = int(rng.integers(1, 5))
            assert positivity_via_schur(mat, BlockPartition(split)) == classify_by_eigenvalues(mat)

    def test_complement_is_the_supremum(self, rng):
        assert schur_is_supremum_check(random_spd(rng, 5), BlockPartition(2), trials=20)
        assert schur_is_supremum_check(random_hermitian_pd(rng, 4), BlockPartition(1), trials=20)


class TestSpectralHelpers:
    def test_sqrt_and_inverse(self, rng):
        mat = random_spd(rng, 4)
        root = spd_sqrt(mat)
        assert np.allclose(root @ root, mat)
        assert np.allclose(spd_inv(mat) @ mat, np.eye(4))

    def test_clearly_negative_is_rejected(self):
        with pytest.raises(DomainError):
            spd_inv(np.diag([1.0, -1.0]))

    def test_flooring_is_reported(self):
        _, info = spd_sqrt(np.diag([1.0, 0.0]), return_info=True)
        assert info['floored'] == 1

    def test_hermitian_inverse(self, rng):
        herm = random_hermitian_pd(rng, 3)
        inverse = hermitian_inverse(herm)
        assert np.allclose(inverse.to_complex() @ herm.to_complex(), np.eye(3))

    def test_hermitian_inverse_singular(self):
        with pytest.raises(ConditioningError):
            hermitian_inverse(np.diag([1.0, 0.0]))


class TestMeans:
    def test_commuting_arguments(self):
        a = np.diag([1.0, 4.0])
        b = np.diag([4.0, 9.0])
        assert np.allclose(arithmetic_mean(a, b), np.diag([2.5, 6.5]))
        assert np.allclose(geometric_mean(a, b), np.diag([2.0, 6.0]))
        assert np.allclose(harmonic_mean(a, b), np.diag([1.6, 72 / 13]))

    def test_geometric_mean_is_symmetric_in_its_arguments(self, rng):
        a, b = random_spd(rng, 4), random_spd(rng, 4)
        assert np.allclose(geometric_mean(a, b), geometric_mean(b, a))

    def test_geometric_mean_solves_riccati(self, rng):
        a, b = random_spd(rng, 4), random_spd(rng, 4)
        g = geometric_mean(a, b)
        assert np.allclose(g @ np.linalg.inv(a) @ g, b)

    def test_harmonic_mean_from_schur_complement(self, rng):
        a, b = random_spd(rng, 3), random_spd(rng, 3)
        block = np.block([[a + b, a], [a, a]])
        complement = schur_complement(block, BlockPartition(3))
        assert np.allclose(2 * complement, harmonic_mean(a, b))
        assert np.allclose(complement, parallel_sum(a, b))

    def test_means_are_ordered(self, rng):
        a, b = random_spd(rng, 4), random_spd(rng, 4)
        h, g, m = harmonic_mean(a, b), geometric_mean(a, b), arithmetic_mean(a, b)
        assert np.linalg.eigvalsh(g - h)[0] > -1e-10
        assert np.linalg.eigvalsh(m - g)[0] > -1e-10

    @pytest.mark.parametrize("dim", [2, 5, 12])
    def test_identity_real(self, rng, dim):
        a, b = random_spd(rng, dim), random_spd(rng, dim)
        reference = np.linalg.norm(geometric_mean(a, b))
        assert mean_identity_check(a, b) <= 1e-8 * reference

    def test_identity_hermitian(self, rng):
        a, b = random_hermitian_pd(rng, 3), random_hermitian_pd(rng, 3)
        mean = geometric_mean(a, b)
        assert isinstance(mean, HermitianMatrix)
        assert mean_identity_check(a, b) <= 1e-8 * mean.norm()

    def test_hermitian_mean_of_equal_arguments(self, rng):
        a = random_hermitian_pd(rng, 3)
        mean = geometric_mean(a, a)
        assert np.allclose(mean.to_complex(), a.to_complex())

    def test_mismatched_sizes(self):
        with pytest.raises(DomainError):
            geometric_mean(HermitianMatrix(np.eye(2)), HermitianMatrix(np.eye(3)))

    @pytest.mark.slow
    def test_identity_full_sample(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            dim = int(rng.integers(2, 13))
            a, b = random_spd(rng, dim), random_spd(rng, dim)
            assert mean_identity_check(a, b) <= 1e-8 * np.linalg.norm(geometric_mean(a, b))

    def test_harmonic_mean_is_jointly_concave(self, rng):
        for _ in range(20):
            a1, b1, a2, b2 = (random_spd(rng, 3) for _ in range(4))
            t = rng.uniform()
            mixed = harmonic_mean(t * a1 + (1 - t) * a2, t * b1 + (1 - t) * b2)
            combined = t * harmonic_mean(a1, b1) + (1 - t) * harmonic_mean(a2, b2)
            assert np.linalg.eigvalsh(mixed - combined)[0] > -1e-9
