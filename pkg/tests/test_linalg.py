import numpy as np
import pytest
from scipy.stats import ks_2samp

from conftest import penrose_errors, rand_spd
from shrinkmean.errors import DimensionMismatchError, NotPositiveDefiniteError
from shrinkmean.linalg import (
    haar_orthogonal,
    pseudo_inverse,
    spd_factor,
    spd_solve,
    sym_sqrt,
)


class TestSpdFactor:
    def test_identity(self):
        f = spd_factor(np.eye(3))
        assert np.allclose(f.lower, np.eye(3), atol=1e-14)
        assert f.dim == 3

    def test_diagonal(self):
        f = spd_factor(np.diag([4.0, 9.0]))
        assert np.allclose(f.lower, np.diag([2.0, 3.0]), atol=1e-14)

    def test_reconstruction(self):
        a = np.array([[2.0, 1.0], [1.0, 2.0]])
        f = spd_factor(a)
        assert np.max(np.abs(f.lower @ f.lower.T - a)) < 1e-12

    def test_indefinite_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            spd_factor(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_singular_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            spd_factor(np.diag([1.0, 0.0]))

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            spd_factor(np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_nonsquare_rejected(self):
        with pytest.raises(DimensionMismatchError):
            spd_factor(np.ones((2, 3)))


class TestSpdSolve:
    def test_identity_factor(self, rng):
        b = rng.standard_normal(4)
        f = spd_factor(np.eye(4))
        assert np.allclose(spd_solve(f, b), b, atol=1e-14)

    def test_diagonal_system(self):
        f = spd_factor(np.diag([2.0, 2.0]))
        assert np.allclose(spd_solve(f, np.array([2.0, 4.0])), [1.0, 2.0])

    def test_residual_random(self, rng):
        a = rand_spd(rng, 6)
        b = rng.standard_normal(6)
        x = spd_solve(spd_factor(a), b)
        assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) < 1e-9

    def test_matrix_rhs(self, rng):
        a = rand_spd(rng, 5)
        b = rng.standard_normal((5, 3))
        x = spd_solve(spd_factor(a), b)
        assert np.linalg.norm(a @ x - b) < 1e-9

    def test_dimension_mismatch(self):
        f = spd_factor(np.eye(3))
        with pytest.raises(DimensionMismatchError):
            spd_solve(f, np.ones(4))

    def test_solve_recovers_x(self, rng):
        # factor/solve round trip across several random SPD systems
        for _ in range(10):
            p = int(rng.integers(2, 9))
            a = rand_spd(rng, p)
            x = rng.standard_normal(p)
            x_hat = spd_solve(spd_factor(a), a @ x)
            assert np.linalg.norm(x_hat - x) / np.linalg.norm(x) < 1e-9


class TestSymSqrt:
    def test_identity(self):
        assert np.allclose(sym_sqrt(np.eye(4)), np.eye(4), atol=1e-12)

    def test_diagonal(self):
        assert np.allclose(sym_sqrt(np.diag([4.0, 16.0])), np.diag([2.0, 4.0]))

    def test_square_back(self, rng):
        a = rand_spd(rng, 5)
        b = sym_sqrt(a)
        assert np.linalg.norm(b @ b - a) / np.linalg.norm(a) < 1e-10

    def test_symmetric_psd(self, rng):
        a = rand_spd(rng, 6)
        b = sym_sqrt(a)
        assert np.array_equal(b, b.T)
        assert np.linalg.eigvalsh(b).min() >= -1e-10

    def test_indefinite_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            sym_sqrt(np.diag([1.0, -1.0]))


class TestPseudoInverse:
    def test_identity(self):
        res = pseudo_inverse(np.eye(3))
        assert np.allclose(res.pinv, np.eye(3))
        assert res.rank == 3

    def test_diagonal_rank_deficient(self):
        res = pseudo_inverse(np.diag([2.0, 0.0]))
        assert np.allclose(res.pinv, np.diag([0.5, 0.0]))
        assert res.rank == 1

    def test_penrose_rank2_psd(self, rng):
        # random rank-2 symmetric PSD 4x4
        b = rng.standard_normal((4, 2))
        a = b @ b.T
        res = pseudo_inverse(a)
        assert res.rank == 2
        assert max(penrose_errors(a, res.pinv)) < 1e-8

    def test_penrose_rectangular(self, rng):
        a = rng.standard_normal((5, 3))
        res = pseudo_inverse(a)
        assert res.pinv.shape == (3, 5)
        assert max(penrose_errors(a, res.pinv)) < 1e-8

    def test_matches_inverse_when_nonsingular(self, rng):
        a = rand_spd(rng, 5)
        res = pseudo_inverse(a)
        assert np.linalg.norm(res.pinv - np.linalg.inv(a)) < 1e-8

    def test_zero_matrix(self):
        res = pseudo_inverse(np.zeros((3, 3)))
        assert res.rank == 0
        assert np.array_equal(res.pinv, np.zeros((3, 3)))

    def test_asymmetric_square(self, rng):
        a = rng.standard_normal((4, 4))
        res = pseudo_inverse(a)
        assert max(penrose_errors(a, res.pinv)) < 1e-8

    def test_rel_tol_validation(self):
        with pytest.raises(ValueError):
            pseudo_inverse(np.eye(2), rel_tol=0.0)
        with pytest.raises(ValueError):
            pseudo_inverse(np.eye(2), rel_tol=1.5)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            pseudo_inverse(np.array([[1.0, np.nan], [0.0, 1.0]]))

    def test_truncation_reports_tolerance(self):
        res = pseudo_inverse(np.diag([1.0, 1e-14]), rel_tol=1e-10)
        assert res.rank == 1
        assert res.tolerance == pytest.approx(1e-10)


class TestHaarOrthogonal:
    def test_p1_sign(self):
        # the positive-diagonal convention leaves a unit entry of either sign
        seen = set()
        for seed in range(20):
            q = haar_orthogonal(1, np.random.default_rng(seed))
            assert abs(abs(q[0, 0]) - 1.0) < 1e-14
            seen.add(np.sign(q[0, 0]))
        assert seen == {1.0, -1.0}

    def test_orthogonality(self):
        q = haar_orthogonal(4, np.random.default_rng(7))
        assert np.linalg.norm(q.T @ q - np.eye(4)) < 1e-10

    def test_determinant(self, rng):
        for _ in range(25):
            q = haar_orthogonal(5, rng)
            assert abs(abs(np.linalg.det(q)) - 1.0) < 1e-8

    def test_first_coordinate_mean(self):
        # Monte Carlo moment: entries have mean 0
        rng = np.random.default_rng(99)
        n_draws = 10_000
        vals = np.array([haar_orthogonal(4, rng)[0, 0] for _ in range(n_draws)])
        assert abs(vals.mean()) < 3.0 / np.sqrt(n_draws)

    def test_rotation_invariance(self):
        # distribution of an entry is unchanged under a fixed rotation
        rng = np.random.default_rng(5)
        rot = haar_orthogonal(3, np.random.default_rng(123))
        a = np.array([haar_orthogonal(3, rng)[0, 0] for _ in range(3000)])
        b = np.array([(rot @ haar_orthogonal(3, rng))[0, 0] for _ in range(3000)])
        assert ks_2samp(a, b).pvalue > 0.01

    def test_invalid_p(self):
        with pytest.raises(DimensionMismatchError):
            haar_orthogonal(0, np.random.default_rng(0))

    def test_deterministic_per_seed(self):
        q1 = haar_orthogonal(6, np.random.default_rng(11))
        q2 = haar_orthogonal(6, np.random.default_rng(11))
        assert np.array_equal(q1, q2)
