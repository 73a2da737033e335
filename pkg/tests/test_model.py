import numpy as np
import pytest
from scipy.stats import kstest

from shrinkmean.errors import (
    DimensionMismatchError,
    InvalidRecipeError,
    UnsupportedGammaError,
)
from shrinkmean.model import (
    DEFAULT_RECIPE,
    EigenRecipe,
    InnovationLaw,
    PopulationSpec,
    build_covariance,
    draw_mean_vectors,
    generate_sample,
    sample_stats,
)


class TestEigenRecipe:
    def test_default_multiset_p10(self, rng):
        cov = build_covariance(DEFAULT_RECIPE, 10, rng)
        eigs = np.sort(np.linalg.eigvalsh(cov))
        expected = np.array([1, 1, 3, 3, 3, 3, 10, 10, 10, 10], dtype=float)
        assert np.max(np.abs(eigs - expected)) < 1e-8

    def test_isotropic_recipe(self, rng):
        cov = build_covariance(EigenRecipe(((1.0, 1.0),)), 6, rng)
        assert np.max(np.abs(cov - np.eye(6))) < 1e-10

    def test_override_lambda_max(self, rng):
        recipe = EigenRecipe(DEFAULT_RECIPE.proportions, override_lambda_max=50.0)
        cov = build_covariance(recipe, 50, rng)
        eigs = np.sort(np.linalg.eigvalsh(cov))
        assert eigs[-1] == pytest.approx(50.0, abs=1e-8)
        # only the single largest eigenvalue is replaced
        assert eigs[-2] == pytest.approx(10.0, abs=1e-8)

    def test_fractions_must_sum_to_one(self):
        with pytest.raises(InvalidRecipeError):
            EigenRecipe(((0.5, 1.0), (0.4, 2.0)))

    def test_positive_eigenvalues_required(self):
        with pytest.raises(InvalidRecipeError):
            EigenRecipe(((0.5, 1.0), (0.5, 0.0)))

    def test_floor_remainder_to_last_group(self):
        values = EigenRecipe(((0.5, 1.0), (0.5, 2.0))).eigenvalues(7)
        assert sorted(values.tolist()) == [1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0]

    def test_exactly_symmetric_output(self, rng):
        cov = build_covariance(DEFAULT_RECIPE, 15, rng)
        assert np.array_equal(cov, cov.T)

    def test_minimum_dimension(self, rng):
        with pytest.raises(DimensionMismatchError):
            build_covariance(DEFAULT_RECIPE, 1, rng)


class TestDrawMeanVectors:
    def test_gamma0_bounds(self, rng):
        mu_n, mu_0 = draw_mean_vectors(0, 100, rng)
        bound = 100 ** (-0.5)
        assert np.all(np.abs(mu_n) <= bound)
        assert np.all(np.abs(mu_0) <= bound)
        assert not np.array_equal(mu_n, mu_0)

    def test_gamma0_norm_bound(self, rng):
        # p entries each at most p^{-1} in square
        for _ in range(5):
            mu_n, _ = draw_mean_vectors(0, 64, rng)
            assert mu_n @ mu_n <= 1.0

    def test_gamma1_values(self, rng):
        mu_n, mu_0 = draw_mean_vectors(1, 8, rng)
        assert np.array_equal(mu_0, np.ones(8))
        assert set(np.unique(mu_n)).issubset({-1.0, 1.0})

    def test_gamma1_alternating(self, rng):
        mu_n, _ = draw_mean_vectors(1, 6, rng, alternating=True)
        assert np.array_equal(mu_n, [1.0, -1.0, 1.0, -1.0, 1.0, -1.0])

    def test_unsupported_gamma(self, rng):
        with pytest.raises(UnsupportedGammaError):
            draw_mean_vectors(0.5, 10, rng)


class TestInnovationLaw:
    def test_normal_default(self):
        assert InnovationLaw().name == "normal"

    def test_t_standardized(self):
        law = InnovationLaw("t", df=6.0)
        draws = law.draw(np.random.default_rng(0), (200_000,))
        assert abs(draws.mean()) < 0.01
        assert abs(draws.var() - 1.0) < 0.02

    def test_t_needs_df_above_4(self):
        with pytest.raises(ValueError):
            InnovationLaw("t", df=4.0)
        with pytest.raises(ValueError):
            InnovationLaw("t")

    def test_exponential_standardized(self):
        law = InnovationLaw("exponential")
        draws = law.draw(np.random.default_rng(0), (200_000,))
        assert abs(draws.mean()) < 0.01
        assert abs(draws.var() - 1.0) < 0.02

    def test_parse_round_trip(self):
        for text in ("normal", "t:6", "exponential"):
            law = InnovationLaw.parse(text)
            assert InnovationLaw.parse(law.spec_string()) == law

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            InnovationLaw("cauchy")


def _population(p=5, gamma=0.0, sigma=None, mu=None):
    sigma = np.eye(p) if sigma is None else sigma
    mu = np.zeros(p) if mu is None else mu
    return PopulationSpec(p=p, gamma=gamma, mu_n=mu, mu_0=mu.copy(), sigma=sigma)


class TestGenerateSample:
    def test_identity_reduction_pooled_ks(self):
        pop = _population()
        y = generate_sample(pop, 2000, InnovationLaw(), np.random.default_rng(3))
        assert kstest(y.ravel(), "norm").pvalue > 0.01

    def test_column_mean_matches_population_mean(self, rng):
        cov = build_covariance(DEFAULT_RECIPE, 5, rng)
        mu = rng.uniform(-1, 1, 5)
        pop = PopulationSpec(p=5, gamma=0, mu_n=mu, mu_0=mu, sigma=cov)
        n = 100_000
        y = generate_sample(pop, n, InnovationLaw(), rng)
        lam_max = 10.0
        assert np.all(np.abs(y.mean(axis=1) - mu) <= 4 * np.sqrt(lam_max / n))

    def test_sample_covariance_converges(self, rng):
        cov = build_covariance(DEFAULT_RECIPE, 5, rng)
        pop = PopulationSpec(p=5, gamma=0, mu_n=np.zeros(5), mu_0=np.zeros(5), sigma=cov)
        y = generate_sample(pop, 100_000, InnovationLaw(), rng)
        s = sample_stats(y).s
        assert np.linalg.norm(s - cov) / np.linalg.norm(cov) < 0.05

    def test_bit_reproducible(self):
        pop = _population()
        y1 = generate_sample(pop, 50, InnovationLaw(), np.random.default_rng(17))
        y2 = generate_sample(pop, 50, InnovationLaw(), np.random.default_rng(17))
        assert np.array_equal(y1, y2)

    def test_minimum_n(self):
        with pytest.raises(DimensionMismatchError):
            generate_sample(_population(), 1, InnovationLaw(), np.random.default_rng(0))


class TestSampleStats:
    def test_constant_columns(self):
        mu = np.array([1.0, -2.0, 3.0])
        y = np.tile(mu[:, None], (1, 7))
        stats = sample_stats(y)
        assert np.allclose(stats.y_bar, mu)
        assert np.max(np.abs(stats.s)) < 1e-14

    def test_hand_arithmetic_p1(self):
        stats = sample_stats(np.array([[1.0, -1.0]]))
        assert stats.y_bar[0] == 0.0
        assert stats.s[0, 0] == pytest.approx(1.0)
        assert stats.c_hat == 0.5

    def test_matches_two_pass_formula(self, rng):
        y = rng.standard_normal((4, 50))
        stats = sample_stats(y)
        y_bar = y.mean(axis=1)
        two_pass = sum(
            np.outer(y[:, k] - y_bar, y[:, k] - y_bar) for k in range(50)
        ) / 50
        assert np.max(np.abs(stats.s - two_pass)) < 1e-10

    def test_psd_always(self, rng):
        for _ in range(20):
            y = rng.standard_normal((6, 4))  # n < p gives singular but PSD s
            stats = sample_stats(y)
            assert np.linalg.eigvalsh(stats.s).min() >= -1e-10

    def test_pd_when_n_exceeds_p(self):
        # continuous law, n > p: strictly positive definite in 100 seeded runs
        for seed in range(100):
            rng = np.random.default_rng(seed)
            y = rng.standard_normal((20, 40))
            assert np.linalg.eigvalsh(sample_stats(y).s).min() > 0


class TestPopulationValidation:
    def test_report_fields(self, rng):
        cov = build_covariance(DEFAULT_RECIPE, 8, rng)
        mu_n, mu_0 = draw_mean_vectors(0, 8, rng)
        pop = PopulationSpec(p=8, gamma=0, mu_n=mu_n, mu_0=mu_0, sigma=cov)
        report = pop.validate()
        assert report.ok
        assert report.lambda_min == pytest.approx(1.0, abs=1e-8)
        assert report.mean_norm_scaled == pytest.approx(float(mu_n @ mu_n))
        assert report.target_norm_scaled == pytest.approx(float(mu_0 @ mu_0))
        assert report.norm_upper == max(
            report.mean_norm_scaled, report.target_norm_scaled
        )

    def test_eigenvalue_floor_violation(self):
        pop = _population(p=3, sigma=np.diag([1.0, 1.0, 1e-12]), mu=np.ones(3))
        assert not pop.validate().ok

    def test_gamma_scaling(self):
        mu = np.ones(16)
        pop = PopulationSpec(p=16, gamma=1.0, mu_n=mu, mu_0=mu, sigma=np.eye(16))
        report = pop.validate()
        assert report.mean_norm_scaled == pytest.approx(1.0)

    def test_dimension_checks(self):
        with pytest.raises(DimensionMismatchError):
            PopulationSpec(p=3, gamma=0, mu_n=np.zeros(2), mu_0=np.zeros(3),
                           sigma=np.eye(3))
