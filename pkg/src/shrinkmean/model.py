"""Simulation populations and sample generation.

A population is a frozen triple (true mean, target mean, covariance) plus
the norm-growth exponent gamma; samples are p x n observation matrices
built as ``sqrt(sigma) @ X + mu 1'`` from i.i.d. standardized innovations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidRecipeError,
    NotPositiveDefiniteError,
    UnsupportedGammaError,
)
from .linalg import haar_orthogonal, sym_sqrt

__all__ = [
    "EigenRecipe",
    "DEFAULT_RECIPE",
    "InnovationLaw",
    "PopulationSpec",
    "PopulationReport",
    "SampleStats",
    "build_covariance",
    "draw_mean_vectors",
    "generate_sample",
    "sample_stats",
]


@dataclass(frozen=True)
class EigenRecipe:
    """Covariance spectrum given as (fraction, eigenvalue) groups.

    Fractions must sum to 1 and eigenvalues must be positive.  When
    ``override_lambda_max`` is set, the single largest eigenvalue of the
    assembled spectrum is replaced by that value (extreme-spectrum runs).
    """

    proportions: tuple[tuple[float, float], ...]
    override_lambda_max: float | None = None

    def __post_init__(self) -> None:
        if not self.proportions:
            raise InvalidRecipeError("recipe needs at least one group")
        total = sum(f for f, _ in self.proportions)
        if abs(total - 1.0) > 1e-9:
            raise InvalidRecipeError(f"fractions sum to {total}, expected 1")
        if any(f < 0 for f, _ in self.proportions):
            raise InvalidRecipeError("fractions must be nonnegative")
        if any(v <= 0 for _, v in self.proportions):
            raise InvalidRecipeError("eigenvalues must be positive")
        if self.override_lambda_max is not None and self.override_lambda_max <= 0:
            raise InvalidRecipeError("override_lambda_max must be positive")

    def eigenvalues(self, p: int) -> np.ndarray:
        """Expand the recipe into p eigenvalues.

        Each group gets floor(fraction * p) values; any remainder goes to
        the last group.
        """
        counts = [int(np.floor(f * p)) for f, _ in self.proportions]
        counts[-1] += p - sum(counts)
        values = np.concatenate(
            [np.full(k, v) for k, (_, v) in zip(counts, self.proportions)]
        )
        if self.override_lambda_max is not None:
            values = np.sort(values)
            values[-1] = self.override_lambda_max
        return values


#: 20% of eigenvalues at 1, 40% at 3, 40% at 10.
DEFAULT_RECIPE = EigenRecipe(((0.2, 1.0), (0.4, 3.0), (0.4, 10.0)))


@dataclass(frozen=True)
class InnovationLaw:
    """Zero-mean, unit-variance innovation distribution.

    Supported names: ``normal``, ``t`` (standardized Student t, needs
    ``df > 4`` so fourth moments exist), ``exponential`` (unit exponential
    shifted by -1).
    """

    name: str = "normal"
    df: float | None = None

    def __post_init__(self) -> None:
        if self.name not in ("normal", "t", "exponential"):
            raise ValueError(f"unknown innovation law {self.name!r}")
        if self.name == "t":
            if self.df is None or self.df <= 4:
                raise ValueError("t law requires df > 4")
        elif self.df is not None:
            raise ValueError(f"law {self.name!r} takes no df parameter")

    def draw(self, rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
        if self.name == "normal":
            return rng.standard_normal(shape)
        if self.name == "t":
            return rng.standard_t(self.df, shape) * np.sqrt((self.df - 2.0) / self.df)
        return rng.exponential(1.0, shape) - 1.0

    @classmethod
    def parse(cls, text: str) -> "InnovationLaw":
        """Parse ``normal``, ``t:<df>`` or ``exponential``."""
        text = text.strip()
        if text.startswith("t:"):
            return cls("t", float(text[2:]))
        return cls(text)

    def spec_string(self) -> str:
        return f"t:{self.df:g}" if self.name == "t" else self.name


@dataclass(frozen=True)
class PopulationReport:
    """Validation diagnostics for a population.

    ``mean_norm_scaled`` and ``target_norm_scaled`` are the gamma-scaled
    squared norms of the true and target means; both must stay finite and
    positive, and the covariance spectrum must stay above ``lambda_floor``.
    """

    lambda_min: float
    mean_norm_scaled: float
    target_norm_scaled: float
    norm_upper: float
    ok: bool


@dataclass
class PopulationSpec:
    """Ground truth for one simulation scenario; frozen after construction."""

    p: int
    gamma: float
    mu_n: np.ndarray
    mu_0: np.ndarray
    sigma: np.ndarray
    _sqrt_cache: np.ndarray | None = field(
        default=None, repr=False, compare=False, init=False
    )

    def __post_init__(self) -> None:
        self.mu_n = np.asarray(self.mu_n, dtype=float)
        self.mu_0 = np.asarray(self.mu_0, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.mu_n.shape != (self.p,) or self.mu_0.shape != (self.p,):
            raise DimensionMismatchError("mean vectors must have length p")
        if self.sigma.shape != (self.p, self.p):
            raise DimensionMismatchError("sigma must be p x p")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")

    def sigma_sqrt(self) -> np.ndarray:
        """Symmetric square root of the covariance, computed once and cached."""
        if self._sqrt_cache is None:
            self._sqrt_cache = sym_sqrt(self.sigma)
        return self._sqrt_cache

    def validate(self, lambda_floor: float = 1e-8) -> PopulationReport:
        """Check the eigenvalue floor and the scaled mean-norm diagnostics."""
        lam_min = float(np.linalg.eigvalsh(self.sigma)[0])
        scale = float(self.p) ** (-self.gamma)
        m_mean = scale * float(self.mu_n @ self.mu_n)
        m_target = scale * float(self.mu_0 @ self.mu_0)
        ok = (
            lam_min >= lambda_floor
            and np.isfinite(m_mean)
            and np.isfinite(m_target)
            and m_mean > 0
            and m_target > 0
        )
        return PopulationReport(
            lambda_min=lam_min,
            mean_norm_scaled=m_mean,
            target_norm_scaled=m_target,
            norm_upper=max(m_mean, m_target),
            ok=ok,
        )


@dataclass(frozen=True)
class SampleStats:
    """Observed sufficient statistics of one p x n sample.

    ``s`` is the sample covariance with divisor n (not n-1); the scatter
    matrix used by the James-Stein family benchmarks is ``n * s``.
    """

    y_bar: np.ndarray
    s: np.ndarray
    p: int
    n: int

    @property
    def c_hat(self) -> float:
        return self.p / self.n


def build_covariance(
    recipe: EigenRecipe, p: int, rng: np.random.Generator
) -> np.ndarray:
    """Random covariance with the recipe's spectrum and Haar eigenvectors."""
    if p < 2:
        raise DimensionMismatchError(f"p must be >= 2, got {p}")
    values = recipe.eigenvalues(p)
    q = haar_orthogonal(p, rng)
    cov = (q * values) @ q.T
    return (cov + cov.T) / 2.0


def draw_mean_vectors(
    gamma: float,
    p: int,
    rng: np.random.Generator,
    alternating: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw the (true, target) mean pair for the bounded and growing regimes.

    gamma = 0: both vectors i.i.d. uniform on [-p^{-1/2}, p^{-1/2}], drawn
    independently.  gamma = 1: true mean entries are i.i.d. random signs
    (or the deterministic pattern +1,-1,+1,... when ``alternating``) and
    the target is the all-ones vector.
    """
    if gamma == 0:
        bound = p ** (-0.5)
        mu_n = rng.uniform(-bound, bound, size=p)
        mu_0 = rng.uniform(-bound, bound, size=p)
        return mu_n, mu_0
    if gamma == 1:
        if alternating:
            mu_n = np.where(np.arange(p) % 2 == 0, 1.0, -1.0)
        else:
            mu_n = rng.integers(0, 2, size=p) * 2.0 - 1.0
        return mu_n, np.ones(p)
    raise UnsupportedGammaError(f"gamma must be 0 or 1, got {gamma}")


def generate_sample(
    pop: PopulationSpec,
    n: int,
    law: InnovationLaw,
    rng: np.random.Generator,
) -> np.ndarray:
    """Generate a p x n observation matrix sqrt(sigma) @ X + mu 1'."""
    if n < 2:
        raise DimensionMismatchError(f"n must be >= 2, got {n}")
    x = law.draw(rng, (pop.p, n))
    return pop.sigma_sqrt() @ x + pop.mu_n[:, None]


def sample_stats(y: np.ndarray) -> SampleStats:
    """Row means and divisor-n sample covariance of a p x n matrix."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise DimensionMismatchError(f"expected a p x n matrix, got shape {y.shape}")
    p, n = y.shape
    if n < 2:
        raise DimensionMismatchError(f"n must be >= 2, got {n}")
    y_bar = y.mean(axis=1)
    s = y @ y.T / n - np.outer(y_bar, y_bar)
    s = (s + s.T) / 2.0
    return SampleStats(y_bar=y_bar, s=s, p=p, n=n)


def check_population_pd(pop: PopulationSpec, lambda_floor: float = 1e-8) -> None:
    """Raise when the population covariance violates the eigenvalue floor."""
    report = pop.validate(lambda_floor)
    if report.lambda_min < lambda_floor:
        raise NotPositiveDefiniteError(
            f"population covariance has lambda_min {report.lambda_min:.3e} "
            f"< floor {lambda_floor:.1e}"
        )
