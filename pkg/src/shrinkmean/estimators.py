"""Mean-vector estimators.

The shrinkage family estimates the mean as ``alpha * y_bar + beta * mu_0``:

* oracle weights   -- loss-minimizing for the observed sample, computable
  only with the true covariance and true mean;
* limit weights    -- their nonrandom large-dimension equivalents;
* bona fide weights -- plug-in estimates using only the observed sample,
  with an inverse sample covariance for p < n and its Moore-Penrose
  pseudoinverse for p > n.

Four benchmarks are included: the (modified) James-Stein estimator for
p < n, its high-dimensional and positive-part variants for p > n, and the
unit-target shrinkage estimator of Wang et al. with both a direct and a
fast evaluation of its pairwise double sums.  ``generalized_inverse_s`` is
a covariance-sandwiched generalized inverse used only as a test oracle.

Everything here is a pure function; a single :class:`SampleStats` value
may be shared read-only across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateDenominatorError,
    DegenerateHessianError,
    DegenerateTargetError,
    DimensionMismatchError,
    EqualDimensionsError,
    InvalidDimensionsError,
    NotPositiveDefiniteError,
    SingularSampleError,
)
from .linalg import PseudoInverseResult, SpdFactor, pseudo_inverse, spd_factor, spd_solve
from .model import SampleStats

__all__ = [
    "ShrinkageWeights",
    "ESTIMATOR_KINDS",
    "oracle_intensities",
    "limit_intensities",
    "bona_fide_intensities",
    "olse",
    "james_stein",
    "js_high_dim",
    "js_positive_part",
    "wang_estimator",
    "generalized_inverse_s",
]

#: Estimators understood by the Monte Carlo harness and the backtester.
ESTIMATOR_KINDS = (
    "sample-mean",
    "olse",
    "olse-asymptotic",
    "olse-oracle",
    "js",
    "js-high-dim",
    "js-positive-part",
    "wang",
)

_REL_FLOOR = 1e-12  # degenerate-denominator threshold, relative to operand scale


@dataclass(frozen=True)
class ShrinkageWeights:
    """A (sample-mean weight, target weight) pair with its provenance.

    ``kind`` is one of ``oracle``, ``limit``, ``bona-fide``.  Limit weights
    have alpha in (0, 1) whenever the two mean directions are not parallel;
    oracle and bona fide weights may be negative in small samples.
    """

    alpha: float
    beta: float
    kind: str


def _quad_forms_spd(
    sigma: np.ndarray,
    vectors: list[np.ndarray],
    factor: SpdFactor | None = None,
) -> np.ndarray:
    """Gram matrix of ``vectors`` in the inverse-``sigma`` inner product."""
    if factor is None:
        factor = spd_factor(sigma)
    stacked = np.column_stack(vectors)
    solved = spd_solve(factor, stacked)
    return stacked.T @ solved


def oracle_intensities(
    y_bar: np.ndarray,
    sigma: np.ndarray,
    mu_n: np.ndarray,
    mu_0: np.ndarray,
    sigma_factor: SpdFactor | None = None,
) -> ShrinkageWeights:
    """Loss-minimizing weights for one sample, using the true covariance.

    Solves the 2x2 first-order conditions of the quadratic loss in
    (alpha, beta); ``sigma_factor`` may pass a precomputed Cholesky factor
    of ``sigma`` to avoid refactorizing across replications.
    """
    y_bar = np.asarray(y_bar, dtype=float)
    gram = _quad_forms_spd(sigma, [y_bar, mu_0, mu_n], factor=sigma_factor)
    h_yy, h_y0, h_yn = gram[0, 0], gram[0, 1], gram[0, 2]
    h_00, h_0n = gram[1, 1], gram[1, 2]

    det = h_yy * h_00 - h_y0 * h_y0
    if abs(det) <= _REL_FLOOR * abs(h_yy * h_00):
        raise DegenerateHessianError(
            "sample mean and target are collinear in the precision metric"
        )
    alpha = (h_yn * h_00 - h_0n * h_y0) / det
    beta = (h_yy * h_0n - h_y0 * h_yn) / det
    return ShrinkageWeights(alpha=float(alpha), beta=float(beta), kind="oracle")


def limit_intensities(
    sigma: np.ndarray,
    mu_n: np.ndarray,
    mu_0: np.ndarray,
    c: float,
    sigma_factor: SpdFactor | None = None,
) -> ShrinkageWeights:
    """Nonrandom limits of the oracle weights under p/n -> c."""
    if c <= 0:
        raise ValueError(f"concentration c must be positive, got {c}")
    mu_n = np.asarray(mu_n, dtype=float)
    mu_0 = np.asarray(mu_0, dtype=float)
    if sigma_factor is None:
        sigma_factor = spd_factor(sigma)
    stacked = np.column_stack([mu_n, mu_0])
    solved = spd_solve(sigma_factor, stacked)
    gram = stacked.T @ solved
    mean_form, cross_form, target_form = gram[0, 0], gram[0, 1], gram[1, 1]

    target_scale = float(np.linalg.norm(mu_0)) * float(np.linalg.norm(solved[:, 1]))
    if target_form <= _REL_FLOOR * max(target_scale, 1e-300):
        raise DegenerateTargetError("target vector has zero precision-metric energy")

    alpha = (mean_form * target_form - cross_form**2) / (
        (c + mean_form) * target_form - cross_form**2
    )
    beta = (1.0 - alpha) * cross_form / target_form
    return ShrinkageWeights(alpha=float(alpha), beta=float(beta), kind="limit")


def _sample_precision_forms(
    stats: SampleStats,
    mu_0: np.ndarray,
    s_pinv: PseudoInverseResult | None = None,
) -> tuple[float, float, float, float]:
    """(ybar'Qybar, ybar'Qmu0, mu0'Qmu0, correction) with Q the inverse or
    pseudoinverse of the sample covariance, depending on p vs n."""
    p, n = stats.p, stats.n
    if p == n:
        raise EqualDimensionsError("bona fide weights are undefined at p == n")
    mu_0 = np.asarray(mu_0, dtype=float)
    if mu_0.shape != (p,):
        raise DimensionMismatchError("target vector length must equal p")

    if p < n:
        try:
            factor = spd_factor(stats.s)
        except NotPositiveDefiniteError as exc:
            raise SingularSampleError(
                "sample covariance is not positive definite"
            ) from exc
        stacked = np.column_stack([stats.y_bar, mu_0])
        solved = spd_solve(factor, stacked)
        gram = stacked.T @ solved
        correction = p / (n - p)
    else:
        if s_pinv is None:
            s_pinv = pseudo_inverse(stats.s)
        stacked = np.column_stack([stats.y_bar, mu_0])
        gram = stacked.T @ (s_pinv.pinv @ stacked)
        correction = 1.0 / (p / n - 1.0)
    return float(gram[0, 0]), float(gram[0, 1]), float(gram[1, 1]), correction


def bona_fide_intensities(
    stats: SampleStats,
    mu_0: np.ndarray,
    clamp: bool = False,
    s_pinv: PseudoInverseResult | None = None,
) -> ShrinkageWeights:
    """Plug-in shrinkage weights from observable data only.

    For p < n the inverse sample covariance is used and the sample-mean
    quadratic form is debiased by p/(n-p); for p > n the Moore-Penrose
    pseudoinverse replaces it and the debiasing term is 1/(p/n - 1).
    ``clamp=True`` clips alpha to [0, 1] (for applied use; raw weights may
    legitimately be negative in small samples).  ``s_pinv`` may pass a
    precomputed pseudoinverse of ``stats.s`` for the p > n branch.
    """
    a_yy, a_y0, a_00, correction = _sample_precision_forms(stats, mu_0, s_pinv)
    det = a_yy * a_00 - a_y0 * a_y0
    if abs(det) <= _REL_FLOOR * abs(a_yy * a_00) or a_00 <= 0:
        raise DegenerateDenominatorError(
            "sample mean and target are collinear in the sample precision metric"
        )
    alpha = ((a_yy - correction) * a_00 - a_y0**2) / det
    if clamp:
        alpha = min(max(alpha, 0.0), 1.0)
    beta = (1.0 - alpha) * a_y0 / a_00
    return ShrinkageWeights(alpha=float(alpha), beta=float(beta), kind="bona-fide")


def olse(
    stats: SampleStats,
    mu_0: np.ndarray,
    clamp: bool = False,
    s_pinv: PseudoInverseResult | None = None,
) -> np.ndarray:
    """Optimal linear shrinkage estimate alpha * y_bar + beta * mu_0."""
    w = bona_fide_intensities(stats, mu_0, clamp=clamp, s_pinv=s_pinv)
    return w.alpha * stats.y_bar + w.beta * np.asarray(mu_0, dtype=float)


def _check_vector_matrix(y_bar: np.ndarray, scatter: np.ndarray, p: int) -> tuple:
    y_bar = np.asarray(y_bar, dtype=float)
    scatter = np.asarray(scatter, dtype=float)
    if y_bar.shape != (p,) or scatter.shape != (p, p):
        raise DimensionMismatchError("y_bar must be length p and scatter p x p")
    return y_bar, scatter


def james_stein(
    y_bar: np.ndarray, scatter: np.ndarray, p: int, n: int
) -> np.ndarray:
    """James-Stein estimator with estimated covariance, for n >= p + 4.

    Shrinks the sample mean toward zero by the factor
    ``1 - ((p-2)/(n-p-3)) / (y_bar' scatter^{-1} y_bar)``.
    """
    if p < 3 or n < p + 4:
        raise InvalidDimensionsError(f"requires n >= p + 4 and p >= 3, got p={p} n={n}")
    y_bar, scatter = _check_vector_matrix(y_bar, scatter, p)
    quad = float(y_bar @ spd_solve(spd_factor(scatter), y_bar))
    if quad <= 0.0:
        raise DegenerateDenominatorError("sample mean quadratic form is zero")
    shrink = 1.0 - ((p - 2.0) / (n - p - 3.0)) / quad
    return shrink * y_bar


def js_high_dim(
    y_bar: np.ndarray,
    scatter: np.ndarray,
    p: int,
    n: int,
    scatter_pinv: PseudoInverseResult | None = None,
) -> np.ndarray:
    """High-dimensional James-Stein estimator for p > n >= 3.

    Shrinks only the component of the sample mean inside the range of the
    scatter matrix, with coefficient a = 2(n-2)/(p-n+3) at its upper bound.
    """
    if not (p > n >= 3):
        raise InvalidDimensionsError(f"requires p > n >= 3, got p={p} n={n}")
    y_bar, scatter = _check_vector_matrix(y_bar, scatter, p)
    if scatter_pinv is None:
        scatter_pinv = pseudo_inverse(scatter)
    quad = float(y_bar @ (scatter_pinv.pinv @ y_bar))
    if abs(quad) <= _REL_FLOOR:
        raise DegenerateDenominatorError("sample mean lies outside the scatter range")
    a = 2.0 * (n - 2.0) / (p - n + 3.0)
    projected = scatter @ (scatter_pinv.pinv @ y_bar)
    return y_bar - (a / quad) * projected


def js_positive_part(
    y_bar: np.ndarray,
    scatter: np.ndarray,
    p: int,
    n: int,
    as_printed: bool = True,
    scatter_pinv: PseudoInverseResult | None = None,
) -> np.ndarray:
    """Positive-part variant of the high-dimensional James-Stein estimator.

    The published display adds the in-range component to the sample mean,
    ``(I + P) y_bar``, with P the range projector; the conventional
    positive-part decomposition keeps the out-of-range component only,
    ``(I - P) y_bar``.  ``as_printed`` selects between them (default: the
    published form).  In both cases the clamped term
    ``max(0, 1 - ((n-2)/(p-n+3)) / (y_bar' scatter^+ y_bar)) * P y_bar``
    is added.
    """
    if not (p > n >= 3):
        raise InvalidDimensionsError(f"requires p > n >= 3, got p={p} n={n}")
    y_bar, scatter = _check_vector_matrix(y_bar, scatter, p)
    if scatter_pinv is None:
        scatter_pinv = pseudo_inverse(scatter)
    pinv_y = scatter_pinv.pinv @ y_bar
    quad = float(y_bar @ pinv_y)
    if abs(quad) <= _REL_FLOOR:
        raise DegenerateDenominatorError("sample mean lies outside the scatter range")
    projected = scatter @ pinv_y
    clamped = max(0.0, 1.0 - ((n - 2.0) / (p - n + 3.0)) / quad)
    base = y_bar + projected if as_printed else y_bar - projected
    return base + clamped * projected


def _wang_pair_sums_fast(
    y: np.ndarray, w_y: np.ndarray, ones_w_y: np.ndarray
) -> tuple[float, float, float]:
    """Off-diagonal double sums via sum(i!=j) a_i b_j = sum(a) sum(b) - sum(a b)."""
    col_tot = y.sum(axis=1)
    total_yy = float(col_tot @ (w_y.sum(axis=1)))
    diag_yy = float(np.einsum("ij,ij->", y, w_y))
    off_yy = total_yy - diag_yy
    off_11 = float(ones_w_y.sum() ** 2 - (ones_w_y**2).sum())
    return off_yy, diag_yy, off_11


def _wang_pair_sums_naive(
    y: np.ndarray, w: np.ndarray, ones_w_y: np.ndarray
) -> tuple[float, float, float]:
    """Literal evaluation of the pairwise double sums."""
    n = y.shape[1]
    off_yy = 0.0
    diag_yy = 0.0
    off_11 = 0.0
    for i in range(n):
        w_yi = w @ y[:, i]
        diag_yy += float(y[:, i] @ w_yi)
        for j in range(n):
            if j == i:
                continue
            off_yy += float(y[:, j] @ w_yi)
            off_11 += float(ones_w_y[i] * ones_w_y[j])
    return off_yy, diag_yy, off_11


def wang_estimator(y: np.ndarray, use_fast_path: bool = True) -> np.ndarray:
    """Unit-target shrinkage estimator of Wang et al. for p > n.

    Combines the sample mean and the all-ones direction with coefficients
    built from four statistics of the pseudoinverted scatter matrix.  The
    fast path rewrites the pairwise double sums through the sum-product
    identity; both paths agree to 1e-10 relative.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise DimensionMismatchError(f"expected a p x n matrix, got shape {y.shape}")
    p, n = y.shape
    if not (p > n >= 2):
        raise InvalidDimensionsError(f"requires p > n >= 2, got p={p} n={n}")

    y_bar = y.mean(axis=1)
    centered = y - y_bar[:, None]
    scatter = centered @ centered.T
    w = pseudo_inverse(scatter).pinv
    ones = np.ones(p)
    w_ones = w @ ones
    ones_w_y = y.T @ w_ones  # entries 1' scatter^+ y_k
    ones_w_ones = float(ones @ w_ones)
    if abs(ones_w_ones) <= _REL_FLOOR:
        raise DegenerateDenominatorError("ones vector lies outside the scatter range")

    if use_fast_path:
        off_yy, diag_yy, off_11 = _wang_pair_sums_fast(y, w @ y, ones_w_y)
    else:
        off_yy, diag_yy, off_11 = _wang_pair_sums_naive(y, w, ones_w_y)

    z1 = off_yy / (p * (n - 1.0))
    z2 = (diag_yy - off_yy / (n - 1.0)) / (n * p)
    z3 = ones_w_y.sum() / (n * ones_w_ones)
    z4 = off_11 / (p * (n - 1.0) * ones_w_ones)

    denom = z1 + z2 * z4
    scale = abs(z1) + abs(z2 * z4)
    if abs(denom) <= _REL_FLOOR * max(scale, 1e-300):
        raise DegenerateDenominatorError("shrinkage coefficient denominator vanishes")
    return ((z1 - z4) / denom) * y_bar + (z2 * z3 / denom) * ones


def generalized_inverse_s(sigma: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Covariance-sandwiched generalized inverse of the sample covariance.

    Built from the true covariance and the standardized innovation matrix,
    so it is a test-only oracle: it satisfies the two reflexive
    generalized-inverse conditions but not the symmetry conditions of the
    Moore-Penrose inverse.  It equals the plain inverse when the sample
    covariance is invertible, and the Moore-Penrose inverse when the true
    covariance is a multiple of the identity.
    """
    sigma = np.asarray(sigma, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or sigma.shape != (x.shape[0], x.shape[0]):
        raise DimensionMismatchError("sigma must be p x p and x p x n")
    n = x.shape[1]
    x_bar = x.mean(axis=1)
    inner = x @ x.T / n - np.outer(x_bar, x_bar)
    inner = (inner + inner.T) / 2.0

    vals, vecs = np.linalg.eigh(sigma)
    if vals[0] <= 0:
        raise NotPositiveDefiniteError("sigma must be positive definite")
    inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.T
    return inv_sqrt @ pseudo_inverse(inner).pinv @ inv_sqrt
