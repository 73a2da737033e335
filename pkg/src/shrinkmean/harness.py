"""Monte Carlo studies: loss curves, negative-weight frequencies, QQ data.

A study runs a grid of (p, c) cells.  Each cell draws one population from
a sub-seed derived from ``(root seed, p, round(1000 c))``, then evaluates
every requested estimator on ``n_reps`` independent samples whose random
streams are derived from ``(root seed, p, round(1000 c), replication + 1)``.
Replications may run on a thread pool; results are stored by replication
index and reduced in that fixed order, so a report is bit-identical for a
given seed regardless of the thread count.  Recorded wall-clock runtimes
are the one exception: they are real measurements and vary run to run.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import norm

from .errors import (
    ConfigError,
    DimensionMismatchError,
    ShrinkmeanError,
    TooFewSamplesError,
)
from .estimators import (
    ESTIMATOR_KINDS,
    bona_fide_intensities,
    james_stein,
    js_high_dim,
    js_positive_part,
    limit_intensities,
    oracle_intensities,
    wang_estimator,
)
from .linalg import SpdFactor, spd_factor, spd_solve
from .model import (
    DEFAULT_RECIPE,
    EigenRecipe,
    InnovationLaw,
    PopulationSpec,
    build_covariance,
    draw_mean_vectors,
    generate_sample,
    sample_stats,
)

__all__ = [
    "McConfig",
    "CellResult",
    "McReport",
    "TARGET_MODES",
    "KS_COEFF_1PCT",
    "cell_sample_size",
    "population_rng",
    "cell_population",
    "replication_rng",
    "quadratic_loss",
    "run_study",
    "negative_frequency_table",
    "qq_data",
    "ks_statistic",
    "write_losses_csv",
    "write_intensities_csv",
    "write_qq_csv",
    "write_table1_csv",
]

TARGET_MODES = ("drawn", "equal-to-mu_n", "custom")

#: asymptotic Kolmogorov coefficient at the 1% level; critical value is
#: KS_COEFF_1PCT / sqrt(n_samples)
KS_COEFF_1PCT = 1.63


def cell_sample_size(p: int, c: float) -> int:
    """Sample size n = round(p / c), half values rounding up."""
    return int(np.floor(p / c + 0.5))


def _cell_entropy(seed: int, p: int, c: float) -> tuple[int, int, int]:
    return (seed, p, int(round(1000 * c)))


def population_rng(seed: int, p: int, c: float) -> np.random.Generator:
    """Stream used to draw the (fixed) population of one grid cell."""
    return np.random.default_rng(np.random.SeedSequence(_cell_entropy(seed, p, c) + (0,)))


def replication_rng(seed: int, p: int, c: float, index: int) -> np.random.Generator:
    """Independent stream of replication ``index`` (0-based) in one cell."""
    return np.random.default_rng(
        np.random.SeedSequence(_cell_entropy(seed, p, c) + (index + 1,))
    )


@dataclass(frozen=True)
class McConfig:
    """Grid, replication count, estimator set and seeding of one study."""

    p_grid: tuple[int, ...]
    c_grid: tuple[float, ...]
    gamma: float = 0.0
    n_reps: int = 1000
    estimators: tuple[str, ...] = ("sample-mean", "olse")
    target_mode: str = "drawn"
    seed: int = 0
    eigen_recipe: EigenRecipe = DEFAULT_RECIPE
    law: InnovationLaw = field(default_factory=InnovationLaw)
    threads: int = 1
    jsplus_as_printed: bool = True
    custom_target: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.n_reps < 1:
            raise ConfigError("n_reps must be >= 1")
        if not self.p_grid or not self.c_grid:
            raise ConfigError("p_grid and c_grid must be nonempty")
        unknown = [e for e in self.estimators if e not in ESTIMATOR_KINDS]
        if unknown:
            raise ConfigError(f"unknown estimators: {unknown}")
        if self.target_mode not in TARGET_MODES:
            raise ConfigError(f"unknown target mode {self.target_mode!r}")
        if self.target_mode == "custom" and self.custom_target is None:
            raise ConfigError("target_mode 'custom' needs a custom_target vector")
        if self.gamma not in (0, 1):
            raise ConfigError(f"gamma must be 0 or 1, got {self.gamma}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        for p in self.p_grid:
            for c in self.c_grid:
                if cell_sample_size(p, c) < 2:
                    raise ConfigError(f"cell p={p} c={c} yields n < 2")


@dataclass
class CellResult:
    """Per-replication losses, runtimes and shrinkage weights of one cell."""

    p: int
    c: float
    n: int
    losses: dict[str, np.ndarray]
    runtimes: dict[str, np.ndarray]
    failures: dict[str, int]
    oracle_weights: np.ndarray | None = None
    bona_fide_weights: np.ndarray | None = None
    limit_alpha: float | None = None
    limit_beta: float | None = None

    def mean_loss(self, estimator: str) -> float:
        vals = self.losses[estimator]
        good = vals[np.isfinite(vals)]
        return float(good.mean()) if good.size else float("nan")

    def loss_se(self, estimator: str) -> float:
        vals = self.losses[estimator]
        good = vals[np.isfinite(vals)]
        if good.size < 2:
            return float("nan")
        return float(good.std(ddof=1) / np.sqrt(good.size))

    def mean_runtime(self, estimator: str) -> float:
        vals = self.runtimes[estimator]
        good = vals[np.isfinite(vals)]
        return float(good.mean()) if good.size else float("nan")

    def negative_frequency(self, kind: str) -> float:
        """Fraction of replications whose alpha weight is negative."""
        weights = {
            "oracle": self.oracle_weights,
            "bona-fide": self.bona_fide_weights,
        }[kind]
        if weights is None:
            raise ConfigError(f"{kind} weights were not recorded in this cell")
        alphas = weights[:, 0]
        good = alphas[np.isfinite(alphas)]
        if good.size == 0:
            return float("nan")
        return float((good < 0).mean())


@dataclass
class McReport:
    """All cells of one study, plus the configuration that produced them."""

    config: McConfig
    cells: list[CellResult]

    def cell(self, p: int, c: float) -> CellResult:
        for cell in self.cells:
            if cell.p == p and cell.c == c:
                return cell
        raise KeyError(f"no cell for p={p}, c={c}")


def quadratic_loss(
    mu_hat: np.ndarray, mu_n: np.ndarray, sigma_factor: SpdFactor
) -> float:
    """Precision-metric quadratic loss (mu_hat - mu_n)' sigma^{-1} (mu_hat - mu_n)."""
    mu_hat = np.asarray(mu_hat, dtype=float)
    mu_n = np.asarray(mu_n, dtype=float)
    if mu_hat.shape != mu_n.shape or mu_hat.shape[0] != sigma_factor.dim:
        raise DimensionMismatchError("estimate, mean and factor dimensions differ")
    diff = mu_hat - mu_n
    return float(diff @ spd_solve(sigma_factor, diff))


def cell_population(config: McConfig, p: int, c: float) -> PopulationSpec:
    rng = population_rng(config.seed, p, c)
    sigma = build_covariance(config.eigen_recipe, p, rng)
    mu_n, mu_0 = draw_mean_vectors(config.gamma, p, rng)
    if config.target_mode == "equal-to-mu_n":
        mu_0 = mu_n.copy()
    elif config.target_mode == "custom":
        mu_0 = np.asarray(config.custom_target, dtype=float)
        if mu_0.shape != (p,):
            raise ConfigError(f"custom target has length {mu_0.shape}, expected {p}")
    return PopulationSpec(p=p, gamma=config.gamma, mu_n=mu_n, mu_0=mu_0, sigma=sigma)


_NEEDS_STATS = {"olse", "js", "js-high-dim", "js-positive-part"}


def _run_cell(config: McConfig, p: int, c: float) -> CellResult:
    n = cell_sample_size(p, c)
    pop = cell_population(config, p, c)
    pop.sigma_sqrt()  # warm the cache before worker threads share it
    factor = spd_factor(pop.sigma)

    n_reps = config.n_reps
    estimators = config.estimators
    losses = {e: np.full(n_reps, np.nan) for e in estimators}
    runtimes = {e: np.full(n_reps, np.nan) for e in estimators}
    failures = {e: 0 for e in estimators}

    limit_alpha = limit_beta = None
    limit_failed: ShrinkmeanError | None = None
    if "olse-asymptotic" in estimators:
        try:
            w = limit_intensities(pop.sigma, pop.mu_n, pop.mu_0, p / n, sigma_factor=factor)
            limit_alpha, limit_beta = w.alpha, w.beta
        except ShrinkmeanError as exc:
            limit_failed = exc

    record_oracle = "olse-oracle" in estimators
    record_bf = "olse" in estimators
    oracle_w = np.full((n_reps, 2), np.nan) if record_oracle else None
    bf_w = np.full((n_reps, 2), np.nan) if record_bf else None
    needs_stats = bool(_NEEDS_STATS.intersection(estimators))

    def one_rep(r: int) -> None:
        rng = replication_rng(config.seed, p, c, r)
        y = generate_sample(pop, n, config.law, rng)
        y_bar = y.mean(axis=1)
        stats = sample_stats(y) if needs_stats else None

        for est in estimators:
            start = time.perf_counter()
            try:
                if est == "sample-mean":
                    mu_hat = y_bar
                elif est == "olse":
                    w = bona_fide_intensities(stats, pop.mu_0)
                    mu_hat = w.alpha * stats.y_bar + w.beta * pop.mu_0
                    bf_w[r] = (w.alpha, w.beta)
                elif est == "olse-asymptotic":
                    if limit_failed is not None:
                        raise limit_failed
                    mu_hat = limit_alpha * y_bar + limit_beta * pop.mu_0
                elif est == "olse-oracle":
                    w = oracle_intensities(
                        y_bar, pop.sigma, pop.mu_n, pop.mu_0, sigma_factor=factor
                    )
                    mu_hat = w.alpha * y_bar + w.beta * pop.mu_0
                    oracle_w[r] = (w.alpha, w.beta)
                elif est == "js":
                    mu_hat = james_stein(y_bar, n * stats.s, p, n)
                elif est == "js-high-dim":
                    mu_hat = js_high_dim(y_bar, n * stats.s, p, n)
                elif est == "js-positive-part":
                    mu_hat = js_positive_part(
                        y_bar, n * stats.s, p, n, as_printed=config.jsplus_as_printed
                    )
                else:
                    mu_hat = wang_estimator(y)
                runtimes[est][r] = time.perf_counter() - start
                losses[est][r] = quadratic_loss(mu_hat, pop.mu_n, factor)
            except (ShrinkmeanError, np.linalg.LinAlgError):
                runtimes[est][r] = time.perf_counter() - start

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            list(pool.map(one_rep, range(n_reps)))
    else:
        for r in range(n_reps):
            one_rep(r)

    for est in estimators:
        failures[est] = int(np.isnan(losses[est]).sum())

    return CellResult(
        p=p,
        c=c,
        n=n,
        losses=losses,
        runtimes=runtimes,
        failures=failures,
        oracle_weights=oracle_w,
        bona_fide_weights=bf_w,
        limit_alpha=limit_alpha,
        limit_beta=limit_beta,
    )


def run_study(config: McConfig) -> McReport:
    """Run the full (p, c) grid of a study configuration.

    Estimator errors inside a replication are recorded as failures for
    that estimator (loss left NaN), never aborts.
    """
    cells = [_run_cell(config, p, c) for p in config.p_grid for c in config.c_grid]
    return McReport(config=config, cells=cells)


def negative_frequency_table(config: McConfig) -> list[dict]:
    """Per-cell frequencies of a negative alpha weight, oracle and bona fide.

    The estimator set is widened to include both weight-producing
    estimators if the configuration lacks them.
    """
    needed = {"olse", "olse-oracle"}
    if not needed.issubset(config.estimators):
        config = replace(
            config, estimators=tuple(sorted(needed.union(config.estimators)))
        )
    report = run_study(config)
    rows = []
    for cell in report.cells:
        rows.append(
            {
                "p": cell.p,
                "c": cell.c,
                "oracle_negative_freq": cell.negative_frequency("oracle"),
                "bona_fide_negative_freq": cell.negative_frequency("bona-fide"),
            }
        )
    return rows


def qq_data(samples: np.ndarray) -> np.ndarray:
    """Pairs (standard-normal quantile, sorted sample) at positions (i-0.5)/N."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 10:
        raise TooFewSamplesError(f"need at least 10 samples, got {samples.size}")
    ordered = np.sort(samples)
    positions = (np.arange(1, ordered.size + 1) - 0.5) / ordered.size
    return np.column_stack([norm.ppf(positions), ordered])


def ks_statistic(samples: np.ndarray) -> float:
    """Sup distance between the empirical CDF and the standard normal CDF."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 10:
        raise TooFewSamplesError(f"need at least 10 samples, got {samples.size}")
    ordered = np.sort(samples)
    count = ordered.size
    cdf = norm.cdf(ordered)
    upper = np.arange(1, count + 1) / count - cdf
    lower = cdf - np.arange(0, count) / count
    return float(max(upper.max(), lower.max()))


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _write_rows(path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_losses_csv(report: McReport, path) -> None:
    rows = []
    for cell in report.cells:
        for est in report.config.estimators:
            rows.append(
                (cell.p, cell.c, est, cell.mean_loss(est), cell.loss_se(est),
                 cell.mean_runtime(est))
            )
    _write_rows(path, ["p", "c", "estimator", "mean_loss", "se", "mean_runtime_s"], rows)


def write_intensities_csv(report: McReport, path) -> None:
    rows = []
    for cell in report.cells:
        for kind, weights in (
            ("oracle", cell.oracle_weights),
            ("bona-fide", cell.bona_fide_weights),
        ):
            if weights is None:
                continue
            for r in range(weights.shape[0]):
                rows.append((cell.p, cell.c, kind, r, weights[r, 0], weights[r, 1]))
    _write_rows(path, ["p", "c", "kind", "replication", "alpha", "beta"], rows)


def write_qq_csv(pairs: np.ndarray, quantity: str, p: int, c: float, path) -> None:
    rows = [(quantity, p, c, float(t), float(e)) for t, e in pairs]
    _write_rows(path, ["quantity", "p", "c", "theoretical", "empirical"], rows)


def write_table1_csv(rows: list[dict], path) -> None:
    out = [
        (r["p"], r["c"], r["oracle_negative_freq"], r["bona_fide_negative_freq"])
        for r in rows
    ]
    _write_rows(
        path, ["p", "c", "oracle_negative_freq", "bona_fide_negative_freq"], out
    )
