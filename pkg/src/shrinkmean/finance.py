"""Rolling-window backtest of mean estimators on a returns panel.

Each estimator predicts the next-period return of the equally-weighted
portfolio from the most recent n observations; performance is the average
squared deviation from the realized portfolio return, scaled by 1e4.
All estimators in one run see identical windows and identical target
draws, so comparisons stay paired.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    ParseError,
    RaggedRowsError,
    ShrinkmeanError,
)
from .estimators import (
    bona_fide_intensities,
    james_stein,
    js_high_dim,
    js_positive_part,
    wang_estimator,
)
from .model import sample_stats

__all__ = [
    "ReturnsPanel",
    "BacktestConfig",
    "BacktestRow",
    "BacktestReport",
    "TARGET_STRATEGIES",
    "load_returns_csv",
    "write_returns_csv",
    "target_vector",
    "rolling_backtest",
    "synthetic_panel",
    "write_backtest_csv",
]

TARGET_STRATEGIES = ("uniform-range-draw", "signs", "ones")

BACKTEST_ESTIMATORS = (
    "sample-mean",
    "olse",
    "js",
    "js-high-dim",
    "js-positive-part",
    "wang",
)


@dataclass
class ReturnsPanel:
    """Per-period log-returns, rows = periods (dates), columns = assets."""

    values: np.ndarray
    asset_labels: list[str] | None = None
    date_labels: list[str] | None = None

    @property
    def n_assets(self) -> int:
        return self.values.shape[1]

    @property
    def n_periods(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class BacktestConfig:
    windows: tuple[int, ...] = (25, 50, 75, 100)
    estimators: tuple[str, ...] = ("sample-mean", "olse")
    targets: tuple[str, ...] = ("uniform-range-draw", "signs", "ones")
    seed: int = 0
    align_start: bool = False
    fixed_target: bool = False
    jsplus_as_printed: bool = True

    def __post_init__(self) -> None:
        if not self.windows:
            raise ConfigError("need at least one window size")
        if any(w < 2 for w in self.windows):
            raise ConfigError("window sizes must be >= 2")
        unknown = [e for e in self.estimators if e not in BACKTEST_ESTIMATORS]
        if unknown:
            raise ConfigError(f"unknown estimators: {unknown}")
        unknown = [t for t in self.targets if t not in TARGET_STRATEGIES]
        if unknown:
            raise ConfigError(f"unknown target strategies: {unknown}")


@dataclass(frozen=True)
class BacktestRow:
    window_n: int
    c_hat: float
    estimator: str
    target: str
    loss_x1e4: float
    windows_evaluated: int
    failures: int


@dataclass
class BacktestReport:
    rows: list[BacktestRow]

    def loss(self, window_n: int, estimator: str, target: str) -> float:
        for row in self.rows:
            if (
                row.window_n == window_n
                and row.estimator == estimator
                and row.target == target
            ):
                return row.loss_x1e4
        raise KeyError(f"no row for ({window_n}, {estimator}, {target})")


def load_returns_csv(path, has_header: bool = True) -> ReturnsPanel:
    """Read a rectangular CSV of returns; rows = dates, columns = assets.

    A header row, when present, supplies asset labels.  Any non-numeric
    cell raises :class:`ParseError` naming its row and column; rows of
    unequal length raise :class:`RaggedRowsError`.
    """
    with open(path, "r", newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        rows = [row for row in reader if row]
    if not rows:
        raise ParseError(f"{path}: file is empty")

    labels = None
    start = 0
    if has_header:
        labels = [cell.strip() for cell in rows[0]]
        start = 1
        if len(rows) == start:
            raise ParseError(f"{path}: no data rows below the header")

    width = len(rows[start])
    data = np.empty((len(rows) - start, width))
    for i, row in enumerate(rows[start:], start=start):
        if len(row) != width:
            raise RaggedRowsError(
                f"{path}: row {i + 1} has {len(row)} cells, expected {width}"
            )
        for j, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric cell at row {i + 1}, column {j + 1}: "
                    f"{cell!r}"
                ) from None
            if not np.isfinite(value):
                raise ParseError(
                    f"{path}: non-finite cell at row {i + 1}, column {j + 1}"
                )
            data[i - start, j] = value
    return ReturnsPanel(values=data, asset_labels=labels)


def write_returns_csv(panel: ReturnsPanel, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        if panel.asset_labels is not None:
            writer.writerow(panel.asset_labels)
        for row in panel.values:
            writer.writerow([format(v, ".12g") for v in row])


def target_vector(
    strategy: str, window_values: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Target mean vector for one window.

    ``uniform-range-draw`` first averages each asset over the window, then
    draws every coordinate uniformly between the smallest and largest of
    those averages; ``signs`` draws i.i.d. +-1 entries; ``ones`` is the
    all-ones vector.
    """
    window_values = np.asarray(window_values, dtype=float)
    p = window_values.shape[1]
    if strategy == "uniform-range-draw":
        means = window_values.mean(axis=0)
        return rng.uniform(means.min(), means.max(), size=p)
    if strategy == "signs":
        return rng.integers(0, 2, size=p) * 2.0 - 1.0
    if strategy == "ones":
        return np.ones(p)
    raise ConfigError(f"unknown target strategy {strategy!r}")


def _estimate(estimator: str, y: np.ndarray, mu_0: np.ndarray, config: BacktestConfig):
    """One estimator on a p x n window; target-free estimators ignore mu_0."""
    p, n = y.shape
    if estimator == "sample-mean":
        return y.mean(axis=1)
    stats = sample_stats(y)
    if estimator == "olse":
        w = bona_fide_intensities(stats, mu_0)
        return w.alpha * stats.y_bar + w.beta * mu_0
    scatter = n * stats.s
    if estimator == "js":
        return james_stein(stats.y_bar, scatter, p, n)
    if estimator == "js-high-dim":
        return js_high_dim(stats.y_bar, scatter, p, n)
    if estimator == "js-positive-part":
        return js_positive_part(
            stats.y_bar, scatter, p, n, as_printed=config.jsplus_as_printed
        )
    return wang_estimator(y)


def rolling_backtest(panel: ReturnsPanel, config: BacktestConfig) -> BacktestReport:
    """Evaluate every (window, estimator, target) combination on the panel.

    For each period t >= n the estimators see the n most recent rows and
    predict the equally-weighted portfolio return of period t; the loss is
    the average squared deviation from the realized value, times 1e4.  By
    default each window size starts as early as its own length allows
    (``align_start`` forces a common start at the largest window).  Target
    vectors are redrawn per window from a stream shared by all estimators;
    ``fixed_target`` draws them once per window size instead.  A period
    contributes only when every (estimator, target) pair succeeds, keeping
    the comparison paired; failures are counted per pair.
    """
    values = panel.values
    total = values.shape[0]
    if max(config.windows) >= total:
        raise ConfigError(
            f"largest window {max(config.windows)} must be < {total} periods"
        )
    common_start = max(config.windows)
    rows: list[BacktestRow] = []

    for n in config.windows:
        start = common_start if config.align_start else n
        combos = [(e, t) for e in config.estimators for t in config.targets]
        sq_sums = {key: 0.0 for key in combos}
        failures = {key: 0 for key in combos}
        evaluated = 0

        fixed_targets = None
        if config.fixed_target:
            rng = np.random.default_rng(
                np.random.SeedSequence((config.seed, n, 0))
            )
            fixed_targets = {
                t: target_vector(t, values[start - n : start], rng)
                for t in config.targets
            }

        for t_idx in range(start, total):
            window = values[t_idx - n : t_idx]
            y = window.T
            realized = float(values[t_idx].mean())
            if fixed_targets is not None:
                targets = fixed_targets
            else:
                rng = np.random.default_rng(
                    np.random.SeedSequence((config.seed, n, t_idx))
                )
                targets = {
                    t: target_vector(t, window, rng) for t in config.targets
                }

            preds = {}
            ok = True
            for est, tgt in combos:
                try:
                    mu_hat = _estimate(est, y, targets[tgt], config)
                    preds[(est, tgt)] = float(mu_hat.mean())
                except (ShrinkmeanError, np.linalg.LinAlgError):
                    failures[(est, tgt)] += 1
                    ok = False
            if not ok:
                continue
            evaluated += 1
            for key, pred in preds.items():
                sq_sums[key] += (pred - realized) ** 2

        for est, tgt in combos:
            loss = 1e4 * sq_sums[(est, tgt)] / evaluated if evaluated else float("nan")
            rows.append(
                BacktestRow(
                    window_n=n,
                    c_hat=panel.n_assets / n,
                    estimator=est,
                    target=tgt,
                    loss_x1e4=loss,
                    windows_evaluated=evaluated,
                    failures=failures[(est, tgt)],
                )
            )
    return BacktestReport(rows=rows)


def synthetic_panel(
    p: int,
    periods: int,
    seed: int = 0,
    mean_scale: float = 1.0,
    vol: float = 0.02,
) -> ReturnsPanel:
    """Small i.i.d. Gaussian demo panel with bounded per-asset means.

    Asset means are uniform on +-mean_scale/sqrt(p) (the bounded-norm
    regime) and returns share a mild one-factor correlation; suitable for
    smoke tests and the bundled demo, not a market model.
    """
    rng = np.random.default_rng(seed)
    means = rng.uniform(-mean_scale / np.sqrt(p), mean_scale / np.sqrt(p), size=p)
    loadings = rng.uniform(0.2, 0.8, size=p)
    factor = rng.standard_normal((periods, 1))
    noise = rng.standard_normal((periods, p))
    data = vol * (factor @ loadings[None, :] + noise) + means[None, :]
    labels = [f"asset_{k + 1}" for k in range(p)]
    return ReturnsPanel(values=data, asset_labels=labels)


def write_backtest_csv(report: BacktestReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            [
                "window_n",
                "c_hat",
                "estimator",
                "target",
                "loss_x1e4",
                "windows_evaluated",
                "failures",
            ]
        )
        for row in report.rows:
            writer.writerow(
                [
                    row.window_n,
                    format(row.c_hat, ".12g"),
                    row.estimator,
                    row.target,
                    format(row.loss_x1e4, ".12g"),
                    row.windows_evaluated,
                    row.failures,
                ]
            )
