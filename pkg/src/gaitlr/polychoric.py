"""Polychoric correlation between ordinal feature pairs.

Two-step estimator: thresholds come from the marginal cumulative proportions
of each variable via the normal quantile function, then the correlation of the
assumed underlying bivariate normal is chosen to maximise the multinomial
likelihood of the observed contingency table. Tables whose mass sits on a
monotone diagonal (perfect agreement) admit no interior optimum; following
standard practice those pairs are clamped to +-0.9999.
"""

from __future__ import annotations

import csv
import itertools
import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import ndtr, ndtri

from .bvn import bvn_cdf
from .errors import DegenerateMargins, SchemaViolation

logger = logging.getLogger(__name__)

RHO_CLAMP = 0.9999
RHO_SEARCH = 0.999
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class ContingencyTable:
    """Cross-tabulated counts for an ordinal feature pair."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 2:
            raise ValueError("contingency table must be two-dimensional")
        if (counts < 0).any():
            raise ValueError("contingency table counts must be non-negative")
        if counts.sum() < 2:
            raise ValueError("contingency table needs a total count of at least 2")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_codes(cls, a, b, n_levels_a: int, n_levels_b: int) -> "ContingencyTable":
        """Tabulate paired level codes, skipping pairs with a missing side."""
        a = np.asarray(a)
        b = np.asarray(b)
        ok = (a >= 0) & (b >= 0)
        counts = np.zeros((n_levels_a, n_levels_b), dtype=np.int64)
        np.add.at(counts, (a[ok], b[ok]), 1)
        return cls(counts)


@dataclass(frozen=True)
class PolychoricResult:
    rho: float
    thresholds_a: np.ndarray
    thresholds_b: np.ndarray
    clamped: bool
    log_likelihood: float
    estimator: str = "two-step"


def estimate_thresholds(marginal_counts) -> np.ndarray:
    """Normal quantiles of the cumulative marginal proportions.

    For L categories returns the L-1 cut points t_l = ndtri(F_l). Requires at
    least two non-empty categories.
    """
    counts = np.asarray(marginal_counts, dtype=float)
    if counts.ndim != 1:
        raise ValueError("marginal counts must be a vector")
    if (counts > 0).sum() < 2:
        raise DegenerateMargins("need at least two non-empty categories")
    cum = np.cumsum(counts) / counts.sum()
    return ndtri(cum[:-1])


def _cell_log_probs(thr_a, thr_b, rho):
    """Log cell probabilities of the bivariate normal rectangle partition."""
    la, lb = len(thr_a) + 1, len(thr_b) + 1
    grid = np.zeros((la + 1, lb + 1))
    grid[-1, 1:-1] = ndtr(thr_b)
    grid[1:-1, -1] = ndtr(thr_a)
    grid[-1, -1] = 1.0
    for i, j in itertools.product(range(1, la), range(1, lb)):
        grid[i, j] = bvn_cdf(thr_a[i - 1], thr_b[j - 1], rho)
    cells = grid[1:, 1:] - grid[:-1, 1:] - grid[1:, :-1] + grid[:-1, :-1]
    return np.log(np.maximum(cells, _LOG_FLOOR))


def table_log_likelihood(table: ContingencyTable, rho: float,
                         thr_a=None, thr_b=None) -> float:
    """Multinomial log-likelihood of the table at the given correlation.

    Cells with zero counts contribute nothing (0 * log p = 0 convention).
    """
    counts = table.counts
    if thr_a is None:
        thr_a = estimate_thresholds(counts.sum(axis=1))
    if thr_b is None:
        thr_b = estimate_thresholds(counts.sum(axis=0))
    logp = _cell_log_probs(thr_a, thr_b, rho)
    mask = counts > 0
    return float((counts[mask] * logp[mask]).sum())


def _collapse_empty(counts: np.ndarray) -> np.ndarray:
    keep_rows = counts.sum(axis=1) > 0
    keep_cols = counts.sum(axis=0) > 0
    return counts[keep_rows][:, keep_cols]


def _monotone_direction(counts: np.ndarray) -> int:
    """+1/-1 when all mass lies on a monotone diagonal, else 0.

    Perfect positive (negative) latent dependence permits no strictly
    discordant (concordant) pair of occupied cells.
    """
    cells = np.argwhere(counts > 0)
    concordant = discordant = False
    for (i1, j1), (i2, j2) in itertools.combinations(cells, 2):
        prod = (i1 - i2) * (j1 - j2)
        if prod > 0:
            concordant = True
        elif prod < 0:
            discordant = True
        if concordant and discordant:
            return 0
    if not discordant:
        return 1
    if not concordant:
        return -1
    return 0


def polychoric_rho(table: ContingencyTable) -> PolychoricResult:
    """Two-step polychoric correlation for one contingency table.

    Empty rows/columns are removed before estimation. Degenerate monotone
    tables and optima pinned to the search boundary are reported as
    rho = +-0.9999 with ``clamped=True``.
    """
    counts = _collapse_empty(table.counts)
    if counts.shape[0] < 2 or counts.shape[1] < 2:
        raise DegenerateMargins(
            "contingency table needs two non-empty categories on each margin"
        )
    thr_a = estimate_thresholds(counts.sum(axis=1))
    thr_b = estimate_thresholds(counts.sum(axis=0))
    collapsed = ContingencyTable(counts)

    direction = _monotone_direction(counts)
    if direction != 0:
        rho = direction * RHO_CLAMP
        ll = table_log_likelihood(collapsed, rho, thr_a, thr_b)
        return PolychoricResult(rho, thr_a, thr_b, True, ll)

    res = minimize_scalar(
        lambda r: -table_log_likelihood(collapsed, r, thr_a, thr_b),
        bounds=(-RHO_SEARCH, RHO_SEARCH),
        method="bounded",
        options={"xatol": 1e-6},
    )
    rho = float(res.x)
    if abs(rho) >= RHO_SEARCH - 1e-4:
        rho = float(np.sign(rho)) * RHO_CLAMP
        ll = table_log_likelihood(collapsed, rho, thr_a, thr_b)
        return PolychoricResult(rho, thr_a, thr_b, True, ll)
    return PolychoricResult(rho, thr_a, thr_b, False, float(-res.fun))


@dataclass(frozen=True)
class PolychoricMatrix:
    """Symmetric polychoric correlation matrix with per-pair clamp flags."""

    names: tuple[str, ...]
    values: np.ndarray
    clamped: np.ndarray
    failed: np.ndarray

    def absolute(self) -> np.ndarray:
        """Absolute values, the display convention for arbitrary orderings."""
        return np.abs(self.values)

    def to_csv(self, path, flags_path=None) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["feature", *self.names])
            for name, row in zip(self.names, self.values):
                writer.writerow([name, *[f"{v:.6f}" for v in row]])
        if flags_path is not None:
            with open(flags_path, "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["feature_a", "feature_b", "clamped", "failed"])
                for i, j in itertools.combinations(range(len(self.names)), 2):
                    if self.clamped[i, j] or self.failed[i, j]:
                        writer.writerow([
                            self.names[i], self.names[j],
                            int(self.clamped[i, j]), int(self.failed[i, j]),
                        ])


def polychoric_matrix(dataset) -> PolychoricMatrix:
    """Polychoric correlations between all feature pairs of a dataset.

    Requires composite features to be split first. Pairs whose table is
    degenerate are flagged, set to zero, and logged.
    """
    schema = dataset.schema
    if not schema.is_split:
        raise SchemaViolation("split composite features before correlation analysis")
    names = schema.names
    values = dataset.value_matrix()
    p = len(names)
    out = np.eye(p)
    clamped = np.zeros((p, p), dtype=bool)
    failed = np.zeros((p, p), dtype=bool)
    for i, j in itertools.combinations(range(p), 2):
        la = schema.features[i].n_levels
        lb = schema.features[j].n_levels
        try:
            table = ContingencyTable.from_codes(values[:, i], values[:, j], la, lb)
            res = polychoric_rho(table)
            out[i, j] = out[j, i] = res.rho
            clamped[i, j] = clamped[j, i] = res.clamped
        except (DegenerateMargins, ValueError) as exc:
            logger.warning("polychoric pair (%s, %s) degenerate: %s",
                           names[i], names[j], exc)
            out[i, j] = out[j, i] = 0.0
            failed[i, j] = failed[j, i] = True
    return PolychoricMatrix(names, out, clamped, failed)
