"""Demographic association models for features of gait.

Binary logistic regression and the proportional-odds (exceedance form)
ordinal model share one Newton engine: the log odds of exceeding threshold l
is alpha_l + beta.x with a single slope vector across thresholds, so the
binary model is the L = 2 special case. Covariate selection fits the
biological variables plus candidate ethnicity/location indicator blocks and
keeps a block when any of its coefficients is significant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, ndtr

from .errors import (
    LevelAbsent,
    OneClassOnly,
    RankDeficient,
    SeparationDetected,
)

BIO_FIELDS = ("sex", "height", "weight", "age_group")
ORDINAL_DEMOGRAPHICS = ("height", "weight", "age_group")
_COEF_GUARD = 1e2
_MAX_ITER = 200


@dataclass(frozen=True)
class DesignMatrix:
    """Covariate matrix with an explicit leading intercept column."""

    X: np.ndarray
    names: tuple[str, ...]
    rows: tuple[str, ...]

    def __post_init__(self):
        if self.X.shape != (len(self.rows), len(self.names)):
            raise ValueError("design shape does not match names/rows")
        if self.names[0] != "intercept" or not np.all(self.X[:, 0] == 1.0):
            raise ValueError("first column must be the intercept")

    @property
    def covariates(self) -> np.ndarray:
        return self.X[:, 1:]

    @property
    def covariate_names(self) -> tuple[str, ...]:
        return self.names[1:]


@dataclass(frozen=True)
class LogisticFit:
    """Maximum-likelihood fit of the exceedance-form logistic model.

    ``alpha`` holds the L-1 exceedance intercepts (a single value for a
    binary response); ``beta`` the shared covariate coefficients. Standard
    errors come from the inverse observed information, p-values from the
    Wald z statistics.
    """

    alpha: np.ndarray
    beta: np.ndarray
    se: np.ndarray
    z_values: np.ndarray
    p_values: np.ndarray
    log_likelihood: float
    converged: bool
    terms: tuple[str, ...]
    n_obs: int

    @property
    def estimates(self) -> np.ndarray:
        return np.concatenate([self.alpha, self.beta])

    def term_p_value(self, term: str) -> float:
        return float(self.p_values[self.terms.index(term)])


def _exceedance_ll_parts(theta, Xcov, y, L):
    """Per-observation cell probabilities P(Y=y_i) and their sigmoid bounds."""
    alpha = theta[: L - 1]
    beta = theta[L - 1:]
    eta = Xcov @ beta
    sig = expit(alpha[None, :] + eta[:, None])  # sig[:, l] = Pr(Y > l)
    idx = np.arange(len(y))
    upper = np.where(y == 0, 1.0, sig[idx, np.maximum(y - 1, 0)])
    lower = np.where(y == L - 1, 0.0, sig[idx, np.minimum(y, L - 2)])
    return upper - lower, upper, lower


def _exceedance_grad_hess(theta, Xcov, y, L):
    p_cell, A, B = _exceedance_ll_parts(theta, Xcov, y, L)
    n, p = Xcov.shape
    k = L - 1 + p
    a1 = np.where(y == 0, 0.0, A * (1.0 - A))       # dP/d(alpha_{y-1})
    b1 = np.where(y == L - 1, 0.0, B * (1.0 - B))   # -dP/d(alpha_y)
    a2 = a1 * (1.0 - 2.0 * A)
    b2 = b1 * (1.0 - 2.0 * B)
    inv = 1.0 / p_cell
    grad = np.zeros(k)
    hess = np.zeros((k, k))

    ga, gb = a1 * inv, b1 * inv
    for l in range(L - 1):
        grad[l] = ga[y == l + 1].sum() - gb[y == l].sum()
    grad[L - 1:] = Xcov.T @ (ga - gb)

    for l in range(L - 1):
        up = y == l + 1   # alpha_l is the upper bound A for these rows
        lo = y == l       # alpha_l is the lower bound B for these rows
        hess[l, l] += (a2[up] * inv[up] - (a1[up] * inv[up]) ** 2).sum()
        hess[l, l] += (-b2[lo] * inv[lo] - (b1[lo] * inv[lo]) ** 2).sum()
        if l + 1 < L - 1:
            both = y == l + 1  # alpha_l upper and alpha_{l+1} lower together
            val = (a1[both] * b1[both] * inv[both] ** 2).sum()
            hess[l, l + 1] += val
            hess[l + 1, l] += val
    for l in range(L - 1):
        up = y == l + 1
        lo = y == l
        row = np.zeros(p)
        if up.any():
            w = a2[up] * inv[up] - a1[up] * inv[up] ** 2 * (a1[up] - b1[up])
            row += Xcov[up].T @ w
        if lo.any():
            w = -b2[lo] * inv[lo] + b1[lo] * inv[lo] ** 2 * (a1[lo] - b1[lo])
            row += Xcov[lo].T @ w
        hess[l, L - 1:] += row
        hess[L - 1:, l] += row
    w = (a2 - b2) * inv - ((a1 - b1) * inv) ** 2
    hess[L - 1:, L - 1:] += (Xcov * w[:, None]).T @ Xcov
    return grad, hess


def _fit_exceedance(Xcov, y, L, terms) -> LogisticFit:
    n = len(y)
    counts = np.bincount(y, minlength=L)
    exceed = 1.0 - np.cumsum(counts)[: L - 1] / n
    alpha0 = np.log(exceed / (1.0 - exceed))
    theta = np.concatenate([alpha0, np.zeros(Xcov.shape[1])])

    def loglik(t):
        cell, _, _ = _exceedance_ll_parts(t, Xcov, y, L)
        if np.any(cell <= 0):
            return -np.inf
        return float(np.log(cell).sum())

    ll = loglik(theta)
    converged = False
    for _ in range(_MAX_ITER):
        grad, hess = _exceedance_grad_hess(theta, Xcov, y, L)
        if np.max(np.abs(grad)) < 1e-8:
            converged = True
            break
        try:
            step = np.linalg.solve(-hess, grad)
        except np.linalg.LinAlgError:
            raise SeparationDetected(
                "information matrix is singular; classes appear separable"
            ) from None
        scale = 1.0
        for _ in range(40):
            if loglik(theta + scale * step) >= ll - 1e-12:
                break
            scale /= 2.0
        theta = theta + scale * step
        ll = loglik(theta)
        if np.max(np.abs(theta)) > _COEF_GUARD:
            raise SeparationDetected("coefficients diverging; classes appear separable")
        if np.max(np.abs(scale * step)) < 1e-10:
            converged = True
            break

    grad, hess = _exceedance_grad_hess(theta, Xcov, y, L)
    if np.max(np.abs(grad)) < 1e-8:
        converged = True
    cell, _, _ = _exceedance_ll_parts(theta, Xcov, y, L)
    if np.all(cell > 1.0 - 1e-6):
        # likelihood supremum (perfect prediction) approached: no finite MLE
        raise SeparationDetected(
            "fitted probabilities saturated at 1; classes appear separable"
        )
    try:
        cov = np.linalg.inv(-hess)
    except np.linalg.LinAlgError:
        raise SeparationDetected("observed information is singular") from None
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, theta / se, np.inf * np.sign(theta))
    p_values = 2.0 * (1.0 - ndtr(np.abs(z)))
    return LogisticFit(
        alpha=theta[: L - 1],
        beta=theta[L - 1:],
        se=se,
        z_values=z,
        p_values=p_values,
        log_likelihood=ll,
        converged=converged,
        terms=tuple(terms),
        n_obs=n,
    )


def _check_design(design: DesignMatrix):
    if np.linalg.matrix_rank(design.X) < design.X.shape[1]:
        raise RankDeficient("design matrix is rank deficient")


def fit_binary_logistic(design: DesignMatrix, y) -> LogisticFit:
    """ML fit of logit Pr(Y=1) = alpha + beta.x by Newton iteration."""
    y = np.asarray(y, dtype=int)
    if set(np.unique(y)) - {0, 1}:
        raise ValueError("binary response must be coded 0/1")
    if len(np.unique(y)) < 2:
        raise OneClassOnly("response takes a single value")
    _check_design(design)
    return _fit_exceedance(design.covariates, y, 2, ("alpha", *design.covariate_names))


def fit_ordinal_logistic(design: DesignMatrix, y) -> LogisticFit:
    """Proportional-odds fit: logit Pr(Y > l) = alpha_l + beta.x, shared beta."""
    y = np.asarray(y, dtype=int)
    levels = np.unique(y)
    if levels.size < 2:
        raise OneClassOnly("response takes a single value")
    L = int(levels.max()) + 1
    if not np.array_equal(levels, np.arange(L)):
        raise LevelAbsent(
            f"levels {sorted(set(range(L)) - set(levels.tolist()))} unobserved"
        )
    _check_design(design)
    if L == 2:
        terms = ("alpha", *design.covariate_names)
    else:
        terms = tuple(f"alpha:>{l}" for l in range(L - 1)) + design.covariate_names
    return _fit_exceedance(design.covariates, y, L, terms)


# -- design construction ---------------------------------------------------


def _vocab(dataset, field: str) -> tuple[str, ...]:
    declared = (dataset.schema.demographics or {}).get(field)
    if declared:
        return tuple(declared)
    seen: dict[str, None] = {}
    for rec in dataset.records:
        v = rec.demographics.get(field) if rec.demographics else None
        if v is not None:
            seen.setdefault(v, None)
    return tuple(sorted(seen))


def build_design(dataset, blocks=("bio",), candidates=None):
    """Encode demographics into a design matrix over complete rows.

    Biological variables: sex as indicators (reference level dropped),
    height/weight/age_group as ordinal band indices. ``ethnicity`` and
    ``location`` blocks add indicator columns with the first vocabulary
    category as reference. Returns ``(design, kept_row_indices)`` where rows
    lacking any required field are dropped.
    """
    fields: list[str] = []
    if "bio" in blocks:
        fields.extend(BIO_FIELDS)
    for extra in ("ethnicity", "location"):
        if extra in blocks:
            fields.append(extra)

    pool = range(len(dataset.records)) if candidates is None else candidates
    keep = []
    for i in pool:
        demo = dataset.records[i].demographics
        if demo is not None and all(demo.get(f) is not None for f in fields):
            keep.append(i)
    if not keep:
        raise ValueError("no record has complete demographics for the requested blocks")

    cols: list[np.ndarray] = [np.ones(len(keep))]
    names: list[str] = ["intercept"]
    for field in fields:
        vocab = _vocab(dataset, field)
        raw = [dataset.records[i].demographics.get(field) for i in keep]
        if field in ORDINAL_DEMOGRAPHICS:
            cols.append(np.array([vocab.index(v) for v in raw], dtype=float))
            names.append(field)
        else:
            for cat in vocab[1:]:
                cols.append(np.array([1.0 if v == cat else 0.0 for v in raw]))
                names.append(f"{field}={cat}")
    rows = tuple(dataset.records[i].individual_id for i in keep)
    return DesignMatrix(np.column_stack(cols), tuple(names), rows), keep


# -- covariate selection ----------------------------------------------------


@dataclass(frozen=True)
class SelectionReport:
    """Outcome of the block-inclusion procedure for one feature."""

    feature: str
    final: LogisticFit | None
    included_blocks: tuple[str, ...]
    candidate_fits: dict[str, LogisticFit]
    note: str = ""


def _fit_for_levels(design: DesignMatrix, y) -> LogisticFit:
    if y.max() == 1:
        return fit_binary_logistic(design, y)
    return fit_ordinal_logistic(design, y)


def covariate_selection(dataset, feature: str, alpha: float = 0.05) -> SelectionReport:
    """Fit the demographic model for one feature with block selection.

    Biological variables are always included. Ethnicity and location indicator
    blocks are screened one at a time (on top of the biological variables) and
    enter the final model when any of their coefficients has p < ``alpha``.
    Rows with a missing response are dropped.
    """
    feat = dataset.schema.feature(feature)
    col = dataset.schema.names.index(feature)
    yvals = dataset.value_matrix()[:, col]
    observed = np.flatnonzero(yvals >= 0).tolist()

    candidate_fits: dict[str, LogisticFit] = {}
    included: list[str] = []
    for block in ("ethnicity", "location"):
        if len(_vocab(dataset, block)) < 2:
            continue
        design, keep = build_design(dataset, blocks=("bio", block), candidates=observed)
        y = yvals[keep]
        if len(np.unique(y)) < 2:
            return SelectionReport(feature, None, (), {}, note="OneClassOnly")
        fit = _fit_for_levels(design, y)
        candidate_fits[f"bio+{block}"] = fit
        block_p = [
            fit.p_values[i]
            for i, t in enumerate(fit.terms)
            if t.startswith(f"{block}=")
        ]
        if block_p and min(block_p) < alpha:
            included.append(block)

    design, keep = build_design(dataset, blocks=("bio", *included), candidates=observed)
    y = yvals[keep]
    if len(np.unique(y)) < 2:
        return SelectionReport(feature, None, (), candidate_fits, note="OneClassOnly")
    final = _fit_for_levels(design, y)
    return SelectionReport(feature, final, tuple(included), candidate_fits)


def write_coefficient_table(path, reports) -> None:
    """Coefficient table CSV: one row per (feature, term)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "term", "estimate", "se", "p_value"])
        for report in reports:
            if report.final is None:
                writer.writerow([report.feature, report.note, "", "", ""])
                continue
            fit = report.final
            for term, est, se, p in zip(fit.terms, fit.estimates, fit.se, fit.p_values):
                writer.writerow([
                    report.feature, term, f"{est:.6g}", f"{se:.6g}", f"{p:.6g}",
                ])
