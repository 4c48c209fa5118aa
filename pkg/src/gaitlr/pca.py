"""PCA on the binarized population matrix, plus the polychoric alternative.

The fitted model freezes the population column statistics so that reference
and questioned profiles are projected into the same space as the population.
Loadings follow a deterministic sign convention (largest-magnitude entry of
each component positive) so refits on equal input are bit-identical.
"""

from __future__ import annotations

import csv
import hashlib
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .errors import ConstantColumn, RankWarning, ShapeMismatch
from .polychoric import estimate_thresholds, polychoric_matrix
from .recode import BinaryMatrix

EIG_TOL = 1e-12


def _as_array(X):
    if isinstance(X, BinaryMatrix):
        return np.asarray(X.data, dtype=float), X.row_keys
    X = np.asarray(X, dtype=float)
    return X, tuple(("", str(i)) for i in range(X.shape[0]))


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    out = vectors.copy()
    for j in range(out.shape[1]):
        lead = np.argmax(np.abs(out[:, j]))
        if out[lead, j] < 0:
            out[:, j] = -out[:, j]
    return out


@dataclass(frozen=True)
class PcaModel:
    """Frozen column statistics and eigendecomposition of the population."""

    column_centers: np.ndarray
    column_scales: np.ndarray
    loadings: np.ndarray
    eigenvalues: np.ndarray
    basis: str
    column_names: tuple[str, ...]
    schema_digest: str = ""
    sign_convention: str = "max-abs-positive"

    @property
    def n_components(self) -> int:
        return self.loadings.shape[1]

    def digest(self) -> str:
        """Content hash used to check score/model provenance."""
        h = hashlib.sha256()
        for arr in (self.column_centers, self.column_scales,
                    self.loadings, self.eigenvalues):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(self.basis.encode())
        h.update("|".join(self.column_names).encode())
        return h.hexdigest()[:16]

    # -- serialization ---------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "basis": self.basis,
            "sign_convention": self.sign_convention,
            "schema_digest": self.schema_digest,
            "column_names": list(self.column_names),
            "column_centers": self.column_centers.tolist(),
            "column_scales": self.column_scales.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "loadings": self.loadings.tolist(),
        }

    @classmethod
    def from_json_obj(cls, obj) -> "PcaModel":
        return cls(
            column_centers=np.asarray(obj["column_centers"], dtype=float),
            column_scales=np.asarray(obj["column_scales"], dtype=float),
            loadings=np.asarray(obj["loadings"], dtype=float),
            eigenvalues=np.asarray(obj["eigenvalues"], dtype=float),
            basis=obj["basis"],
            column_names=tuple(obj["column_names"]),
            schema_digest=obj.get("schema_digest", ""),
            sign_convention=obj.get("sign_convention", "max-abs-positive"),
        )


@dataclass(frozen=True)
class ScoreMatrix:
    """PC scores for a set of observations, tagged with their provenance."""

    scores: np.ndarray
    row_keys: tuple[tuple[str, str], ...]
    model_digest: str
    source: str = ""

    @property
    def n_components(self) -> int:
        return self.scores.shape[1]

    def row(self, individual_id: str, occasion_id: str) -> np.ndarray:
        for i, key in enumerate(self.row_keys):
            if key == (individual_id, occasion_id):
                return self.scores[i]
        raise KeyError((individual_id, occasion_id))


def fit_pca(Zb, basis: str = "correlation") -> PcaModel:
    """Eigendecomposition of the dispersion matrix of a binary matrix.

    ``basis`` selects the covariance or the correlation matrix of the centered
    columns; all components are retained. Correlation basis rejects constant
    columns; near-zero eigenvalues raise a non-fatal :class:`RankWarning`.
    """
    if basis not in ("covariance", "correlation"):
        raise ValueError(f"basis must be covariance or correlation, got {basis!r}")
    X, _ = _as_array(Zb)
    n, r = X.shape
    if n < 2:
        raise ValueError("need at least two rows to fit a PCA")
    centers = X.mean(axis=0)
    Xc = X - centers
    S = Xc.T @ Xc / (n - 1)
    if basis == "correlation":
        sd = np.sqrt(np.diag(S))
        if np.any(sd == 0):
            bad = np.flatnonzero(sd == 0)
            names = Zb.column_names if isinstance(Zb, BinaryMatrix) else bad
            raise ConstantColumn(
                f"zero-variance columns under correlation basis: "
                f"{[names[i] for i in bad][:5]}"
            )
        disp = S / np.outer(sd, sd)
        np.fill_diagonal(disp, 1.0)
        scales = sd
    else:
        disp = S
        scales = np.ones(r)

    vals, vecs = np.linalg.eigh(disp)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    if np.any(vals < EIG_TOL):
        warnings.warn(
            f"{int((vals < EIG_TOL).sum())} eigenvalue(s) below {EIG_TOL}; "
            "the binary matrix is rank deficient",
            RankWarning,
            stacklevel=2,
        )
    vals = np.where(vals < 0, 0.0, vals)
    vecs = _fix_signs(vecs)

    if isinstance(Zb, BinaryMatrix):
        names = Zb.column_names
        digest = Zb.schema.digest()
    else:
        names = tuple(f"col{i}" for i in range(r))
        digest = ""
    return PcaModel(centers, scales, vecs, vals, basis, names, digest)


def project(model: PcaModel, X, M: int | None = None, source: str = "") -> ScoreMatrix:
    """Project rows into the model's PC space using the frozen statistics.

    Scores are ``((X - centers) / scales) @ T[:, :M]``; the centering and
    scaling always come from the fitted population, never from ``X`` itself.
    """
    data, row_keys = _as_array(X)
    r = model.loadings.shape[0]
    if data.shape[1] != r:
        raise ShapeMismatch(f"expected {r} columns, got {data.shape[1]}")
    if isinstance(X, BinaryMatrix) and X.column_names != model.column_names:
        raise ShapeMismatch("binary matrix columns do not match the fitted model")
    M = model.n_components if M is None else int(M)
    if not 1 <= M <= model.n_components:
        raise ValueError(f"M must lie in 1..{model.n_components}, got {M}")
    scores = ((data - model.column_centers) / model.column_scales) @ model.loadings[:, :M]
    return ScoreMatrix(scores, row_keys, model.digest(), source=source)


def explained_variance(model: PcaModel) -> np.ndarray:
    """Proportion of total dispersion carried by each component."""
    total = model.eigenvalues.sum()
    if total == 0:
        raise ValueError("model has no variance to explain")
    return model.eigenvalues / total


def write_scree_csv(model: PcaModel, path) -> None:
    props = explained_variance(model)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["component", "eigenvalue", "proportion", "cumulative"])
        cum = 0.0
        for i, (ev, p) in enumerate(zip(model.eigenvalues, props), start=1):
            cum += p
            writer.writerow([i, f"{ev:.10g}", f"{p:.10g}", f"{cum:.10g}"])


# -- polychoric-PCA alternative -------------------------------------------


@dataclass(frozen=True)
class PolychoricPcaModel:
    """PCA of the polychoric correlation matrix with latent-mean scoring.

    Each ordinal level is replaced by the expected value of the underlying
    normal variable conditional on falling between that level's thresholds;
    the conditional means are then rotated by the eigenvectors.
    """

    feature_names: tuple[str, ...]
    thresholds: tuple[np.ndarray, ...]
    conditional_means: tuple[np.ndarray, ...]
    loadings: np.ndarray
    eigenvalues: np.ndarray
    schema_digest: str = ""

    @property
    def n_components(self) -> int:
        return self.loadings.shape[1]

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.loadings.tobytes())
        h.update(self.eigenvalues.tobytes())
        h.update("|".join(self.feature_names).encode())
        return "poly-" + h.hexdigest()[:16]

    def project(self, dataset, M: int | None = None, source: str = "") -> ScoreMatrix:
        values = dataset.value_matrix()
        if values.shape[1] != len(self.feature_names):
            raise ShapeMismatch("dataset features do not match the fitted model")
        if (values < 0).any():
            from .errors import MissingValue

            raise MissingValue("impute before projecting")
        M = self.n_components if M is None else int(M)
        if not 1 <= M <= self.n_components:
            raise ValueError(f"M must lie in 1..{self.n_components}, got {M}")
        latent = np.empty(values.shape, dtype=float)
        for j, means in enumerate(self.conditional_means):
            latent[:, j] = means[values[:, j]]
        scores = latent @ self.loadings[:, :M]
        return ScoreMatrix(scores, tuple(dataset.row_keys()), self.digest(), source)


def conditional_level_means(thresholds: np.ndarray) -> np.ndarray:
    """E[Z | level] for a standard normal sliced at the given thresholds."""
    cuts = np.concatenate(([-np.inf], thresholds, [np.inf]))
    lo, hi = cuts[:-1], cuts[1:]
    prob = norm.cdf(hi) - norm.cdf(lo)
    dens = norm.pdf(lo) - norm.pdf(hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        means = np.where(prob > 0, dens / np.maximum(prob, 1e-300), 0.0)
    return means


def fit_polychoric_pca(dataset) -> PolychoricPcaModel:
    """Fit the alternative pipeline: polychoric matrix PCA + latent scoring."""
    pm = polychoric_matrix(dataset)
    vals, vecs = np.linalg.eigh(pm.values)
    order = np.argsort(-vals, kind="stable")
    vals = np.where(vals[order] < 0, 0.0, vals[order])
    vecs = _fix_signs(vecs[:, order])

    values = dataset.value_matrix()
    thresholds = []
    means = []
    for j, feat in enumerate(dataset.schema.features):
        col = values[:, j]
        counts = np.bincount(col[col >= 0], minlength=feat.n_levels)
        thr = estimate_thresholds(counts)
        thresholds.append(thr)
        means.append(conditional_level_means(thr))
    return PolychoricPcaModel(
        feature_names=dataset.schema.names,
        thresholds=tuple(thresholds),
        conditional_means=tuple(means),
        loadings=vecs,
        eigenvalues=vals,
        schema_digest=dataset.schema.digest(),
    )
