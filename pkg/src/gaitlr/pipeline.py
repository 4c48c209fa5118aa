"""Fitted LR system bundle and end-to-end orchestration.

Ties the stages together: split composites, impute, recode, fit the PC
transform on the population, freeze the between-source KDE, resolve the
within-source variance (estimated from a repeated dataset, a named preset, or
an explicit vector), and evaluate comparison plans. The bundle serialises to
a single JSON artifact so single comparisons can run without refitting.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .data import (
    align_feature_sets,
    impute_missing,
    impute_replicates,
    split_composite_features,
)
from .errors import ConfigInvalid, ModelMismatch
from .lr import (
    BetweenModel,
    WithinModel,
    estimate_within_variance,
    fit_between,
    compute_lr,
)
from .pca import PcaModel, PolychoricPcaModel, ScoreMatrix, fit_pca, fit_polychoric_pca, project
from .recode import recode_ordinal_to_binary
from .schema import FeatureSchema
from .validate import LrCollection, enumerate_comparisons, evaluate_plan

VARIANTS = ("binary-pca", "polychoric-pca")


@dataclass(frozen=True)
class LrSystem:
    """Everything needed to score new profile pairs."""

    variant: str
    transform: PcaModel | PolychoricPcaModel
    between: BetweenModel
    within: WithinModel
    m_max: int
    truncate: bool
    schema: FeatureSchema          # split schema the transform expects

    def project_dataset(self, dataset, source: str = "") -> ScoreMatrix:
        """Split composites if needed and project into the fitted PC space."""
        ds, _ = split_composite_features(dataset)
        if ds.schema.names != self.schema.names:
            ds = ds.restrict_to_features(
                [n for n in self.schema.names if n in ds.schema.names]
            )
            if ds.schema.names != self.schema.names:
                raise ModelMismatch("dataset features do not match the fitted system")
        if self.variant == "binary-pca":
            return project(self.transform, recode_ordinal_to_binary(ds),
                           M=self.m_max, source=source)
        return self.transform.project(ds, M=self.m_max, source=source)

    def compare(self, query_dataset, reference_dataset, M: int | None = None):
        """LR for a single query/reference profile pair (one record each)."""
        qs = self.project_dataset(query_dataset, source="query")
        rs = self.project_dataset(reference_dataset, source="reference")
        if len(qs.row_keys) != 1 or len(rs.row_keys) != 1:
            raise ValueError("compare expects exactly one record on each side")
        return compute_lr(qs.scores[0], rs.scores[0], self.between, self.within,
                          M=M or self.m_max, truncate=self.truncate)

    def validate_against(self, repeated_dataset, M: int | None = None) -> LrCollection:
        """Exhaustive pairwise comparisons of a repeated dataset."""
        plan = enumerate_comparisons(repeated_dataset)
        scores = self.project_dataset(repeated_dataset, source="validation")
        return evaluate_plan(plan, scores, self.between, self.within,
                             M or self.m_max, self.truncate)

    # -- serialization ----------------------------------------------------

    def to_json_obj(self) -> dict:
        if self.variant == "binary-pca":
            transform = self.transform.to_json_obj()
        else:
            t = self.transform
            transform = {
                "feature_names": list(t.feature_names),
                "thresholds": [x.tolist() for x in t.thresholds],
                "conditional_means": [x.tolist() for x in t.conditional_means],
                "loadings": t.loadings.tolist(),
                "eigenvalues": t.eigenvalues.tolist(),
                "schema_digest": t.schema_digest,
            }
        return {
            "variant": self.variant,
            "m_max": self.m_max,
            "truncate": self.truncate,
            "schema": self.schema.to_json_obj(),
            "transform": transform,
            "between": {
                "support": self.between.support.tolist(),
                "bandwidths": self.between.bandwidths.tolist(),
                "model_digest": self.between.model_digest,
            },
            "within": {
                "variances": self.within.variances.tolist(),
                "provenance": self.within.provenance,
            },
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_obj(), fh)
            fh.write("\n")

    @classmethod
    def from_json_obj(cls, obj) -> "LrSystem":
        variant = obj["variant"]
        if variant not in VARIANTS:
            raise ConfigInvalid(f"unknown pipeline variant {variant!r}")
        if variant == "binary-pca":
            transform = PcaModel.from_json_obj(obj["transform"])
        else:
            t = obj["transform"]
            transform = PolychoricPcaModel(
                feature_names=tuple(t["feature_names"]),
                thresholds=tuple(np.asarray(x) for x in t["thresholds"]),
                conditional_means=tuple(np.asarray(x) for x in t["conditional_means"]),
                loadings=np.asarray(t["loadings"]),
                eigenvalues=np.asarray(t["eigenvalues"]),
                schema_digest=t.get("schema_digest", ""),
            )
        between = BetweenModel(
            np.asarray(obj["between"]["support"], dtype=float),
            np.asarray(obj["between"]["bandwidths"], dtype=float),
            model_digest=obj["between"]["model_digest"],
        )
        within = WithinModel(
            np.asarray(obj["within"]["variances"], dtype=float),
            provenance=obj["within"]["provenance"],
        )
        return cls(
            variant=variant,
            transform=transform,
            between=between,
            within=within,
            m_max=int(obj["m_max"]),
            truncate=bool(obj["truncate"]),
            schema=FeatureSchema.from_json_obj(obj["schema"]),
        )

    @classmethod
    def load(cls, path) -> "LrSystem":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))


def prepare_dataset(dataset, seed: int):
    """Split composite features and fill missing values (one completion)."""
    ds, _ = split_composite_features(dataset)
    return impute_missing(ds, seed)


def fit_system(
    population,
    repeated=None,
    *,
    within: WithinModel | str | None = "estimate",
    basis: str = "correlation",
    m: int = 4,
    variant: str = "binary-pca",
    truncate: bool = True,
    impute_seed: int = 0,
    impute_reps: int = 1,
) -> tuple[LrSystem, dict]:
    """Fit the full system from a population and (optionally) a repeated dataset.

    ``within`` is a WithinModel, a preset name, or "estimate" (requires
    ``repeated``; imputation replicates average the estimate and report its
    replicate spread). Returns the system plus a diagnostics dict.
    """
    if variant not in VARIANTS:
        raise ConfigInvalid(f"unknown pipeline variant {variant!r}")
    pop = prepare_dataset(population, impute_seed)
    rep = None
    if repeated is not None:
        rep, _ = split_composite_features(repeated)
        pop, rep = align_feature_sets(pop, rep)

    diagnostics: dict = {}
    if variant == "binary-pca":
        transform = fit_pca(recode_ordinal_to_binary(pop), basis=basis)
        if not 1 <= m <= transform.n_components:
            raise ConfigInvalid(f"m must lie in 1..{transform.n_components}")
        pop_scores = project(transform, recode_ordinal_to_binary(pop), M=m,
                             source="population")

        def score_fn(complete_repeated):
            return project(transform, recode_ordinal_to_binary(complete_repeated),
                           M=m, source="repeated")
    else:
        transform = fit_polychoric_pca(pop)
        if not 1 <= m <= transform.n_components:
            raise ConfigInvalid(f"m must lie in 1..{transform.n_components}")
        pop_scores = transform.project(pop, M=m, source="population")

        def score_fn(complete_repeated):
            return transform.project(complete_repeated, M=m, source="repeated")

    between = fit_between(pop_scores)

    if isinstance(within, WithinModel):
        within_model = WithinModel(within.variances[:m], provenance=within.provenance)
    elif within == "estimate":
        if rep is None:
            raise ConfigInvalid("within='estimate' requires a repeated dataset")

        def stat(completed):
            return estimate_within_variance(score_fn(completed)).variances

        mean, sd = impute_replicates(rep, impute_reps, impute_seed + 1, stat)
        within_model = WithinModel(
            mean, provenance=f"estimated(reps={impute_reps},seed={impute_seed + 1})"
        )
        diagnostics["within_replicate_sd"] = sd
    elif isinstance(within, str):
        preset = WithinModel.from_preset(within)
        within_model = WithinModel(preset.variances[:m], provenance=preset.provenance)
    else:
        raise ConfigInvalid("within must be a WithinModel, preset name, or 'estimate'")
    if within_model.n_components < m:
        raise ConfigInvalid(
            f"within-variance vector has {within_model.n_components} components, "
            f"but m={m}"
        )

    system = LrSystem(
        variant=variant,
        transform=transform,
        between=between,
        within=within_model,
        m_max=m,
        truncate=truncate,
        schema=pop.schema,
    )
    diagnostics["n_population"] = len(pop)
    return system, diagnostics


# -- artifact writers --------------------------------------------------------


def write_comparisons_csv(path, collection: LrCollection) -> None:
    """One row per comparison: ids, truth, cumulative log10 LR at each M, flag."""
    if collection.comparisons is None:
        raise ValueError("collection carries no comparison ids")
    m_max = collection.m_max
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["query_id", "query_occasion", "ref_id", "ref_occasion", "truth"]
            + [f"log10_lr_m{m}" for m in range(1, m_max + 1)]
            + ["truncated"]
        )
        for comp, res in zip(collection.comparisons, collection.results):
            cum = res.log10_cumulative
            _, truncated = res.reported_lr(m_max)
            writer.writerow([
                comp.query[0], comp.query[1], comp.reference[0], comp.reference[1],
                comp.truth,
                *[f"{cum[m - 1]:.10g}" for m in range(1, m_max + 1)],
                int(truncated),
            ])


def read_comparisons_csv(path) -> tuple[list[dict], int]:
    """Parse a comparisons CSV back into row dicts plus the stored m_max."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path}: no comparisons")
    m_max = sum(1 for k in rows[0] if k.startswith("log10_lr_m"))
    return rows, m_max


def collection_from_rows(rows, m: int, truncate: bool = True) -> LrCollection:
    """Rebuild an LrCollection (at a single M) from comparisons CSV rows."""
    from .lr import LrResult, TRUNCATION_FLOOR

    results = []
    truths = []
    for row in rows:
        log10_lr = float(row[f"log10_lr_m{m}"])
        results.append(LrResult(np.array([log10_lr * math.log(10.0)]),
                                TRUNCATION_FLOOR if truncate else None))
        truths.append(row["truth"])
    return LrCollection(tuple(results), tuple(truths))


def write_rates_csv(path, collection: LrCollection, m_values) -> None:
    from .validate import misleading_rates

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "rate_ds_misleading", "rate_ss_misleading",
                         "n_ss", "n_ds"])
        n_ss = int(collection.mask("SS").sum())
        n_ds = len(collection) - n_ss
        for m in m_values:
            ds, ss = misleading_rates(collection, m)
            writer.writerow([m, f"{ds:.6f}", f"{ss:.6f}", n_ss, n_ds])
