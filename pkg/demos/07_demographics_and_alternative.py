"""Demographic association models, and the polychoric-PCA alternative pipeline.

Part 1 fits binary/proportional-odds logistic models per feature with the
block-screening rule: biological variables always enter; ethnicity or
location indicator blocks enter only when one of their coefficients is
significant at 0.05.

Part 2 runs the alternative scoring (PCA of the polychoric matrix with
conditional latent means) next to the primary binary-PCA pipeline on the
same data and reports both misleading-evidence rates side by side.
"""

from pathlib import Path

import numpy as np

from gaitlr import (
    covariate_selection,
    default_scenario,
    fit_system,
    generate_population,
    generate_repeated,
    misleading_rates,
)
from gaitlr.assoc import write_coefficient_table
from gaitlr.synth import DemographicsConfig, GeneratorConfig, _default_loadings, \
    _default_thresholds, default_gait_schema

out = Path(__file__).parent / "output" / "07_assoc"
out.mkdir(parents=True, exist_ok=True)

# -- association with an injected location effect ---------------------------------
schema = default_gait_schema()
demo = DemographicsConfig(
    vocabularies=dict(schema.demographics),
    probabilities={
        "sex": (0.5, 0.5),
        "height": (0.05, 0.25, 0.4, 0.25, 0.05),
        "weight": (0.3, 0.5, 0.2),
        "age_group": (0.25, 0.35, 0.25, 0.15),
        "ethnicity": (0.4, 0.25, 0.15, 0.12, 0.08),
        "location": (0.2, 0.15, 0.15, 0.12, 0.12, 0.1, 0.08, 0.08),
    },
    effects={
        "base of gait": {"sex": {"male": 0.35}},
        "trunk flexion": {"location": {"site 3": 1.5, "site 4": -1.0}},
    },
)
config = GeneratorConfig(
    schema=schema, n_individuals=600, n_occasions=1,
    loadings=_default_loadings(), thresholds=_default_thresholds(),
    within_sd=0.0, seed=2024, demographics=demo,
)
population = generate_population(config)

reports = []
for feature in ("base of gait", "trunk flexion", "gait symmetry"):
    report = covariate_selection(population, feature)
    reports.append(report)
    blocks = ", ".join(report.included_blocks) or "none"
    sex_p = (report.final.term_p_value("sex=male")
             if report.final and "sex=male" in report.final.terms else float("nan"))
    print(f"{feature:<16s} extra blocks: {blocks:<20s} p(sex=male) = {sex_p:.3g}")
write_coefficient_table(out / "coefficients.csv", reports)
print("the injected site effect pulls the location block into the trunk "
      "flexion model;\nthe sex shift on base of gait shows up through the "
      "always-included biological variables")

# -- A/B: binary-PCA vs polychoric-PCA scoring --------------------------------------
configs = default_scenario(seed=1234)
pop = generate_population(configs["population"])
high = generate_repeated(configs["repeated_high"])

print("\nmisleading rates on the high-variability set (matched variance, M=2):")
for variant in ("binary-pca", "polychoric-pca"):
    system, _ = fit_system(pop, high, within="estimate", m=2, variant=variant)
    coll = system.validate_against(high)
    ds, ss = misleading_rates(coll, 2)
    print(f"  {variant:<16s} DS {ds:.3f}   SS {ss:.3f}")
print(f"artifacts in {out}")
