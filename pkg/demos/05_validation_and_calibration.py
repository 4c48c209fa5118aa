"""Validation: misleading-evidence rates, Tippett curves, and ECE calibration.

Every occasion pair of the repeated dataset is compared; rates of LR > 1
among different-source pairs (and LR < 1 among same-source pairs) summarize
discrimination, Tippett curves show the full LR distributions, and the ECE
curve compares the information loss of the reported LRs against the system
that always answers LR = 1. A single overconfident same-source LR is enough
to push the observed curve above that reference at prosecutor-friendly prior
odds; removing the outlier or doubling the assumed within-variance repairs it.
"""

from pathlib import Path

import numpy as np

from gaitlr import (
    WithinModel,
    default_scenario,
    ece_curve,
    enumerate_comparisons,
    evaluate_plan,
    fit_system,
    generate_population,
    generate_repeated,
    misleading_rates,
    tippett,
)
from gaitlr.svgplot import polyline_plot

out = Path(__file__).parent / "output" / "05_validation"
out.mkdir(parents=True, exist_ok=True)

configs = default_scenario(seed=1234)
population = generate_population(configs["population"])
repeated = generate_repeated(configs["repeated_low"])
system, _ = fit_system(population, repeated, within="estimate", m=4)
collection = system.validate_against(repeated)

print(f"{len(collection)} comparisons "
      f"({int(collection.mask('SS').sum())} same-source)")
print("misleading rates by number of components:")
for m in range(1, 5):
    ds, ss = misleading_rates(collection, m)
    print(f"  M={m}: DS {ds:.3f}   SS {ss:.3f}")
print("adding the second component removes most different-source mistakes")

curves = tippett(collection, m=2)
curves.to_csv(out / "tippett.csv")
polyline_plot(out / "tippett.svg",
              [(curves.thresholds, curves.p_ss, "same source"),
               (curves.thresholds, curves.p_ds, "different source")],
              title="Tippett curves (M=2)", xlabel="log10 LR threshold",
              ylabel="proportion >= threshold")

# -- calibration, and how a single outlier breaks it --------------------------------
ece = ece_curve(collection, m=2, with_pav=True)
worst = float((ece.observed - ece.null).max())
print(f"\nECE at M=2: observed minus reference peaks at {worst:+.3f} bits "
      "(below 0: better than always answering LR = 1)")

ss_lrs = collection.reported_lrs(2)[collection.mask("SS")].tolist()
ds_lrs = collection.reported_lrs(2)[~collection.mask("SS")].tolist()
from gaitlr import LrCollection

poisoned = ece_curve(LrCollection.from_lrs(ss_lrs + [1e-3], ds_lrs))
above = poisoned.observed > poisoned.null
crossing = float(poisoned.prior_log10_odds[np.argmax(above)]) if above.any() else None
print(f"injecting a single same-source LR of 1e-3: observed ECE crosses above the "
      f"reference at prior log10-odds {crossing:+.2f}")
print("one overconfident wrong answer dominates exactly where priors already "
      "favour the prosecution")

# doubling the assumed within-variance pulls all LRs toward 1 and re-calms the curve
doubled = WithinModel(system.within.variances * 2.0, provenance="doubled")
plan = enumerate_comparisons(repeated)
scores = system.project_dataset(repeated)
relaxed = evaluate_plan(plan, scores, system.between, doubled, 2)
ece_doubled = ece_curve(relaxed, m=2)
print("with doubled within-variance the (unpoisoned) curve stays below the "
      f"reference everywhere: {bool(np.all(ece_doubled.observed <= ece_doubled.null))}")

series = [
    (ece.prior_log10_odds, ece.observed, "observed"),
    (ece.prior_log10_odds, ece.null, "LR=1 reference"),
    (ece.prior_log10_odds, ece.pav, "PAV calibrated"),
    (poisoned.prior_log10_odds, poisoned.observed, "with injected outlier"),
]
polyline_plot(out / "ece.svg", series, title="Empirical cross entropy (M=2)",
              xlabel="prior log10 odds", ylabel="bits")
ece.to_csv(out / "ece.csv")
print(f"\ncurves written to {out}")
