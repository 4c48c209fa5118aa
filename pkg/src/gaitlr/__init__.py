"""Likelihood ratios for forensic comparison of ordinal gait-feature profiles.

Pipeline: ordinal profiles are dichotomized into cumulative binary indicators,
a PCA fitted on a background population defines a shared score space, and a
two-level model (KDE between individuals, normal within) turns score pairs
into per-component likelihood ratios whose product weighs the same-source
against the different-source proposition.
"""

from .assoc import (
    DesignMatrix,
    LogisticFit,
    SelectionReport,
    build_design,
    covariate_selection,
    fit_binary_logistic,
    fit_ordinal_logistic,
)
from .data import (
    DemographicProfile,
    GaitRecord,
    PopulationDataset,
    RepeatedDataset,
    align_feature_sets,
    impute_missing,
    impute_replicates,
    load_dataset,
    save_dataset,
    split_composite_features,
)
from .lr import (
    BetweenModel,
    LrResult,
    WithinModel,
    WITHIN_PRESETS,
    compute_lr,
    estimate_within_variance,
    fit_between,
    lr_per_pc,
    lr_per_pc_quadrature,
    silverman_bandwidth,
)
from .pca import (
    PcaModel,
    PolychoricPcaModel,
    ScoreMatrix,
    explained_variance,
    fit_pca,
    fit_polychoric_pca,
    project,
)
from .pipeline import LrSystem, fit_system, prepare_dataset
from .polychoric import (
    ContingencyTable,
    PolychoricResult,
    estimate_thresholds,
    polychoric_matrix,
    polychoric_rho,
)
from .recode import BinaryMatrix, decode_binary_to_ordinal, recode_ordinal_to_binary
from .schema import FeatureDef, FeatureSchema, SplitTarget, head_tilt_feature, roll_feature
from .synth import (
    DemographicsConfig,
    GeneratorConfig,
    default_gait_schema,
    default_scenario,
    generate_population,
    generate_repeated,
    variation_instances,
)
from .validate import (
    Comparison,
    ComparisonPlan,
    EceCurve,
    LrCollection,
    ece_curve,
    ece_null,
    enumerate_comparisons,
    enumerate_grouped_comparisons,
    evaluate_grouped,
    evaluate_plan,
    misleading_rates,
    misspecification_grid,
    pav_calibrate_lrs,
    tippett,
)

__version__ = "0.1.0"
