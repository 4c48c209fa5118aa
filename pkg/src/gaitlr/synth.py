"""Synthetic populations and repeated-measures datasets.

Latent-Gaussian threshold model: each individual draws standard-normal factor
scores, features load on the factors (plus unique noise so every latent
marginal has unit variance), and ordinal levels are the count of per-feature
thresholds below the latent value. Repeated occasions add normal noise of
scale ``within_sd`` to the individual's latent before thresholding, so the
generator is the exact dual of the polychoric estimator and the two-level LR
model it feeds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import DemographicProfile, GaitRecord, PopulationDataset, RepeatedDataset
from .errors import ConfigInvalid
from .schema import DEMOGRAPHIC_FIELDS, FeatureDef, FeatureSchema


@dataclass(frozen=True)
class DemographicsConfig:
    """Optional demographic generation: vocabularies, mixing weights, effects.

    ``effects[feature][field][category]`` shifts that feature's latent mean
    for individuals with the given category, letting experiments inject or
    withhold demographic structure.
    """

    vocabularies: dict[str, tuple[str, ...]]
    probabilities: dict[str, tuple[float, ...]] | None = None
    effects: dict[str, dict[str, dict[str, float]]] | None = None

    def weights(self, fld: str) -> np.ndarray:
        cats = self.vocabularies[fld]
        if self.probabilities and fld in self.probabilities:
            w = np.asarray(self.probabilities[fld], dtype=float)
            if w.size != len(cats) or np.any(w < 0) or w.sum() <= 0:
                raise ConfigInvalid(f"bad probabilities for demographic {fld!r}")
            return w / w.sum()
        return np.full(len(cats), 1.0 / len(cats))


@dataclass(frozen=True)
class GeneratorConfig:
    """Everything needed to generate one dataset deterministically."""

    schema: FeatureSchema
    n_individuals: int
    n_occasions: int | tuple[int, int]
    loadings: np.ndarray                 # (n_features, n_factors)
    thresholds: tuple[np.ndarray, ...]   # per feature, length L_j - 1
    within_sd: float
    seed: int
    demographics: DemographicsConfig | None = None

    def __post_init__(self):
        if not self.schema.is_split:
            raise ConfigInvalid("generator requires a schema without pending splits")
        p = len(self.schema.features)
        lam = np.asarray(self.loadings, dtype=float)
        if lam.ndim != 2 or lam.shape[0] != p:
            raise ConfigInvalid(f"loadings must be ({p}, n_factors)")
        if np.any((lam ** 2).sum(axis=1) > 1.0 + 1e-12):
            raise ConfigInvalid("loading row norms must not exceed 1")
        object.__setattr__(self, "loadings", lam)
        if len(self.thresholds) != p:
            raise ConfigInvalid("one threshold vector per feature required")
        thr = []
        for feat, t in zip(self.schema.features, self.thresholds):
            t = np.asarray(t, dtype=float)
            if t.size != feat.n_levels - 1:
                raise ConfigInvalid(
                    f"feature {feat.name!r} needs {feat.n_levels - 1} thresholds"
                )
            if t.size > 1 and np.any(np.diff(t) <= 0):
                raise ConfigInvalid(f"thresholds for {feat.name!r} must increase")
            thr.append(t)
        object.__setattr__(self, "thresholds", tuple(thr))
        if self.within_sd < 0:
            raise ConfigInvalid("within_sd must be non-negative")
        if self.n_individuals < 1:
            raise ConfigInvalid("need at least one individual")
        occ = self.n_occasions
        if isinstance(occ, tuple):
            if len(occ) != 2 or occ[0] < 1 or occ[1] < occ[0]:
                raise ConfigInvalid("occasion range must be (lo, hi) with 1 <= lo <= hi")
        elif occ < 1:
            raise ConfigInvalid("n_occasions must be >= 1")

    @property
    def n_factors(self) -> int:
        return self.loadings.shape[1]

    def replace_seed(self, seed: int) -> "GeneratorConfig":
        from dataclasses import replace

        return replace(self, seed=seed)

    # -- serialization ----------------------------------------------------

    def to_json_obj(self) -> dict:
        occ = self.n_occasions
        obj = {
            "schema": self.schema.to_json_obj(),
            "n_individuals": self.n_individuals,
            "n_occasions": list(occ) if isinstance(occ, tuple) else occ,
            "loadings": self.loadings.tolist(),
            "thresholds": [t.tolist() for t in self.thresholds],
            "within_sd": self.within_sd,
            "seed": self.seed,
        }
        if self.demographics is not None:
            d = self.demographics
            obj["demographics"] = {
                "vocabularies": {k: list(v) for k, v in d.vocabularies.items()},
                "probabilities": (
                    {k: list(v) for k, v in d.probabilities.items()}
                    if d.probabilities else None
                ),
                "effects": d.effects,
            }
        return obj

    @classmethod
    def from_json_obj(cls, obj) -> "GeneratorConfig":
        demo = None
        if obj.get("demographics"):
            raw = obj["demographics"]
            demo = DemographicsConfig(
                vocabularies={k: tuple(v) for k, v in raw["vocabularies"].items()},
                probabilities=(
                    {k: tuple(v) for k, v in raw["probabilities"].items()}
                    if raw.get("probabilities") else None
                ),
                effects=raw.get("effects"),
            )
        occ = obj["n_occasions"]
        return cls(
            schema=FeatureSchema.from_json_obj(obj["schema"]),
            n_individuals=int(obj["n_individuals"]),
            n_occasions=tuple(occ) if isinstance(occ, list) else int(occ),
            loadings=np.asarray(obj["loadings"], dtype=float),
            thresholds=tuple(np.asarray(t, dtype=float) for t in obj["thresholds"]),
            within_sd=float(obj["within_sd"]),
            seed=int(obj["seed"]),
            demographics=demo,
        )


def _draw_demographics(config: GeneratorConfig, rng) -> list[DemographicProfile | None]:
    demo = config.demographics
    if demo is None:
        return [None] * config.n_individuals
    drawn: dict[str, list[str]] = {}
    for fld in DEMOGRAPHIC_FIELDS:
        if fld in demo.vocabularies:
            cats = demo.vocabularies[fld]
            idx = rng.choice(len(cats), size=config.n_individuals, p=demo.weights(fld))
            drawn[fld] = [cats[i] for i in idx]
    return [
        DemographicProfile(**{fld: vals[i] for fld, vals in drawn.items()})
        for i in range(config.n_individuals)
    ]


def _effect_shift(config: GeneratorConfig, profiles) -> np.ndarray:
    p = len(config.schema.features)
    shift = np.zeros((config.n_individuals, p))
    demo = config.demographics
    if demo is None or not demo.effects:
        return shift
    for j, feat in enumerate(config.schema.features):
        per_field = demo.effects.get(feat.name)
        if not per_field:
            continue
        for i, prof in enumerate(profiles):
            if prof is None:
                continue
            for fld, table in per_field.items():
                cat = prof.get(fld)
                if cat is not None and cat in table:
                    shift[i, j] += table[cat]
    return shift


def _individual_latents(config: GeneratorConfig, rng) -> np.ndarray:
    n, p = config.n_individuals, len(config.schema.features)
    factors = rng.standard_normal((n, config.n_factors))
    unique_sd = np.sqrt(np.maximum(1.0 - (config.loadings ** 2).sum(axis=1), 0.0))
    noise = rng.standard_normal((n, p)) * unique_sd[None, :]
    return factors @ config.loadings.T + noise


def _threshold(config: GeneratorConfig, latent: np.ndarray) -> np.ndarray:
    levels = np.empty(latent.shape, dtype=np.int64)
    for j, t in enumerate(config.thresholds):
        levels[:, j] = np.digitize(latent[:, j], t)
    return levels


def _ids(n: int) -> list[str]:
    width = max(3, len(str(n)))
    return [f"p{i + 1:0{width}d}" for i in range(n)]


def generate_population(config: GeneratorConfig) -> PopulationDataset:
    """One occasion per individual, thresholded from the individual latents."""
    if config.n_occasions != 1:
        raise ConfigInvalid("population generation requires n_occasions = 1")
    rng = np.random.default_rng(config.seed)
    latent = _individual_latents(config, rng)
    profiles = _draw_demographics(config, rng)
    latent = latent + _effect_shift(config, profiles)
    levels = _threshold(config, latent)
    names = config.schema.names
    records = [
        GaitRecord(
            ind_id, "o1",
            {name: int(levels[i, j]) for j, name in enumerate(names)},
            demographics=profiles[i],
        )
        for i, ind_id in enumerate(_ids(config.n_individuals))
    ]
    return PopulationDataset(config.schema, records)


def generate_repeated(config: GeneratorConfig) -> RepeatedDataset:
    """Several occasions per individual with latent within-individual noise."""
    occ = config.n_occasions
    if isinstance(occ, int) and occ < 2:
        raise ConfigInvalid("repeated generation requires n_occasions >= 2")
    if isinstance(occ, tuple) and occ[0] < 2:
        raise ConfigInvalid("repeated generation requires at least 2 occasions")
    rng = np.random.default_rng(config.seed)
    means = _individual_latents(config, rng)
    profiles = _draw_demographics(config, rng)
    means = means + _effect_shift(config, profiles)
    if isinstance(occ, tuple):
        counts = rng.integers(occ[0], occ[1] + 1, size=config.n_individuals)
    else:
        counts = np.full(config.n_individuals, occ)
    names = config.schema.names
    records = []
    for i, ind_id in enumerate(_ids(config.n_individuals)):
        noise = rng.standard_normal((counts[i], len(names))) * config.within_sd
        levels = _threshold(config, means[i][None, :] + noise)
        for c in range(counts[i]):
            records.append(
                GaitRecord(
                    ind_id, f"o{c + 1}",
                    {name: int(levels[c, j]) for j, name in enumerate(names)},
                    demographics=profiles[i],
                )
            )
    return RepeatedDataset(config.schema, records)


def variation_instances(dataset: RepeatedDataset) -> int:
    """Count (individual, feature) pairs showing more than one observed level."""
    count = 0
    for ind in dataset.individuals:
        recs = dataset.occasions_of(ind)
        for name in dataset.schema.names:
            seen = {r.values.get(name) for r in recs} - {None}
            if len(seen) > 1:
                count += 1
    return count


# -- default desk-scale scenario --------------------------------------------

LOW_WITHIN_SD = 0.02
HIGH_WITHIN_SD = 0.55


def _phi_inv(q: float) -> float:
    from scipy.special import ndtri

    return float(ndtri(q))


def default_gait_schema() -> FeatureSchema:
    """Sixteen ordered features (some sided) used by the bundled scenario."""
    f = [
        FeatureDef("base of gait", ("narrow", "medium", "wide")),
        FeatureDef("step length", ("short", "medium", "long")),
        FeatureDef("gait symmetry", ("asymmetric", "symmetric")),
        FeatureDef("early heel lift left", ("no", "yes"), side="left"),
        FeatureDef("early heel lift right", ("no", "yes"), side="right"),
        FeatureDef("forefoot slap", ("no", "yes")),
        FeatureDef("knee direction left", ("inward", "neutral", "outward"), side="left"),
        FeatureDef("knee direction right", ("inward", "neutral", "outward"), side="right"),
        FeatureDef("foot direction left", ("inward", "neutral", "outward"), side="left"),
        FeatureDef("foot direction right", ("inward", "neutral", "outward"), side="right"),
        FeatureDef("hip movement left", ("none", "moderate", "marked"), side="left"),
        FeatureDef("hip movement right", ("none", "moderate", "marked"), side="right"),
        FeatureDef("trunk flexion", ("backward", "none", "forward")),
        FeatureDef("frontal head tilt", ("left", "none", "right")),
        FeatureDef("sagittal head tilt", ("backward", "none", "forward")),
        FeatureDef("arm swing", ("reduced", "normal", "exaggerated")),
    ]
    demo = {
        "sex": ("female", "male"),
        "height": ("very short", "short", "average", "tall", "very tall"),
        "weight": ("light", "average", "heavy"),
        "age_group": ("under 25", "25-40", "40-60", "over 60"),
        "ethnicity": ("group A", "group B", "group C", "group D", "group E"),
        "location": tuple(f"site {i}" for i in range(1, 9)),
    }
    return FeatureSchema(tuple(f), version="default-16", demographics=demo)


def _default_loadings() -> np.ndarray:
    # columns: lower-limb alignment, stride geometry, heel/forefoot, upper body
    rows = [
        (0.00, 0.93, 0.00, 0.00),   # base of gait
        (0.00, 0.91, 0.00, 0.00),   # step length
        (0.00, 0.80, 0.00, 0.18),   # gait symmetry
        (0.00, 0.00, 0.95, 0.00),   # early heel lift left
        (0.00, 0.00, 0.93, 0.00),   # early heel lift right
        (0.00, 0.00, -0.82, 0.00),  # forefoot slap
        (0.94, 0.00, 0.00, 0.00),   # knee direction left
        (0.92, 0.00, 0.00, 0.00),   # knee direction right
        (0.85, 0.00, 0.00, 0.00),   # foot direction left
        (0.83, 0.00, 0.00, 0.00),   # foot direction right
        (0.00, 0.00, 0.00, 0.93),   # hip movement left
        (0.00, 0.00, 0.00, 0.91),   # hip movement right
        (0.00, 0.18, 0.00, 0.78),   # trunk flexion
        (0.00, 0.00, 0.00, 0.68),   # frontal head tilt
        (0.00, 0.00, 0.25, 0.70),   # sagittal head tilt
        (0.00, 0.78, 0.00, 0.22),   # arm swing
    ]
    return np.asarray(rows)


def _default_thresholds() -> tuple[np.ndarray, ...]:
    cuts = [
        (0.30, 0.72),   # base of gait
        (0.30, 0.70),   # step length
        (0.25,),        # gait symmetry (75% symmetric)
        (0.72,),        # early heel lift left
        (0.74,),        # early heel lift right
        (0.85,),        # forefoot slap
        (0.33, 0.70),   # knee direction left
        (0.34, 0.71),   # knee direction right
        (0.33, 0.70),   # foot direction left
        (0.34, 0.71),   # foot direction right
        (0.38, 0.73),   # hip movement left
        (0.39, 0.74),   # hip movement right
        (0.20, 0.80),   # trunk flexion
        (0.25, 0.75),   # frontal head tilt
        (0.28, 0.78),   # sagittal head tilt
        (0.25, 0.75),   # arm swing
    ]
    return tuple(np.array([_phi_inv(q) for q in c]) for c in cuts)


def _default_demographics() -> DemographicsConfig:
    schema = default_gait_schema()
    return DemographicsConfig(
        vocabularies=dict(schema.demographics),
        probabilities={
            "sex": (0.5, 0.5),
            "height": (0.05, 0.25, 0.40, 0.25, 0.05),
            "weight": (0.3, 0.5, 0.2),
            "age_group": (0.25, 0.35, 0.25, 0.15),
            "ethnicity": (0.55, 0.2, 0.12, 0.08, 0.05),
            "location": (0.2, 0.15, 0.15, 0.12, 0.12, 0.1, 0.08, 0.08),
        },
        effects={
            "base of gait": {"sex": {"male": 0.35}},
            "step length": {"sex": {"male": 0.30}, "height": {"tall": 0.25, "very tall": 0.4}},
        },
    )


def default_scenario(seed: int = 1234) -> dict[str, GeneratorConfig]:
    """Bundled desk-scale scenario mirroring the published dataset shapes.

    population: 1007 individuals, 16 features, one occasion each.
    repeated_low: 18 individuals x 3 occasions with low within-variability.
    repeated_high: 6 individuals x 6-11 occasions with high within-variability.
    """
    schema = default_gait_schema()
    loadings = _default_loadings()
    thresholds = _default_thresholds()
    common = dict(schema=schema, loadings=loadings, thresholds=thresholds)
    return {
        "population": GeneratorConfig(
            n_individuals=1007, n_occasions=1, within_sd=0.0, seed=seed,
            demographics=_default_demographics(), **common,
        ),
        "repeated_low": GeneratorConfig(
            n_individuals=18, n_occasions=3, within_sd=LOW_WITHIN_SD,
            seed=seed + 1, **common,
        ),
        "repeated_high": GeneratorConfig(
            n_individuals=6, n_occasions=(6, 11), within_sd=HIGH_WITHIN_SD,
            seed=seed + 2, **common,
        ),
    }


def save_scenario(configs: dict[str, GeneratorConfig], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({k: v.to_json_obj() for k, v in configs.items()}, fh, indent=2)
        fh.write("\n")


def load_scenario(path) -> dict[str, GeneratorConfig]:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return {k: GeneratorConfig.from_json_obj(v) for k, v in raw.items()}
