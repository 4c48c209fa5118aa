import numpy as np
import pytest
from scipy.special import ndtr, ndtri

from gaitlr import (
    ContingencyTable,
    FeatureDef,
    FeatureSchema,
    GeneratorConfig,
    default_scenario,
    estimate_within_variance,
    generate_population,
    generate_repeated,
    polychoric_rho,
    variation_instances,
)
from gaitlr.errors import ConfigInvalid
from gaitlr.synth import LOW_WITHIN_SD, load_scenario, save_scenario


def pair_config(load_a, load_b, n, seed, within_sd=0.0, n_occasions=1,
                thr=(0.0,)):
    schema = FeatureSchema((
        FeatureDef("f1", tuple(f"l{i}" for i in range(len(thr) + 1))),
        FeatureDef("f2", tuple(f"l{i}" for i in range(len(thr) + 1))),
    ))
    return GeneratorConfig(
        schema=schema,
        n_individuals=n,
        n_occasions=n_occasions,
        loadings=np.array([[load_a], [load_b]]),
        thresholds=(np.asarray(thr, dtype=float), np.asarray(thr, dtype=float)),
        within_sd=within_sd,
        seed=seed,
    )


def test_same_seed_same_dataset():
    cfg = pair_config(0.8, 0.6, 300, seed=5)
    a = generate_population(cfg)
    b = generate_population(cfg)
    assert [r.values for r in a.records] == [r.values for r in b.records]
    assert a.row_keys() == b.row_keys()


def test_different_seed_differs():
    a = generate_population(pair_config(0.8, 0.6, 300, seed=5))
    b = generate_population(pair_config(0.8, 0.6, 300, seed=6))
    assert [r.values for r in a.records] != [r.values for r in b.records]


def test_binary_prevalence_matches_threshold():
    cfg = pair_config(0.5, 0.5, 10000, seed=11, thr=(float(ndtri(0.8)),))
    ds = generate_population(cfg)
    values = ds.value_matrix()
    prevalence = (values == 1).mean(axis=0)
    assert np.all(np.abs(prevalence - 0.2) < 0.01)


def test_multilevel_prevalences_match_orthants():
    thr = (-0.6, 0.9)
    cfg = pair_config(0.4, 0.3, 8000, seed=13, thr=thr)
    ds = generate_population(cfg)
    values = ds.value_matrix()[:, 0]
    expected = np.diff(np.concatenate(([0.0], ndtr(np.asarray(thr)), [1.0])))
    for level, p in enumerate(expected):
        observed = (values == level).mean()
        sigma = np.sqrt(p * (1 - p) / len(values))
        assert abs(observed - p) < 3.5 * sigma


def test_perfectly_loaded_pair_clamps():
    cfg = pair_config(1.0, 1.0, 4000, seed=17)
    ds = generate_population(cfg)
    values = ds.value_matrix()
    table = ContingencyTable.from_codes(values[:, 0], values[:, 1], 2, 2)
    res = polychoric_rho(table)
    assert res.clamped
    assert res.rho == 0.9999


def test_latent_correlation_recovered():
    # knee/foot style pair with latent rho = 0.9 * 0.8333 = 0.75
    cfg = pair_config(0.9, 0.75 / 0.9, 5000, seed=19)
    ds = generate_population(cfg)
    values = ds.value_matrix()
    table = ContingencyTable.from_codes(values[:, 0], values[:, 1], 2, 2)
    res = polychoric_rho(table)
    assert abs(res.rho - 0.75) < 0.05


def test_zero_within_sd_repeats_identical():
    cfg = pair_config(0.7, 0.5, 12, seed=23, within_sd=0.0, n_occasions=4)
    ds = generate_repeated(cfg)
    for ind in ds.individuals:
        recs = ds.occasions_of(ind)
        assert all(r.values == recs[0].values for r in recs)
    assert variation_instances(ds) == 0


def fake_scores(ds):
    from gaitlr import ScoreMatrix

    return ScoreMatrix(ds.value_matrix().astype(float), tuple(ds.row_keys()), "raw")


def test_zero_within_sd_estimate_hits_floor():
    cfg = pair_config(0.7, 0.5, 12, seed=23, within_sd=0.0, n_occasions=4)
    model = estimate_within_variance(fake_scores(generate_repeated(cfg)))
    np.testing.assert_array_equal(model.variances, 1e-6)


def test_within_sd_ladder_strictly_increases_estimate():
    estimates = []
    for within_sd in (0.1, 0.4, 1.0):
        cfg = pair_config(0.7, 0.5, 60, seed=29, within_sd=within_sd,
                          n_occasions=5, thr=(-0.8, 0.0, 0.8))
        model = estimate_within_variance(fake_scores(generate_repeated(cfg)))
        estimates.append(model.variances.mean())
    assert estimates[0] < estimates[1] < estimates[2]


def test_occasion_range_respected():
    cfg = pair_config(0.7, 0.5, 20, seed=31, within_sd=0.3, n_occasions=(6, 11))
    ds = generate_repeated(cfg)
    counts = ds.counts
    assert all(6 <= c <= 11 for c in counts.values())
    assert len(set(counts.values())) > 1


def test_default_low_scenario_flip_count():
    configs = default_scenario(seed=1234)
    rep = generate_repeated(configs["repeated_low"])
    flips = variation_instances(rep)
    assert 5 <= flips <= 10
    assert configs["repeated_low"].within_sd == LOW_WITHIN_SD


def test_high_vs_low_within_variance_contrast(fitted):
    system = fitted["system"]
    high_scores = system.project_dataset(fitted["repeated_high"])
    w_high = estimate_within_variance(high_scores)
    ratio = w_high.variances / system.within.variances
    assert np.all(ratio > 3.0)
    assert ratio.max() > 10.0


def test_scenario_json_roundtrip(tmp_path):
    configs = default_scenario(seed=42)
    path = tmp_path / "scenario.json"
    save_scenario(configs, path)
    back = load_scenario(path)
    assert set(back) == set(configs)
    for key in configs:
        a, b = configs[key], back[key]
        assert a.schema == b.schema
        assert a.n_individuals == b.n_individuals
        assert a.n_occasions == b.n_occasions
        np.testing.assert_allclose(a.loadings, b.loadings)
        assert a.seed == b.seed
        for ta, tb in zip(a.thresholds, b.thresholds):
            np.testing.assert_allclose(ta, tb)
    ds_a = generate_population(configs["population"])
    ds_b = generate_population(back["population"])
    assert [r.values for r in ds_a.records] == [r.values for r in ds_b.records]


def test_demographics_generated_and_deterministic():
    configs = default_scenario(seed=7)
    pop = generate_population(configs["population"])
    profiles = [r.demographics for r in pop.records]
    assert all(p is not None for p in profiles)
    sexes = {p.sex for p in profiles}
    assert sexes == {"female", "male"}
    pop2 = generate_population(configs["population"])
    assert [r.demographics for r in pop2.records] == profiles


# -- config validation ------------------------------------------------------------


def test_config_rejects_bad_thresholds():
    with pytest.raises(ConfigInvalid):
        pair_config(0.5, 0.5, 10, seed=1, thr=(0.5, 0.2))
    schema = FeatureSchema((FeatureDef("f1", ("a", "b", "c")),))
    with pytest.raises(ConfigInvalid):
        GeneratorConfig(schema=schema, n_individuals=5, n_occasions=1,
                        loadings=np.array([[0.5]]),
                        thresholds=(np.array([0.0]),),  # needs 2 cuts
                        within_sd=0.0, seed=0)


def test_config_rejects_heavy_loadings():
    with pytest.raises(ConfigInvalid):
        pair_config(0.9, 1.1, 10, seed=1)


def test_config_rejects_negative_within_sd():
    with pytest.raises(ConfigInvalid):
        pair_config(0.5, 0.5, 10, seed=1, within_sd=-0.1)


def test_config_rejects_bad_occasion_range():
    with pytest.raises(ConfigInvalid):
        pair_config(0.5, 0.5, 10, seed=1, n_occasions=(5, 3))


def test_population_requires_single_occasion():
    with pytest.raises(ConfigInvalid):
        generate_population(pair_config(0.5, 0.5, 10, seed=1, n_occasions=3))


def test_repeated_requires_two_occasions():
    with pytest.raises(ConfigInvalid):
        generate_repeated(pair_config(0.5, 0.5, 10, seed=1, n_occasions=1))


def test_config_requires_split_schema(raw_schema):
    with pytest.raises(ConfigInvalid):
        GeneratorConfig(schema=raw_schema, n_individuals=5, n_occasions=1,
                        loadings=np.zeros((3, 1)),
                        thresholds=(np.array([0.0]),) * 3,
                        within_sd=0.0, seed=0)
