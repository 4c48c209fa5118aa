import numpy as np
import pytest

from gaitlr import (
    FeatureDef,
    FeatureSchema,
    PcaModel,
    explained_variance,
    fit_pca,
    fit_polychoric_pca,
    project,
    recode_ordinal_to_binary,
)
from gaitlr.errors import ConstantColumn, RankWarning, ShapeMismatch
from gaitlr.pca import conditional_level_means

from conftest import make_population


def balanced_two_column_matrix():
    # two +-balanced, exactly uncorrelated binary columns
    return np.array([
        [0, 0], [0, 1], [1, 0], [1, 1],
        [0, 0], [0, 1], [1, 0], [1, 1],
    ], dtype=float)


def test_identical_columns_put_everything_on_pc1():
    col = np.array([0, 1, 1, 0, 1, 0, 1, 1], dtype=float)
    X = np.column_stack([col, col])
    with pytest.warns(RankWarning):
        model = fit_pca(X, basis="covariance")
    props = explained_variance(model)
    np.testing.assert_allclose(props, [1.0, 0.0], atol=1e-12)
    assert abs(model.loadings[0, 0]) == pytest.approx(abs(model.loadings[1, 0]), abs=1e-12)


def test_uncorrelated_balanced_columns_tie():
    model = fit_pca(balanced_two_column_matrix(), basis="covariance")
    assert model.eigenvalues[0] == pytest.approx(model.eigenvalues[1], abs=1e-12)
    np.testing.assert_allclose(explained_variance(model), [0.5, 0.5], atol=1e-12)


def test_orthonormal_loadings(fitted):
    T = fitted["system"].transform.loadings
    gram = T.T @ T
    assert np.max(np.abs(gram - np.eye(T.shape[1]))) < 1e-10


def test_eigenvalue_sum_matches_trace():
    rng = np.random.default_rng(4)
    X = (rng.random((200, 7)) > rng.random(7)).astype(float)
    cov_model = fit_pca(X, basis="covariance")
    S = np.cov(X, rowvar=False, ddof=1)
    assert cov_model.eigenvalues.sum() == pytest.approx(np.trace(S), abs=1e-8)
    corr_model = fit_pca(X, basis="correlation")
    assert corr_model.eigenvalues.sum() == pytest.approx(7.0, abs=1e-8)


def test_refit_is_bit_identical():
    rng = np.random.default_rng(5)
    X = (rng.random((150, 6)) > 0.4).astype(float)
    a = fit_pca(X, basis="correlation")
    b = fit_pca(X, basis="correlation")
    assert np.array_equal(a.loadings, b.loadings)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert a.digest() == b.digest()


def test_sign_convention_largest_entry_positive():
    rng = np.random.default_rng(6)
    X = (rng.random((300, 9)) > rng.random(9)).astype(float)
    model = fit_pca(X, basis="correlation")
    for j in range(model.n_components):
        column = model.loadings[:, j]
        assert column[np.argmax(np.abs(column))] > 0


def test_projection_back_rotation_recovers_data(fitted):
    system = fitted["system"]
    model = system.transform
    pop = fitted["population"]
    Zb = recode_ordinal_to_binary(pop)
    full = project(model, Zb, M=model.n_components)
    standardized = (Zb.data - model.column_centers) / model.column_scales
    recon = full.scores @ model.loadings.T
    assert np.max(np.abs(recon - standardized)) < 1e-10


def test_projecting_centroid_gives_zero_scores():
    rng = np.random.default_rng(7)
    X = (rng.random((100, 5)) > 0.5).astype(float)
    model = fit_pca(X, basis="covariance")
    scores = project(model, X.mean(axis=0, keepdims=True), M=5)
    np.testing.assert_allclose(scores.scores, 0.0, atol=1e-12)


def test_identical_profiles_identical_scores(fitted):
    system = fitted["system"]
    rep = fitted["repeated_low"]
    scores = system.project_dataset(rep)
    values = rep.value_matrix()
    same = np.flatnonzero((values[0] == values[1:]).all(axis=1))
    if same.size:
        np.testing.assert_array_equal(scores.scores[0], scores.scores[same[0] + 1])


def test_row_permutation_permutes_scores():
    rng = np.random.default_rng(8)
    X = (rng.random((60, 6)) > 0.5).astype(float)
    model = fit_pca(X, basis="covariance")
    perm = rng.permutation(60)
    a = project(model, X, M=4).scores[perm]
    b = project(model, X[perm], M=4).scores
    np.testing.assert_array_equal(a, b)


def test_population_statistics_are_frozen():
    rng = np.random.default_rng(9)
    X = (rng.random((100, 4)) > 0.5).astype(float)
    model = fit_pca(X, basis="covariance")
    Y = np.ones((3, 4))  # far from its own mean, centered by population stats
    scores = project(model, Y, M=4)
    expected = (np.ones(4) - model.column_centers) @ model.loadings
    np.testing.assert_allclose(scores.scores, np.tile(expected, (3, 1)), atol=1e-12)


def test_constant_column_rejected_on_correlation_basis():
    X = np.column_stack([np.ones(50), np.arange(50) % 2])
    with pytest.raises(ConstantColumn):
        fit_pca(X, basis="correlation")
    with pytest.warns(RankWarning):
        fit_pca(X, basis="covariance")  # covariance basis tolerates it


def test_shape_mismatch_on_project():
    rng = np.random.default_rng(10)
    X = (rng.random((40, 5)) > 0.5).astype(float)
    model = fit_pca(X, basis="covariance")
    with pytest.raises(ShapeMismatch):
        project(model, X[:, :4], M=2)


def test_scenario_scree_levels_off(fitted):
    props = explained_variance(fitted["system"].transform)
    assert props[:4].sum() > 0.5
    # variation levels off: later components are small and flat
    assert props[4] < props[3]
    assert props[4:].max() < 0.05


def test_model_json_roundtrip(fitted):
    model = fitted["system"].transform
    back = PcaModel.from_json_obj(model.to_json_obj())
    np.testing.assert_allclose(back.loadings, model.loadings, atol=1e-15)
    np.testing.assert_allclose(back.eigenvalues, model.eigenvalues, atol=1e-15)
    assert back.basis == model.basis
    assert back.column_names == model.column_names


# -- polychoric PCA alternative ------------------------------------------------


def test_conditional_means_balanced_binary():
    means = conditional_level_means(np.array([0.0]))
    np.testing.assert_allclose(means, [-0.7979, 0.7979], atol=1e-4)


def test_polychoric_pca_perfect_pair():
    rng = np.random.default_rng(11)
    codes = rng.integers(0, 3, size=400)
    schema = FeatureSchema((
        FeatureDef("f1", ("a", "b", "c")),
        FeatureDef("f2", ("a", "b", "c")),
    ))
    ds = make_population(
        schema,
        [(f"p{i}", "o1", {"f1": int(c), "f2": int(c)}) for i, c in enumerate(codes)],
    )
    model = fit_polychoric_pca(ds)
    props = model.eigenvalues / model.eigenvalues.sum()
    assert props[0] > 0.999


def test_polychoric_pca_scores_deterministic(fitted):
    pop = fitted["population"]
    model = fit_polychoric_pca(pop)
    a = model.project(pop, M=2).scores
    b = model.project(pop, M=2).scores
    np.testing.assert_array_equal(a, b)
    assert a.shape == (len(pop), 2)
