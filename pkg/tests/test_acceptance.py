"""Acceptance suite: one test per release criterion, each printing a verdict.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines alongside the pytest results.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest
from scipy.stats import norm

from gaitlr import (
    BetweenModel,
    ContingencyTable,
    LrCollection,
    compute_lr,
    decode_binary_to_ordinal,
    ece_curve,
    estimate_within_variance,
    enumerate_comparisons,
    evaluate_plan,
    fit_binary_logistic,
    fit_ordinal_logistic,
    fit_pca,
    lr_per_pc,
    lr_per_pc_quadrature,
    misleading_rates,
    polychoric_rho,
    recode_ordinal_to_binary,
)
from gaitlr.assoc import DesignMatrix
from gaitlr.cli import main
from gaitlr.pca import ScoreMatrix

from conftest import make_population


def report(n, text):
    print(f"[criterion {n:2d}] PASS: {text}")


def test_criterion_01_closed_form_vs_quadrature_oracle():
    between = BetweenModel(np.array([[0.0]]), np.array([1.0]))
    anchor = lr_per_pc(0.0, 0.0, between, 1.0)
    assert anchor == pytest.approx(math.sqrt(4.0 / 3.0), abs=1e-9)

    rng = np.random.default_rng(42)
    start = time.monotonic()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 40))
        z = rng.normal(0, 1.5, size=n)
        h = float(rng.uniform(0.2, 1.2))
        s2 = float(rng.uniform(0.2, 1.5)) ** 2
        y1, y2 = rng.normal(0, 1.2, size=2)
        b = BetweenModel(z.reshape(-1, 1), np.array([h]))
        closed = lr_per_pc(y1, y2, b, s2)
        numeric = lr_per_pc_quadrature(y1, y2, b, s2)
        worst = max(worst, abs(closed - numeric) / numeric)
    elapsed = time.monotonic() - start
    assert worst < 1e-6
    assert elapsed < 30.0
    report(1, f"1000 randomized cases, max rel diff {worst:.2e} in {elapsed:.1f}s; "
              f"sqrt(4/3) anchor within 1e-9")


def test_criterion_02_within_variance_estimator():
    scores = ScoreMatrix(np.array([[0.0], [2.0], [5.0], [5.0]]),
                         (("a", "o1"), ("a", "o2"), ("b", "o1"), ("b", "o2")), "t")
    assert estimate_within_variance(scores).variances[0] == 1.0
    flat = ScoreMatrix(np.array([[3.0], [3.0], [8.0], [8.0]]),
                       (("a", "o1"), ("a", "o2"), ("b", "o1"), ("b", "o2")), "t")
    assert estimate_within_variance(flat).variances[0] == 1e-6
    report(2, "hand-computed example gives s^2 = 1 exactly; degenerate case floors at 1e-6")


def test_criterion_03_recode_roundtrip_exhaustive(toy_schema):
    sizes = [f.n_levels for f in toy_schema.features]
    rows = [
        (f"p{i}", "o1", dict(zip(toy_schema.names, combo)))
        for i, combo in enumerate(itertools.product(*[range(s) for s in sizes]))
    ]
    ds = make_population(toy_schema, rows)
    back = decode_binary_to_ordinal(recode_ordinal_to_binary(ds))
    failures = sum(
        1 for a, b in zip(ds.records, back.records) if a.values != b.values
    )
    assert failures == 0
    report(3, f"identity on all {len(rows)} profiles of the 3-feature toy schema")


def test_criterion_04_pca_contracts():
    rng = np.random.default_rng(7)
    X = (rng.random((400, 12)) > rng.random(12)).astype(float)
    for basis in ("correlation", "covariance"):
        model = fit_pca(X, basis=basis)
        T = model.loadings
        assert np.max(np.abs(T.T @ T - np.eye(T.shape[1]))) < 1e-10
        if basis == "covariance":
            trace = np.trace(np.cov(X, rowvar=False, ddof=1))
        else:
            trace = float(X.shape[1])
        assert model.eigenvalues.sum() == pytest.approx(trace, abs=1e-8)
        refit = fit_pca(X, basis=basis)
        assert np.array_equal(model.loadings, refit.loadings)
        assert np.array_equal(model.eigenvalues, refit.eigenvalues)
    report(4, "orthonormal loadings (1e-10), eigenvalue-trace identity (1e-8), "
              "bit-equal refits under the sign convention")


def test_criterion_05_polychoric_recovery():
    rng = np.random.default_rng(11)
    for rho in (0.0, 0.4, 0.7):
        z = rng.multivariate_normal([0, 0], [[1, rho], [rho, 1]], size=5000)
        a = (z[:, 0] > 0).astype(int)
        b = (z[:, 1] > 0).astype(int)
        res = polychoric_rho(ContingencyTable.from_codes(a, b, 2, 2))
        assert abs(res.rho - rho) < 0.05, rho
    clamped = polychoric_rho(ContingencyTable(np.diag([500, 500])))
    assert clamped.rho == 0.9999 and clamped.clamped
    report(5, "rho in {0, 0.4, 0.7} recovered within 0.05 at n=5000; "
              "perfect 2x2 agreement clamps to 0.9999 exactly")


def test_criterion_06_ece_identities(rng):
    coll = LrCollection.from_lrs([1.0] * 9, [1.0] * 21)
    curve = ece_curve(coll, with_pav=True)
    assert np.max(np.abs(curve.observed - curve.null)) < 1e-12
    assert curve.null[50] == 1.0
    assert np.all(curve.pav <= curve.observed + 1e-12)
    ss = np.exp(rng.normal(1.5, 1.2, size=30))
    ds = np.exp(rng.normal(-1.5, 1.2, size=80))
    mixed = ece_curve(LrCollection.from_lrs(ss, ds), with_pav=True)
    assert np.all(mixed.pav <= mixed.observed + 1e-12)
    report(6, "all-LR=1 collection matches the analytic reference within 1e-12, "
              "1 bit at prior log-odds 0; PAV curve never exceeds observed")


def test_criterion_07_synthetic_replication(scenario):
    from gaitlr import fit_system

    start = time.monotonic()
    system, _ = fit_system(scenario["population"], scenario["repeated_low"],
                           within="estimate", basis="correlation", m=4)
    collection = system.validate_against(scenario["repeated_low"])
    elapsed = time.monotonic() - start
    ds4, ss4 = misleading_rates(collection, 4)
    ds1, _ = misleading_rates(collection, 1)
    ds2, _ = misleading_rates(collection, 2)
    assert ds4 < 0.10 and ss4 < 0.10
    assert ds2 <= ds1
    assert elapsed < 120.0
    report(7, f"M=4 misleading rates DS={ds4:.3f}, SS={ss4:.3f} (< 0.10); "
              f"DS rate improves M=1 {ds1:.3f} -> M=2 {ds2:.3f}; {elapsed:.1f}s")


def test_criterion_08_misspecification_phenomenon(fitted):
    system = fitted["system"]
    high = fitted["repeated_high"]
    scores = system.project_dataset(high)
    plan = enumerate_comparisons(high)
    mismatched = evaluate_plan(plan, scores, system.between, system.within, 2)
    _, ss_mismatched = misleading_rates(mismatched, 2)
    matched_within = estimate_within_variance(scores, provenance="estimated:high")
    matched = evaluate_plan(plan, scores, system.between, matched_within, 2)
    _, ss_matched = misleading_rates(matched, 2)
    assert ss_mismatched >= 0.4
    assert ss_matched < 0.15
    report(8, f"low-variance preset on high-variance data flips SS rate to "
              f"{ss_mismatched:.2f} (>= 0.4); matched preset restores {ss_matched:.2f} (< 0.15)")


def test_criterion_09_outlier_sensitivity():
    n_ss, n_ds, strength = 20, 200, 4.0
    m = strength * np.log(10.0)
    sd = np.sqrt(2.0 * m)
    ss = np.exp(m + sd * norm.ppf((np.arange(n_ss) + 0.5) / n_ss)).tolist()
    ds = np.exp(-m + sd * norm.ppf((np.arange(n_ds) + 0.5) / n_ds)).tolist()

    base = ece_curve(LrCollection.from_lrs(ss, ds))
    assert np.all(base.observed <= base.null)

    curve = ece_curve(LrCollection.from_lrs(ss + [1e-3], ds))
    grid = curve.prior_log10_odds
    above = curve.observed > curve.null
    assert above.any()
    threshold = float(grid[np.argmax(above)])
    assert 1.0 < threshold < 2.5
    assert np.all(above[grid >= threshold])

    restored = ece_curve(LrCollection.from_lrs(ss + [1e-3], ds).drop(n_ss))
    assert np.all(restored.observed <= restored.null)
    report(9, f"one injected SS LR of 1e-3 pushes observed ECE above the reference "
              f"beyond prior log10-odds {threshold:.2f}; removal restores it")


def test_criterion_10_truncation(fitted):
    system = fitted["system"]
    collection = system.validate_against(fitted["repeated_low"])
    reported = collection.reported_lrs(4)
    assert np.all(reported >= 1e-8)
    raw_small = [i for i, res in enumerate(collection.results)
                 if res.log_lr(4) < math.log(1e-8)]
    assert raw_small, "scenario produced no extreme different-source LRs"
    for i in raw_small:
        value, truncated = collection.results[i].reported_lr(4)
        assert value == 1e-8 and truncated
    report(10, f"{len(raw_small)} pipeline LRs below 1e-8 all reported as exactly "
               f"1e-8 with the truncated flag set")


def test_criterion_11_logistic_closed_forms_and_oracle():
    ones = DesignMatrix(np.ones((100, 1)), ("intercept",),
                        tuple(str(i) for i in range(100)))
    fit = fit_binary_logistic(ones, np.array([1] * 25 + [0] * 75))
    assert fit.alpha[0] == pytest.approx(math.log(1 / 3), abs=1e-6)

    y = np.array([0] * 50 + [1] * 30 + [2] * 20)
    ordinal = fit_ordinal_logistic(ones, y)
    assert ordinal.alpha[0] == pytest.approx(0.0, abs=1e-6)
    assert ordinal.alpha[1] == pytest.approx(math.log(0.25), abs=1e-6)

    from scipy.special import expit

    rng = np.random.default_rng(23)
    x = rng.normal(size=200)
    yy = (rng.random(200) < expit(0.4 - 0.7 * x)).astype(int)
    d = DesignMatrix(np.column_stack([np.ones(200), x]), ("intercept", "x"),
                     tuple(str(i) for i in range(200)))
    newton = fit_binary_logistic(d, yy)

    def loglik(a, b):
        p = expit(a + b * x)
        return float(np.sum(np.where(yy == 1, np.log(p), np.log1p(-p))))

    best = (0.0, 0.0)
    width = 4.0
    for _ in range(6):
        axes = [np.linspace(c - width, c + width, 21) for c in best]
        best = max(itertools.product(*axes), key=lambda t: loglik(*t))
        width = width * 2.0 / 20 * 1.1
    assert newton.alpha[0] == pytest.approx(best[0], abs=1e-4)
    assert newton.beta[0] == pytest.approx(best[1], abs=1e-4)
    report(11, "intercept-only closed forms within 1e-6; "
               "brute-force grid oracle agreement within 1e-4")


def test_criterion_12_cli_end_to_end_determinism(tmp_path):
    data_dir = tmp_path / "data"
    assert main(["simulate", "--out", str(data_dir), "--seed", "1234"]) == 0
    outputs = []
    for run in ("first", "second"):
        cfg = {
            "schema": "data/schema.json",
            "population": "data/population.csv",
            "repeated": "data/repeated_low.csv",
            "output_dir": f"out_{run}",
            "m": 4,
            "within": {"source": "estimate"},
            "imputation": {"n_reps": 2, "base_seed": 5},
        }
        cfg_path = tmp_path / f"run_{run}.json"
        cfg_path.write_text(json.dumps(cfg))
        assert main(["run", "--config", str(cfg_path)]) == 0
        outputs.append(tmp_path / f"out_{run}")
    names = ("comparisons.csv", "rates.csv", "tippett.csv", "ece.csv", "scree.csv")
    for name in names:
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()
    report(12, f"two identical `gaitlr run` invocations produced byte-identical "
               f"CSV artifacts ({', '.join(names)})")
