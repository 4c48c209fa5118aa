import json
from pathlib import Path

import numpy as np
import pytest
from scipy.special import ndtri

from gaitlr import (
    FeatureDef,
    FeatureSchema,
    GeneratorConfig,
    LrSystem,
    WithinModel,
    fit_system,
    generate_population,
    generate_repeated,
    misleading_rates,
)
from gaitlr.cli import main
from gaitlr.errors import ConfigInvalid
from gaitlr.pipeline import (
    collection_from_rows,
    read_comparisons_csv,
    write_comparisons_csv,
    write_rates_csv,
)
from gaitlr.synth import save_scenario


def tiny_configs(seed=500):
    schema = FeatureSchema((
        FeatureDef("stance", ("narrow", "medium", "wide")),
        FeatureDef("bounce", ("no", "yes")),
        FeatureDef("drag left", ("none", "slight", "marked"), side="left"),
        FeatureDef("drag right", ("none", "slight", "marked"), side="right"),
    ))
    loadings = np.array([[0.85, 0.0], [0.6, 0.3], [0.0, 0.9], [0.0, 0.88]])
    thresholds = (
        np.array([ndtri(0.3), ndtri(0.75)]),
        np.array([ndtri(0.7)]),
        np.array([ndtri(0.4), ndtri(0.8)]),
        np.array([ndtri(0.42), ndtri(0.82)]),
    )
    common = dict(schema=schema, loadings=loadings, thresholds=thresholds)
    return {
        "population": GeneratorConfig(n_individuals=150, n_occasions=1,
                                      within_sd=0.0, seed=seed, **common),
        "repeated_low": GeneratorConfig(n_individuals=8, n_occasions=3,
                                        within_sd=0.05, seed=seed + 1, **common),
    }


@pytest.fixture(scope="module")
def tiny():
    configs = tiny_configs()
    return {
        "configs": configs,
        "population": generate_population(configs["population"]),
        "repeated": generate_repeated(configs["repeated_low"]),
    }


# -- fit_system ---------------------------------------------------------------


def test_fit_with_preset_within(tiny):
    system, _ = fit_system(tiny["population"], within="dataset-b", m=4)
    np.testing.assert_allclose(system.within.variances, [0.007, 0.010, 0.119, 0.033])
    assert system.within.provenance == "preset:dataset-b"


def test_fit_with_explicit_within(tiny):
    w = WithinModel(np.array([0.01, 0.02, 0.03, 0.04]), provenance="explicit")
    system, _ = fit_system(tiny["population"], within=w, m=3)
    assert system.within.n_components == 3


def test_estimate_requires_repeated(tiny):
    with pytest.raises(ConfigInvalid):
        fit_system(tiny["population"], within="estimate", m=2)


def test_unknown_variant_rejected(tiny):
    with pytest.raises(ConfigInvalid):
        fit_system(tiny["population"], within="dataset-b", m=2, variant="magic")


def test_system_roundtrip_preserves_lrs(tiny, tmp_path):
    system, _ = fit_system(tiny["population"], tiny["repeated"],
                           within="estimate", m=4)
    path = tmp_path / "model.json"
    system.save(path)
    back = LrSystem.load(path)
    rep = tiny["repeated"]
    a = system.validate_against(rep)
    b = back.validate_against(rep)
    np.testing.assert_allclose(
        a.log10_lrs(4), b.log10_lrs(4), rtol=1e-12, atol=1e-12
    )
    assert back.within.provenance == system.within.provenance


def test_ab_variants_report_side_by_side(tiny):
    rates = {}
    for variant in ("binary-pca", "polychoric-pca"):
        system, _ = fit_system(tiny["population"], tiny["repeated"],
                               within="estimate", m=2, variant=variant)
        coll = system.validate_against(tiny["repeated"])
        rates[variant] = misleading_rates(coll, 2)
    for variant, (ds, ss) in rates.items():
        assert 0.0 <= ds <= 1.0 and 0.0 <= ss <= 1.0
    assert set(rates) == {"binary-pca", "polychoric-pca"}


def test_comparisons_csv_roundtrip(tiny, tmp_path):
    system, _ = fit_system(tiny["population"], tiny["repeated"],
                           within="estimate", m=3)
    coll = system.validate_against(tiny["repeated"])
    path = tmp_path / "comparisons.csv"
    write_comparisons_csv(path, coll)
    rows, m_max = read_comparisons_csv(path)
    assert m_max == 3
    assert len(rows) == len(coll)
    rebuilt = collection_from_rows(rows, 3)
    np.testing.assert_allclose(rebuilt.log10_lrs(1), coll.log10_lrs(3), atol=1e-9)
    rates_path = tmp_path / "rates.csv"
    write_rates_csv(rates_path, coll, (1, 2, 3))
    assert len(rates_path.read_text().strip().splitlines()) == 4


# -- CLI ------------------------------------------------------------------------


@pytest.fixture(scope="module")
def cli_workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    scenario_path = root / "scenario.json"
    save_scenario(tiny_configs(), scenario_path)
    assert main(["simulate", "--out", str(root / "data"),
                 "--scenario", str(scenario_path)]) == 0
    config = {
        "schema": "data/schema.json",
        "population": "data/population.csv",
        "repeated": "data/repeated_low.csv",
        "output_dir": "out",
        "m": 4,
        "within": {"source": "estimate"},
        "imputation": {"n_reps": 3, "base_seed": 11},
    }
    (root / "pipeline.json").write_text(json.dumps(config))
    return root


def test_cli_simulate_outputs(cli_workspace):
    data = cli_workspace / "data"
    for name in ("schema.json", "scenario.json", "population.csv",
                 "repeated_low.csv", "manifest.json"):
        assert (data / name).exists()


def test_cli_run_and_artifacts(cli_workspace, capsys):
    assert main(["run", "--config", str(cli_workspace / "pipeline.json"), "--svg"]) == 0
    out = cli_workspace / "out"
    for name in ("model.json", "scree.csv", "comparisons.csv", "lr_details.csv",
                 "rates.csv", "tippett.csv", "ece.csv", "manifest.json",
                 "tippett.svg", "ece.svg", "lr_hist.svg"):
        assert (out / name).exists(), name
    manifest = json.loads((out / "manifest.json").read_text())
    assert "config_hash" in manifest and manifest["artifacts"]
    header = (out / "lr_details.csv").read_text().splitlines()[0]
    assert header.split(",")[1:5] == [f"log10_lr_pc{j}" for j in range(1, 5)]
    stdout = capsys.readouterr().out
    assert "misleading rates" in stdout


def test_cli_rerun_byte_identical(cli_workspace):
    cfg = json.loads((cli_workspace / "pipeline.json").read_text())
    cfg["output_dir"] = "out_b"
    (cli_workspace / "pipeline_b.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(cli_workspace / "pipeline_b.json")]) == 0
    for name in ("comparisons.csv", "lr_details.csv", "rates.csv", "tippett.csv",
                 "ece.csv", "scree.csv", "model.json"):
        a = (cli_workspace / "out" / name).read_bytes()
        b = (cli_workspace / "out_b" / name).read_bytes()
        assert a == b, name


def test_cli_config_supplies_paths_for_stage_commands(cli_workspace):
    cfg_path = str(cli_workspace / "pipeline.json")
    assert main(["ece", "--config", cfg_path, "--out",
                 str(cli_workspace / "ece_cfg"), "--pav"]) == 0
    assert (cli_workspace / "ece_cfg" / "ece.csv").exists()
    assert main(["polychoric", "--config", cfg_path, "--out",
                 str(cli_workspace / "poly_cfg")]) == 0
    assert (cli_workspace / "poly_cfg" / "polychoric.csv").exists()
    assert main(["validate", "--config", cfg_path, "--out",
                 str(cli_workspace / "val_cfg")]) == 0
    assert (cli_workspace / "val_cfg" / "rates.csv").exists()
    # missing both the flag and a config is a configuration error
    assert main(["ece", "--out", str(cli_workspace / "nowhere")]) == 2


def test_cli_variance_preset_override(cli_workspace):
    cfg = json.loads((cli_workspace / "pipeline.json").read_text())
    cfg["output_dir"] = "out_preset"
    (cli_workspace / "pipeline_p.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(cli_workspace / "pipeline_p.json"),
                 "--variance-preset", "dataset-b"]) == 0
    model = json.loads((cli_workspace / "out_preset" / "model.json").read_text())
    assert model["within"]["provenance"] == "preset:dataset-b"
    np.testing.assert_allclose(model["within"]["variances"],
                               [0.007, 0.010, 0.119, 0.033])


def test_cli_pcs_override(cli_workspace):
    cfg = json.loads((cli_workspace / "pipeline.json").read_text())
    cfg["output_dir"] = "out_m2"
    (cli_workspace / "pipeline_m.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(cli_workspace / "pipeline_m.json"),
                 "--pcs", "2"]) == 0
    rows, m_max = read_comparisons_csv(cli_workspace / "out_m2" / "comparisons.csv")
    assert m_max == 2


def test_cli_compare(cli_workspace, capsys):
    data = cli_workspace / "data"
    rep = (data / "repeated_low.csv").read_text().splitlines()
    (cli_workspace / "q.csv").write_text("\n".join([rep[0], rep[1]]) + "\n")
    (cli_workspace / "r.csv").write_text("\n".join([rep[0], rep[2]]) + "\n")
    code = main([
        "compare", "--model", str(cli_workspace / "out" / "model.json"),
        "--query", str(cli_workspace / "q.csv"),
        "--reference", str(cli_workspace / "r.csv"),
    ])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "within-variance source" in stdout
    assert "reported LR" in stdout
    assert "PC1" in stdout


def test_cli_compare_same_profile_positive_log_lr(cli_workspace, capsys):
    data = cli_workspace / "data"
    rep = (data / "repeated_low.csv").read_text().splitlines()
    (cli_workspace / "same.csv").write_text("\n".join([rep[0], rep[1]]) + "\n")
    main(["compare", "--model", str(cli_workspace / "out" / "model.json"),
          "--query", str(cli_workspace / "same.csv"),
          "--reference", str(cli_workspace / "same.csv")])
    stdout = capsys.readouterr().out
    final = [l for l in stdout.splitlines() if l.startswith("reported LR")][0]
    assert float(final.split(":")[1].split()[0]) > 1.0


def test_cli_validate_subcommand(cli_workspace):
    assert main([
        "validate", "--model", str(cli_workspace / "out" / "model.json"),
        "--schema", str(cli_workspace / "data" / "schema.json"),
        "--repeated", str(cli_workspace / "data" / "repeated_low.csv"),
        "--out", str(cli_workspace / "val"),
    ]) == 0
    assert (cli_workspace / "val" / "rates.csv").exists()


def test_cli_curve_subcommands(cli_workspace):
    assert main(["ece", "--comparisons", str(cli_workspace / "out" / "comparisons.csv"),
                 "--out", str(cli_workspace / "ece_out"), "--pav"]) == 0
    header = (cli_workspace / "ece_out" / "ece.csv").read_text().splitlines()[0]
    assert header == "prior_log10_odds,observed_bits,null_bits,pav_bits"
    assert main(["tippett", "--comparisons", str(cli_workspace / "out" / "comparisons.csv"),
                 "--out", str(cli_workspace / "tip_out")]) == 0
    assert (cli_workspace / "tip_out" / "tippett.csv").exists()


def test_cli_polychoric_subcommand(cli_workspace):
    assert main(["polychoric", "--schema", str(cli_workspace / "data" / "schema.json"),
                 "--data", str(cli_workspace / "data" / "population.csv"),
                 "--out", str(cli_workspace / "poly")]) == 0
    lines = (cli_workspace / "poly" / "polychoric.csv").read_text().splitlines()
    assert lines[0].startswith("feature,")
    assert (cli_workspace / "poly" / "polychoric_flags.csv").exists()


def test_cli_missing_config_is_exit_2(capsys):
    assert main(["run", "--config", "does-not-exist.json"]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_bad_m_is_exit_2(cli_workspace, capsys):
    cfg = json.loads((cli_workspace / "pipeline.json").read_text())
    cfg["m"] = 0
    (cli_workspace / "bad.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(cli_workspace / "bad.json")]) == 2


def test_cli_stage_failure_is_exit_1(cli_workspace, capsys):
    broken = cli_workspace / "broken.csv"
    broken.write_text("individual_id,occasion_id,stance\np1,o1,galactic\n")
    cfg = json.loads((cli_workspace / "pipeline.json").read_text())
    cfg["population"] = "broken.csv"
    cfg["output_dir"] = "out_broken"
    (cli_workspace / "broken.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(cli_workspace / "broken.json")]) == 1
    err = capsys.readouterr().err
    assert '"stage": "ingest"' in err


def test_cli_run_requires_repeated(cli_workspace, capsys):
    cfg = json.loads((cli_workspace / "pipeline.json").read_text())
    del cfg["repeated"]
    (cli_workspace / "norep.json").write_text(json.dumps(cfg))
    assert main(["run", "--config", str(cli_workspace / "norep.json")]) == 2


def test_cli_outputs_stay_in_output_dir(cli_workspace):
    # every artifact of the run landed inside the configured output directory
    out = cli_workspace / "out"
    manifest = json.loads((out / "manifest.json").read_text())
    for name in manifest["artifacts"]:
        assert (out / name).exists()
        assert not Path(name).is_absolute()
