"""Command-line front end.

Subcommands map one-to-one onto the library stages and exchange data only via
documented file formats (dataset/schema files in, CSV/JSON artifacts out), so
any stage can be re-run independently. Exit codes: 0 success, 1 stage
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import __version__
from .assoc import covariate_selection, write_coefficient_table
from .data import impute_missing, load_dataset, split_composite_features, thread_count
from .errors import ConfigInvalid, GaitLrError
from .lr import WITHIN_PRESETS, WithinModel, write_lr_results_csv
from .pca import write_scree_csv
from .pipeline import (
    LrSystem,
    collection_from_rows,
    fit_system,
    read_comparisons_csv,
    write_comparisons_csv,
    write_rates_csv,
)
from .polychoric import polychoric_matrix
from .schema import FeatureSchema
from .synth import default_scenario, generate_population, generate_repeated, load_scenario, save_scenario
from .validate import ece_curve, misleading_rates, tippett
from . import svgplot


class StageFailure(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageFailure:
        raise
    except Exception as exc:
        raise StageFailure(name, exc) from exc


def _atomic(path: Path, writer) -> Path:
    """Write via temp-file-and-rename so readers never see partial output."""
    tmp = path.with_name(path.name + ".tmp")
    writer(tmp)
    os.replace(tmp, path)
    return path


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()[:16]


def _write_manifest(out_dir: Path, config_obj, seeds: dict, artifacts: list[Path],
                    diagnostics: dict | None = None):
    manifest = {
        "tool": f"gaitlr {__version__}",
        "config": config_obj,
        "config_hash": hashlib.sha256(
            json.dumps(config_obj, sort_keys=True).encode()
        ).hexdigest()[:16],
        "seeds": seeds,
        "threads": thread_count(),
        "artifacts": {p.name: _sha256_file(p) for p in artifacts},
    }
    if diagnostics:
        manifest["diagnostics"] = {
            k: (v.tolist() if isinstance(v, np.ndarray) else v)
            for k, v in diagnostics.items()
        }
    _atomic(out_dir / "manifest.json", lambda p: p.write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    ))


# -- pipeline config ---------------------------------------------------------


def _load_pipeline_config(path: str, args) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigInvalid(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"config is not valid JSON: {exc}") from None

    base = Path(path).parent

    def resolve(key, required=True):
        raw = cfg.get(key)
        if raw is None:
            if required:
                raise ConfigInvalid(f"config missing required key {key!r}")
            return None
        p = Path(raw)
        if not p.is_absolute():
            p = base / p
        if not p.exists():
            raise ConfigInvalid(f"config {key} path does not exist: {p}")
        return p

    out = {
        "schema": resolve("schema"),
        "population": resolve("population"),
        "repeated": resolve("repeated", required=False),
        "output_dir": Path(cfg.get("output_dir", "out")),
        "basis": cfg.get("basis", "correlation"),
        "m": int(cfg.get("m", 4)),
        "variant": cfg.get("variant", "binary-pca"),
        "truncate": bool(cfg.get("truncate", True)),
        "within": cfg.get("within", {"source": "estimate"}),
        "n_reps": int(cfg.get("imputation", {}).get("n_reps", 1)),
        "seed": int(cfg.get("imputation", {}).get("base_seed", 0)),
        "raw": cfg,
    }
    if not out["output_dir"].is_absolute():
        out["output_dir"] = base / out["output_dir"]
    if getattr(args, "pcs", None):
        out["m"] = args.pcs
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if getattr(args, "variance_preset", None):
        out["within"] = {"source": "preset", "name": args.variance_preset}
    if out["m"] < 1:
        raise ConfigInvalid("m must be >= 1")
    if out["n_reps"] < 1:
        raise ConfigInvalid("imputation n_reps must be >= 1")
    if out["basis"] not in ("correlation", "covariance"):
        raise ConfigInvalid(f"unknown basis {out['basis']!r}")
    return out


def _resolve_within(spec) -> WithinModel | str:
    if isinstance(spec, str):
        spec = {"source": "preset", "name": spec}
    source = spec.get("source", "estimate")
    if source == "estimate":
        return "estimate"
    if source == "preset":
        name = spec.get("name", "")
        if name in WITHIN_PRESETS:
            return name
        p = Path(name)
        if p.exists():
            with open(p, "r", encoding="utf-8") as fh:
                obj = json.load(fh)
            values = obj["variances"] if isinstance(obj, dict) else obj
            return WithinModel(np.asarray(values, dtype=float),
                               provenance=f"file:{p.name}")
        raise ConfigInvalid(
            f"unknown variance preset {name!r} "
            f"(known: {', '.join(sorted(WITHIN_PRESETS))}, or a JSON file)"
        )
    if source == "explicit":
        return WithinModel(np.asarray(spec["values"], dtype=float),
                           provenance="explicit")
    raise ConfigInvalid(f"unknown within source {source!r}")


def _fit_from_config(cfg) -> tuple[LrSystem, dict, object]:
    with _stage("ingest"):
        schema = FeatureSchema.from_json(cfg["schema"])
        population = load_dataset(cfg["population"], schema, "population")
        repeated = None
        if cfg["repeated"] is not None:
            repeated = load_dataset(cfg["repeated"], schema, "repeated")
    with _stage("fit"):
        system, diagnostics = fit_system(
            population,
            repeated,
            within=_resolve_within(cfg["within"]),
            basis=cfg["basis"],
            m=cfg["m"],
            variant=cfg["variant"],
            truncate=cfg["truncate"],
            impute_seed=cfg["seed"],
            impute_reps=cfg["n_reps"],
        )
    return system, diagnostics, repeated


def _emit_curves(out_dir: Path, collection, m: int, svg: bool) -> list[Path]:
    artifacts = []
    tip = tippett(collection, m=m)
    artifacts.append(_atomic(out_dir / "tippett.csv", tip.to_csv))
    ece = ece_curve(collection, m=m, with_pav=True)
    artifacts.append(_atomic(out_dir / "ece.csv", ece.to_csv))
    if svg:
        artifacts.append(_atomic(out_dir / "tippett.svg", lambda p: svgplot.polyline_plot(
            p, [(tip.thresholds, tip.p_ss, "same source"),
                (tip.thresholds, tip.p_ds, "different source")],
            title=f"Tippett curves (M={m})",
            xlabel="log10 LR threshold", ylabel="proportion >= threshold",
        )))
        series = [
            (ece.prior_log10_odds, ece.observed, "observed"),
            (ece.prior_log10_odds, ece.null, "LR=1 reference"),
        ]
        if ece.pav is not None:
            series.append((ece.prior_log10_odds, ece.pav, "PAV calibrated"))
        artifacts.append(_atomic(out_dir / "ece.svg", lambda p: svgplot.polyline_plot(
            p, series, title=f"Empirical cross entropy (M={m})",
            xlabel="prior log10 odds", ylabel="cross entropy (bits)",
        )))
        ss = collection.log10_lrs(m)[collection.mask("SS")]
        ds = collection.log10_lrs(m)[~collection.mask("SS")]
        artifacts.append(_atomic(out_dir / "lr_hist.svg", lambda p: svgplot.histogram_plot(
            p, [(ss, "same source"), (ds, "different source")],
            title=f"log10 LR distribution (M={m})", xlabel="log10 LR",
        )))
    return artifacts


# -- subcommands --------------------------------------------------------------


def cmd_fit(args) -> int:
    cfg = _load_pipeline_config(args.config, args)
    out_dir = cfg["output_dir"]
    out_dir.mkdir(parents=True, exist_ok=True)
    system, diagnostics, _ = _fit_from_config(cfg)
    artifacts = []
    with _stage("emit"):
        artifacts.append(_atomic(out_dir / "model.json", system.save))
        if cfg["variant"] == "binary-pca":
            artifacts.append(_atomic(out_dir / "scree.csv",
                                     lambda p: write_scree_csv(system.transform, p)))
        _write_manifest(out_dir, cfg["raw"], {"impute_base_seed": cfg["seed"]},
                        artifacts, diagnostics)
    print(f"fitted {cfg['variant']} system (M={system.m_max}); "
          f"within source: {system.within.provenance}")
    print(f"artifacts in {out_dir}")
    return 0


def cmd_run(args) -> int:
    cfg = _load_pipeline_config(args.config, args)
    if cfg["repeated"] is None:
        raise ConfigInvalid("run requires a repeated dataset for validation")
    out_dir = cfg["output_dir"]
    out_dir.mkdir(parents=True, exist_ok=True)
    system, diagnostics, repeated = _fit_from_config(cfg)
    with _stage("validate"):
        complete = split_composite_features(repeated)[0]
        complete = impute_missing(complete, cfg["seed"] + 1)
        collection = system.validate_against(complete)
    artifacts = []
    with _stage("emit"):
        artifacts.append(_atomic(out_dir / "model.json", system.save))
        if cfg["variant"] == "binary-pca":
            artifacts.append(_atomic(out_dir / "scree.csv",
                                     lambda p: write_scree_csv(system.transform, p)))
        artifacts.append(_atomic(out_dir / "comparisons.csv",
                                 lambda p: write_comparisons_csv(p, collection)))
        labels = [f"{c.query[0]}:{c.query[1]}|{c.reference[0]}:{c.reference[1]}"
                  for c in collection.comparisons]
        artifacts.append(_atomic(out_dir / "lr_details.csv",
                                 lambda p: write_lr_results_csv(p, collection.results, labels)))
        m_values = list(range(1, system.m_max + 1))
        artifacts.append(_atomic(out_dir / "rates.csv",
                                 lambda p: write_rates_csv(p, collection, m_values)))
        artifacts.extend(_emit_curves(out_dir, collection, system.m_max, args.svg))
        _write_manifest(out_dir, cfg["raw"], {
            "impute_base_seed": cfg["seed"],
            "impute_repeated_seed": cfg["seed"] + 1,
        }, artifacts, diagnostics)
    ds_rate, ss_rate = misleading_rates(collection, system.m_max)
    print(f"compared {len(collection)} pairs "
          f"({int(collection.mask('SS').sum())} SS / "
          f"{int((~collection.mask('SS')).sum())} DS) at M={system.m_max}")
    print(f"misleading rates: DS {ds_rate:.3f}, SS {ss_rate:.3f}")
    print(f"artifacts in {out_dir}")
    return 0


def _optional_config(args):
    if getattr(args, "config", None):
        return _load_pipeline_config(args.config, args)
    return None


def _resolve_arg(value, cfg, key, flag) -> Path:
    if value is not None:
        return Path(value)
    if cfg is not None and cfg.get(key) is not None:
        return Path(cfg[key])
    raise ConfigInvalid(f"missing {flag} (give the flag or a --config that provides it)")


def cmd_compare(args) -> int:
    cfg = _optional_config(args)
    model_path = _resolve_arg(
        args.model, cfg and {"model": cfg["output_dir"] / "model.json"},
        "model", "--model")
    schema_path = args.schema or (cfg and cfg["schema"])
    with _stage("load-model"):
        system = LrSystem.load(model_path)
    with _stage("load-profiles"):
        raw_schema = FeatureSchema.from_json(schema_path) if schema_path else system.schema
        query = load_dataset(args.query, raw_schema, "population")
        reference = load_dataset(args.reference, raw_schema, "population")
    with _stage("compare"):
        m = args.pcs or system.m_max
        result = system.compare(query, reference, M=m)
    print(f"within-variance source: {system.within.provenance}")
    print("NOTE: the reported LR assumes the fitted within-individual "
          "variability applies to this pair; differences in walking or "
          "recording conditions between the two profiles are not modelled "
          "and need expert assessment.")
    for j in range(m):
        print(f"  PC{j + 1}: log10 LR = {result.log10_per_pc[j]:+.4f}   "
              f"cumulative = {result.log10_cumulative[j]:+.4f}")
    value, truncated = result.reported_lr(m)
    print(f"reported LR (M={m}): {value:.6g}"
          + ("  [truncated at 1e-08]" if truncated else ""))
    return 0


def cmd_validate(args) -> int:
    cfg = _optional_config(args)
    model_path = _resolve_arg(
        args.model, cfg and {"model": cfg["output_dir"] / "model.json"},
        "model", "--model")
    schema_path = _resolve_arg(args.schema, cfg, "schema", "--schema")
    repeated_path = _resolve_arg(args.repeated, cfg, "repeated", "--repeated")
    out_dir = Path(args.out) if args.out else (cfg["output_dir"] if cfg else None)
    if out_dir is None:
        raise ConfigInvalid("missing --out (give the flag or a --config that provides it)")
    with _stage("load-model"):
        system = LrSystem.load(model_path)
    with _stage("ingest"):
        schema = FeatureSchema.from_json(schema_path)
        repeated = load_dataset(repeated_path, schema, "repeated")
    out_dir.mkdir(parents=True, exist_ok=True)
    with _stage("validate"):
        complete = split_composite_features(repeated)[0]
        complete = impute_missing(complete, args.seed or 0)
        collection = system.validate_against(complete)
    artifacts = []
    with _stage("emit"):
        artifacts.append(_atomic(out_dir / "comparisons.csv",
                                 lambda p: write_comparisons_csv(p, collection)))
        m_values = list(range(1, system.m_max + 1))
        artifacts.append(_atomic(out_dir / "rates.csv",
                                 lambda p: write_rates_csv(p, collection, m_values)))
        artifacts.extend(_emit_curves(out_dir, collection, system.m_max, args.svg))
        _write_manifest(out_dir, {"model": str(model_path), "repeated": str(repeated_path)},
                        {"impute_seed": args.seed or 0}, artifacts)
    ds_rate, ss_rate = misleading_rates(collection, system.m_max)
    print(f"misleading rates at M={system.m_max}: DS {ds_rate:.3f}, SS {ss_rate:.3f}")
    return 0


def _curve_cmd(args, kind: str) -> int:
    cfg = _optional_config(args)
    comparisons = _resolve_arg(
        args.comparisons,
        cfg and {"comparisons": cfg["output_dir"] / "comparisons.csv"},
        "comparisons", "--comparisons")
    out_dir = Path(args.out) if args.out else (cfg["output_dir"] if cfg else None)
    if out_dir is None:
        raise ConfigInvalid("missing --out (give the flag or a --config that provides it)")
    with _stage("ingest"):
        rows, m_max = read_comparisons_csv(comparisons)
    m = args.pcs or m_max
    if not 1 <= m <= m_max:
        raise ConfigInvalid(f"--pcs must lie in 1..{m_max}")
    out_dir.mkdir(parents=True, exist_ok=True)
    with _stage(kind):
        collection = collection_from_rows(rows, m, truncate=not args.no_truncate)
        artifacts = []
        if kind == "ece":
            curve = ece_curve(collection, with_pav=args.pav)
            artifacts.append(_atomic(out_dir / "ece.csv", curve.to_csv))
        else:
            curve = tippett(collection)
            artifacts.append(_atomic(out_dir / "tippett.csv", curve.to_csv))
        _write_manifest(out_dir, {"comparisons": str(comparisons), "m": m}, {}, artifacts)
    print(f"wrote {artifacts[0]}")
    return 0


def cmd_simulate(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with _stage("scenario"):
        if args.scenario:
            configs = load_scenario(args.scenario)
        else:
            configs = default_scenario(seed=args.seed if args.seed is not None else 1234)
    artifacts = []
    with _stage("generate"):
        schema = next(iter(configs.values())).schema
        artifacts.append(_atomic(out_dir / "schema.json", schema.to_json))
        artifacts.append(_atomic(out_dir / "scenario.json",
                                 lambda p: save_scenario(configs, p)))
        for name, config in configs.items():
            if config.n_occasions == 1:
                dataset = generate_population(config)
            else:
                dataset = generate_repeated(config)
            artifacts.append(_atomic(out_dir / f"{name}.csv", dataset.to_csv))
        _write_manifest(out_dir, {"scenario": args.scenario or "default"},
                        {name: c.seed for name, c in configs.items()}, artifacts)
    print(f"wrote {len(artifacts)} files to {out_dir}")
    return 0


def cmd_polychoric(args) -> int:
    cfg = _optional_config(args)
    schema_path = _resolve_arg(args.schema, cfg, "schema", "--schema")
    data_path = _resolve_arg(args.data, cfg, "population", "--data")
    out_dir = Path(args.out) if args.out else (cfg["output_dir"] if cfg else None)
    if out_dir is None:
        raise ConfigInvalid("missing --out (give the flag or a --config that provides it)")
    with _stage("ingest"):
        schema = FeatureSchema.from_json(schema_path)
        dataset = load_dataset(data_path, schema, args.kind)
    out_dir.mkdir(parents=True, exist_ok=True)
    with _stage("polychoric"):
        split, _ = split_composite_features(dataset)
        matrix = polychoric_matrix(split)
    with _stage("emit"):
        tmp_flags = out_dir / "polychoric_flags.csv.tmp"
        _atomic(out_dir / "polychoric.csv",
                lambda p: matrix.to_csv(p, flags_path=tmp_flags))
        os.replace(tmp_flags, out_dir / "polychoric_flags.csv")
    n_clamped = int(np.triu(matrix.clamped, 1).sum())
    print(f"{len(matrix.names)} features; {n_clamped} clamped pair(s)")
    print(f"wrote {out_dir / 'polychoric.csv'}")
    return 0


def cmd_assoc(args) -> int:
    cfg = _optional_config(args)
    schema_path = _resolve_arg(args.schema, cfg, "schema", "--schema")
    data_path = _resolve_arg(args.data, cfg, "population", "--data")
    out_dir = Path(args.out) if args.out else (cfg["output_dir"] if cfg else None)
    if out_dir is None:
        raise ConfigInvalid("missing --out (give the flag or a --config that provides it)")
    with _stage("ingest"):
        schema = FeatureSchema.from_json(schema_path)
        dataset = load_dataset(data_path, schema, "population")
    out_dir.mkdir(parents=True, exist_ok=True)
    with _stage("assoc"):
        split, _ = split_composite_features(dataset)
        names = args.features.split(",") if args.features else split.schema.names
        reports = [covariate_selection(split, name.strip()) for name in names]
    with _stage("emit"):
        _atomic(out_dir / "coefficients.csv",
                lambda p: write_coefficient_table(p, reports))
    for report in reports:
        if report.final is None:
            print(f"{report.feature}: {report.note}")
        else:
            blocks = ", ".join(report.included_blocks) or "none"
            print(f"{report.feature}: extra blocks included: {blocks}")
    print(f"wrote {out_dir / 'coefficients.csv'}")
    return 0


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaitlr",
        description="Likelihood ratios for ordinal gait-feature profiles.",
        epilog="GAITLR_THREADS caps worker threads (default: available cores).",
    )
    parser.add_argument("--version", action="version", version=f"gaitlr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--seed", type=int, default=None, help="override imputation base seed")
        p.add_argument("--pcs", type=int, default=None, help="override number of PCs")
        p.add_argument("--variance-preset", default=None,
                       help="within-variance preset (dataset-a, dataset-b, or a JSON file)")
        p.add_argument("--svg", action="store_true", help="also emit SVG plots")

    p = sub.add_parser("run", help="full pipeline: fit, validate, emit artifacts")
    add_config(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fit", help="fit and save the LR system only")
    add_config(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="LR for one query/reference profile pair")
    p.add_argument("--query", required=True, help="query profile CSV (one row)")
    p.add_argument("--reference", required=True, help="reference profile CSV (one row)")
    p.add_argument("--config", default=None, help="pipeline config (supplies model/schema)")
    p.add_argument("--model", default=None, help="model.json from fit/run")
    p.add_argument("--schema", default=None, help="raw schema JSON (defaults to model schema)")
    p.add_argument("--pcs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--variance-preset", default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", help="evaluate a repeated dataset against a saved model")
    p.add_argument("--config", default=None, help="pipeline config (supplies paths)")
    p.add_argument("--model", default=None)
    p.add_argument("--schema", default=None)
    p.add_argument("--repeated", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--pcs", type=int, default=None)
    p.add_argument("--variance-preset", default=None, help=argparse.SUPPRESS)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_validate)

    for kind in ("ece", "tippett"):
        p = sub.add_parser(kind, help=f"{kind} curve(s) from a comparisons CSV")
        p.add_argument("--config", default=None,
                       help="pipeline config (locates comparisons.csv in its output dir)")
        p.add_argument("--comparisons", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--pcs", type=int, default=None)
        p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
        p.add_argument("--variance-preset", default=None, help=argparse.SUPPRESS)
        if kind == "ece":
            p.add_argument("--pav", action="store_true", help="add the PAV-calibrated curve")
        p.add_argument("--no-truncate", action="store_true")
        p.set_defaults(func=lambda a, k=kind: _curve_cmd(a, k))

    p = sub.add_parser("simulate", help="generate synthetic datasets from a scenario")
    p.add_argument("--out", required=True)
    p.add_argument("--scenario", default=None, help="scenario JSON (default: bundled scenario)")
    p.add_argument("--seed", type=int, default=None, help="seed for the bundled scenario")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("polychoric", help="polychoric correlation matrix of a dataset")
    p.add_argument("--config", default=None, help="pipeline config (supplies paths)")
    p.add_argument("--schema", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--kind", choices=["population", "repeated"], default="population")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--pcs", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--variance-preset", default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_polychoric)

    p = sub.add_parser("assoc", help="demographic association models per feature")
    p.add_argument("--config", default=None, help="pipeline config (supplies paths)")
    p.add_argument("--schema", default=None)
    p.add_argument("--data", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--features", default=None, help="comma-separated feature names")
    p.add_argument("--seed", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--pcs", type=int, default=None, help=argparse.SUPPRESS)
    p.add_argument("--variance-preset", default=None, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_assoc)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageFailure as exc:
        if isinstance(exc.cause, ConfigInvalid):
            print(f"config error: {exc.cause}", file=sys.stderr)
            return 2
        report = {"stage": exc.stage, "error": type(exc.cause).__name__,
                  "message": str(exc.cause)}
        print(f"error: {json.dumps(report)}", file=sys.stderr)
        return 1
    except GaitLrError as exc:
        report = {"stage": "unknown", "error": type(exc).__name__, "message": str(exc)}
        print(f"error: {json.dumps(report)}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
