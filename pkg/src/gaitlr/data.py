"""Dataset containers, CSV loading/saving, composite splitting, and imputation.

On-disk contract: a UTF-8 comma-separated file with header
``individual_id,occasion_id,<feature names...>``. Cells hold level labels;
an empty cell is a missing value. Optional extra columns named ``sex``,
``height``, ``weight``, ``age_group``, ``ethnicity`` or ``location`` are
parsed into per-record demographic profiles.
"""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DuplicateKey,
    ImputationImpossible,
    ParseError,
    SchemaViolation,
)
from .schema import DEMOGRAPHIC_FIELDS, FeatureSchema

logger = logging.getLogger(__name__)

MISSING = None


def thread_count() -> int:
    """Worker cap honouring the GAITLR_THREADS environment variable."""
    avail = os.cpu_count() or 1
    raw = os.environ.get("GAITLR_THREADS")
    if raw is None:
        return avail
    try:
        n = int(raw)
    except ValueError:
        return avail
    return max(1, min(n, avail))


@dataclass(frozen=True)
class DemographicProfile:
    sex: str | None = None
    height: str | None = None
    weight: str | None = None
    age_group: str | None = None
    ethnicity: str | None = None
    location: str | None = None

    def get(self, field: str) -> str | None:
        return getattr(self, field)


@dataclass(frozen=True)
class GaitRecord:
    """One individual's ordinal profile on one observation occasion.

    ``values`` maps feature name to level index, or None when missing.
    """

    individual_id: str
    occasion_id: str
    values: dict[str, int | None]
    demographics: DemographicProfile | None = None


class _BaseDataset:
    """Shared behaviour of population and repeated datasets."""

    kind = "base"

    def __init__(self, schema: FeatureSchema, records):
        self.schema = schema
        self.records = tuple(records)
        for rec in self.records:
            for name, value in rec.values.items():
                feat = schema.feature(name)
                if value is not None and not (0 <= value < feat.n_levels):
                    raise SchemaViolation(
                        f"record ({rec.individual_id},{rec.occasion_id}): value {value} "
                        f"out of range for feature {name!r}"
                    )

    def __len__(self) -> int:
        return len(self.records)

    @property
    def individuals(self) -> tuple[str, ...]:
        """Individual ids in first-appearance order."""
        seen: dict[str, None] = {}
        for rec in self.records:
            seen.setdefault(rec.individual_id, None)
        return tuple(seen)

    @property
    def has_missing(self) -> bool:
        return any(
            rec.values.get(name) is None
            for rec in self.records
            for name in self.schema.names
        )

    def value_matrix(self) -> np.ndarray:
        """(n_records, n_features) int matrix in schema order; -1 marks missing."""
        names = self.schema.names
        out = np.full((len(self.records), len(names)), -1, dtype=np.int64)
        for i, rec in enumerate(self.records):
            for j, name in enumerate(names):
                v = rec.values.get(name)
                if v is not None:
                    out[i, j] = v
        return out

    def row_keys(self) -> list[tuple[str, str]]:
        return [(r.individual_id, r.occasion_id) for r in self.records]

    def _with_records(self, records):
        return type(self)(self.schema, records)

    def restrict_to_features(self, names) -> "_BaseDataset":
        """Project the dataset onto a feature subset (schema order preserved)."""
        sub = self.schema.restrict(names)
        keep = set(sub.names)
        recs = [
            replace(rec, values={k: v for k, v in rec.values.items() if k in keep})
            for rec in self.records
        ]
        return type(self)(sub, recs)

    def to_csv(self, path) -> None:
        save_dataset(self, path)


class PopulationDataset(_BaseDataset):
    """One observation occasion per individual."""

    kind = "population"

    def __init__(self, schema, records):
        super().__init__(schema, records)
        seen = set()
        for rec in self.records:
            if rec.individual_id in seen:
                raise DuplicateKey(
                    f"population dataset has two rows for individual {rec.individual_id!r}"
                )
            seen.add(rec.individual_id)


class RepeatedDataset(_BaseDataset):
    """Several observation occasions per individual, grouped by individual."""

    kind = "repeated"

    def __init__(self, schema, records):
        super().__init__(schema, records)
        seen = set()
        for rec in self.records:
            key = (rec.individual_id, rec.occasion_id)
            if key in seen:
                raise DuplicateKey(f"duplicate (individual, occasion) row {key}")
            seen.add(key)

    def occasions_of(self, individual_id: str) -> tuple[GaitRecord, ...]:
        return tuple(r for r in self.records if r.individual_id == individual_id)

    @property
    def counts(self) -> dict[str, int]:
        """Occasion count per individual, in first-appearance order."""
        out: dict[str, int] = {}
        for rec in self.records:
            out[rec.individual_id] = out.get(rec.individual_id, 0) + 1
        return out


# -- CSV loading / saving ------------------------------------------------


def load_dataset(path, schema: FeatureSchema, kind: str):
    """Load and validate a dataset CSV against the schema.

    ``kind`` is ``"population"`` or ``"repeated"``. Every schema feature must
    appear as a column; unknown non-demographic columns, unknown level labels
    and duplicate keys are rejected.
    """
    if kind not in ("population", "repeated"):
        raise ValueError(f"kind must be population or repeated, got {kind!r}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if header[:2] != ["individual_id", "occasion_id"]:
            raise ParseError(
                f"{path}: header must start with individual_id,occasion_id"
            )
        feature_cols: dict[str, int] = {}
        demo_cols: dict[str, int] = {}
        for idx, col in enumerate(header[2:], start=2):
            if col in schema.names:
                feature_cols[col] = idx
            elif col in DEMOGRAPHIC_FIELDS:
                demo_cols[col] = idx
            else:
                raise SchemaViolation(f"{path}: unknown column {col!r}")
        absent = set(schema.names) - set(feature_cols)
        if absent:
            raise ParseError(f"{path}: missing feature columns {sorted(absent)}")

        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            values: dict[str, int | None] = {}
            for name, idx in feature_cols.items():
                raw = row[idx].strip()
                if raw == "":
                    values[name] = None
                else:
                    feat = schema.feature(name)
                    if raw not in feat.levels:
                        raise SchemaViolation(
                            f"{path}:{lineno}: level {raw!r} not in schema for "
                            f"feature {name!r}"
                        )
                    values[name] = feat.level_index(raw)
            demo = None
            if demo_cols:
                fields = {}
                for dname, idx in demo_cols.items():
                    raw = row[idx].strip()
                    fields[dname] = raw or None
                    vocab = (schema.demographics or {}).get(dname)
                    if raw and vocab is not None and raw not in vocab:
                        raise SchemaViolation(
                            f"{path}:{lineno}: {dname} category {raw!r} not in "
                            "schema vocabulary"
                        )
                demo = DemographicProfile(**fields)
            records.append(
                GaitRecord(row[0].strip(), row[1].strip(), values, demographics=demo)
            )
    cls = PopulationDataset if kind == "population" else RepeatedDataset
    return cls(schema, records)


def save_dataset(dataset, path) -> None:
    """Write the canonical CSV form (inverse of :func:`load_dataset`)."""
    schema = dataset.schema
    demo_fields = [
        f
        for f in DEMOGRAPHIC_FIELDS
        if any(
            r.demographics is not None and r.demographics.get(f) is not None
            for r in dataset.records
        )
    ]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["individual_id", "occasion_id", *schema.names, *demo_fields])
        for rec in dataset.records:
            cells = [rec.individual_id, rec.occasion_id]
            for name in schema.names:
                v = rec.values.get(name)
                cells.append("" if v is None else schema.feature(name).levels[v])
            for f in demo_fields:
                v = rec.demographics.get(f) if rec.demographics else None
                cells.append(v if v is not None else "")
            writer.writerow(cells)


# -- composite splitting -------------------------------------------------


def split_composite_features(dataset, schema: FeatureSchema | None = None):
    """Replace composite features by their split targets in data and schema.

    Missing composite values propagate to every derived column. Idempotent on
    already-split schemas. Returns ``(dataset', schema')``.
    """
    schema = schema or dataset.schema
    if schema.is_split:
        return dataset, schema
    new_schema = schema.split()
    new_records = []
    for rec in dataset.records:
        values: dict[str, int | None] = {}
        for feat in schema.features:
            v = rec.values.get(feat.name)
            if feat.split_rule is None:
                values[feat.name] = v
            else:
                for target in feat.split_rule:
                    if v is None:
                        values[target.name] = None
                    else:
                        label = feat.levels[v]
                        values[target.name] = target.levels.index(target.mapping[label])
        new_records.append(replace(rec, values=values))
    cls = type(dataset)
    return cls(new_schema, new_records), new_schema


# -- imputation ----------------------------------------------------------


def impute_missing(dataset, seed: int):
    """Fill missing values by resampling observed ones.

    Each missing cell is drawn uniformly from the same individual's observed
    values for that feature; if the individual never shows the feature, from
    all other individuals' observed values. Deterministic given ``seed``;
    donor pools are built from the original data only. A dataset with no
    missing values is returned unchanged.
    """
    if not dataset.has_missing:
        return dataset
    rng = np.random.default_rng(seed)
    names = dataset.schema.names

    own_pool: dict[tuple[str, str], list[int]] = {}
    all_pool: dict[str, list[tuple[str, int]]] = {name: [] for name in names}
    for rec in dataset.records:
        for name in names:
            v = rec.values.get(name)
            if v is not None:
                own_pool.setdefault((rec.individual_id, name), []).append(v)
                all_pool[name].append((rec.individual_id, v))

    new_records = []
    for rec in dataset.records:
        values = dict(rec.values)
        for name in names:
            if values.get(name) is not None:
                continue
            pool = own_pool.get((rec.individual_id, name))
            if not pool:
                pool = [v for ind, v in all_pool[name] if ind != rec.individual_id]
            if not pool:
                raise ImputationImpossible(
                    f"feature {name!r} has no observed values to draw from"
                )
            values[name] = pool[int(rng.integers(len(pool)))]
        new_records.append(replace(rec, values=values))
    return dataset._with_records(new_records)


def impute_replicates(dataset, n_reps: int, base_seed: int, stat):
    """Mean and standard deviation of ``stat`` over imputation replicates.

    Replicate ``r`` uses seed ``base_seed + r``. ``stat`` maps a completed
    dataset to a real vector. With a single replicate (or no missing data)
    the standard deviation is zero by convention.
    """
    if n_reps < 1:
        raise ValueError("n_reps must be >= 1")
    if not dataset.has_missing:
        value = np.asarray(stat(dataset), dtype=float)
        return value, np.zeros_like(value)
    seeds = [base_seed + r for r in range(n_reps)]

    def one(seed):
        return np.asarray(stat(impute_missing(dataset, seed)), dtype=float)

    workers = min(thread_count(), n_reps)
    if workers > 1 and n_reps > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    stacked = np.stack(results)
    return stacked.mean(axis=0), stacked.std(axis=0)


# -- joint-analysis helper ------------------------------------------------


def align_feature_sets(population, repeated):
    """Intersect the feature sets of two datasets before joint analysis.

    Logs a warning when either side loses features. Returns the (possibly
    restricted) pair.
    """
    pop_names, rep_names = set(population.schema.names), set(repeated.schema.names)
    common = [n for n in population.schema.names if n in rep_names]
    if not common:
        raise SchemaViolation("datasets share no features")
    dropped = sorted((pop_names | rep_names) - set(common))
    if dropped:
        logger.warning(
            "datasets disagree on features; restricting both to the %d common "
            "features (dropped: %s)", len(common), ", ".join(dropped)
        )
        population = population.restrict_to_features(common)
        repeated = repeated.restrict_to_features(common)
    return population, repeated
