"""Dichotomization of ordinal features into cumulative binary indicators.

A feature with L ordered levels becomes L-1 exceedance columns: column k is 1
when the observed level is greater than k. Within a feature the columns of a
row therefore read 1,1,...,1,0,...,0 (thermometer coding), and the level can
be recovered as the column sum.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import MissingValue, NonCumulativePattern, ShapeMismatch
from .schema import FeatureSchema


@dataclass(frozen=True)
class BinaryMatrix:
    """Binary exceedance matrix plus the map back to schema columns.

    ``columns`` holds (feature name, threshold k) per matrix column, in schema
    order then ascending k. ``row_keys`` holds (individual_id, occasion_id).
    """

    data: np.ndarray
    columns: tuple[tuple[str, int], ...]
    row_keys: tuple[tuple[str, str], ...]
    schema: FeatureSchema

    def __post_init__(self):
        if self.data.shape != (len(self.row_keys), len(self.columns)):
            raise ShapeMismatch(
                f"data shape {self.data.shape} does not match "
                f"{len(self.row_keys)} rows x {len(self.columns)} columns"
            )

    @property
    def column_names(self) -> tuple[str, ...]:
        return tuple(f"{name}__gt{k}" for name, k in self.columns)

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_columns(self) -> int:
        return self.data.shape[1]

    def to_csv(self, path) -> None:
        """Audit export with the generated column names."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["individual_id", "occasion_id", *self.column_names])
            for (ind, occ), row in zip(self.row_keys, self.data):
                writer.writerow([ind, occ, *row.tolist()])


def binary_columns(schema: FeatureSchema) -> tuple[tuple[str, int], ...]:
    """Column layout (feature, k) implied by a schema, in schema order."""
    cols = []
    for feat in schema.features:
        for k in range(feat.n_levels - 1):
            cols.append((feat.name, k))
    return tuple(cols)


def recode_ordinal_to_binary(dataset, schema: FeatureSchema | None = None) -> BinaryMatrix:
    """Recode a complete dataset into its cumulative binary form.

    Raises :class:`MissingValue` if any cell is missing (impute first).
    """
    schema = schema or dataset.schema
    values = dataset.value_matrix()
    if (values < 0).any():
        i, j = np.argwhere(values < 0)[0]
        ind, occ = dataset.row_keys()[i]
        raise MissingValue(
            f"record ({ind},{occ}) is missing feature {schema.names[j]!r}; "
            "impute before recoding"
        )
    cols = binary_columns(schema)
    data = np.empty((values.shape[0], len(cols)), dtype=np.int8)
    for idx, (name, k) in enumerate(cols):
        j = schema.names.index(name)
        data[:, idx] = values[:, j] > k
    return BinaryMatrix(data, cols, tuple(dataset.row_keys()), schema)


def decode_binary_to_ordinal(matrix: BinaryMatrix, schema: FeatureSchema | None = None):
    """Invert :func:`recode_ordinal_to_binary`; level = per-feature column sum.

    Raises :class:`NonCumulativePattern` for rows like (0, 1) that violate the
    monotone coding and have no ordinal preimage.
    """
    from .data import GaitRecord, PopulationDataset, RepeatedDataset

    schema = schema or matrix.schema
    expected = binary_columns(schema)
    if matrix.columns != expected:
        raise ShapeMismatch("matrix columns do not match the schema layout")

    records = []
    start = 0
    spans = []
    for feat in schema.features:
        spans.append((feat, start, start + feat.n_levels - 1))
        start += feat.n_levels - 1

    for (ind, occ), row in zip(matrix.row_keys, matrix.data):
        values: dict[str, int | None] = {}
        for feat, lo, hi in spans:
            block = row[lo:hi]
            if np.any(np.diff(block) > 0):
                raise NonCumulativePattern(
                    f"row ({ind},{occ}), feature {feat.name!r}: pattern "
                    f"{block.tolist()} is not cumulative"
                )
            values[feat.name] = int(block.sum())
        records.append(GaitRecord(ind, occ, values))

    inds = [k[0] for k in matrix.row_keys]
    cls = PopulationDataset if len(set(inds)) == len(inds) else RepeatedDataset
    return cls(schema, records)
