import numpy as np
import pytest

from gaitlr import (
    FeatureDef,
    FeatureSchema,
    GaitRecord,
    PopulationDataset,
    RepeatedDataset,
    default_scenario,
    fit_system,
    generate_population,
    generate_repeated,
    head_tilt_feature,
    roll_feature,
)


@pytest.fixture(scope="session")
def toy_schema():
    return FeatureSchema((
        FeatureDef("stride", ("short", "medium", "long")),
        FeatureDef("lean", ("none", "slight", "marked", "extreme")),
        FeatureDef("shuffle", ("no", "yes")),
    ))


@pytest.fixture(scope="session")
def raw_schema():
    """Schema with the two composite features still unsplit."""
    return FeatureSchema((
        FeatureDef("stride", ("short", "medium", "long")),
        head_tilt_feature(),
        roll_feature(),
    ))


def make_repeated(schema, rows):
    records = [GaitRecord(ind, occ, dict(values)) for ind, occ, values in rows]
    return RepeatedDataset(schema, records)


def make_population(schema, rows):
    records = [GaitRecord(ind, occ, dict(values)) for ind, occ, values in rows]
    return PopulationDataset(schema, records)


@pytest.fixture(scope="session")
def scenario():
    """Default desk-scale scenario datasets (deterministic)."""
    configs = default_scenario(seed=1234)
    return {
        "configs": configs,
        "population": generate_population(configs["population"]),
        "repeated_low": generate_repeated(configs["repeated_low"]),
        "repeated_high": generate_repeated(configs["repeated_high"]),
    }


@pytest.fixture(scope="session")
def fitted(scenario):
    """System fitted on the scenario population with estimated within-variance."""
    system, diagnostics = fit_system(
        scenario["population"],
        scenario["repeated_low"],
        within="estimate",
        basis="correlation",
        m=4,
    )
    return {"system": system, "diagnostics": diagnostics, **scenario}


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
