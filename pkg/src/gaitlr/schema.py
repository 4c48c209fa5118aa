"""Feature schema: ordered-level definitions, sidedness, and composite-split rules.

A schema declares, for every feature, its ordered level labels (index 0..L-1),
which body side it belongs to (if any), and - for composite features whose raw
levels mix two axes - a split rule that replaces the feature with two or more
ordered derived features.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .errors import SchemaViolation

SIDES = ("none", "left", "right")

#: Reserved dataset column names parsed into a demographic profile, never features.
DEMOGRAPHIC_FIELDS = ("sex", "height", "weight", "age_group", "ethnicity", "location")


@dataclass(frozen=True)
class SplitTarget:
    """One derived feature produced by splitting a composite feature.

    ``mapping`` sends every raw level label of the composite to a level label
    of this target.
    """

    name: str
    levels: tuple[str, ...]
    mapping: dict[str, str]


@dataclass(frozen=True)
class FeatureDef:
    """A single feature of gait with its ordered level labels."""

    name: str
    levels: tuple[str, ...]
    side: str = "none"
    ordered: bool = True
    split_rule: tuple[SplitTarget, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        if len(self.levels) < 2:
            raise SchemaViolation(f"feature {self.name!r} needs at least 2 levels")
        if len(set(self.levels)) != len(self.levels):
            raise SchemaViolation(f"feature {self.name!r} has duplicate level labels")
        if self.side not in SIDES:
            raise SchemaViolation(f"feature {self.name!r} has unknown side {self.side!r}")
        if not self.ordered and self.split_rule is None:
            raise SchemaViolation(
                f"feature {self.name!r}: unordered features must carry a split rule"
            )
        if self.split_rule is not None:
            object.__setattr__(self, "split_rule", tuple(self.split_rule))
            for target in self.split_rule:
                for lvl in self.levels:
                    if lvl not in target.mapping:
                        raise SchemaViolation(
                            f"split rule for {self.name!r} maps level {lvl!r} nowhere "
                            f"in target {target.name!r}"
                        )
                for src, dst in target.mapping.items():
                    if src not in self.levels:
                        raise SchemaViolation(
                            f"split rule for {self.name!r} refers to unknown level {src!r}"
                        )
                    if dst not in target.levels:
                        raise SchemaViolation(
                            f"split rule for {self.name!r} maps {src!r} to {dst!r}, "
                            f"not a level of {target.name!r}"
                        )

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def level_index(self, label: str) -> int:
        try:
            return self.levels.index(label)
        except ValueError:
            raise SchemaViolation(
                f"level {label!r} not declared for feature {self.name!r}"
            ) from None


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered collection of feature definitions plus a version tag.

    ``demographics`` optionally declares the category vocabulary for each
    demographic field; when present, loaded profiles are validated against it.
    """

    features: tuple[FeatureDef, ...]
    version: str = "1"
    demographics: dict[str, tuple[str, ...]] | None = None

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaViolation("feature names must be unique")
        if self.demographics is not None:
            for key in self.demographics:
                if key not in DEMOGRAPHIC_FIELDS:
                    raise SchemaViolation(f"unknown demographic field {key!r}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    def __contains__(self, name: str) -> bool:
        return any(f.name == name for f in self.features)

    def feature(self, name: str) -> FeatureDef:
        for f in self.features:
            if f.name == name:
                return f
        raise SchemaViolation(f"unknown feature {name!r}")

    @property
    def is_split(self) -> bool:
        """True when no feature carries a pending split rule."""
        return all(f.split_rule is None for f in self.features)

    @property
    def n_binary_columns(self) -> int:
        """Total r = sum_j (L_j - 1) over ordered features."""
        return sum(f.n_levels - 1 for f in self.features)

    def split(self) -> "FeatureSchema":
        """Replace composite features by their split targets, in place order.

        Idempotent: a schema with no split rules is returned unchanged.
        """
        if self.is_split:
            return self
        out: list[FeatureDef] = []
        for f in self.features:
            if f.split_rule is None:
                out.append(f)
            else:
                for target in f.split_rule:
                    out.append(FeatureDef(target.name, target.levels, side=f.side))
        return FeatureSchema(tuple(out), version=self.version, demographics=self.demographics)

    def restrict(self, names) -> "FeatureSchema":
        """Keep only the named features, preserving schema order."""
        keep = set(names)
        missing = keep - set(self.names)
        if missing:
            raise SchemaViolation(f"cannot restrict to unknown features {sorted(missing)}")
        feats = tuple(f for f in self.features if f.name in keep)
        return FeatureSchema(feats, version=self.version, demographics=self.demographics)

    # -- serialization --------------------------------------------------

    def to_json_obj(self) -> dict:
        feats = []
        for f in self.features:
            d = {"name": f.name, "levels": list(f.levels), "side": f.side,
                 "ordered": f.ordered}
            if f.split_rule is not None:
                d["split_rule"] = [
                    {"name": t.name, "levels": list(t.levels), "map": dict(t.mapping)}
                    for t in f.split_rule
                ]
            feats.append(d)
        obj = {"version": self.version, "features": feats}
        if self.demographics is not None:
            obj["demographics"] = {k: list(v) for k, v in self.demographics.items()}
        return obj

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_obj(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json_obj(cls, obj) -> "FeatureSchema":
        # Accept either a bare feature array or {version, features, demographics}.
        if isinstance(obj, list):
            version, feats_raw, demo_raw = "1", obj, None
        else:
            version = str(obj.get("version", "1"))
            feats_raw = obj["features"]
            demo_raw = obj.get("demographics")
        feats = []
        for d in feats_raw:
            rule = None
            if d.get("split_rule") is not None:
                rule = tuple(
                    SplitTarget(t["name"], tuple(t["levels"]), dict(t["map"]))
                    for t in d["split_rule"]
                )
            feats.append(
                FeatureDef(
                    d["name"],
                    tuple(d["levels"]),
                    side=d.get("side", "none"),
                    ordered=bool(d.get("ordered", True)),
                    split_rule=rule,
                )
            )
        demo = None
        if demo_raw is not None:
            demo = {k: tuple(v) for k, v in demo_raw.items()}
        return cls(tuple(feats), version=version, demographics=demo)

    @classmethod
    def from_json(cls, path) -> "FeatureSchema":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))

    def digest(self) -> str:
        """Stable hash of the schema content, used to tie models to schemas."""
        blob = json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def head_tilt_feature(name: str = "head tilt") -> FeatureDef:
    """Composite head tilt with the standard frontal/sagittal split rule."""
    levels = ("none", "forward", "backward", "left", "right")
    frontal = SplitTarget(
        "frontal head tilt",
        ("left", "none", "right"),
        {"none": "none", "forward": "none", "backward": "none",
         "left": "left", "right": "right"},
    )
    sagittal = SplitTarget(
        "sagittal head tilt",
        ("backward", "none", "forward"),
        {"none": "none", "forward": "forward", "backward": "backward",
         "left": "none", "right": "none"},
    )
    return FeatureDef(name, levels, ordered=False, split_rule=(frontal, sagittal))


def roll_feature(name: str = "roll") -> FeatureDef:
    """Composite head roll with the standard roll-left/roll-right split rule."""
    levels = ("left", "right", "none", "both")
    left = SplitTarget(
        "roll left",
        ("no", "yes"),
        {"left": "yes", "right": "no", "none": "no", "both": "yes"},
    )
    right = SplitTarget(
        "roll right",
        ("no", "yes"),
        {"left": "no", "right": "yes", "none": "no", "both": "yes"},
    )
    return FeatureDef(name, levels, ordered=False, split_rule=(left, right))
