"""Exception and warning types shared across the package."""


class GaitLrError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(GaitLrError):
    """A data file is malformed (bad header, wrong field count, bad value)."""


class SchemaViolation(GaitLrError):
    """Data refers to a feature or level that the schema does not declare."""


class DuplicateKey(GaitLrError):
    """Two rows share a key that must be unique."""


class ImputationImpossible(GaitLrError):
    """A feature is missing for every observation, so no donor pool exists."""


class MissingValue(GaitLrError):
    """An operation that requires complete data received missing values."""


class NonCumulativePattern(GaitLrError):
    """A binary block is not monotone non-increasing, so it has no ordinal preimage."""


class DegenerateMargins(GaitLrError):
    """A contingency table has fewer than two non-empty categories on a margin."""


class ConstantColumn(GaitLrError):
    """A zero-variance column cannot be standardised."""


class ShapeMismatch(GaitLrError):
    """Matrix dimensions are incompatible with the fitted model."""


class TooFewSamples(GaitLrError):
    """Not enough observations for the requested estimate."""


class NoReplication(GaitLrError):
    """No individual has more than one occasion; within-variance is inestimable."""


class QuadratureNonconvergence(GaitLrError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class ModelMismatch(GaitLrError):
    """Inputs were produced by different fitted models."""


class InsufficientData(GaitLrError):
    """The dataset cannot support the requested comparison plan."""


class EmptyClass(GaitLrError):
    """A computation needs at least one same-source and one different-source entry."""


class SeparationDetected(GaitLrError):
    """Logistic coefficients diverge; the classes are (quasi-)separable."""


class RankDeficient(GaitLrError):
    """The design matrix does not have full column rank."""


class OneClassOnly(GaitLrError):
    """The response takes a single value; nothing to fit."""


class LevelAbsent(GaitLrError):
    """An ordinal response level has no observations."""


class ConfigInvalid(GaitLrError):
    """A configuration object fails its validity checks."""


class RankWarning(UserWarning):
    """An eigenvalue fell below the rank tolerance (non-fatal)."""


class DegenerateSpread(UserWarning):
    """A sample had zero spread; a floor value was substituted."""
