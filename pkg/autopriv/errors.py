"""
Exception hierarchy for the autopriv pipeline.
Every error raised on purpose by the library derives from AutoprivError.
"""


class AutoprivError(Exception):
    """Base class for all autopriv errors."""


class DatasetError(AutoprivError):
    """Raised when a table cannot be ingested or violates Dataset invariants."""


class SchemaError(AutoprivError):
    """Raised when two tables (or a table and a model) disagree on columns."""


class ConfigError(AutoprivError):
    """Raised for invalid pipeline settings or arguments."""


class GridError(AutoprivError):
    """Raised when a privacy configuration is not part of the canonical grid."""


class RiskProfileError(AutoprivError):
    """Raised for invalid quasi-identifier sets."""


class SynthesisError(AutoprivError):
    """Raised when a synthesizer cannot produce a variant."""


class LinkageError(AutoprivError):
    """Raised when a linkability evaluation cannot run."""


class LearningError(AutoprivError):
    """Raised by learners, scoring and cross-validation."""


class SearchError(AutoprivError):
    """Raised by hyperparameter search strategies."""


class MetaModelError(AutoprivError):
    """Raised when fitting or applying a meta-model fails."""


class NotFittedError(MetaModelError):
    """Raised when a meta-model is used before it was trained."""


class StatsError(AutoprivError):
    """Raised by the statistical comparison helpers."""


class PipelineError(AutoprivError):
    """Raised when a pipeline phase cannot start or finish."""
