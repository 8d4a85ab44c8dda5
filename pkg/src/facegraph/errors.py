"""Exception hierarchy shared across the package."""


class FaceGraphError(Exception):
    """Base class for all package errors."""


class ParseError(FaceGraphError):
    """A file could not be parsed; message carries file name and line number."""


class IntegrityError(FaceGraphError):
    """A dataset or clustering violates a structural invariant."""


class ConfigError(FaceGraphError):
    """A configuration value is out of range, inconsistent, or infeasible."""


class EvaluationError(FaceGraphError):
    """Evaluation inputs are unusable (e.g. faces without ground truth)."""


class CurationError(FaceGraphError):
    """Base class for curation-session failures."""


class StaleTargetError(CurationError):
    """An action referenced a cluster or face that no longer exists."""


class CannotLinkError(CurationError):
    """An action would place two faces from the same image in one cluster."""


class InvalidActionError(CurationError):
    """An action payload is malformed (e.g. split subset not proper)."""
