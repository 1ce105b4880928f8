"""Custom exceptions for the CoDD lab."""


class CoddLabError(Exception):
    """Base exception for all application errors."""

    category = "error"


class ValidationError(CoddLabError):
    """Base exception for malformed domain values."""

    category = "validation"


class SpaceMismatchError(ValidationError):
    """Raised when two values live on different input spaces."""

    pass


class InvalidDistributionError(ValidationError):
    """Raised when masses are negative or do not sum to one."""

    pass


class InvalidPartitionError(ValidationError):
    """Raised when a cell assignment is not total or not dense."""

    pass


class InvalidTreeError(ValidationError):
    """Raised when a decision tree queries an illegal bit."""

    pass


class InvalidParameterError(ValidationError):
    """Raised when a numeric parameter is out of range."""

    pass


class NonBooleanLabelError(ValidationError):
    """Raised when a Boolean labeling carries an output other than 0 or 1."""

    pass


class CapacityError(CoddLabError):
    """Raised when a problem exceeds an exhaustive-search or codec cap."""

    category = "capacity"


class CodecError(CoddLabError):
    """Base exception for bit-level encoding errors."""

    category = "codec"


class DecodeError(CodecError):
    """Raised when a bit string is not a valid CoDD encoding."""

    category = "decode"

    def __init__(self, offset: int, message: str):
        self.offset = offset
        super().__init__(f"decode error at offset {offset}: {message}")


class EvaluationError(CoddLabError):
    """Base exception for CoDD evaluation errors."""

    category = "evaluation"


class FuelExhaustedError(EvaluationError):
    """Raised when a total value is required but reduction ran out of fuel."""

    def __init__(self, steps: int):
        self.steps = steps
        super().__init__(f"fuel exhausted after {steps} steps")


class PatternError(CoddLabError):
    """Base exception for pattern calculus errors."""

    category = "pattern"


class UndefinedIntensityError(PatternError):
    """Raised when pattern intensity has a zero denominator."""

    pass


class GrowthError(CoddLabError):
    """Raised when a growth step does not target a leaf."""

    category = "growth"


class ArtifactError(CoddLabError):
    """Base exception for reading and writing artifacts."""

    category = "io"


class InputFileError(ArtifactError):
    """Raised when an input file cannot be parsed."""

    def __init__(self, path: str, offset: int | None, message: str):
        self.path = path
        self.offset = offset
        where = f"{path}" if offset is None else f"{path} at offset {offset}"
        super().__init__(f"malformed input {where}: {message}")


class FileOperationError(ArtifactError):
    """Raised when file operations fail."""

    pass


class ConfigurationError(CoddLabError):
    """Raised when configuration is invalid or missing."""

    category = "config"
