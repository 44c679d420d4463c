"""Exception hierarchy.

``ValidationError`` subclasses signal rejected input (CLI exit code 2);
everything else under ``ArmError`` is a runtime failure (exit code 1).
"""


class ArmError(Exception):
    """Base class for all armstore errors."""


class ValidationError(ArmError):
    """Input rejected before any state was mutated."""


class DimensionMismatch(ValidationError):
    pass


class NonFiniteComponent(ValidationError):
    pass


class DuplicateId(ValidationError):
    pass


class InvalidValue(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class InvalidThreshold(ValidationError):
    pass


class InvalidSpec(ValidationError):
    pass


class UnknownProfile(ValidationError):
    pass


class EmptyStore(ValidationError):
    pass


class EmptyJudgment(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class NotFound(ArmError):
    pass


class UnknownId(ArmError):
    pass


class ParseError(ArmError):
    """Malformed input file; message carries the line number."""


class BadMagic(ArmError):
    pass


class UnsupportedVersion(ArmError):
    pass


class CorruptRecord(ArmError):
    """Snapshot record unreadable; message carries the byte offset."""


class IoFailure(ArmError):
    pass
