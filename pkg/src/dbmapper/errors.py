"""Exception types raised across the package."""


class DBMapperError(ValueError):
    """Base class for all package errors."""


class InvalidParameterError(DBMapperError):
    pass


class DegenerateCoverError(DBMapperError):
    pass


class NonRegularCoverError(DBMapperError):
    pass


class InputFormatError(DBMapperError):
    """Malformed input file (bad CSV header, missing lens column, ...)."""


class VerificationError(DBMapperError):
    pass
