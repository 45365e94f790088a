"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the domain an operation is defined on."""


class ConfigError(ValueError):
    """An experiment configuration is malformed; message names the offending key."""


class InsufficientDataError(RuntimeError):
    """A statistical estimate has too few effective samples to be reported."""


class SeriesTruncationError(RuntimeError):
    """A series could not reach the requested tolerance within the term cap."""

    def __init__(self, message, value, truncation_bound, terms_used):
        super().__init__(message)
        self.value = value
        self.truncation_bound = truncation_bound
        self.terms_used = terms_used
