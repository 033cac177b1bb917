"""Exception hierarchy.

The CLI maps these onto exit codes, so the split matters:
promise violations (2), algorithm-reported failures (3), configuration (4).
"""


class DigraphStreamError(Exception):
    """Base class for every error raised by this package."""


class PromiseViolation(DigraphStreamError, ValueError):
    """The input does not satisfy the promise an algorithm relies on."""


class NotATournamentOrder(PromiseViolation):
    """In-degrees of a tournament are not exactly {0, ..., n-1}."""


class AlgorithmFailure(DigraphStreamError):
    """A randomized algorithm reports that it did not produce an answer."""


class StreamError(DigraphStreamError):
    """Misuse of the pass protocol of an :class:`EdgeStream`."""


class PassBudgetExceeded(StreamError, AlgorithmFailure):
    pass


class ConfigError(DigraphStreamError, ValueError):
    """Invalid parameters, caps exceeded, or an instance outside the regime."""


class CapExceeded(ConfigError):
    pass


class RegimeError(ConfigError):
    """Instance below the algorithm's regime for the chosen constants."""
