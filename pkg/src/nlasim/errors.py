"""Exception types shared across the simulator."""


class EnvelopeError(RuntimeError):
    """The requested computation exceeds the numerical envelope.

    Raised when a truncated-basis operation would leak more probability
    weight past the cutoff than the configured threshold allows, or when
    a state space would be too large to simulate densely.
    """


class ConfigError(ValueError):
    """An experiment configuration file or value is invalid."""
