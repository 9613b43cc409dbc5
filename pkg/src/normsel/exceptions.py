"""Exception hierarchy shared by all normsel modules."""


class NormselError(Exception):
    """Base class for every error raised by this package."""


class InputError(NormselError, ValueError):
    """Malformed user input: out-of-range symbols, bad lengths, bad files."""


class StructuralError(NormselError):
    """An automaton lacks a structural property an operation relies on."""


class ConfigurationError(NormselError, ValueError):
    """Inconsistent construction parameters (block sizes, budgets)."""


class CorruptionError(NormselError):
    """An encoded stream cannot be parsed or fails its self-check."""


class InconclusiveError(NormselError):
    """A finite simulation did not reach the regime it was probing for."""
