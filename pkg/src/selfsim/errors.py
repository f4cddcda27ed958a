"""Exception hierarchy for the selfsim package.

Exceptions are grouped by how the command-line driver maps them to exit
codes: input problems (bad configs, violated preconditions) exit with 2,
resource-cap overruns with 3, and certificate failures with 1.
"""

from __future__ import annotations


class SelfsimError(Exception):
    """Base class for all package-specific errors."""


class InputError(SelfsimError):
    """Invalid input: malformed config, violated precondition, bad argument."""


class PreconditionError(InputError):
    """An operation's documented precondition was violated."""


class UnsupportedInputError(InputError):
    """Input is valid but outside the supported class (e.g. irrational
    rotation angles in the uniformization step)."""


class ConfigError(InputError):
    """Run configuration failed validation."""


class ResourceCapError(SelfsimError):
    """An enumeration would exceed the configured piece/memory cap."""


class ExtractionFailedError(SelfsimError):
    """The separated sub-family extraction produced no candidates."""


class UniformizationFailedError(SelfsimError):
    """No iteration depth in the search window yields a usable uniform
    sub-family."""


class PersistentAngleError(SelfsimError):
    """No grid angle meets the required orbit-density floor."""


class HypothesisError(SelfsimError):
    """The nested-family hypotheses of the graph construction are violated
    (non-nested levels, vertical pieces, or inconsistent fitted constants)."""
