"""Exception taxonomy.

Every failure mode that callers are expected to catch has its own class so
that the CLI and the service can map errors to diagnostics without string
matching.  All inherit from GaussKitError.
"""

from __future__ import annotations


class GaussKitError(Exception):
    """Base class for all errors raised by this package."""


class SpecValidationError(GaussKitError):
    """Input document (expression map or ruled spec) is malformed."""


class UnknownVariable(SpecValidationError):
    """An expression references a variable not declared by its map."""


class DomainError(GaussKitError):
    """Evaluation hit a singularity (division by a vanishing denominator)."""


class NotImmersed(GaussKitError):
    """The differential of the map fails to have full column rank."""


class SingularBasePoint(NotImmersed):
    """A ruled chart is singular at the requested base point."""


class FrameIllConditioned(GaussKitError):
    """The moving frame matrix is too ill conditioned to invert reliably."""


class SingularLeadingForm(GaussKitError):
    """The leading form of a pencil is singular; eigenvalues undefined."""


class NoRegularPair(GaussKitError):
    """Search for a regular pencil pair with distinct roots exhausted its budget."""


class MTooSmall(GaussKitError):
    """Fewer than two independent second forms; no pencil to analyze."""


class BudgetExceeded(GaussKitError):
    """A rejection-sampling constructor ran out of attempts."""


class HypothesisNotMet(GaussKitError):
    """A computation was invoked outside the hypotheses that justify it."""


class DriftTooLarge(GaussKitError):
    """Per-sample subspaces disagree more than the tolerance allows."""


class InconsistentVertex(GaussKitError):
    """Sampled focal flats do not meet in a common vertex flat."""


class DependentGenerators(GaussKitError):
    """Requested leaf directions are linearly dependent (or meet the base tangent)."""


class DegenerateJoin(GaussKitError):
    """A cone construction produced a degenerate join (apex on the directrix)."""
