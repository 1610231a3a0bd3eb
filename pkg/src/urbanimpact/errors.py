"""Exception hierarchy shared across the package.

Everything user-facing derives from ``UrbanImpactError`` so the CLI can map
bad inputs and bad requests to exit code 2, reserving exit code 1 for
genuine internal failures.
"""


class UrbanImpactError(Exception):
    """Base class for all errors raised by this package."""


# --- corpus / input validation ------------------------------------------------

class MissingColumn(UrbanImpactError):
    pass


class DuplicateKey(UrbanImpactError):
    pass


class EmptyTable(UrbanImpactError):
    pass


class ValueOutOfRange(UrbanImpactError):
    """A parsed value violates a table invariant.

    Carries the offending row number (1-based, header excluded) and field
    name so loaders can emit row-level diagnostics.
    """

    def __init__(self, message, row=None, field=None):
        super().__init__(message)
        self.row = row
        self.field = field


class UnknownCity(UrbanImpactError):
    pass


class UnknownOccupation(UrbanImpactError):
    pass


class UnknownProbSource(UrbanImpactError):
    pass


class KOutOfRange(UrbanImpactError):
    pass


# --- metrics ------------------------------------------------------------------

class EmptyCity(UrbanImpactError):
    pass


class ZeroCoverage(UrbanImpactError):
    pass


class AllZeroSkills(UrbanImpactError):
    pass


class NoSkillCoverage(UrbanImpactError):
    pass


# --- shift --------------------------------------------------------------------

class UnnormalizedReport(UrbanImpactError):
    pass


# --- scaling ------------------------------------------------------------------

class TooFewPoints(UrbanImpactError):
    pass


class NonPositiveValue(UrbanImpactError):
    pass


class RateOutOfRange(UrbanImpactError):
    pass


# --- clustering ---------------------------------------------------------------

class KTooLarge(UrbanImpactError):
    pass


class EmptyMatrix(UrbanImpactError):
    pass


class DimsTooLarge(UrbanImpactError):
    pass


# --- stats --------------------------------------------------------------------

class LengthMismatch(UrbanImpactError):
    pass


class ZeroVariance(UrbanImpactError):
    pass


class RankDeficient(UrbanImpactError):
    pass


class TooFewRows(UrbanImpactError):
    pass


class DegenerateRange(UrbanImpactError):
    pass


# --- robustness ---------------------------------------------------------------

class NegativeError(UrbanImpactError):
    pass


class FractionOutOfRange(UrbanImpactError):
    pass
