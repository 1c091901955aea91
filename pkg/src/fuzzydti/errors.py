"""Exception taxonomy shared across the package.

Exit-code mapping for the CLI lives in fuzzydti.cli: ConfigError -> 2,
ingest errors -> 3, everything else -> 4.
"""


class FuzzyDtiError(Exception):
    """Base class for all package errors."""


class InvalidInput(FuzzyDtiError):
    """A precondition on an operation's arguments was violated."""


class ConfigError(FuzzyDtiError):
    """Run configuration file is malformed or contains unknown keys."""


class FormatError(FuzzyDtiError):
    """A data file does not follow its documented layout."""


class DuplicateId(FormatError):
    """An entity id appears more than once in a feature matrix."""


class InvalidValue(FormatError):
    """A cell could not be parsed as a finite number in range."""


class EmptyMatrix(FormatError):
    """A feature matrix file contains a header but no rows."""


class UnknownEntity(FuzzyDtiError):
    """An interaction references an id absent from the feature matrices."""


class DuplicatePair(FuzzyDtiError):
    """A (drug, target) key occurs twice in one pair dataset."""


class MissingScore(FuzzyDtiError):
    """A candidate pair has no entry in the score table."""


class EmptyConcept(FuzzyDtiError):
    """Upper approximation requested for a concept with no members."""


class EmptyNegativeClass(FuzzyDtiError):
    """Threshold sampling retained no negative samples."""


class UndefinedMetric(FuzzyDtiError):
    """A metric has no value for these inputs (e.g. single-class AUC)."""


class DependencyError(FuzzyDtiError):
    """A stage was invoked before its upstream stage produced artifacts."""

    def __init__(self, missing_stage: str, detail: str = ""):
        self.missing_stage = missing_stage
        msg = f"missing upstream artifacts; run stage '{missing_stage}' first"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
