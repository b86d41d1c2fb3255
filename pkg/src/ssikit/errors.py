"""Exception types raised across the toolkit.

Every error that a batch run can hit on bad input derives from
:class:`ToolkitError`, so the CLI can catch one type and emit a structured
error record.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(ToolkitError):
    """Invalid configuration: bad pattern file, bad budget, bad option value."""


class FilenameParseError(ToolkitError):
    """A note filename does not follow the expected naming convention."""

    def __init__(self, filename: str, segment: str, reason: str):
        self.filename = filename
        self.segment = segment
        self.reason = reason
        super().__init__(f"{filename}: bad segment {segment!r}: {reason}")


class StandoffError(ToolkitError):
    """A standoff annotation file could not be parsed or failed validation."""


class LexiconError(ToolkitError):
    """A lexicon or embedding file could not be loaded."""


class NoEmbeddingCoverageError(LexiconError):
    """No token of a phrase (or of a whole category) has an embedding."""


class AnswerError(ToolkitError):
    """A raw model answer could not be mapped onto the closed choice set."""


class AlignmentError(ToolkitError):
    """Gold and predicted label sets (or rater label lists) do not line up."""


class SamplingError(ToolkitError):
    """The sampling index is malformed."""
