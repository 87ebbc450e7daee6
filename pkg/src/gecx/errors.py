"""Exception types shared across the toolkit.

All toolkit-specific failures derive from :class:`GecxError` so callers
(notably the CLI) can distinguish data problems from genuine bugs.
"""


class GecxError(Exception):
    """Base class for all toolkit errors."""


class DataFormatError(GecxError):
    """A file or stream does not conform to its documented format."""

    def __init__(self, message, path=None, line=None):
        location = ""
        if path is not None:
            location = f"{path}:"
        if line is not None:
            location += f"{line}:"
        if location:
            message = f"{location} {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class TrainingDataError(GecxError):
    """Training was attempted on an empty or unusable corpus."""


class PipelineStageError(GecxError):
    """A pipeline stage failed; carries the index of the failing stage."""

    def __init__(self, stage_index, kind, cause):
        super().__init__(f"stage {stage_index} ({kind}) failed: {cause}")
        self.stage_index = stage_index
        self.kind = kind
        self.cause = cause
