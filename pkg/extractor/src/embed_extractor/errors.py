"""Typed errors for the extraction pipeline."""


class ExtractorError(Exception):
    """Base class for extractor failures."""


class DecodeFailure(ExtractorError):
    """The video could not be opened or yielded no frames."""


class ModelLoadFailure(ExtractorError):
    """An embedding model or its weights could not be loaded."""
