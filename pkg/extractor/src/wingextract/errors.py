"""Extraction errors."""


class WingextractError(Exception):
    """Base class for extraction failures."""


class DetectorUnavailableError(WingextractError):
    """No detector backend registered under the requested identifier."""


class EncoderUnavailableError(WingextractError):
    """No encoder (or captioning model) available under the identifier."""


class LLMUnavailableError(WingextractError):
    """No description model available under the identifier."""


class EmptyResponseError(WingextractError):
    """A model returned nothing useful after the allowed retries."""


class JobError(WingextractError):
    """Job file is malformed or references missing inputs."""
