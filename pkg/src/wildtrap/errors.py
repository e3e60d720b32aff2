"""Exception hierarchy shared across modules."""


class WildtrapError(Exception):
    """Base class for all domain errors."""


class ValidationError(WildtrapError):
    """Malformed input: bad manifest, bad filter, bad rule file."""


class OutOfOrderChunkError(WildtrapError):
    """Chunk offset does not match the session's resume offset."""

    def __init__(self, message: str, resume_offset: int):
        super().__init__(message)
        self.resume_offset = resume_offset


class ChunkOverflowError(WildtrapError):
    """Appending would exceed the declared byte length."""


class IntegrityError(WildtrapError):
    """Stored bytes do not hash to the declared content digest."""


class IncompleteUploadError(WildtrapError):
    """Finalize called before all declared bytes were received."""


class UnknownSessionError(WildtrapError):
    """Upload session id is not known to the server."""


class DecodeError(WildtrapError):
    """Asset bytes could not be decoded as an image."""


class BackendUnavailableError(WildtrapError):
    """Detector backend timed out or was unreachable. Retryable."""


class ProtocolViolationError(WildtrapError):
    """Detector backend broke the wire contract (e.g. unknown label)."""


class ConfigurationError(WildtrapError):
    """Missing sidecar, unknown camera, unusable service config."""


class StateMachineViolationError(WildtrapError):
    """Alert transition outside the declared edges."""


class UnknownAlertError(WildtrapError):
    """Alert id is not known."""
