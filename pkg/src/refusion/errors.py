"""Exception hierarchy."""


class RefusionError(Exception):
    pass


class InvalidBBox(RefusionError, ValueError):
    pass


class TemplateLargerThanRegion(RefusionError, ValueError):
    pass


class EmptyTemplateHistogram(RefusionError, ValueError):
    pass


class EmptyStore(RefusionError):
    pass


class DimensionMismatch(RefusionError, ValueError):
    pass


class NotInitialized(RefusionError):
    pass


class MissingDetectionsFile(RefusionError, FileNotFoundError):
    pass


class BackendError(RefusionError):
    """Base for failures of a tracker or detector backend."""


class BackendUnavailable(BackendError):
    pass


class ProtocolViolation(BackendError):
    pass


class LengthMismatch(RefusionError, ValueError):
    pass


class EmptySequence(RefusionError, ValueError):
    pass
