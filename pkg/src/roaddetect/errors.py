"""Exception types raised across the toolkit."""


class RoadDetectError(Exception):
    """Base class for every error raised by roaddetect."""


class NetpbmError(RoadDetectError, ValueError):
    pass


class MalformedHeader(NetpbmError):
    pass


class UnsupportedMaxval(NetpbmError):
    pass


class TruncatedPayload(NetpbmError):
    pass


class DimensionMismatch(RoadDetectError, ValueError):
    pass


class UniformImage(RoadDetectError, ValueError):
    """All values are equal, so a histogram split does not exist."""


class RegionTooSmall(RoadDetectError, ValueError):
    pass


class SingleClass(RoadDetectError, ValueError):
    pass


class NonConvergenceWarning(RuntimeWarning):
    """SMO hit its iteration cap; the returned model is the last iterate."""


class MismatchedImageLists(RoadDetectError, ValueError):
    pass


class ConfigError(RoadDetectError, ValueError):
    pass


class PipelineError(RoadDetectError):
    """Wraps a module error with the name of the pipeline stage that raised it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")
