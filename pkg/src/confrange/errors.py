"""Exception hierarchy shared by every module."""


class ConfRangeError(Exception):
    """Base class for all package errors."""


class TensorFormatError(ConfRangeError, ValueError):
    """A tensor file is malformed.  Carries the path and byte offset."""

    def __init__(self, message: str, path=None, offset: int | None = None):
        self.path = path
        self.offset = offset
        where = []
        if path is not None:
            where.append(str(path))
        if offset is not None:
            where.append(f"byte {offset}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class BadMagic(TensorFormatError):
    pass


class UnsupportedVersion(TensorFormatError):
    pass


class TruncatedPayload(TensorFormatError):
    pass


class ValueOutOfRange(TensorFormatError):
    pass


class InvalidDims(ConfRangeError, ValueError):
    pass


class ShapeMismatch(ConfRangeError, ValueError):
    pass


class EmptyStack(ConfRangeError, ValueError):
    pass


class EmptyCalibrationSet(ConfRangeError, ValueError):
    pass


class EmptyTestSet(ConfRangeError, ValueError):
    pass


class AlreadySplit(ConfRangeError, ValueError):
    pass


class MalformedModelFile(ConfRangeError, ValueError):
    pass


class ManifestError(ConfRangeError, ValueError):
    pass
