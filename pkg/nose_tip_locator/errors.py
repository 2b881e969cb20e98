from typing import Optional


class NoseTipError(ValueError):
    """Base class for every error raised by the pipeline stages."""


class InvalidParameterError(NoseTipError):
    pass


class DimensionMismatchError(NoseTipError):
    def __init__(self, what: str, expected: tuple[int, int], got: tuple[int, int]):
        super().__init__(f"{what}: expected {expected[0]}x{expected[1]}, got {got[0]}x{got[1]}")
        self.expected = expected
        self.got = got


class DepthFormatError(NoseTipError):
    """A depth, landmark or cloud file that cannot be decoded."""

    def __init__(
        self,
        path: str,
        message: str,
        line: Optional[int] = None,
        offset: Optional[int] = None,
    ):
        where = ""
        if line is not None:
            where = f" (line {line})"
        elif offset is not None:
            where = f" (byte offset {offset})"
        super().__init__(f"{path}{where}: {message}")
        self.path = path
        self.line = line
        self.offset = offset


class MissingInputError(DepthFormatError):
    def __init__(self, path: str):
        super().__init__(path, "no such file")


class DepthRangeError(NoseTipError):
    pass


class EmptyDepthMapError(NoseTipError):
    pass


class KernelSizeError(NoseTipError):
    pass


class NoCandidateError(NoseTipError):
    pass


class DegenerateFaceError(NoseTipError):
    def __init__(self, face_index: int):
        super().__init__(f"face {face_index} has zero area")
        self.face_index = face_index


class PoseOutOfGridError(NoseTipError):
    pass
