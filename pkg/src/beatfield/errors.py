"""Exception hierarchy shared by the pipeline stages."""


class BeatfieldError(Exception):
    """Base class for all pipeline errors."""


class MalformedInputError(BeatfieldError):
    """A file failed to parse (bad number, bad key=value line, ...)."""


class StructuralError(BeatfieldError):
    """Parsed data violates a structural requirement (ragged rows, length mismatch)."""


class ParameterError(BeatfieldError):
    """An argument is outside its documented domain."""


class ConfigError(BeatfieldError):
    """Invalid configuration or scenario/dataset combination."""


class DataError(BeatfieldError):
    """Runtime data problem (id mismatch, missing prediction, empty class)."""


class TooFewPiecesError(DataError):
    """Recording produced fewer than the minimum number of pieces."""

    def __init__(self, n_pieces: int, minimum: int = 4):
        self.n_pieces = n_pieces
        self.minimum = minimum
        super().__init__(f"recording has {n_pieces} pieces, minimum is {minimum}")
