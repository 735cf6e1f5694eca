"""Exception hierarchy shared by all modules."""


class SimEmbedError(Exception):
    """Base class for every error raised by this package."""


class InvalidData(SimEmbedError, ValueError):
    pass


class EmptyDataset(InvalidData):
    pass


class InvalidParameter(SimEmbedError, ValueError):
    pass


class DimensionMismatch(SimEmbedError, ValueError):
    pass


class InvalidLabels(SimEmbedError, ValueError):
    pass


class InvalidMask(SimEmbedError, ValueError):
    pass


class MissingModel(SimEmbedError, KeyError):
    pass


class DegenerateKernel(SimEmbedError, ArithmeticError):
    pass


class DisconnectedGraph(SimEmbedError, ValueError):
    pass


class FileFormatError(SimEmbedError, ValueError):
    """Raised when a target/model file is malformed or has an unknown version."""
