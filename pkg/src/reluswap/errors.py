"""Exception hierarchy. Every error raised on purpose derives from :class:`ReluSwapError`."""


class ReluSwapError(Exception):
    """Base class."""


class DimensionMismatch(ReluSwapError):
    def __init__(self, layer: int, detail: str = ""):
        self.layer = layer
        super().__init__(f"dimension mismatch at layer {layer}" + (f": {detail}" if detail else ""))


class NonFiniteParameter(ReluSwapError):
    def __init__(self, layer: int, position: tuple):
        self.layer = layer
        self.position = position
        super().__init__(f"non-finite parameter in layer {layer} at {position}")


class ParseError(ReluSwapError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class SchemaError(ReluSwapError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class UnknownActivation(ReluSwapError):
    pass


class ParameterDomainError(ReluSwapError):
    pass


class AtKink(ReluSwapError):
    def __init__(self, x: float, order: int):
        self.x = x
        self.order = order
        super().__init__(f"derivative of order {order} does not exist at x={x}")


class NotInA(ReluSwapError):
    pass


class NotA2tilde(ReluSwapError):
    pass


class LimitMismatch(ReluSwapError):
    pass


class EtaTooSmall(ReluSwapError):
    pass


class EpsTooSmall(ReluSwapError):
    pass


class NoSlopePoint(ReluSwapError):
    pass


class NoCurvaturePoint(ReluSwapError):
    pass


class Unbounded(ReluSwapError):
    pass


class BinomialOverflow(ReluSwapError, OverflowError):
    pass


class CalibrationFailed(ReluSwapError):
    def __init__(self, best_error: float, detail: str = ""):
        self.best_error = best_error
        super().__init__(f"calibration failed, best error {best_error:.3e}" + (f" ({detail})" if detail else ""))


class NotReLUHost(ReluSwapError):
    pass


class UnfusableGadget(ReluSwapError):
    pass
