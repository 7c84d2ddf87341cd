# qsvrg/core/exceptions.py

from typing import Optional


class QsvrgError(ValueError):
    """Base class for every error raised by the library"""


class DimensionError(QsvrgError):
    pass


class NonFiniteError(QsvrgError):
    def __init__(self, quantity: str, detail: str = ""):
        self.quantity = quantity
        message = f"Non-finite value in {quantity}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class SingularProblemError(QsvrgError):
    def __init__(self, residual: float, tolerance: float, reason: Optional[str] = None):
        self.residual = residual
        self.tolerance = tolerance
        if reason is None:
            reason = f"residual {residual:.3e} exceeds {tolerance:.3e}"
        super().__init__(
            f"Hessian is singular or ill-conditioned: {reason}. "
            "Add regularization (e.g. use the ridge problem with lambda > 0)."
        )


class DimensionCapError(QsvrgError):
    def __init__(self, dimension: int, cap: int):
        self.dimension = dimension
        self.cap = cap
        super().__init__(
            f"Dimension {dimension} exceeds the dense Hessian cap of {cap}; "
            "supply mu explicitly or raise hessian_cap"
        )


class SamplingError(QsvrgError):
    pass


class DatasetError(QsvrgError):
    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = f"{path}"
            if line is not None:
                location += f":{line}"
            location += ": "
        super().__init__(f"{location}{message}")


class DivergenceError(QsvrgError):
    def __init__(self, method: str, epoch: int, step: int):
        self.method = method
        self.epoch = epoch
        self.step = step
        super().__init__(f"{method} produced a non-finite iterate at epoch {epoch}, step {step}")


class ConfigurationError(QsvrgError):
    pass


class IncompatibleTracesError(QsvrgError):
    pass
