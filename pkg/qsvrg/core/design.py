# qsvrg/core/design.py

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .exceptions import DimensionError, NonFiniteError, QsvrgError

Vector = NDArray[np.float64]
Matrix = NDArray[np.float64]


def as_vector(values: ArrayLike, name: str = "vector", length: int | None = None) -> Vector:
    """Coerce to a finite 1-d float64 array, optionally of a given length"""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise DimensionError(f"{name} has length {arr.shape[0]}, expected {length}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(name)
    return arr


@dataclass(frozen=True)
class DesignMatrix:
    """Row-major data matrix with cached row squared norms and trace of XᵀX"""

    rows: Matrix
    row_sq_norms: Vector
    trace_xtx: float

    @classmethod
    def from_rows(cls, rows: ArrayLike) -> "DesignMatrix":
        x = np.ascontiguousarray(rows, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise DimensionError(f"design matrix must be a non-empty 2-d array, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise NonFiniteError("design matrix")
        sq = np.einsum("ij,ij->i", x, x)
        trace = math.fsum(sq)
        if trace <= 0.0:
            raise QsvrgError("design matrix is identically zero")
        x.setflags(write=False)
        sq.setflags(write=False)
        return cls(rows=x, row_sq_norms=sq, trace_xtx=trace)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    @property
    def lbar(self) -> float:
        """Average squared row norm tr(XᵀX)/n"""
        return self.trace_xtx / self.n

    @property
    def max_sq_norm(self) -> float:
        return float(self.row_sq_norms.max())

    def gram(self) -> Matrix:
        return self.rows.T @ self.rows

    def matvec(self, v: Vector) -> Vector:
        """X v"""
        return self.rows @ v

    def rmatvec(self, r: Vector) -> Vector:
        """Xᵀ r"""
        return self.rows.T @ r
