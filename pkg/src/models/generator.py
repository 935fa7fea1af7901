from dataclasses import dataclass

import numpy as np

from src.core.exceptions import IndexRangeError, InvalidParameterError

ROW_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class BasisIndex:
    """Pair (j, k); j ranges over [0, n) for the STO basis and [0, n-1) for the p-basis, k over [0, n-1)"""

    j: int
    k: int

    def validate(self, n: int, p_basis: bool = False) -> "BasisIndex":
        j_limit = n - 1 if p_basis else n
        if not 0 <= self.j < j_limit:
            raise IndexRangeError(f"basis row index {self.j} outside [0, {j_limit})")
        if not 0 <= self.k < n - 1:
            raise IndexRangeError(f"basis column index {self.k} outside [0, {n - 1})")
        return self

    @classmethod
    def coerce(cls, value) -> "BasisIndex":
        if isinstance(value, BasisIndex):
            return value
        j, k = value
        return cls(int(j), int(k))


@dataclass(frozen=True)
class GeneratorElement:
    """Element of the Lie algebra of STO(n): a dense matrix with zero row sums"""

    matrix: np.ndarray
    p_annihilating: bool = False

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float, copy=True)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidParameterError(f"generator must be square, got shape {matrix.shape}")
        scale = max(1.0, float(np.abs(matrix).max(initial=0.0)))
        row_sums = np.abs(matrix.sum(axis=1)).max(initial=0.0)
        if row_sums > ROW_SUM_TOLERANCE * scale * matrix.shape[0]:
            raise InvalidParameterError(
                f"generator row sums deviate from 0 by {row_sums!r}",
                {"row_sum_violation": float(row_sums)},
            )
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])

    def annihilation_violation(self, p: np.ndarray) -> float:
        return float(np.abs(np.asarray(p, dtype=float) @ self.matrix).max())

    def bracket(self, other: "GeneratorElement") -> "GeneratorElement":
        product = self.matrix @ other.matrix - other.matrix @ self.matrix
        return GeneratorElement(product, self.p_annihilating and other.p_annihilating)

    def scaled(self, factor: float) -> "GeneratorElement":
        return GeneratorElement(self.matrix * factor, self.p_annihilating)

    def __add__(self, other: "GeneratorElement") -> "GeneratorElement":
        return GeneratorElement(self.matrix + other.matrix, self.p_annihilating and other.p_annihilating)

    def __sub__(self, other: "GeneratorElement") -> "GeneratorElement":
        return GeneratorElement(self.matrix - other.matrix, self.p_annihilating and other.p_annihilating)
