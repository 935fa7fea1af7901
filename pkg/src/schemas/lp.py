from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    ITERATION_LIMIT = "iteration_limit"
    UNBOUNDED = "unbounded"


class LinearProgram(BaseModel):
    """minimize c.x subject to A x <= b, lower <= x <= upper; optional tie-break objective"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    secondary: Optional[np.ndarray] = None

    @field_validator("c", "b", "lower", "upper", "secondary", mode="before")
    @classmethod
    def as_vector(cls, value):
        if value is None:
            return value
        return np.atleast_1d(np.asarray(value, dtype=float))

    @field_validator("A", mode="before")
    @classmethod
    def as_matrix(cls, value):
        return np.atleast_2d(np.asarray(value, dtype=float))

    @model_validator(mode="after")
    def check_dimensions(self):
        m = self.c.shape[0]
        k = self.b.shape[0]
        if self.A.shape != (k, m):
            raise ValueError(f"A has shape {self.A.shape}, expected {(k, m)}")
        if self.lower.shape != (m,) or self.upper.shape != (m,):
            raise ValueError("bounds must have one entry per variable")
        if self.secondary is not None and self.secondary.shape != (m,):
            raise ValueError("secondary objective must have one entry per variable")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise ValueError("variable bounds must be finite")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")
        for name in ("c", "b"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} must be finite")
        return self

    @property
    def variable_count(self) -> int:
        return int(self.c.shape[0])

    @property
    def constraint_count(self) -> int:
        return int(self.b.shape[0])


class LpSolution(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: np.ndarray
    objective: float
    status: LpStatus
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL
