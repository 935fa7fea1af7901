import threading
from dataclasses import dataclass, field
from typing import Protocol, Sequence, Union, runtime_checkable

import numpy as np

from src.core.exceptions import IndexRangeError, InvalidMeasureError

ArrayLike = Union[Sequence[float], np.ndarray]

# Допуск на нормировку меры
SUM_TOLERANCE = 1e-12


def _frozen_array(values: ArrayLike, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class ProbabilityMeasure:
    """Normalized nonnegative weights over n >= 2 states (0-based internally)"""

    weights: np.ndarray

    def __post_init__(self):
        weights = _frozen_array(self.weights)
        if weights.ndim != 1 or weights.size < 2:
            raise InvalidMeasureError("measure needs a vector of at least two states")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvalidMeasureError("measure entries must be finite and nonnegative")
        if abs(weights.sum() - 1.0) > SUM_TOLERANCE:
            raise InvalidMeasureError(
                f"measure sums to {weights.sum()!r}, expected 1",
                {"sum": float(weights.sum())},
            )
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return int(self.weights.size)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, index):
        return self.weights[index]

    def as_array(self) -> np.ndarray:
        return self.weights


@runtime_checkable
class LogWeightOracle(Protocol):
    """Natural log-weights of states, defined up to a shared additive constant"""

    @property
    def n_states(self) -> int: ...

    def log_weight(self, index: int) -> float: ...

    def log_weights(self, indices: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class TabulatedLogWeights:
    """Oracle over an explicit log-weight table"""

    values: np.ndarray

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 1 or values.size < 2:
            raise InvalidMeasureError("log-weight table needs at least two states")
        if np.any(np.isnan(values)) or np.any(values == np.inf):
            raise InvalidMeasureError("log-weights must be finite or -inf")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_measure(cls, measure: ProbabilityMeasure) -> "TabulatedLogWeights":
        with np.errstate(divide="ignore"):
            return cls(np.log(measure.as_array()))

    @property
    def n_states(self) -> int:
        return int(self.values.size)

    def log_weight(self, index: int) -> float:
        return float(self.values[index])

    def log_weights(self, indices: np.ndarray) -> np.ndarray:
        return self.values[np.asarray(indices, dtype=np.int64)]


class CountingOracle:
    """Обертка, считающая вычисления log-весов (по одной на состояние)"""

    def __init__(self, inner: LogWeightOracle):
        self.inner = inner
        self._count = 0
        self._lock = threading.Lock()

    @property
    def n_states(self) -> int:
        return self.inner.n_states

    @property
    def evaluations(self) -> int:
        return self._count

    def log_weight(self, index: int) -> float:
        with self._lock:
            self._count += 1
        return self.inner.log_weight(index)

    def log_weights(self, indices: np.ndarray) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        with self._lock:
            self._count += int(indices.size)
        return self.inner.log_weights(indices)


@dataclass(frozen=True)
class RelabelView:
    """Transposition current <-> n-1; the reference state of every construction is n-1"""

    current: int
    n: int
    _reference: int = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise IndexRangeError(f"state count {self.n} < 2")
        if not 0 <= self.current < self.n:
            raise IndexRangeError(f"current state {self.current} outside [0, {self.n})")
        object.__setattr__(self, "_reference", self.n - 1)

    @property
    def reference(self) -> int:
        return self._reference

    def apply(self, index: int) -> int:
        if index == self.current:
            return self._reference
        if index == self._reference:
            return self.current
        return index

    # Транспозиция обратна сама себе
    inverse = apply

    def apply_array(self, indices: np.ndarray) -> np.ndarray:
        indices = np.asarray(indices, dtype=np.int64)
        mapped = indices.copy()
        mapped[indices == self.current] = self._reference
        mapped[indices == self._reference] = self.current
        return mapped

    def permutation(self) -> np.ndarray:
        """perm[x] = original label of relabeled index x"""
        return self.apply_array(np.arange(self.n))
