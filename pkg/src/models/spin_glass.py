from dataclasses import dataclass

import numpy as np

from src.core.exceptions import IndexRangeError, InvalidParameterError


@dataclass(frozen=True)
class SkModel:
    """Sherrington-Kirkpatrick model: symmetric Gaussian couplings at inverse temperature beta"""

    couplings: np.ndarray
    beta: float

    def __post_init__(self):
        couplings = np.array(self.couplings, dtype=float, copy=True)
        if couplings.ndim != 2 or couplings.shape[0] != couplings.shape[1] or couplings.shape[0] < 1:
            raise InvalidParameterError(f"couplings must be a square N x N matrix, got {couplings.shape}")
        if not np.array_equal(couplings, couplings.T):
            raise InvalidParameterError("couplings must be exactly symmetric")
        if not np.isfinite(self.beta):
            raise InvalidParameterError(f"beta must be finite, got {self.beta!r}")
        couplings.setflags(write=False)
        object.__setattr__(self, "couplings", couplings)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def N(self) -> int:
        return int(self.couplings.shape[0])

    @property
    def n_states(self) -> int:
        return 1 << self.N


@dataclass(frozen=True)
class SpinConfiguration:
    """±1 spins; index = sum_i [s_i = +1] 2^i + 1 (little-endian, 1-based)"""

    spins: tuple[int, ...]

    def __post_init__(self):
        spins = tuple(int(s) for s in self.spins)
        if not spins or any(s not in (-1, 1) for s in spins):
            raise InvalidParameterError(f"spins must be a nonempty ±1 vector, got {spins}")
        object.__setattr__(self, "spins", spins)

    @property
    def N(self) -> int:
        return len(self.spins)

    @property
    def index(self) -> int:
        return sum(1 << i for i, s in enumerate(self.spins) if s == 1) + 1

    @classmethod
    def from_index(cls, index: int, N: int) -> "SpinConfiguration":
        if not 1 <= index <= (1 << N):
            raise IndexRangeError(f"configuration index {index} outside [1, {1 << N}]")
        bits = ((index - 1) >> np.arange(N)) & 1
        return cls(tuple(int(2 * b - 1) for b in bits))

    def flipped(self) -> "SpinConfiguration":
        return SpinConfiguration(tuple(-s for s in self.spins))

    def as_array(self) -> np.ndarray:
        return np.array(self.spins, dtype=float)


def spins_matrix(N: int, states: np.ndarray) -> np.ndarray:
    """Спины (строки ±1) для 0-based индексов состояний"""
    states = np.asarray(states, dtype=np.int64)
    bits = (states[:, None] >> np.arange(N)[None, :]) & 1
    return (2 * bits - 1).astype(float)
