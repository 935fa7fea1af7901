from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from src.core.exceptions import (
    IndexRangeError,
    InvalidParameterError,
    InvalidProposalError,
)

PROBABILITY_TOLERANCE = 1e-12


class SamplerKind(str, Enum):
    """Acceptance rules; barker and metropolis are the single-proposal cases"""

    BARKER = "barker"
    METROPOLIS = "metropolis"
    HOBS = "hobs"
    HOMS = "homs"
    HOPS = "hops"

    @property
    def single_proposal(self) -> bool:
        return self in (SamplerKind.BARKER, SamplerKind.METROPOLIS)

    @classmethod
    def parse(cls, name: str) -> "SamplerKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            known = ", ".join(kind.value for kind in cls)
            raise InvalidParameterError(f"unknown sampler '{name}', expected one of: {known}")


@dataclass(frozen=True)
class ProposalSet:
    """Distinct proposed states j_1..j_d, stored in ascending order"""

    indices: tuple[int, ...]

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if not indices:
            raise InvalidProposalError("proposal set must be nonempty")
        if len(set(indices)) != len(indices):
            raise InvalidProposalError(f"duplicate proposals in {indices}")
        if min(indices) < 0:
            raise IndexRangeError(f"negative proposal index in {indices}")
        object.__setattr__(self, "indices", indices)

    @classmethod
    def of(cls, indices: Iterable[int]) -> "ProposalSet":
        return cls(tuple(sorted(int(i) for i in indices)))

    @property
    def d(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return self.d

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, index) -> bool:
        return int(index) in self.indices

    def as_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=np.int64)

    def validate_against(self, current: int, n: int) -> "ProposalSet":
        if not 0 <= current < n:
            raise IndexRangeError(f"current state {current} outside [0, {n})")
        if max(self.indices) >= n:
            raise IndexRangeError(f"proposal index {max(self.indices)} outside [0, {n})")
        if current in self.indices:
            raise InvalidProposalError(f"current state {current} is among the proposals")
        if self.d > n - 1:
            raise InvalidProposalError(f"proposal size {self.d} exceeds n-1={n - 1}")
        return self


@dataclass(frozen=True)
class AcceptanceDistribution:
    """Probabilities of moving to each proposal, with the stay probability last"""

    move_probs: np.ndarray
    stay_prob: float

    def __post_init__(self):
        move = np.array(self.move_probs, dtype=float, copy=True)
        stay = float(self.stay_prob)
        if move.ndim != 1 or move.size == 0:
            raise InvalidParameterError("move probabilities must be a nonempty vector")
        if np.any(move < 0) or stay < 0:
            raise InvalidParameterError(f"negative acceptance probability in {move}, stay={stay}")
        total = move.sum() + stay
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise InvalidParameterError(f"acceptance probabilities sum to {total!r}")
        move.setflags(write=False)
        object.__setattr__(self, "move_probs", move)
        object.__setattr__(self, "stay_prob", stay)

    @property
    def d(self) -> int:
        return int(self.move_probs.size)

    def probabilities(self) -> np.ndarray:
        return np.append(self.move_probs, self.stay_prob)

    def sample(self, u: float) -> int:
        """Позиция первого накопленного веса, превышающего u; d означает остаться"""
        return int(np.sum(np.cumsum(self.move_probs) <= u))


@dataclass(frozen=True)
class ChainState:
    """Single-owner chain position; rng is advanced in place by chain_step"""

    current: int
    step: int
    rng: np.random.Generator
    current_log_weight: Optional[float] = None

    def __post_init__(self):
        if self.current < 0:
            raise IndexRangeError(f"chain state {self.current} is negative")
        if self.step < 0:
            raise InvalidParameterError(f"chain step {self.step} is negative")
