from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.exceptions import InvalidParameterError, MembershipViolationError
from src.models.chain import ProposalSet

BOX_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TauCoefficients:
    """Coefficients of I - P over the p-basis, (n-1)x(n-1), nonzero only on J x J"""

    tau: np.ndarray
    proposals: ProposalSet

    def __post_init__(self):
        tau = np.array(self.tau, dtype=float, copy=True)
        if tau.ndim != 2 or tau.shape[0] != tau.shape[1]:
            raise InvalidParameterError(f"tau must be square, got {tau.shape}")
        tau.setflags(write=False)
        object.__setattr__(self, "tau", tau)

    @classmethod
    def from_block(cls, block: np.ndarray, proposals: ProposalSet, n: int) -> "TauCoefficients":
        tau = np.zeros((n - 1, n - 1))
        idx = proposals.as_array()
        tau[np.ix_(idx, idx)] = block
        return cls(tau, proposals)

    @classmethod
    def zero(cls, proposals: ProposalSet, n: int) -> "TauCoefficients":
        return cls(np.zeros((n - 1, n - 1)), proposals)

    @property
    def n(self) -> int:
        return int(self.tau.shape[0]) + 1

    def block(self) -> np.ndarray:
        idx = self.proposals.as_array()
        return self.tau[np.ix_(idx, idx)]

    def check_box(self, tol: float = BOX_TOLERANCE) -> None:
        """vec(I)-1 <= vec(tau) <= vec(I) и нули вне J x J"""
        mask = np.zeros(self.tau.shape, dtype=bool)
        idx = self.proposals.as_array()
        mask[np.ix_(idx, idx)] = True
        outside = np.abs(self.tau[~mask]).max(initial=0.0)
        if outside > 0.0:
            raise MembershipViolationError(
                f"sparsity: tau has entry {outside!r} outside J x J",
                {"constraint": "sparsity", "violation": float(outside)},
            )
        identity = np.eye(self.tau.shape[0])
        low = (identity - 1.0 - self.tau).max()
        high = (self.tau - identity).max()
        if low > tol or high > tol:
            raise MembershipViolationError(
                "box: tau leaves [vec(I)-1, vec(I)]",
                {"constraint": "box", "violation": float(max(low, high))},
            )


@dataclass(frozen=True)
class HopsProgram:
    """HOPS linear program: minimize objective.vec(tau) s.t. U vec(tau) <= v, bounds, sparsity"""

    objective: np.ndarray
    U: np.ndarray
    v: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    index_map: tuple[tuple[int, int], ...]
    n: int
    proposals: ProposalSet
    sparsity: Optional[np.ndarray] = None
    secondary: Optional[np.ndarray] = None

    def __post_init__(self):
        m = len(self.index_map)
        if self.objective.shape != (m,) or self.U.shape[1] != m:
            raise InvalidParameterError("objective and constraint widths disagree with the variable map")
        if self.U.shape[0] != self.v.shape[0]:
            raise InvalidParameterError("constraint matrix and bound vector lengths disagree")
        if self.sparsity is not None and self.sparsity.shape[1] != m:
            raise InvalidParameterError("sparsity block width disagrees with the variable map")

    @property
    def variable_count(self) -> int:
        return len(self.index_map)

    @property
    def is_reduced(self) -> bool:
        return self.sparsity is None
