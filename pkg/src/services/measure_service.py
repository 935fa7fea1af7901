from typing import Optional

import numpy as np

from src.core.exceptions import InvalidMeasureError, InvalidRatioError, RatioOverflowError
from src.models.chain import ProposalSet
from src.models.measure import ArrayLike, LogWeightOracle, ProbabilityMeasure


class MeasureService:
    """Target measures and likelihood ratios against the current state"""

    @staticmethod
    def normalize(weights: ArrayLike) -> ProbabilityMeasure:
        """Scale nonnegative weights to a probability measure"""
        weights = np.asarray(weights, dtype=float)
        if weights.ndim != 1 or weights.size < 2:
            raise InvalidMeasureError("need at least two weights")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvalidMeasureError("weights must be finite and nonnegative")
        total = weights.sum()
        if total <= 0:
            raise InvalidMeasureError("weights are all zero")
        return ProbabilityMeasure(weights / total)

    @staticmethod
    def ratios_from_log_weights(log_weights: np.ndarray, current_log_weight: float) -> np.ndarray:
        """exp(logw_j - logw_current); overflow yields +inf, rejected by check_ratios"""
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(np.asarray(log_weights, dtype=float) - current_log_weight)

    @staticmethod
    def ratios_for(
        oracle: LogWeightOracle,
        current: int,
        proposals: ProposalSet,
        current_log_weight: Optional[float] = None,
    ) -> np.ndarray:
        """r_(J) for proposals J relative to the current state"""
        proposals.validate_against(current, oracle.n_states)
        if current_log_weight is None:
            current_log_weight = oracle.log_weight(current)
        return MeasureService.ratios_from_log_weights(
            oracle.log_weights(proposals.as_array()), current_log_weight
        )

    @staticmethod
    def check_ratios(r: ArrayLike) -> np.ndarray:
        """Ratios must be finite and strictly positive before any acceptance rule uses them"""
        r = np.asarray(r, dtype=float)
        if r.ndim != 1 or r.size == 0:
            raise InvalidRatioError("ratio vector must be nonempty")
        if not np.all(np.isfinite(r)):
            raise RatioOverflowError(
                "likelihood ratio overflowed; log-weight differences exceed floating-point range",
                {"ratios": r.tolist()},
            )
        if np.any(r <= 0):
            raise InvalidRatioError(f"likelihood ratios must be positive, got {r.tolist()}")
        return r

    @staticmethod
    def reference_ratios(measure: ProbabilityMeasure) -> np.ndarray:
        """r_j = p_j / p_{n-1} for j < n-1"""
        weights = measure.as_array()
        if weights[-1] <= 0:
            raise InvalidMeasureError("reference state has zero probability")
        return weights[:-1] / weights[-1]

    @staticmethod
    def relabeled_ratios(measure: ProbabilityMeasure, current: int) -> np.ndarray:
        """Ratios in the frame where `current` is moved to the reference position n-1"""
        weights = measure.as_array().copy()
        weights[[current, -1]] = weights[[-1, current]]
        if weights[-1] <= 0:
            raise InvalidMeasureError(f"current state {current} has zero probability")
        return weights[:-1] / weights[-1]
