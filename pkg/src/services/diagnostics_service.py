import math
from itertools import combinations
from typing import Optional, Union

import numpy as np

from src.core import get_settings
from src.core.parallel import run_tasks
from src.core.exceptions import EnumerationLimitError, InvalidParameterError, NonErgodicError
from src.logs import debug_logger, log_function
from src.models.chain import SamplerKind
from src.models.measure import LogWeightOracle, ProbabilityMeasure
from src.schemas.diagnostics import MembershipReport
from src.services.hops_service import HopsService
from src.services.sampler_service import SamplerService

settings = get_settings()

MeasureLike = Union[ProbabilityMeasure, np.ndarray]


def _vector(measure: MeasureLike) -> np.ndarray:
    if isinstance(measure, ProbabilityMeasure):
        return measure.as_array()
    return np.asarray(measure, dtype=float)


class DiagnosticsService:
    """Membership checks, invariant measures, TV distance and exact expected kernels"""

    @staticmethod
    def check_membership(P, p: MeasureLike, tol: Optional[float] = None) -> MembershipReport:
        tol = settings.MEMBERSHIP_TOLERANCE if tol is None else tol
        P = np.asarray(P, dtype=float)
        p = _vector(p)
        if P.ndim != 2 or P.shape != (p.size, p.size):
            raise InvalidParameterError(f"matrix shape {P.shape} does not match measure of size {p.size}")

        row_violation = float(np.abs(P.sum(axis=1) - 1.0).max())
        stationarity = float(np.abs(p @ P - p).max())
        min_entry = float(P.min())

        violated = None
        if row_violation > tol:
            violated = f"row sums deviate from 1 by {row_violation:.3g}"
        elif min_entry < -tol:
            violated = f"negative entry {min_entry:.3g}"
        elif stationarity > tol:
            violated = f"pP differs from p by {stationarity:.3g}"

        return MembershipReport(
            is_row_stochastic=row_violation <= tol,
            row_sum_violation=row_violation,
            fixes_p=stationarity <= tol,
            stationarity_violation=stationarity,
            is_nonnegative=min_entry >= -tol,
            min_entry=min_entry,
            violated=violated,
        )

    @staticmethod
    def invariant_measure(P, tol: Optional[float] = None) -> ProbabilityMeasure:
        """pi = 1^T (P - I + 1 1^T)^{-1}, validated against pi P = pi"""
        tol = settings.MEMBERSHIP_TOLERANCE if tol is None else tol
        P = np.asarray(P, dtype=float)
        n = P.shape[0]
        system = P - np.eye(n) + np.ones((n, n))
        if np.linalg.matrix_rank(system) < n:
            raise NonErgodicError("P - I + 11^T is rank deficient; the chain has several closed classes")
        try:
            pi = np.linalg.solve(system.T, np.ones(n))
        except np.linalg.LinAlgError as exc:
            raise NonErgodicError("P - I + 11^T is singular; no unique invariant measure") from exc
        if not np.all(np.isfinite(pi)) or pi.min() < -tol:
            raise NonErgodicError("solve produced an invalid invariant measure", {"min": float(np.nanmin(pi))})
        pi = np.clip(pi, 0.0, None)
        pi = pi / pi.sum()
        residual = float(np.abs(pi @ P - pi).max())
        if residual > tol:
            raise NonErgodicError(f"invariant measure check failed, |pi P - pi| = {residual:.3g}")
        debug_logger.log_data("invariant measure", pi)
        return ProbabilityMeasure(pi)

    @staticmethod
    def total_variation(p: MeasureLike, q: MeasureLike) -> float:
        p, q = _vector(p), _vector(q)
        if p.shape != q.shape:
            raise InvalidParameterError(f"measures have different lengths {p.size} and {q.size}")
        return 0.5 * float(np.abs(p - q).sum())

    @staticmethod
    def detailed_balance_violation(p: MeasureLike, P) -> float:
        flow = _vector(p)[:, None] * np.asarray(P, dtype=float)
        return float(np.abs(flow - flow.T).max())

    @staticmethod
    def _kernel_row(
        log_weights: np.ndarray,
        current: int,
        kind: SamplerKind,
        d: int,
        lp_x: str,
        lp_y: str,
    ) -> np.ndarray:
        n = log_weights.size
        others = [state for state in range(n) if state != current]
        subsets = np.array(list(combinations(others, d)), dtype=np.int64)
        r = np.exp(log_weights[subsets] - log_weights[current])

        if kind == SamplerKind.HOPS:
            local = HopsService.local_proposals(d)
            move = np.empty_like(r)
            for row, subset in enumerate(subsets):
                labels = np.append(subset, current)
                move[row] = HopsService.hops_probs(r[row], local, lp_x, lp_y, labels).move_probs
        else:
            move = SamplerService.batch_acceptance(kind, r)

        kernel_row = np.zeros(n)
        np.add.at(kernel_row, subsets.ravel(), move.ravel())
        kernel_row /= subsets.shape[0]
        kernel_row[current] = 1.0 - (kernel_row.sum() - kernel_row[current])
        return kernel_row

    @staticmethod
    @log_function()
    def expected_kernel(
        oracle: LogWeightOracle,
        kind: SamplerKind,
        d: int,
        lp_x: str = "ones",
        lp_y: str = "neg_ratios",
        workers: Optional[int] = None,
    ) -> np.ndarray:
        """One-step kernel averaged over every size-d proposal set, in original labels"""
        n = oracle.n_states
        if not 1 <= d <= n - 1:
            raise InvalidParameterError(f"proposal size {d} outside [1, {n - 1}]")
        if kind.single_proposal and d != 1:
            raise InvalidParameterError(f"{kind.value} takes exactly one proposal")
        subsets = math.comb(n - 1, d)
        if subsets > settings.MAX_KERNEL_SUBSETS:
            raise EnumerationLimitError(
                f"C({n - 1}, {d}) = {subsets} proposal sets exceed the limit of {settings.MAX_KERNEL_SUBSETS}",
                {"subsets": subsets},
            )
        log_weights = oracle.log_weights(np.arange(n))
        workers = settings.WORKERS if workers is None else workers

        rows = run_tasks(
            DiagnosticsService._kernel_row,
            ((log_weights, state, kind, d, lp_x, lp_y) for state in range(n)),
            workers,
            processes=kind == SamplerKind.HOPS,
        )
        return np.vstack(rows)

    @staticmethod
    def tv_curve_exact(kernel, p: MeasureLike, mu0: MeasureLike, T: int) -> np.ndarray:
        """TV(mu0 K^t, p) for t = 0..T"""
        kernel = np.asarray(kernel, dtype=float)
        target = _vector(p)
        mu = _vector(mu0).copy()
        curve = np.empty(T + 1)
        curve[0] = DiagnosticsService.total_variation(mu, target)
        for t in range(1, T + 1):
            mu = mu @ kernel
            curve[t] = DiagnosticsService.total_variation(mu, target)
        return curve

    @staticmethod
    def empirical_distribution(states: np.ndarray, n: int) -> np.ndarray:
        states = np.asarray(states, dtype=np.int64)
        return np.bincount(states, minlength=n) / states.size

    @staticmethod
    def curve_area(curve) -> float:
        return float(np.sum(curve))

    @staticmethod
    def point_mass(index: int, n: int) -> np.ndarray:
        mass = np.zeros(n)
        mass[index] = 1.0
        return mass
