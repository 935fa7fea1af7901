import math
from typing import Optional, Sequence

import numpy as np

from src.core.exceptions import (
    IndexRangeError,
    InvalidParameterError,
    InvalidProposalError,
    RatioOverflowError,
)
from src.models.chain import AcceptanceDistribution, ChainState, ProposalSet, SamplerKind
from src.models.measure import CountingOracle, LogWeightOracle, ProbabilityMeasure, RelabelView
from src.schemas.run import ChainConfig, ChainRun
from src.services.hops_service import HopsService
from src.services.lie_algebra_service import LieAlgebraService
from src.services.measure_service import MeasureService


def _checked_total(r: np.ndarray) -> float:
    total = float(r.sum())
    if not math.isfinite(total):
        raise RatioOverflowError("sum of likelihood ratios overflowed", {"ratios": r.tolist()})
    return total


def rank_select(u: np.ndarray, m: int) -> np.ndarray:
    """Uniform d-subsets of [0, m) from a (chains, d) block of uniforms.

    Draw i picks rank floor(u_i (m - i)) among the m - i unused values, then skips
    past earlier picks in ascending order. Exactly d uniforms per subset.
    """
    u = np.atleast_2d(np.asarray(u, dtype=float))
    chains, d = u.shape
    picks = np.empty((chains, d), dtype=np.int64)
    for i in range(d):
        remaining = m - i
        rank = np.minimum((u[:, i] * remaining).astype(np.int64), remaining - 1)
        if i:
            earlier = np.sort(picks[:, :i], axis=1)
            for column in range(i):
                rank += rank >= earlier[:, column]
        picks[:, i] = rank
    return picks


class SamplerService:
    """Acceptance rules and the relabel / propose / accept chain driver"""

    @staticmethod
    def barker_probs(r_J) -> AcceptanceDistribution:
        """HOBS: move r_u / (1 + S), stay 1 / (1 + S)"""
        r_J = MeasureService.check_ratios(r_J)
        denominator = 1.0 + _checked_total(r_J)
        return AcceptanceDistribution(r_J / denominator, 1.0 / denominator)

    @staticmethod
    def metropolis_probs(r_J) -> AcceptanceDistribution:
        """HOMS: move r_u / (1 + S - m), m = min(1, min r_J)"""
        r_J = MeasureService.check_ratios(r_J)
        total = _checked_total(r_J)
        floor = min(1.0, float(r_J.min()))
        denominator = 1.0 + (total - floor)
        return AcceptanceDistribution(r_J / denominator, (1.0 - floor) / denominator)

    @staticmethod
    def barker_family_probs(r_J, t: float) -> AcceptanceDistribution:
        """Last row of exp(-t A) with omega = 1: (1 - e^-t) HOBS + e^-t I; t -> inf gives HOBS"""
        if t < 0 or math.isnan(t):
            raise InvalidParameterError(f"time must be nonnegative, got {t!r}")
        barker = SamplerService.barker_probs(r_J)
        weight = -math.expm1(-t)
        move = weight * barker.move_probs
        return AcceptanceDistribution(move, 1.0 - float(move.sum()))

    @staticmethod
    def metropolis_step_bound(r_j: float) -> float:
        """Largest tau with I - tau e^p_(j,j) in the positive monoid"""
        ratio = float(MeasureService.check_ratios([r_j])[0])
        return min(1.0, 1.0 / ratio)

    @staticmethod
    def barker_matrix(r, proposals: ProposalSet, omega: float = 1.0) -> np.ndarray:
        r = MeasureService.check_ratios(r)
        n = r.size + 1
        A = LieAlgebraService.assemble_A(r[proposals.as_array()], omega, proposals, n)
        return np.eye(n) - A.matrix / omega

    @staticmethod
    def metropolis_matrix(r, proposals: ProposalSet, omega: float = 1.0) -> np.ndarray:
        r = MeasureService.check_ratios(r)
        n = r.size + 1
        A = LieAlgebraService.assemble_A(r[proposals.as_array()], omega, proposals, n)
        scaled = A.matrix / omega
        return np.eye(n) - scaled / np.diag(scaled).max()

    @staticmethod
    def propose_uniform(rng: np.random.Generator, n: int, current: int, d: int) -> ProposalSet:
        """Uniform d-subset of the states other than `current`; consumes d uniforms"""
        if not 0 <= current < n:
            raise IndexRangeError(f"current state {current} outside [0, {n})")
        if not 1 <= d <= n - 1:
            raise InvalidProposalError(f"proposal size {d} outside [1, {n - 1}]")
        picks = rank_select(rng.random(d)[None, :], n - 1)[0]
        view = RelabelView(current, n)
        return ProposalSet.of(view.apply_array(picks))

    @staticmethod
    def acceptance(
        kind: SamplerKind,
        r_J,
        labels: Optional[Sequence[int]] = None,
        lp_x: str = "ones",
        lp_y: str = "neg_ratios",
    ) -> AcceptanceDistribution:
        """Dispatch to the acceptance rule of `kind`; labels (J then current) are used by HOPS"""
        r_J = np.asarray(r_J, dtype=float)
        if kind.single_proposal and r_J.size != 1:
            raise InvalidParameterError(f"{kind.value} takes exactly one proposal, got {r_J.size}")
        if kind in (SamplerKind.BARKER, SamplerKind.HOBS):
            return SamplerService.barker_probs(r_J)
        if kind in (SamplerKind.METROPOLIS, SamplerKind.HOMS):
            return SamplerService.metropolis_probs(r_J)
        if labels is None:
            labels = list(range(r_J.size + 1))
        return HopsService.hops_probs(r_J, HopsService.local_proposals(r_J.size), lp_x, lp_y, labels)

    @staticmethod
    def batch_acceptance(kind: SamplerKind, r: np.ndarray) -> np.ndarray:
        """Move probabilities for a (chains, d) block of ratios under HOBS or HOMS"""
        if not np.all(np.isfinite(r)):
            raise RatioOverflowError("likelihood ratio overflowed in chain block")
        totals = r.sum(axis=1)
        if not np.all(np.isfinite(totals)):
            raise RatioOverflowError("sum of likelihood ratios overflowed in chain block")
        if kind in (SamplerKind.BARKER, SamplerKind.HOBS):
            return r / (1.0 + totals)[:, None]
        if kind in (SamplerKind.METROPOLIS, SamplerKind.HOMS):
            floor = np.minimum(1.0, r.min(axis=1))
            return r / (1.0 + (totals - floor))[:, None]
        raise InvalidParameterError(f"no vectorized acceptance for {kind.value}")

    @staticmethod
    def transition_matrix(
        kind: SamplerKind,
        measure: ProbabilityMeasure,
        current: int,
        proposals: ProposalSet,
        lp_x: str = "ones",
        lp_y: str = "neg_ratios",
    ) -> np.ndarray:
        """Full matrix in original labels; the current state is moved to n-1 and back"""
        n = measure.n
        proposals.validate_against(current, n)
        if kind.single_proposal and proposals.d != 1:
            raise InvalidParameterError(f"{kind.value} takes exactly one proposal")
        view = RelabelView(current, n)
        r = MeasureService.relabeled_ratios(measure, current)
        relabeled = ProposalSet.of(view.apply_array(proposals.as_array()))

        if kind in (SamplerKind.BARKER, SamplerKind.HOBS):
            P = SamplerService.barker_matrix(r, relabeled)
        elif kind in (SamplerKind.METROPOLIS, SamplerKind.HOMS):
            P = SamplerService.metropolis_matrix(r, relabeled)
        else:
            labels = view.apply_array(HopsService.default_labels(relabeled, n))
            P = HopsService.hops_matrix(r, relabeled, lp_x, lp_y, labels=labels)

        perm = view.permutation()
        original = np.empty_like(P)
        original[np.ix_(perm, perm)] = P
        return original

    @staticmethod
    def chain_step(
        state: ChainState,
        oracle: LogWeightOracle,
        kind: SamplerKind,
        d: int,
        lp_x: str = "ones",
        lp_y: str = "neg_ratios",
    ) -> ChainState:
        """Relabel virtually, propose d states, accept one with a single uniform"""
        current = state.current
        current_log_weight = state.current_log_weight
        if current_log_weight is None:
            current_log_weight = oracle.log_weight(current)

        proposals = SamplerService.propose_uniform(state.rng, oracle.n_states, current, d)
        log_weights = oracle.log_weights(proposals.as_array())
        r_J = MeasureService.ratios_from_log_weights(log_weights, current_log_weight)
        labels = np.append(proposals.as_array(), current)
        distribution = SamplerService.acceptance(kind, r_J, labels, lp_x, lp_y)

        position = distribution.sample(state.rng.random())
        if position < proposals.d:
            return ChainState(proposals.indices[position], state.step + 1, state.rng, float(log_weights[position]))
        return ChainState(current, state.step + 1, state.rng, current_log_weight)

    @staticmethod
    def run_chain(config: ChainConfig, oracle: LogWeightOracle) -> ChainRun:
        """T steps from the 1-based initial state; evaluations counts proposal log-weights"""
        initial = config.initial - 1
        if initial >= oracle.n_states:
            raise IndexRangeError(f"initial state {config.initial} outside [1, {oracle.n_states}]")
        if config.d > oracle.n_states - 1:
            raise InvalidProposalError(f"proposal size {config.d} exceeds n-1={oracle.n_states - 1}")
        counting = CountingOracle(oracle)
        state = ChainState(
            initial,
            0,
            np.random.default_rng(config.seed),
            oracle.log_weight(initial),
        )
        trajectory = [state.current + 1]
        for _ in range(config.T):
            state = SamplerService.chain_step(state, counting, config.kind, config.d, config.lp_x, config.lp_y)
            trajectory.append(state.current + 1)
        return ChainRun(trajectory=trajectory, evaluations=counting.evaluations)

    @staticmethod
    def ensemble_proposals(states: np.ndarray, n: int, d: int, rng: np.random.Generator) -> np.ndarray:
        """(chains, d) sorted proposal block; consumes d uniforms per chain"""
        picks = rank_select(rng.random((states.size, d)), n - 1)
        # Виртуальная перенумерация: индекс current занимает место n-1
        proposals = np.where(picks == states[:, None], n - 1, picks)
        proposals.sort(axis=1)
        return proposals

    @staticmethod
    def ensemble_step(
        states: np.ndarray,
        log_weights: np.ndarray,
        kind: SamplerKind,
        d: int,
        rng: np.random.Generator,
        lp_x: str = "ones",
        lp_y: str = "neg_ratios",
    ) -> np.ndarray:
        """One step of a block of chains over a tabulated target; d + 1 uniforms per chain"""
        n = log_weights.size
        chains = states.size
        proposals = SamplerService.ensemble_proposals(states, n, d, rng)
        with np.errstate(over="ignore", invalid="ignore"):
            r = np.exp(log_weights[proposals] - log_weights[states][:, None])
        u = rng.random(chains)

        if kind == SamplerKind.HOPS:
            if not np.all(np.isfinite(r)):
                raise RatioOverflowError("likelihood ratio overflowed in chain block")
            local = HopsService.local_proposals(d)
            move = np.empty_like(r)
            for chain in range(chains):
                labels = np.append(proposals[chain], states[chain])
                move[chain] = HopsService.hops_probs(r[chain], local, lp_x, lp_y, labels).move_probs
        else:
            move = SamplerService.batch_acceptance(kind, r)

        position = np.sum(np.cumsum(move, axis=1) <= u[:, None], axis=1)
        moved = position < d
        updated = states.copy()
        updated[moved] = proposals[moved, position[moved]]
        return updated
