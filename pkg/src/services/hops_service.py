from typing import Optional, Sequence

import numpy as np

from src.core import get_settings
from src.core.exceptions import (
    InvalidParameterError,
    LpSolveError,
    MembershipViolationError,
)
from src.models.chain import AcceptanceDistribution, ProposalSet
from src.models.hops import HopsProgram, TauCoefficients
from src.schemas.lp import LinearProgram, LpSolution
from src.schemas.run import LP_PRESETS
from src.services.lp_service import LpService
from src.services.measure_service import MeasureService

settings = get_settings()

# Вес вторичной цели внутри g(a, b) и множители хеша меток
TIE_BREAK_WEIGHT = 1e-3
_HASH_A = 0.7548776662466927
_HASH_B = 0.5698402909980532
_HASH_AB = 0.1180339887498949


def _label_hash(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float) + 1.0
    b = np.asarray(b, dtype=float) + 1.0
    value = a * _HASH_A + b * _HASH_B + a * b * _HASH_AB
    return value - np.floor(value)


class HopsService:
    """HOPS linear program: assembly, reduction, solving and transition recovery.

    Coordinates are relabeled: the current state is the reference n-1 and the
    proposals J lie in [0, n-1). tau is vectorized column-major, variable index
    v * (n-1) + u for tau_uv in full form and v * d + u in reduced form.
    """

    @staticmethod
    def preset_vector(name: str, r_J: np.ndarray) -> np.ndarray:
        """Objective vector over J followed by the current state (ratio of the current state is 1)"""
        d = r_J.size
        if name == "ones":
            return np.ones(d + 1)
        if name == "neg_ones":
            return -np.ones(d + 1)
        if name == "ratios":
            return np.append(r_J, 1.0)
        if name == "neg_ratios":
            return -np.append(r_J, 1.0)
        if name == "last":
            vector = np.zeros(d + 1)
            vector[-1] = 1.0
            return vector
        raise InvalidParameterError(f"unknown LP objective preset '{name}', expected one of {LP_PRESETS}")

    @staticmethod
    def _objective_factors(x: np.ndarray, y: np.ndarray, r_J: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """x^T [I; -r_J] and [I, -1] y restricted to J"""
        return x[:-1] - x[-1] * r_J, y[:-1] - y[-1]

    @staticmethod
    def _full_vector(values: np.ndarray, proposals: ProposalSet, n: int, last: float) -> np.ndarray:
        full = np.zeros(n)
        full[proposals.as_array()] = values[:-1]
        full[n - 1] = last
        return full

    @staticmethod
    def build_lp(
        r,
        proposals: ProposalSet,
        x: Optional[np.ndarray] = None,
        y: Optional[np.ndarray] = None,
    ) -> HopsProgram:
        """Full-form program over vec(tau) with (n-1)^2 variables.

        x and y are length-n objective vectors; by default x = 1 on J and the
        current state, y = -(r_J, 1).
        """
        r = MeasureService.check_ratios(r)
        n = r.size + 1
        if max(proposals.indices) >= n - 1:
            raise InvalidParameterError(f"proposals must lie in [0, {n - 1})")
        r_J = r[proposals.as_array()]
        if x is None:
            x = HopsService._full_vector(HopsService.preset_vector("ones", r_J), proposals, n, 1.0)
        if y is None:
            y = HopsService._full_vector(HopsService.preset_vector("neg_ratios", r_J), proposals, n, -1.0)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != (n,) or y.shape != (n,):
            raise InvalidParameterError(f"objective vectors must have length {n}")

        size = n - 1
        mask = np.zeros(size)
        mask[proposals.as_array()] = 1.0
        r_masked = r * mask
        identity = np.eye(size)

        gains = np.vstack([
            np.kron(mask[None, :], identity),
            np.kron(identity, r_masked[None, :]),
            np.kron(mask[None, :], r_masked[None, :]),
        ])
        U = np.vstack([gains, -gains])
        v = np.concatenate([np.ones(2 * n - 1), np.zeros(2 * n - 1)])

        outside = np.diag(1.0 - mask)
        sparsity = np.vstack([np.kron(identity, outside), np.kron(outside, identity)])

        x_factor = x[:-1] - x[-1] * r_masked
        y_factor = y[:-1] - y[-1] * mask
        objective = -np.kron(y_factor, x_factor)

        idx = proposals.as_array()
        secondary = np.zeros(size * size)
        secondary[[v_ * size + u for v_ in idx for u in idx]] = HopsService.tie_break_objective(
            r_J, HopsService.default_labels(proposals, n)
        )

        vec_identity = identity.flatten(order="F")
        index_map = tuple((u, v_) for v_ in range(size) for u in range(size))
        return HopsProgram(
            objective=objective,
            U=U,
            v=v,
            lower=vec_identity - 1.0,
            upper=vec_identity,
            index_map=index_map,
            n=n,
            proposals=proposals,
            sparsity=sparsity,
            secondary=secondary,
        )

    @staticmethod
    def reduce(program: HopsProgram) -> HopsProgram:
        """Drop variables fixed at 0 by the sparsity block; keep the 2(2d+1) rows that involve J"""
        if program.is_reduced:
            return program
        n = program.n
        size = n - 1
        idx = program.proposals.as_array()
        d = idx.size
        columns = np.array([v * size + u for v in idx for u in idx])
        rows = np.concatenate([idx, size + idx, [2 * size]])
        rows = np.concatenate([rows, rows + (2 * n - 1)])
        index_map = tuple((int(u), int(v)) for v in idx for u in idx)
        return HopsProgram(
            objective=program.objective[columns],
            U=program.U[np.ix_(rows, columns)],
            v=program.v[rows],
            lower=program.lower[columns],
            upper=program.upper[columns],
            index_map=index_map,
            n=n,
            proposals=program.proposals,
            sparsity=None,
            secondary=None if program.secondary is None else program.secondary[columns],
        )

    @staticmethod
    def default_labels(proposals: ProposalSet, n: int) -> np.ndarray:
        return np.append(proposals.as_array(), n - 1)

    @staticmethod
    def tie_break_objective(r_J: np.ndarray, labels: np.ndarray) -> np.ndarray:
        """Reduced-form costs of -sum_{a,b} g(a,b) P_ab with g = [a != b] + w h(a, b).

        g depends only on state labels, never on which state is current, so every
        member of a proposal block resolves a degenerate optimum to the same matrix.
        """
        labels = np.asarray(labels, dtype=np.int64)
        grid_a, grid_b = np.meshgrid(labels, labels, indexing="ij")
        g = (grid_a != grid_b).astype(float) + TIE_BREAK_WEIGHT * _label_hash(grid_a, grid_b)
        d = r_J.size
        gain = -g[:d, :d] + g[:d, d][:, None] + r_J[:, None] * g[d, :d][None, :] - r_J[:, None] * g[d, d]
        return -gain.flatten(order="F")

    @staticmethod
    def build_reduced_lp(
        r_J,
        proposals: ProposalSet,
        x: Optional[np.ndarray] = None,
        y: Optional[np.ndarray] = None,
        labels: Optional[Sequence[int]] = None,
        n: Optional[int] = None,
    ) -> HopsProgram:
        """Reduced program directly from r_J; x, y are (d+1)-vectors over J and the current state"""
        r_J = MeasureService.check_ratios(r_J)
        d = r_J.size
        if d != proposals.d:
            raise InvalidParameterError(f"got {d} ratios for {proposals.d} proposals")
        n = max(proposals.indices) + 2 if n is None else n
        x = HopsService.preset_vector("ones", r_J) if x is None else np.asarray(x, dtype=float)
        y = HopsService.preset_vector("neg_ratios", r_J) if y is None else np.asarray(y, dtype=float)
        if x.shape != (d + 1,) or y.shape != (d + 1,):
            raise InvalidParameterError(f"reduced objective vectors must have length {d + 1}")
        labels = HopsService.default_labels(proposals, n) if labels is None else np.asarray(labels)

        identity = np.eye(d)
        ones = np.ones((1, d))
        gains = np.vstack([
            np.kron(ones, identity),
            np.kron(identity, r_J[None, :]),
            np.kron(ones, r_J[None, :]),
        ])
        x_factor, y_factor = HopsService._objective_factors(x, y, r_J)
        vec_identity = identity.flatten(order="F")
        idx = proposals.indices
        return HopsProgram(
            objective=-np.kron(y_factor, x_factor),
            U=np.vstack([gains, -gains]),
            v=np.concatenate([np.ones(2 * d + 1), np.zeros(2 * d + 1)]),
            lower=vec_identity - 1.0,
            upper=vec_identity,
            index_map=tuple((idx[u], idx[v]) for v in range(d) for u in range(d)),
            n=n,
            proposals=proposals,
            secondary=HopsService.tie_break_objective(r_J, labels),
        )

    @staticmethod
    def to_linear_program(program: HopsProgram) -> LinearProgram:
        A, b = program.U, program.v
        if program.sparsity is not None:
            zeros = np.zeros(program.sparsity.shape[0])
            A = np.vstack([A, program.sparsity, -program.sparsity])
            b = np.concatenate([b, zeros, zeros])
        return LinearProgram(
            c=program.objective,
            A=A,
            b=b,
            lower=program.lower,
            upper=program.upper,
            secondary=program.secondary,
        )

    @staticmethod
    def solve(program: HopsProgram) -> tuple[TauCoefficients, LpSolution]:
        solution = LpService.solve(HopsService.to_linear_program(program))
        if not solution.is_optimal:
            # Программа всегда допустима (tau = 0), так что это внутренняя ошибка
            raise LpSolveError(
                f"HOPS program ended with status {solution.status.value}",
                {"status": solution.status.value, "iterations": solution.iterations},
            )
        tau = np.zeros((program.n - 1, program.n - 1))
        for value, (u, v) in zip(solution.x, program.index_map):
            tau[u, v] = value
        return TauCoefficients(tau, program.proposals), solution

    @staticmethod
    def recover_transition(tau: TauCoefficients, r, tol: Optional[float] = None) -> np.ndarray:
        """P = I - [I; -r_J] tau [I, -1_J]; rows outside J and the current state are identity rows"""
        tol = settings.MEMBERSHIP_TOLERANCE if tol is None else tol
        r = MeasureService.check_ratios(r)
        n = r.size + 1
        if tau.n != n:
            raise InvalidParameterError(f"tau is for {tau.n} states, ratios for {n}")
        tau.check_box(tol)

        mask = np.zeros(n - 1)
        mask[tau.proposals.as_array()] = 1.0
        left = np.vstack([np.eye(n - 1), -(r * mask)[None, :]])
        right = np.hstack([np.eye(n - 1), -mask[:, None]])
        P = np.eye(n) - left @ tau.tau @ right

        idx = tau.proposals.as_array()
        row_sums = tau.tau[np.ix_(idx, idx)].sum(axis=1)
        checks = [
            ("last column (tau 1_J)", row_sums),
            ("last row (r_J tau)", P[n - 1, idx]),
            ("last element (r_J tau 1_J)", np.array([1.0 - P[n - 1, n - 1]])),
        ]
        for name, values in checks:
            worst = max(-values.min(), values.max() - 1.0)
            if worst > tol:
                raise MembershipViolationError(
                    f"{name}: constraint violated by {worst!r}",
                    {"constraint": name, "violation": float(worst)},
                )
        return P

    @staticmethod
    def _distribution_from_tau(block: np.ndarray, r_J: np.ndarray) -> AcceptanceDistribution:
        move = r_J @ block
        probabilities = np.append(move, 1.0 - move.sum())
        tol = settings.CLAMP_TOLERANCE
        if probabilities.min() < -tol:
            raise MembershipViolationError(
                f"HOPS acceptance row has entry {probabilities.min()!r} below -{tol}",
                {"constraint": "nonnegativity", "violation": float(-probabilities.min())},
            )
        probabilities = np.where(probabilities < 0, 0.0, probabilities)
        probabilities = probabilities / probabilities.sum()
        return AcceptanceDistribution(probabilities[:-1], float(probabilities[-1]))

    @staticmethod
    def hops_probs(
        r,
        proposals: ProposalSet,
        x: str = "ones",
        y: str = "neg_ratios",
        labels: Optional[Sequence[int]] = None,
    ) -> AcceptanceDistribution:
        """Acceptance row of the current state (n-1) for full ratios r and proposals J.

        Move probabilities follow the order of proposals.indices. labels name the
        states of J and then the current state for the tie-break.
        """
        r = MeasureService.check_ratios(r)
        n = r.size + 1
        if max(proposals.indices) >= n - 1:
            raise InvalidParameterError(f"proposals must lie in [0, {n - 1})")
        r_J = r[proposals.as_array()]
        labels = HopsService.default_labels(proposals, n) if labels is None else labels
        program = HopsService.build_reduced_lp(
            r_J,
            proposals,
            x=HopsService.preset_vector(x, r_J),
            y=HopsService.preset_vector(y, r_J),
            labels=labels,
            n=n,
        )
        tau, _ = HopsService.solve(program)
        return HopsService._distribution_from_tau(tau.block(), r_J)

    @staticmethod
    def acceptance(
        r_J,
        labels: Sequence[int],
        x: str = "ones",
        y: str = "neg_ratios",
    ) -> AcceptanceDistribution:
        """hops_probs in the local frame: J = 0..d-1, the current state is d"""
        r_J = MeasureService.check_ratios(r_J)
        return HopsService.hops_probs(r_J, HopsService.local_proposals(r_J.size), x, y, labels)

    @staticmethod
    def local_proposals(d: int) -> ProposalSet:
        return ProposalSet(tuple(range(d)))

    @staticmethod
    def hops_matrix(
        r,
        proposals: ProposalSet,
        x: str = "ones",
        y: str = "neg_ratios",
        labels: Optional[Sequence[int]] = None,
    ) -> np.ndarray:
        """Full HOPS transition matrix in the relabeled frame"""
        r = MeasureService.check_ratios(r)
        n = r.size + 1
        r_J = r[proposals.as_array()]
        labels = HopsService.default_labels(proposals, n) if labels is None else labels
        program = HopsService.build_reduced_lp(
            r_J,
            proposals,
            x=HopsService.preset_vector(x, r_J),
            y=HopsService.preset_vector(y, r_J),
            labels=labels,
            n=n,
        )
        tau, _ = HopsService.solve(program)
        return HopsService.recover_transition(tau, r)

    @staticmethod
    def frobenius_objective(P: np.ndarray, r, proposals: ProposalSet) -> float:
        """<P, 1_S r_S> over S = J and the current state, with r = 1 at the current state"""
        r = np.asarray(r, dtype=float)
        n = r.size + 1
        support = np.append(proposals.as_array(), n - 1)
        weights = np.append(r[proposals.as_array()], 1.0)
        return float((np.asarray(P)[np.ix_(support, support)] @ weights).sum())
