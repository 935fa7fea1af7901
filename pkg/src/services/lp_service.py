from typing import Optional

import numpy as np

from src.core import get_settings
from src.logs import debug_logger
from src.schemas.lp import LinearProgram, LpSolution, LpStatus

settings = get_settings()


class SimplexSolver:
    """Dense bounded-variable primal simplex with Bland's rule.

    Inequalities get one slack each. Every structural variable starts nonbasic at
    the bound of smaller magnitude; rows whose residual is negative get an
    artificial column -e_i and phase 1 drives those to zero. Phase 2 minimizes c,
    and an optional phase 3 minimizes the secondary objective over the face of
    c-optimal points (only columns with zero c reduced cost may enter).

    A solver instance owns its workspace; use one per solve.
    """

    def __init__(
        self,
        lp: LinearProgram,
        pivot_tol: Optional[float] = None,
        feasibility_tol: Optional[float] = None,
        optimality_tol: Optional[float] = None,
    ):
        self.lp = lp
        self.pivot_tol = settings.PIVOT_TOLERANCE if pivot_tol is None else pivot_tol
        self.feasibility_tol = settings.FEASIBILITY_TOLERANCE if feasibility_tol is None else feasibility_tol
        self.optimality_tol = settings.OPTIMALITY_TOLERANCE if optimality_tol is None else optimality_tol
        self.m = lp.variable_count
        self.k = lp.constraint_count
        self.iteration_limit = settings.LP_ITERATION_FACTOR * (self.m + self.k)
        self.iterations = 0
        self._setup()

    def _setup(self) -> None:
        lp = self.lp
        m, k = self.m, self.k

        # Стартовая точка: граница с меньшим модулем
        x0 = np.where(np.abs(lp.lower) <= np.abs(lp.upper), lp.lower, lp.upper)
        residual = lp.b - lp.A @ x0
        artificial_rows = np.flatnonzero(residual < 0)
        self.n_art = artificial_rows.size
        total = m + k + self.n_art

        matrix = np.zeros((k, total))
        matrix[:, :m] = lp.A
        matrix[:, m:m + k] = np.eye(k)
        for offset, row in enumerate(artificial_rows):
            matrix[row, m + k + offset] = -1.0

        self.lower = np.concatenate([lp.lower, np.zeros(k + self.n_art)])
        self.upper = np.concatenate([lp.upper, np.full(k + self.n_art, np.inf)])
        self.value = np.zeros(total)
        self.value[:m] = x0

        self.basis = np.arange(m, m + k)
        for offset, row in enumerate(artificial_rows):
            self.basis[row] = m + k + offset

        # Tableau B^{-1} M: у строк с искусственной переменной базисный столбец равен -e_i
        sign = np.ones(k)
        sign[artificial_rows] = -1.0
        self.tableau = matrix * sign[:, None]
        self.rhs = lp.b * sign
        self.is_basic = np.zeros(total, dtype=bool)
        self.is_basic[self.basis] = True
        self._refresh_basic_values()

    def _refresh_basic_values(self) -> None:
        nonbasic = ~self.is_basic
        self.value[self.basis] = self.rhs - self.tableau[:, nonbasic] @ self.value[nonbasic]

    def _reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        return cost - cost[self.basis] @ self.tableau

    def _choose_entering(self, reduced: np.ndarray, face: Optional[np.ndarray]) -> tuple[int, float]:
        tol = self.optimality_tol
        for j in range(self.value.size):
            if self.is_basic[j] or self.lower[j] == self.upper[j]:
                continue
            if face is not None and abs(face[j]) > tol:
                continue
            at_lower = self.value[j] <= self.lower[j]
            at_upper = self.value[j] >= self.upper[j]
            if reduced[j] < -tol and not at_upper:
                return j, 1.0
            if reduced[j] > tol and not at_lower:
                return j, -1.0
        return -1, 0.0

    def _ratio_test(self, entering: int, direction: float) -> tuple[float, int, bool]:
        """Returns (step, leaving row or -1, leaving goes to upper bound)"""
        column = self.tableau[:, entering]
        flip = self.upper[entering] - self.lower[entering]
        best_step = np.inf
        best_row = -1
        best_to_upper = False

        for row in range(self.k):
            coefficient = column[row]
            if abs(coefficient) <= self.pivot_tol:
                continue
            var = self.basis[row]
            rate = -direction * coefficient
            if rate < 0:
                limit = (self.value[var] - self.lower[var]) / -rate
                to_upper = False
            elif np.isfinite(self.upper[var]):
                limit = (self.upper[var] - self.value[var]) / rate
                to_upper = True
            else:
                continue
            limit = max(limit, 0.0)
            if limit < best_step - self.feasibility_tol:
                best_step, best_row, best_to_upper = limit, row, to_upper
            elif limit <= best_step + self.feasibility_tol and best_row >= 0 and var < self.basis[best_row]:
                # Bland: при равенстве уходит переменная с меньшим индексом
                best_step, best_row, best_to_upper = min(limit, best_step), row, to_upper

        if flip <= best_step + self.feasibility_tol:
            return flip, -1, False
        return best_step, best_row, best_to_upper

    def _pivot(self, row: int, column: int) -> None:
        pivot = self.tableau[row, column]
        self.tableau[row] /= pivot
        self.rhs[row] /= pivot
        factors = self.tableau[:, column].copy()
        factors[row] = 0.0
        self.tableau -= np.outer(factors, self.tableau[row])
        self.rhs -= factors * self.rhs[row]
        self.tableau[:, column] = 0.0
        self.tableau[row, column] = 1.0

    def _optimize(self, cost: np.ndarray, face_cost: Optional[np.ndarray] = None) -> LpStatus:
        while True:
            if self.iterations >= self.iteration_limit:
                return LpStatus.ITERATION_LIMIT
            reduced = self._reduced_costs(cost)
            face = None if face_cost is None else self._reduced_costs(face_cost)
            entering, direction = self._choose_entering(reduced, face)
            if entering < 0:
                return LpStatus.OPTIMAL

            step, row, to_upper = self._ratio_test(entering, direction)
            if not np.isfinite(step):
                return LpStatus.UNBOUNDED
            self.iterations += 1

            if row < 0:
                # Переход переменной на противоположную границу без смены базиса
                self.value[entering] = self.upper[entering] if direction > 0 else self.lower[entering]
            else:
                leaving = self.basis[row]
                self.value[entering] += direction * step
                self._pivot(row, entering)
                self.is_basic[leaving] = False
                self.is_basic[entering] = True
                self.basis[row] = entering
                self.value[leaving] = self.upper[leaving] if to_upper else self.lower[leaving]
            self._refresh_basic_values()

    def _padded(self, cost: np.ndarray) -> np.ndarray:
        padded = np.zeros(self.value.size)
        padded[:self.m] = cost
        return padded

    def solve(self) -> LpSolution:
        lp = self.lp
        if self.n_art:
            phase_one = np.zeros(self.value.size)
            phase_one[self.m + self.k:] = 1.0
            status = self._optimize(phase_one)
            if status != LpStatus.OPTIMAL:
                return self._solution(status)
            if self.value[self.m + self.k:].sum() > self.feasibility_tol:
                return self._solution(LpStatus.INFEASIBLE)
            # Искусственные переменные фиксируются в нуле
            self.upper[self.m + self.k:] = 0.0

        primary = self._padded(lp.c)
        status = self._optimize(primary)
        if status == LpStatus.OPTIMAL and lp.secondary is not None:
            status = self._optimize(self._padded(lp.secondary), face_cost=primary)
        return self._solution(status)

    def _solution(self, status: LpStatus) -> LpSolution:
        x = np.clip(self.value[:self.m], self.lp.lower, self.lp.upper)
        return LpSolution(
            x=x,
            objective=float(self.lp.c @ x),
            status=status,
            iterations=self.iterations,
        )


class LpService:
    """Linear programs for the HOPS acceptance rule"""

    @staticmethod
    def solve(lp: LinearProgram) -> LpSolution:
        solution = SimplexSolver(lp).solve()
        if not solution.is_optimal:
            debug_logger.debug(
                f"LP with {lp.variable_count} variables and {lp.constraint_count} rows: "
                f"{solution.status.value} after {solution.iterations} iterations"
            )
        return solution

    @staticmethod
    def is_feasible(lp: LinearProgram, x: np.ndarray, tol: Optional[float] = None) -> bool:
        tol = settings.FEASIBILITY_TOLERANCE if tol is None else tol
        x = np.asarray(x, dtype=float)
        return bool(
            np.all(lp.A @ x <= lp.b + tol)
            and np.all(x >= lp.lower - tol)
            and np.all(x <= lp.upper + tol)
        )
