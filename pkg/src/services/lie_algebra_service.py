import math
from typing import Union

import numpy as np

from src.core.exceptions import IndexRangeError, InvalidParameterError
from src.models.chain import ProposalSet
from src.models.generator import BasisIndex, GeneratorElement
from src.services.measure_service import MeasureService

IndexLike = Union[BasisIndex, tuple[int, int]]

# Порядок ряда Тейлора и порог нормы после масштабирования
SERIES_ORDER = 13
SERIES_NORM_TARGET = 0.5


def _positive_ratios(r) -> np.ndarray:
    return MeasureService.check_ratios(r)


class LieAlgebraService:
    """Stochastic Lie algebra, its p-annihilating subalgebra and their exponentials.

    States are 0-based; the reference state is n-1, so STO basis rows j range over
    [0, n) and columns k over [0, n-1), while the p-basis uses j, k in [0, n-1) with
    ratios r_j = p_j / p_{n-1}.
    """

    @staticmethod
    def sto_basis_element(n: int, j: int, k: int) -> GeneratorElement:
        if n < 2:
            raise IndexRangeError(f"state count {n} < 2")
        BasisIndex(j, k).validate(n)
        matrix = np.zeros((n, n))
        matrix[j, k] += 1.0
        matrix[j, n - 1] -= 1.0
        return GeneratorElement(matrix)

    @staticmethod
    def commutator(x: GeneratorElement, y: GeneratorElement) -> GeneratorElement:
        """Direct [X, Y] = XY - YX"""
        return x.bracket(y)

    @staticmethod
    def sto_commutator_closed(n: int, first: IndexLike, second: IndexLike) -> GeneratorElement:
        a = BasisIndex.coerce(first).validate(n)
        b = BasisIndex.coerce(second).validate(n)
        last = n - 1
        left = float(a.k == b.j) - float(b.j == last)
        right = float(b.k == a.j) - float(a.j == last)
        matrix = np.zeros((n, n))
        if left:
            matrix += left * LieAlgebraService.sto_basis_element(n, a.j, b.k).matrix
        if right:
            matrix -= right * LieAlgebraService.sto_basis_element(n, b.j, a.k).matrix
        return GeneratorElement(matrix)

    @staticmethod
    def p_basis_element(r, j: int, k: int) -> GeneratorElement:
        """(e_j - r_j e_n)(e_k - e_n)^T"""
        r = _positive_ratios(r)
        n = r.size + 1
        BasisIndex(j, k).validate(n, p_basis=True)
        left = np.zeros(n)
        left[j] = 1.0
        left[n - 1] = -r[j]
        right = np.zeros(n)
        right[k] = 1.0
        right[n - 1] = -1.0
        return GeneratorElement(np.outer(left, right), p_annihilating=True)

    @staticmethod
    def p_power(r, j: int, k: int, i: int) -> np.ndarray:
        """(e^p_(j,k))^i = (delta_jk + r_j)^(i-1) e^p_(j,k); identity for i = 0"""
        if i < 0:
            raise InvalidParameterError(f"power must be nonnegative, got {i}")
        element = LieAlgebraService.p_basis_element(r, j, k)
        if i == 0:
            return np.eye(element.n)
        r = np.asarray(r, dtype=float)
        return (float(j == k) + r[j]) ** (i - 1) * element.matrix

    @staticmethod
    def p_commutator_closed(r, first: IndexLike, second: IndexLike) -> GeneratorElement:
        r = _positive_ratios(r)
        n = r.size + 1
        a = BasisIndex.coerce(first).validate(n, p_basis=True)
        b = BasisIndex.coerce(second).validate(n, p_basis=True)
        left = float(a.k == b.j) + r[b.j]
        right = float(b.k == a.j) + r[a.j]
        matrix = (
            left * LieAlgebraService.p_basis_element(r, a.j, b.k).matrix
            - right * LieAlgebraService.p_basis_element(r, b.j, a.k).matrix
        )
        return GeneratorElement(matrix, p_annihilating=True)

    @staticmethod
    def f_coefficient(r_j: float, delta: float, t: float) -> float:
        """f(t) = (exp(-t c) - 1) / c with c = delta_jk + r_j, so exp(-t e^p) = I + f(t) e^p"""
        c = delta + r_j
        return math.expm1(-t * c) / c

    @staticmethod
    def exp_p_basis(r, j: int, k: int, t: float) -> np.ndarray:
        """Closed-form exp(t e^p_(j,k))"""
        if not math.isfinite(t):
            raise InvalidParameterError(f"time must be finite, got {t!r}")
        element = LieAlgebraService.p_basis_element(r, j, k)
        r = np.asarray(r, dtype=float)
        coefficient = LieAlgebraService.f_coefficient(r[j], float(j == k), -t)
        return np.eye(element.n) + coefficient * element.matrix

    @staticmethod
    def series_expm(x: np.ndarray) -> np.ndarray:
        """Scaling and squaring with an order-13 Taylor polynomial"""
        x = np.asarray(x, dtype=float)
        norm = np.linalg.norm(x, 1)
        squarings = 0
        if norm > SERIES_NORM_TARGET:
            squarings = int(math.ceil(math.log2(norm / SERIES_NORM_TARGET)))
        scaled = x / (2.0 ** squarings)

        # Схема Горнера
        identity = np.eye(x.shape[0])
        result = identity.copy()
        for order in range(SERIES_ORDER, 0, -1):
            result = identity + scaled @ result / order

        for _ in range(squarings):
            result = result @ result
        return result

    @staticmethod
    def diagonal_semigroup_element(r, t) -> np.ndarray:
        """exp(-sum_j t_j e^p_(j,j)) for t >= 0; stays inside the positive monoid"""
        r = _positive_ratios(r)
        t = np.asarray(t, dtype=float)
        if t.shape != r.shape:
            raise InvalidParameterError(f"expected {r.size} times, got shape {t.shape}")
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise InvalidParameterError("diagonal times must be finite and nonnegative")
        n = r.size + 1
        generator = np.zeros((n, n))
        for j in np.flatnonzero(t):
            generator -= t[j] * LieAlgebraService.p_basis_element(r, int(j), int(j)).matrix
        return LieAlgebraService.series_expm(generator)

    @staticmethod
    def _frames(r_J: np.ndarray, proposals: ProposalSet, n: int) -> tuple[np.ndarray, np.ndarray]:
        """L (n x d) with columns e_ju - r_u e_n and R (d x n) with rows (e_jv - e_n)^T"""
        idx = proposals.as_array()
        d = idx.size
        left = np.zeros((n, d))
        left[idx, np.arange(d)] = 1.0
        left[n - 1, :] = -r_J
        right = np.zeros((d, n))
        right[np.arange(d), idx] = 1.0
        right[:, n - 1] = -1.0
        return left, right

    @staticmethod
    def _check_proposals(proposals: ProposalSet, n: int) -> None:
        if max(proposals.indices) >= n - 1:
            raise IndexRangeError(f"proposal indices must lie in [0, {n - 1})")

    @staticmethod
    def lift_coefficients(alpha, r_J, proposals: ProposalSet, n: int) -> GeneratorElement:
        """sum_{u,v} alpha_uv e^p_(j_u, j_v)"""
        r_J = _positive_ratios(r_J)
        alpha = np.asarray(alpha, dtype=float)
        if alpha.shape != (proposals.d, proposals.d) or r_J.size != proposals.d:
            raise InvalidParameterError("coefficient matrix and ratios must match the proposal size")
        LieAlgebraService._check_proposals(proposals, n)
        left, right = LieAlgebraService._frames(r_J, proposals, n)
        return GeneratorElement(left @ alpha @ right, p_annihilating=True)

    @staticmethod
    def product_coefficients(alpha, beta, r_J) -> np.ndarray:
        """Coefficients of lift(alpha) @ lift(beta): alpha (I + 1 r_J) beta"""
        r_J = _positive_ratios(r_J)
        middle = np.eye(r_J.size) + np.outer(np.ones(r_J.size), r_J)
        return np.asarray(alpha, dtype=float) @ middle @ np.asarray(beta, dtype=float)

    @staticmethod
    def assemble_A(r_J, omega: float, proposals: ProposalSet, n: int) -> GeneratorElement:
        """omega * sum_{u,v} (delta_uv - r_v / (1 + S)) e^p_(j_u, j_v)"""
        if omega == 0 or not math.isfinite(omega):
            raise InvalidParameterError(f"omega must be finite and nonzero, got {omega!r}")
        r_J = _positive_ratios(r_J)
        if r_J.size != proposals.d:
            raise InvalidParameterError(f"got {r_J.size} ratios for {proposals.d} proposals")
        LieAlgebraService._check_proposals(proposals, n)
        total = r_J.sum()
        coefficients = np.eye(r_J.size) - np.outer(np.ones(r_J.size), r_J) / (1.0 + total)
        return LieAlgebraService.lift_coefficients(omega * coefficients, r_J, proposals, n)

    @staticmethod
    def exp_A(A: GeneratorElement, omega: float, t: float) -> np.ndarray:
        """exp(t A) = I + (exp(omega t) - 1) / omega * A, using A^2 = omega A"""
        if omega == 0:
            raise InvalidParameterError("omega must be nonzero")
        return np.eye(A.n) + math.expm1(omega * t) / omega * A.matrix
