from collections import Counter
from itertools import combinations

import numpy as np
import pytest

from src.core.exceptions import InvalidParameterError, InvalidProposalError, RatioOverflowError
from src.models.chain import AcceptanceDistribution, ChainState, ProposalSet, SamplerKind
from src.models.measure import TabulatedLogWeights
from src.schemas.run import ChainConfig
from src.services.diagnostics_service import DiagnosticsService
from src.services.measure_service import MeasureService
from src.services.sampler_service import SamplerService, rank_select


def random_instance(rng, n_max):
    n = int(rng.integers(2, n_max + 1))
    measure = MeasureService.normalize(rng.uniform(0.05, 1.0, n))
    r = MeasureService.reference_ratios(measure)
    d = int(rng.integers(1, n))
    return measure, r, ProposalSet.of(rng.choice(n - 1, size=d, replace=False))


class TestAcceptanceRules:
    """Тесты правил принятия HOBS и HOMS"""

    def test_barker_reference_row(self):
        """Тест строки (1,2,3,10)/16"""
        distribution = SamplerService.barker_probs([0.1, 0.2, 0.3])
        np.testing.assert_allclose(distribution.move_probs, [1 / 16, 2 / 16, 3 / 16], atol=1e-15)
        assert distribution.stay_prob == pytest.approx(10 / 16, abs=1e-15)

    def test_barker_symmetric_pair(self):
        """Тест r = 1 при d = 1"""
        distribution = SamplerService.barker_probs([1.0])
        assert distribution.move_probs[0] == 0.5
        assert distribution.stay_prob == 0.5

    def test_metropolis_reference_row(self):
        """Тест строки (1,2,3,9)/15"""
        distribution = SamplerService.metropolis_probs([0.1, 0.2, 0.3])
        np.testing.assert_allclose(distribution.move_probs, [1 / 15, 2 / 15, 3 / 15], atol=1e-15)
        assert distribution.stay_prob == pytest.approx(9 / 15, abs=1e-15)

    @pytest.mark.parametrize("r, move", [(0.5, 0.5), (2.0, 1.0)])
    def test_metropolis_single(self, r, move):
        """Тест min(1, r) при d = 1"""
        distribution = SamplerService.metropolis_probs([r])
        assert distribution.move_probs[0] == move
        assert distribution.stay_prob == pytest.approx(1 - move)

    def test_reduction_identities(self):
        """Тест сведения к правилам Баркера и Метрополиса на 10^5 отношениях"""
        ratios = np.exp(np.random.default_rng(11).uniform(-12, 12, 100_000))
        for r in ratios:
            assert abs(SamplerService.barker_probs([r]).move_probs[0] - r / (1 + r)) <= 1e-15
            assert abs(SamplerService.metropolis_probs([r]).move_probs[0] - min(1.0, r)) <= 1e-15

    def test_saturated_regime(self):
        """Тест близости HOBS и HOMS при больших отношениях"""
        rng = np.random.default_rng(12)
        for _ in range(200):
            r_J = np.exp(rng.uniform(np.log(1e3), np.log(1e6), int(rng.integers(8, 17))))
            gap = SamplerService.barker_probs(r_J).move_probs - SamplerService.metropolis_probs(r_J).move_probs
            assert np.abs(gap).max() <= 1e-3

    def test_fuzzed_rows_are_distributions(self):
        """Тест: строки неотрицательны и суммируются в 1"""
        rng = np.random.default_rng(13)
        for _ in range(10_000):
            r_J = np.exp(rng.uniform(-20, 20, int(rng.integers(1, 9))))
            for distribution in (SamplerService.barker_probs(r_J), SamplerService.metropolis_probs(r_J)):
                probabilities = distribution.probabilities()
                assert probabilities.min() >= 0
                assert abs(probabilities.sum() - 1) <= 1e-12

    def test_overflowing_sum(self):
        """Тест переполнения суммы отношений"""
        with pytest.raises(RatioOverflowError):
            SamplerService.barker_probs([1e308, 1e308])

    def test_barker_family(self):
        """Тест семейства exp(-tA): t=0 тождество, большое t дает HOBS"""
        zero = SamplerService.barker_family_probs([0.1, 0.2, 0.3], 0.0)
        assert zero.stay_prob == 1.0
        limit = SamplerService.barker_family_probs([0.1, 0.2, 0.3], 50.0)
        np.testing.assert_allclose(limit.move_probs, [1 / 16, 2 / 16, 3 / 16], atol=1e-15)
        with pytest.raises(InvalidParameterError):
            SamplerService.barker_family_probs([0.1], -1.0)

    def test_metropolis_step_bound(self):
        """Тест допустимого шага min(1, 1/r)"""
        assert SamplerService.metropolis_step_bound(0.5) == 1.0
        assert SamplerService.metropolis_step_bound(4.0) == 0.25

    def test_sampling_scan_order(self):
        """Тест выбора по накопленной сумме: слева направо, остаться в конце"""
        distribution = AcceptanceDistribution(np.array([0.25, 0.25]), 0.5)
        assert distribution.sample(0.0) == 0
        assert distribution.sample(0.25) == 1
        assert distribution.sample(0.49) == 1
        assert distribution.sample(0.5) == 2
        assert distribution.sample(0.99) == 2

    def test_single_proposal_kind_rejects_blocks(self):
        """Тест: barker и metropolis принимают только одно предложение"""
        with pytest.raises(InvalidParameterError):
            SamplerService.acceptance(SamplerKind.METROPOLIS, [0.5, 0.7])


class TestMatrices:
    """Тесты матриц Баркера и Метрополиса"""

    def setup_method(self):
        self.measure = MeasureService.normalize([1, 2, 3, 4, 10])
        self.r = MeasureService.reference_ratios(self.measure)
        self.proposals = ProposalSet((0, 1, 2))

    def test_reference_barker(self):
        """Тест эталонной матрицы Баркера"""
        expected = np.array([[1, 2, 3, 0, 10]] * 3 + [[0, 0, 0, 16, 0], [1, 2, 3, 0, 10]]) / 16
        np.testing.assert_allclose(SamplerService.barker_matrix(self.r, self.proposals), expected, atol=1e-12)

    def test_reference_metropolis(self):
        """Тест эталонной матрицы Метрополиса"""
        expected = np.array([
            [0, 2, 3, 0, 10],
            [1, 1, 3, 0, 10],
            [1, 2, 2, 0, 10],
            [0, 0, 0, 15, 0],
            [1, 2, 3, 0, 9],
        ]) / 15
        np.testing.assert_allclose(SamplerService.metropolis_matrix(self.r, self.proposals), expected, atol=1e-12)

    def test_omega_independence(self):
        """Тест независимости от omega"""
        for builder in (SamplerService.barker_matrix, SamplerService.metropolis_matrix):
            np.testing.assert_allclose(
                builder(self.r, self.proposals, 1.0), builder(self.r, self.proposals, 2.5), atol=1e-12
            )

    def test_full_proposal_barker_is_rank_one(self):
        """Тест J = [n-1]: строки J и n равны p"""
        P = SamplerService.barker_matrix(self.r, ProposalSet((0, 1, 2, 3)))
        for row in P:
            np.testing.assert_allclose(row, self.measure.as_array(), atol=1e-15)

    def test_metropolis_unit_ratio(self):
        """Тест d = 1, r = 1: переход с вероятностью 1"""
        P = SamplerService.metropolis_matrix(np.ones(2), ProposalSet((0,)))
        assert P[2, 0] == pytest.approx(1.0)
        assert P[2, 2] == pytest.approx(0.0, abs=1e-15)

    def test_stationarity_and_boundary(self):
        """Тест pP = p, строк-стохастичности и границы моноида"""
        rng = np.random.default_rng(14)
        for _ in range(200):
            measure, r, proposals = random_instance(rng, 12)
            p = measure.as_array()
            n = measure.n
            barker = SamplerService.barker_matrix(r, proposals)
            metropolis = SamplerService.metropolis_matrix(r, proposals)
            for P in (barker, metropolis):
                np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)
                assert P.min() >= -1e-12
                assert np.abs(p @ P - p).max() <= 1e-10
            support = np.append(proposals.as_array(), n - 1)
            assert abs(np.diag(metropolis)[support].min()) <= 1e-12
            untouched = np.setdiff1d(np.arange(n), support)
            np.testing.assert_array_equal(barker[untouched], np.eye(n)[untouched])

    def test_detailed_balance_single_proposal(self):
        """Тест детального баланса при d = 1"""
        rng = np.random.default_rng(15)
        for _ in range(200):
            measure, r, _ = random_instance(rng, 10)
            proposals = ProposalSet((int(rng.integers(measure.n - 1)),))
            for P in (SamplerService.barker_matrix(r, proposals), SamplerService.metropolis_matrix(r, proposals)):
                assert DiagnosticsService.detailed_balance_violation(measure, P) <= 1e-12

    def test_transition_matrix_relabels(self):
        """Тест полной матрицы для текущего состояния не на последнем месте"""
        P = SamplerService.transition_matrix(SamplerKind.HOBS, self.measure, 1, ProposalSet((0, 4)))
        report = DiagnosticsService.check_membership(P, self.measure)
        assert report.is_member
        # из состояния 2 (вес 2): r = (1/2, 10/2), S = 5.5
        np.testing.assert_allclose(P[1], [0.5 / 6.5, 1 / 6.5, 0, 0, 5 / 6.5], atol=1e-15)


class TestProposals:
    """Тесты равномерных предложений без возвращения"""

    def test_forced_two_states(self):
        """Тест n = 2: всегда второе состояние"""
        rng = np.random.default_rng(0)
        for _ in range(10):
            assert SamplerService.propose_uniform(rng, 2, 0, 1).indices == (1,)

    def test_forced_full_set(self):
        """Тест n = 5, d = 4"""
        rng = np.random.default_rng(0)
        assert SamplerService.propose_uniform(rng, 5, 4, 4).indices == (0, 1, 2, 3)
        assert SamplerService.propose_uniform(rng, 5, 2, 4).indices == (0, 1, 3, 4)

    def test_draw_count(self):
        """Тест: ровно d равномерных чисел на предложение"""
        first, second = np.random.default_rng(3), np.random.default_rng(3)
        SamplerService.propose_uniform(first, 10, 4, 3)
        second.random(3)
        assert first.random() == second.random()

    def test_invalid_size(self):
        """Тест размера вне диапазона"""
        with pytest.raises(InvalidProposalError):
            SamplerService.propose_uniform(np.random.default_rng(0), 4, 0, 4)

    def test_rank_select_enumerates_subsets(self):
        """Тест биекции: сетка равномерных чисел дает каждое упорядоченное множество одинаково часто"""
        m, d = 5, 2
        grid = [(a + 0.5) / m for a in range(m)]
        second = [(b + 0.5) / (m - 1) for b in range(m - 1)]
        u = np.array([[a, b] for a in grid for b in second])
        picks = rank_select(u, m)
        ordered = Counter(map(tuple, picks))
        assert len(ordered) == m * (m - 1)
        assert set(ordered.values()) == {1}

    def test_uniform_subset_frequencies(self):
        """Тест равномерности подмножеств (хи-квадрат) при n = 6, d = 2"""
        rng = np.random.default_rng(16)
        draws = 200_000
        picks = rank_select(rng.random((draws, 2)), 5)
        picks.sort(axis=1)
        subsets = list(combinations(range(5), 2))
        counts = Counter(map(tuple, picks))
        expected = draws / len(subsets)
        chi2 = sum((counts[s] - expected) ** 2 / expected for s in subsets)
        # 9 степеней свободы, порог далеко в хвосте
        assert chi2 < 40.0


class TestChains:
    """Тесты драйвера цепи"""

    def setup_method(self):
        self.two_state = TabulatedLogWeights(np.log([0.3, 0.7]))

    def test_two_state_metropolis_move(self):
        """Тест вероятности перехода 3/7 из второго состояния"""
        distribution = SamplerService.acceptance(SamplerKind.METROPOLIS, MeasureService.ratios_for(
            self.two_state, 1, ProposalSet((0,))
        ))
        assert distribution.move_probs[0] == pytest.approx(3 / 7)

    def test_uniform_hobs_stay(self):
        """Тест равномерной меры: HOBS остается с вероятностью 1/(1+d)"""
        distribution = SamplerService.acceptance(SamplerKind.HOBS, np.ones(3))
        assert distribution.stay_prob == pytest.approx(0.25)

    def test_zero_steps(self):
        """Тест T = 0"""
        run = SamplerService.run_chain(ChainConfig(T=0, d=1, kind=SamplerKind.HOBS, initial=2), self.two_state)
        assert run.trajectory == [2]
        assert run.evaluations == 0

    def test_reproducible_trajectory(self):
        """Тест воспроизводимости при фиксированном зерне"""
        oracle = TabulatedLogWeights(np.log(np.arange(1, 9, dtype=float)))
        config = ChainConfig(T=10, d=3, kind=SamplerKind.HOMS, seed=42)
        assert SamplerService.run_chain(config, oracle).trajectory == SamplerService.run_chain(config, oracle).trajectory

    @pytest.mark.parametrize("kind", [SamplerKind.HOBS, SamplerKind.HOMS, SamplerKind.HOPS])
    def test_evaluation_count(self, kind):
        """Тест числа вычислений: d * T"""
        oracle = TabulatedLogWeights(np.log(np.arange(1, 9, dtype=float)))
        run = SamplerService.run_chain(ChainConfig(T=25, d=3, kind=kind, seed=1), oracle)
        assert run.evaluations == 75
        assert len(run.trajectory) == 26
        assert all(1 <= state <= 8 for state in run.trajectory)

    def test_two_state_occupancy(self):
        """Тест долгой цепи: доля второго состояния около 0.7"""
        T = 40_000
        run = SamplerService.run_chain(ChainConfig(T=T, d=1, kind=SamplerKind.METROPOLIS, seed=7), self.two_state)
        share = np.mean(np.array(run.trajectory) == 2)
        # корреляции цепи увеличивают дисперсию, берем запас
        assert share == pytest.approx(0.7, abs=0.02)

    def test_chain_step_advances(self):
        """Тест одного шага: шаг увеличивается, генератор продвигается"""
        rng = np.random.default_rng(0)
        state = ChainState(0, 0, rng)
        following = SamplerService.chain_step(state, self.two_state, SamplerKind.METROPOLIS, 1)
        # из состояния 1 (0.3) в 2 (0.7) переход всегда принимается
        assert following.current == 1
        assert following.step == 1

    def test_ensemble_step_matches_rules(self):
        """Тест блока цепей: двухсостоятельная мера, переходы по min(1, r)"""
        rng = np.random.default_rng(1)
        states = np.zeros(1000, dtype=np.int64)
        log_weights = np.log([0.3, 0.7])
        moved = SamplerService.ensemble_step(states, log_weights, SamplerKind.HOMS, 1, rng)
        np.testing.assert_array_equal(moved, 1)
        back = SamplerService.ensemble_step(moved, log_weights, SamplerKind.HOMS, 1, rng)
        assert np.mean(back == 0) == pytest.approx(3 / 7, abs=0.06)

    def test_paired_proposal_streams(self):
        """Тест: при одном зерне HOBS, HOMS и HOPS видят одни и те же предложения"""
        log_weights = np.log(np.arange(1.0, 9.0))
        states = np.random.default_rng(2).integers(8, size=32)
        expected = SamplerService.ensemble_proposals(states, 8, 3, np.random.default_rng(7))
        for kind in (SamplerKind.HOBS, SamplerKind.HOMS, SamplerKind.HOPS):
            rng = np.random.default_rng(7)
            moved = SamplerService.ensemble_step(states, log_weights, kind, 3, rng)
            assert np.all((moved == states) | np.any(expected == moved[:, None], axis=1)), kind.value
            reference = np.random.default_rng(7)
            reference.random((32, 3))
            reference.random(32)
            assert rng.random() == reference.random(), kind.value

    def test_ensemble_proposals_exclude_current(self):
        """Тест: блок предложений не содержит текущее состояние"""
        states = np.arange(6)
        proposals = SamplerService.ensemble_proposals(states, 6, 5, np.random.default_rng(3))
        for state, row in zip(states, proposals):
            assert state not in row
            assert list(row) == sorted(set(row))
