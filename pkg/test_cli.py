import csv
import io
import math
from unittest.mock import patch

import numpy as np
import pytest

from src.main import main
from src.services.spin_glass_service import SpinGlassService
from src.services.verification_service import GOLDEN

BENCH = ["sk-bench", "--spins", "3", "--chains", "300", "--steps", "6", "--seed", "5",
         "--samplers", "hobs,homs", "--d", "1,2"]
CURVE = ["exact-curve", "--spins", "3", "--steps", "12", "--seed", "5", "--samplers", "hobs,homs,hops", "--d", "1,2"]


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.reader(handle))


def parse_matrix(text):
    return np.array([[float(value) for value in row] for row in csv.reader(io.StringIO(text))])


class TestMatricesCommand:
    """Тесты подкоманды matrices"""

    @pytest.mark.parametrize("sampler, golden", [
        ("generator", "generator"),
        ("exp", "exponential"),
        ("barker", "barker"),
        ("metropolis", "metropolis"),
    ])
    def test_reference_matrices(self, capsys, sampler, golden):
        """Тест эталонных матриц для p = (1,2,3,4,10), J = {1,2,3}"""
        code = main(["matrices", "--p", "1,2,3,4,10", "--J", "1,2,3", "--sampler", sampler])
        assert code == 0
        np.testing.assert_allclose(parse_matrix(capsys.readouterr().out), GOLDEN[golden], atol=1e-12)

    def test_reference_hops(self, capsys):
        """Тест эталонной матрицы HOPS"""
        assert main(["matrices", "--p", "1,2,3,4,10", "--J", "1,2,3", "--sampler", "hops"]) == 0
        np.testing.assert_allclose(parse_matrix(capsys.readouterr().out), GOLDEN["hops"], atol=1e-9)

    def test_current_state_not_last(self, capsys):
        """Тест текущего состояния 2 с предложениями {1, 5}"""
        assert main(["matrices", "--p", "1,2,3,4,10", "--J", "1,5", "--current", "2"]) == 0
        P = parse_matrix(capsys.readouterr().out)
        np.testing.assert_allclose(P[1], [0.5 / 6.5, 1 / 6.5, 0, 0, 5 / 6.5], atol=1e-15)

    def test_current_among_proposals(self):
        """Тест: текущее состояние среди предложений дает код 1"""
        assert main(["matrices", "--p", "1,2,3", "--J", "3"]) == 1

    def test_invalid_weights(self):
        """Тест отрицательных и нечисловых весов"""
        assert main(["matrices", "--p", "1,-2,3", "--J", "1"]) == 1
        assert main(["matrices", "--p", "1,x,3", "--J", "1"]) == 1


class TestVerifyCommand:
    """Тесты подкоманды verify"""

    def test_golden_checks_pass(self, capsys):
        """Тест прохождения эталонных проверок"""
        assert main(["verify", "--only", "Golden generator"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("PASS Golden generator")

    def test_broken_reference_fails(self, capsys):
        """Тест: испорченная эталонная матрица дает код 1"""
        with patch.dict(GOLDEN, {"barker": np.zeros((5, 5))}):
            assert main(["verify", "--only", "Golden generator"]) == 1
        assert capsys.readouterr().out.startswith("FAIL")

    def test_skip_slow(self, capsys):
        """Тест пропуска медленных проверок"""
        assert main(["verify", "--only", "Membership", "--skip-slow"]) == 0
        out = capsys.readouterr().out
        assert "PASS Monoid membership" in out
        assert "HOPS" not in out


    def test_paired_seed_check(self, capsys):
        """Тест проверки общего потока предложений"""
        assert main(["verify", "--only", "Paired-seed"]) == 0
        assert "identical proposal streams" in capsys.readouterr().out

    def test_fuzz_reports_row_count(self, capsys):
        """Тест: проверка распределений принятия сообщает реальное число строк"""
        assert main(["verify", "--only", "AcceptanceDistribution"]) == 0
        assert "100000 rows" in capsys.readouterr().out

    @pytest.mark.slow
    def test_exact_curve_checks_pass(self, capsys):
        """Тест: проверки точных кривых проходят, порядок сэмплеров только сообщается"""
        assert main(["verify", "--only", "exact curves"]) == 0
        assert main(["verify", "--only", "non-increasing"]) == 0
        out = capsys.readouterr().out
        assert "PASS Sampler ordering on exact curves" in out
        assert "area HOBS/HOMS/HOPS" in out

    @pytest.mark.slow
    def test_reduced_benchmark_check(self, capsys):
        """Тест уменьшенного бенчмарка SK"""
        assert main(["verify", "--only", "Reduced SK benchmark"]) == 0


class TestSkBenchCommand:
    """Тесты подкоманды sk-bench"""

    def test_output_schema(self, tmp_path):
        """Тест схемы CSV и сохранения связей"""
        out = tmp_path / "bench.csv"
        assert main(BENCH + ["--out", str(out)]) == 0
        rows = read_rows(out)
        assert rows[0] == ["sampler", "d", "t", "tv", "evals"]
        assert len(rows) == 1 + 2 * 2 * 7
        for sampler, d, t, tv, evals in rows[1:]:
            assert sampler in ("hobs", "homs")
            assert int(evals) == int(d) * int(t)
            assert 0.0 <= float(tv) <= 1.0
        assert (tmp_path / "bench.couplings.txt").exists()

    def test_reproducible(self, tmp_path):
        """Тест побайтовой воспроизводимости при том же зерне"""
        first, second = tmp_path / "first.csv", tmp_path / "second.csv"
        assert main(BENCH + ["--out", str(first)]) == 0
        assert main(BENCH + ["--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_worker_count_does_not_matter(self, tmp_path):
        """Тест независимости результата от числа потоков"""
        single, pooled = tmp_path / "single.csv", tmp_path / "pooled.csv"
        assert main(BENCH + ["--workers", "1", "--out", str(single)]) == 0
        assert main(BENCH + ["--workers", "3", "--out", str(pooled)]) == 0
        assert single.read_bytes() == pooled.read_bytes()

    def test_reused_couplings(self, tmp_path):
        """Тест повторного запуска на сохраненных связях"""
        first = tmp_path / "first.csv"
        assert main(BENCH + ["--out", str(first)]) == 0
        again = tmp_path / "again.csv"
        couplings = tmp_path / "first.couplings.txt"
        assert main(BENCH + ["--couplings", str(couplings), "--out", str(again)]) == 0
        assert first.read_bytes() == again.read_bytes()

    def test_zero_steps(self, tmp_path):
        """Тест T = 0: одна строка на пару, TV = 1 - p_1"""
        out = tmp_path / "zero.csv"
        assert main(["sk-bench", "--spins", "3", "--chains", "10", "--steps", "0", "--seed", "5",
                     "--samplers", "hobs", "--d", "1", "--out", str(out)]) == 0
        rows = read_rows(out)
        assert len(rows) == 2
        p = SpinGlassService.exact_distribution(SpinGlassService.build_model(3, 0.25, 5)).as_array()
        assert float(rows[1][3]) == pytest.approx(1 - p[0], abs=1e-15)
        assert rows[1][4] == "0"

    def test_stdout(self, capsys):
        """Тест вывода CSV в stdout при --out -"""
        assert main(BENCH + ["--out", "-"]) == 0
        assert capsys.readouterr().out.startswith("sampler,d,t,tv,evals\n")

    def test_budget_exceeded(self, tmp_path, mocker):
        """Тест превышения бюджета шагов цепей"""
        mocker.patch("src.services.benchmark_service.settings.CHAIN_STEP_BUDGET", 100)
        assert main(BENCH + ["--out", str(tmp_path / "bench.csv")]) == 1

    @pytest.mark.parametrize("flags", [["--samplers", "gibbs"], ["--d", "8"], ["--initial", "9"]])
    def test_invalid_options(self, tmp_path, flags):
        """Тест отказа при неверных параметрах запуска"""
        assert main(BENCH + flags + ["--out", str(tmp_path / "bench.csv")]) == 1

    @pytest.mark.parametrize("flags", [["--d", "8"], ["--d", "1,4"], ["--initial", "5"]])
    def test_options_checked_against_coupling_file(self, tmp_path, flags):
        """Тест: d и начальное состояние проверяются по загруженной модели (N = 2)"""
        couplings = tmp_path / "n2.txt"
        SpinGlassService.save_couplings(couplings, np.array([[0.0, 0.7], [0.7, 0.0]]))
        out = tmp_path / "bench.csv"
        assert main(["sk-bench", "--couplings", str(couplings), "--chains", "10", "--steps", "2",
                     "--samplers", "hobs"] + flags + ["--out", str(out)]) == 1
        assert not out.exists()

    def test_small_coupling_file(self, tmp_path):
        """Тест: N = 2 из файла при --spins по умолчанию"""
        couplings = tmp_path / "n2.txt"
        SpinGlassService.save_couplings(couplings, np.array([[0.0, 0.7], [0.7, 0.0]]))
        out = tmp_path / "bench.csv"
        assert main(["sk-bench", "--couplings", str(couplings), "--chains", "10", "--steps", "2",
                     "--samplers", "hobs", "--d", "1,3", "--out", str(out)]) == 0
        assert len(read_rows(out)) == 1 + 2 * 3

    def test_hops_process_pool(self, tmp_path):
        """Тест: блоки HOPS в процессах дают тот же CSV, что и в одном процессе"""
        hops = ["sk-bench", "--spins", "3", "--chains", "600", "--steps", "3", "--seed", "5",
                "--samplers", "hops", "--d", "1,2"]
        single, pooled = tmp_path / "single.csv", tmp_path / "pooled.csv"
        assert main(hops + ["--workers", "1", "--out", str(single)]) == 0
        assert main(hops + ["--workers", "2", "--out", str(pooled)]) == 0
        assert single.read_bytes() == pooled.read_bytes()


class TestExactCurveCommand:
    """Тесты подкоманды exact-curve"""

    def test_curves(self, tmp_path):
        """Тест схемы вывода и невозрастания кривых"""
        out = tmp_path / "curve.csv"
        assert main(CURVE + ["--out", str(out)]) == 0
        rows = read_rows(out)
        assert rows[0] == ["sampler", "d", "t", "tv"]
        assert len(rows) == 1 + 3 * 2 * 13
        curves = {}
        for sampler, d, t, tv in rows[1:]:
            curves.setdefault((sampler, int(d)), []).append(float(tv))
        for curve in curves.values():
            assert np.all(np.diff(curve) <= 1e-12)
        p = SpinGlassService.exact_distribution(SpinGlassService.build_model(3, 0.25, 5)).as_array()
        assert curves[("hobs", 1)][0] == pytest.approx(1 - p[0], abs=1e-15)

    def test_hops_size_limit(self, tmp_path):
        """Тест ограничения числа спинов для HOPS"""
        out = tmp_path / "curve.csv"
        assert main(["exact-curve", "--spins", "5", "--samplers", "hops", "--d", "1", "--out", str(out)]) == 1
        assert not out.exists()

    def test_single_proposal_samplers_only_at_one(self, tmp_path):
        """Тест: barker и metropolis только при d = 1"""
        out = tmp_path / "curve.csv"
        assert main(["exact-curve", "--spins", "2", "--steps", "3", "--samplers", "barker,hobs",
                     "--d", "1,2", "--out", str(out)]) == 0
        pairs = {(row[0], row[1]) for row in read_rows(out)[1:]}
        assert pairs == {("barker", "1"), ("hobs", "1"), ("hobs", "2")}

    def test_two_spin_barker_matches_hobs(self, tmp_path):
        """Тест: при d = 1 barker и hobs совпадают"""
        out = tmp_path / "curve.csv"
        assert main(["exact-curve", "--spins", "2", "--steps", "5", "--samplers", "barker,hobs",
                     "--d", "1", "--out", str(out)]) == 0
        rows = read_rows(out)[1:]
        barker = [float(row[3]) for row in rows if row[0] == "barker"]
        hobs = [float(row[3]) for row in rows if row[0] == "hobs"]
        assert barker == hobs
        assert not math.isnan(sum(barker))
