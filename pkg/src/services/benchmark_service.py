import csv
import sys
import time
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from src.core import get_settings
from src.core.parallel import run_tasks
from src.core.exceptions import BudgetExceededError, EnumerationLimitError, InvalidParameterError
from src.logs import debug_logger, log_function, run_logger
from src.models.chain import SamplerKind
from src.models.measure import ProbabilityMeasure, TabulatedLogWeights
from src.models.spin_glass import SkModel
from src.schemas.run import RunSpec
from src.services.diagnostics_service import DiagnosticsService
from src.services.sampler_service import SamplerService
from src.services.spin_glass_service import SpinGlassService

settings = get_settings()

BENCH_HEADER = ("sampler", "d", "t", "tv", "evals")
CURVE_HEADER = ("sampler", "d", "t", "tv")


class BenchmarkService:
    """SK convergence experiments: Monte Carlo ensembles and exact expected-kernel curves"""

    @staticmethod
    def load_model(spec: RunSpec) -> SkModel:
        if spec.couplings is not None:
            couplings = SpinGlassService.load_couplings(spec.couplings)
            if couplings.shape[0] != spec.spins:
                run_logger.warning(
                    f"Coupling file has {couplings.shape[0]} spins, overriding --spins {spec.spins}"
                )
            return SkModel(couplings, spec.beta)
        return SpinGlassService.build_model(spec.spins, spec.beta, spec.seed)

    @staticmethod
    def check_model(spec: RunSpec, model: SkModel) -> None:
        """Proposal sizes and the initial state against the loaded model"""
        n_states = model.n_states
        too_large = [size for size in spec.d if size > n_states - 1]
        if too_large:
            raise InvalidParameterError(
                f"proposal sizes {too_large} exceed n-1={n_states - 1} for {model.N} spins",
                {"d": too_large, "n_states": n_states},
            )
        if spec.initial > n_states:
            raise InvalidParameterError(
                f"initial state {spec.initial} outside [1, {n_states}]",
                {"initial": spec.initial, "n_states": n_states},
            )

    @staticmethod
    def couplings_path(out: Path) -> Path:
        return out.with_name(f"{out.stem}.couplings.txt")

    @staticmethod
    def check_budget(spec: RunSpec) -> None:
        steps = spec.chains * spec.steps * len(spec.pairs())
        if steps > settings.CHAIN_STEP_BUDGET:
            raise BudgetExceededError(
                f"{steps} chain steps exceed the budget of {settings.CHAIN_STEP_BUDGET}",
                {"steps": steps, "budget": settings.CHAIN_STEP_BUDGET},
            )

    @staticmethod
    def _run_block(
        block: int,
        size: int,
        log_weights: np.ndarray,
        kind: SamplerKind,
        d: int,
        steps: int,
        seed: int,
        initial: int,
        lp_x: str,
        lp_y: str,
    ) -> np.ndarray:
        """Occupation counts (steps + 1, n) of one chain block with its own stream"""
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
        n = log_weights.size
        states = np.full(size, initial, dtype=np.int64)
        counts = np.zeros((steps + 1, n), dtype=np.int64)
        counts[0] = np.bincount(states, minlength=n)
        for t in range(1, steps + 1):
            states = SamplerService.ensemble_step(states, log_weights, kind, d, rng, lp_x, lp_y)
            counts[t] = np.bincount(states, minlength=n)
        return counts

    @staticmethod
    def run_ensemble(
        log_weights: np.ndarray,
        target: ProbabilityMeasure,
        kind: SamplerKind,
        d: int,
        steps: int,
        chains: int,
        seed: int,
        initial: int = 0,
        workers: Optional[int] = None,
        lp_x: str = "ones",
        lp_y: str = "neg_ratios",
    ) -> np.ndarray:
        """Empirical TV curve of `chains` independent chains; independent of the worker count"""
        block_size = settings.CHAIN_BLOCK_SIZE
        sizes = [min(block_size, chains - start) for start in range(0, chains, block_size)]
        workers = settings.WORKERS if workers is None else workers

        blocks = run_tasks(
            BenchmarkService._run_block,
            (
                (block, size, log_weights, kind, d, steps, seed, initial, lp_x, lp_y)
                for block, size in enumerate(sizes)
            ),
            workers,
            processes=kind == SamplerKind.HOPS,
        )
        counts = sum(blocks)

        empirical = counts / chains
        p = target.as_array()
        return 0.5 * np.abs(empirical - p[None, :]).sum(axis=1)

    @staticmethod
    @log_function()
    def sk_bench(spec: RunSpec) -> List[tuple]:
        BenchmarkService.check_budget(spec)
        model = BenchmarkService.load_model(spec)
        BenchmarkService.check_model(spec, model)
        if model.N > settings.MAX_ENUMERATED_SPINS:
            raise EnumerationLimitError(f"{model.N} spins exceed the exact-target limit")
        table = SpinGlassService.log_weight_table(model)
        target = SpinGlassService.exact_distribution(model)

        rows = []
        for kind, d in spec.pairs():
            started = time.perf_counter()
            curve = BenchmarkService.run_ensemble(
                table, target, kind, d, spec.steps, spec.chains, spec.seed,
                spec.initial - 1, spec.workers, spec.lp_x, spec.lp_y,
            )
            run_logger.info(
                f"sk-bench {kind.value} d={d}: final tv={curve[-1]:.4f} "
                f"area={DiagnosticsService.curve_area(curve):.3f} in {time.perf_counter() - started:.1f}s"
            )
            rows.extend((kind.value, d, t, float(tv), d * t) for t, tv in enumerate(curve))
        return rows

    @staticmethod
    @log_function()
    def exact_curves(spec: RunSpec) -> List[tuple]:
        model = BenchmarkService.load_model(spec)
        BenchmarkService.check_model(spec, model)
        limit = settings.MAX_EXACT_SPINS_HOPS if SamplerKind.HOPS in spec.samplers else settings.MAX_EXACT_SPINS
        if model.N > limit:
            raise EnumerationLimitError(
                f"exact curves for {model.N} spins exceed the limit of {limit}",
                {"spins": model.N, "limit": limit},
            )
        oracle = TabulatedLogWeights(SpinGlassService.log_weight_table(model))
        target = SpinGlassService.exact_distribution(model)
        mu0 = DiagnosticsService.point_mass(spec.initial - 1, model.n_states)

        rows = []
        for kind, d in spec.pairs():
            kernel = DiagnosticsService.expected_kernel(oracle, kind, d, spec.lp_x, spec.lp_y, spec.workers)
            debug_logger.log_data(f"expected kernel {kind.value} d={d}", kernel)
            curve = DiagnosticsService.tv_curve_exact(kernel, target, mu0, spec.steps)
            run_logger.info(f"exact-curve {kind.value} d={d}: area={DiagnosticsService.curve_area(curve):.6f}")
            rows.extend((kind.value, d, t, float(tv)) for t, tv in enumerate(curve))
        return rows

    @staticmethod
    def write_csv(rows: Iterable[Sequence], header: Sequence[str], out: Optional[Path]) -> None:
        """Floats via repr (shortest round-trip form), newline-terminated rows"""
        formatted = ([repr(v) if isinstance(v, float) else str(v) for v in row] for row in rows)
        if out is None:
            writer = csv.writer(sys.stdout, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(formatted)
            return
        with open(out, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(formatted)
        run_logger.info(f"Wrote {out}")
