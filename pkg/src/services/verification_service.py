import csv
import io
import math
import time
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Callable, List, Optional

import numpy as np

from src.core import get_settings
from src.core.exceptions import SamplerToolkitError
from src.logs import run_logger
from src.models.chain import ProposalSet, SamplerKind
from src.models.measure import ProbabilityMeasure, TabulatedLogWeights
from src.schemas.diagnostics import CheckResult
from src.schemas.lp import LinearProgram
from src.schemas.run import RunSpec
from src.services.benchmark_service import BENCH_HEADER, BenchmarkService
from src.services.diagnostics_service import DiagnosticsService
from src.services.hops_service import HopsService
from src.services.lie_algebra_service import LieAlgebraService
from src.services.lp_service import LpService
from src.services.measure_service import MeasureService
from src.services.sampler_service import SamplerService, rank_select
from src.services.spin_glass_service import SpinGlassService

settings = get_settings()

# Эталонный пример: p = (1,2,3,4,10)/20, J = {1,2,3} (0-based {0,1,2})
GOLDEN = {
    "weights": (1.0, 2.0, 3.0, 4.0, 10.0),
    "proposals": (0, 1, 2),
    "generator": np.array([
        [15, -2, -3, 0, -10],
        [-1, 14, -3, 0, -10],
        [-1, -2, 13, 0, -10],
        [0, 0, 0, 0, 0],
        [-1, -2, -3, 0, 6],
    ]) / 16.0,
    "exponential": np.array([
        [17, 2, 3, 0, 10],
        [1, 18, 3, 0, 10],
        [1, 2, 19, 0, 10],
        [0, 0, 0, 32, 0],
        [1, 2, 3, 0, 26],
    ]) / 32.0,
    "barker": np.array([
        [1, 2, 3, 0, 10],
        [1, 2, 3, 0, 10],
        [1, 2, 3, 0, 10],
        [0, 0, 0, 16, 0],
        [1, 2, 3, 0, 10],
    ]) / 16.0,
    "metropolis": np.array([
        [0, 2, 3, 0, 10],
        [1, 1, 3, 0, 10],
        [1, 2, 2, 0, 10],
        [0, 0, 0, 15, 0],
        [1, 2, 3, 0, 9],
    ]) / 15.0,
    "hops": np.array([
        [0, 0, 0, 0, 1],
        [0, 0, 0, 0, 1],
        [0, 0, 0, 0, 1],
        [0, 0, 0, 1, 0],
        [0.1, 0.2, 0.3, 0, 0.4],
    ]),
}


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    run: Callable[[np.random.Generator], str]
    slow: bool = False


CHECKS: List[PropertyCheck] = []


def check(name: str, slow: bool = False):
    def decorator(func):
        CHECKS.append(PropertyCheck(name, func, slow))
        return func
    return decorator


def expect(condition: bool, message: str) -> None:
    if not condition:
        raise AssertionError(message)


def random_instance(rng: np.random.Generator, n_max: int, d_max: Optional[int] = None):
    """Случайная мера, отношения к опорному состоянию n-1 и множество J"""
    n = int(rng.integers(2, n_max + 1))
    measure = MeasureService.normalize(rng.uniform(0.05, 1.0, n))
    r = MeasureService.reference_ratios(measure)
    limit = n - 1 if d_max is None else min(d_max, n - 1)
    d = int(rng.integers(1, limit + 1))
    proposals = ProposalSet.of(rng.choice(n - 1, size=d, replace=False))
    return measure, r, proposals


def golden_case():
    measure = MeasureService.normalize(GOLDEN["weights"])
    return measure, MeasureService.reference_ratios(measure), ProposalSet(GOLDEN["proposals"])


# --- measure_core -------------------------------------------------------------

@check("Shift invariance")
def _shift_invariance(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 12))
        values = np.round(rng.uniform(-50, 50, n) * 2**20) / 2**20
        shift = float(rng.integers(-1000, 1000))
        current = int(rng.integers(n))
        proposals = SamplerService.propose_uniform(rng, n, current, int(rng.integers(1, n)))
        base = MeasureService.ratios_for(TabulatedLogWeights(values), current, proposals)
        moved = MeasureService.ratios_for(TabulatedLogWeights(values + shift), current, proposals)
        expect(np.array_equal(base, moved), f"ratios changed under shift {shift}")
    return "1000 oracles"


@check("Self-consistency")
def _self_consistency(rng):
    for _ in range(200):
        n = int(rng.integers(2, 12))
        measure = MeasureService.normalize(rng.uniform(0.01, 1.0, n))
        oracle = TabulatedLogWeights.from_measure(measure)
        ratios = MeasureService.ratios_for(oracle, n - 1, ProposalSet(tuple(range(n - 1))))
        expected = measure.as_array()[:-1] / measure.as_array()[-1]
        expect(np.allclose(ratios, expected, rtol=1e-14, atol=1e-14), "ratios differ from p_j / p_n")
    return "200 measures"


# --- lie_algebra --------------------------------------------------------------

@check("Basis completeness")
def _basis_completeness(rng):
    for n in range(2, 7):
        sto = [LieAlgebraService.sto_basis_element(n, j, k).matrix.ravel() for j in range(n) for k in range(n - 1)]
        expect(np.linalg.matrix_rank(np.array(sto)) == n * (n - 1), f"STO basis rank deficient at n={n}")
        r = rng.uniform(0.1, 3.0, n - 1)
        pb = [LieAlgebraService.p_basis_element(r, j, k).matrix.ravel() for j in range(n - 1) for k in range(n - 1)]
        expect(np.linalg.matrix_rank(np.array(pb)) == (n - 1) ** 2, f"p-basis rank deficient at n={n}")
    return "n = 2..6"


@check("Annihilation")
def _annihilation(rng):
    for _ in range(200):
        n = int(rng.integers(2, 9))
        measure = MeasureService.normalize(rng.uniform(0.01, 1.0, n))
        r = MeasureService.reference_ratios(measure)
        for j, k in product(range(n - 1), repeat=2):
            element = LieAlgebraService.p_basis_element(r, j, k)
            expect(element.annihilation_violation(measure.as_array()) <= 1e-12, f"p e^p != 0 at ({j},{k})")
    return "200 measures"


@check("Jacobi identity")
def _jacobi(rng):
    for _ in range(100):
        n = int(rng.integers(2, 7))
        r = rng.uniform(0.1, 3.0, n - 1)
        x, y, z = (
            LieAlgebraService.p_basis_element(r, int(rng.integers(n - 1)), int(rng.integers(n - 1)))
            for _ in range(3)
        )
        total = x.bracket(y.bracket(z)) + y.bracket(z.bracket(x)) + z.bracket(x.bracket(y))
        expect(np.abs(total.matrix).max() <= 1e-10, "Jacobi identity violated")
    return "100 triples"


@check("Both closed-form commutators equal direct matrix commutators")
def _closed_commutators(rng):
    for n in range(2, 6):
        pairs = list(product(range(n), range(n - 1)))
        for a, b in product(pairs, repeat=2):
            closed = LieAlgebraService.sto_commutator_closed(n, a, b).matrix
            direct = LieAlgebraService.commutator(
                LieAlgebraService.sto_basis_element(n, *a), LieAlgebraService.sto_basis_element(n, *b)
            ).matrix
            expect(np.array_equal(closed, direct), f"STO commutator mismatch n={n} {a} {b}")
        r = rng.uniform(0.1, 3.0, n - 1)
        p_pairs = list(product(range(n - 1), repeat=2))
        for a, b in product(p_pairs, repeat=2):
            closed = LieAlgebraService.p_commutator_closed(r, a, b).matrix
            direct = LieAlgebraService.commutator(
                LieAlgebraService.p_basis_element(r, *a), LieAlgebraService.p_basis_element(r, *b)
            ).matrix
            expect(np.allclose(closed, direct, atol=1e-12), f"p commutator mismatch n={n} {a} {b}")
    return "n = 2..5 exhaustive"


@check("Product identity")
def _product_identity(rng):
    for _ in range(500):
        n = int(rng.integers(2, 9))
        _, r, proposals = random_instance(rng, n, d_max=4)
        n = r.size + 1
        r_J = r[proposals.as_array()]
        alpha = rng.normal(size=(proposals.d, proposals.d))
        beta = rng.normal(size=(proposals.d, proposals.d))
        left = LieAlgebraService.lift_coefficients(alpha, r_J, proposals, n).matrix
        right = LieAlgebraService.lift_coefficients(beta, r_J, proposals, n).matrix
        gamma = LieAlgebraService.product_coefficients(alpha, beta, r_J)
        lifted = LieAlgebraService.lift_coefficients(gamma, r_J, proposals, n).matrix
        expect(np.allclose(left @ right, lifted, atol=1e-12), "lifted product mismatch")
    return "500 cases"


@check("Closed-form exponentials match the series exponential")
def _exponentials(rng):
    for _ in range(200):
        measure, r, proposals = random_instance(rng, 8)
        n = measure.n
        j, k = int(rng.integers(n - 1)), int(rng.integers(n - 1))
        t = float(rng.uniform(-2, 2))
        generator = LieAlgebraService.p_basis_element(r, j, k).matrix
        expect(
            np.allclose(LieAlgebraService.exp_p_basis(r, j, k, t), LieAlgebraService.series_expm(t * generator), atol=1e-9),
            "exp_p_basis mismatch",
        )
        omega = float(rng.uniform(0.5, 2.0))
        A = LieAlgebraService.assemble_A(r[proposals.as_array()], omega, proposals, n)
        expect(np.allclose(A.matrix @ A.matrix, omega * A.matrix, atol=1e-12), "A^2 != omega A")
        expect(
            np.allclose(LieAlgebraService.exp_A(A, omega, t), LieAlgebraService.series_expm(t * A.matrix), atol=1e-9),
            "exp_A mismatch",
        )
    return "200 cases"


# --- samplers -----------------------------------------------------------------

@check("Reduction")
def _reduction(rng):
    ratios = np.exp(rng.uniform(-10, 10, 100_000))
    for r in ratios:
        barker = SamplerService.barker_probs([r]).move_probs[0]
        metropolis = SamplerService.metropolis_probs([r]).move_probs[0]
        expect(abs(barker - r / (1 + r)) <= 1e-15, f"Barker reduction fails at r={r!r}")
        expect(abs(metropolis - min(1.0, r)) <= 1e-15, f"Metropolis reduction fails at r={r!r}")
    return "100000 ratios"


@check("Stationarity")
def _stationarity(rng):
    for _ in range(200):
        measure, r, proposals = random_instance(rng, 12)
        p = measure.as_array()
        for P in (SamplerService.barker_matrix(r, proposals), SamplerService.metropolis_matrix(r, proposals)):
            expect(np.allclose(P.sum(axis=1), 1.0, atol=1e-12), "rows do not sum to 1")
            expect(P.min() >= -1e-12, "negative entry")
            expect(np.abs(p @ P - p).max() <= 1e-10, "pP != p")
    return "200 instances"


@check("Detailed balance at d=1")
def _detailed_balance(rng):
    for _ in range(200):
        measure, r, _ = random_instance(rng, 12)
        n = measure.n
        proposals = ProposalSet((int(rng.integers(n - 1)),))
        for P in (SamplerService.barker_matrix(r, proposals), SamplerService.metropolis_matrix(r, proposals)):
            expect(DiagnosticsService.detailed_balance_violation(measure, P) <= 1e-12, "detailed balance violated")
    return "200 instances"


@check("HOBS/HOMS equality in the saturated regime")
def _saturated(rng):
    for _ in range(200):
        d = int(rng.integers(8, 17))
        r_J = np.exp(rng.uniform(np.log(1e3), np.log(1e6), d))
        gap = np.abs(SamplerService.barker_probs(r_J).move_probs - SamplerService.metropolis_probs(r_J).move_probs)
        expect(gap.max() <= 1e-3, f"HOBS and HOMS differ by {gap.max()}")
    return "200 instances"


@check("AcceptanceDistribution always sums to 1 within 1e-12 and is entrywise nonnegative")
def _acceptance_fuzz(rng):
    rows = 0
    for _ in range(50_000):
        d = int(rng.integers(1, 9))
        r_J = np.exp(rng.uniform(-20, 20, d))
        for distribution in (SamplerService.barker_probs(r_J), SamplerService.metropolis_probs(r_J)):
            probabilities = distribution.probabilities()
            expect(probabilities.min() >= 0, "negative acceptance probability")
            expect(abs(probabilities.sum() - 1.0) <= 1e-12, "acceptance probabilities do not sum to 1")
            rows += 1
    return f"{rows} rows"


@check("Metropolis matrices touch the boundary and are omega-independent")
def _boundary(rng):
    for _ in range(200):
        _, r, proposals = random_instance(rng, 10)
        n = r.size + 1
        M = SamplerService.metropolis_matrix(r, proposals)
        support = np.append(proposals.as_array(), n - 1)
        expect(abs(np.diag(M)[support].min()) <= 1e-12, "Metropolis matrix off the boundary")
        omega = float(rng.uniform(0.2, 5.0))
        expect(np.allclose(M, SamplerService.metropolis_matrix(r, proposals, omega), atol=1e-12), "Metropolis depends on omega")
        expect(
            np.allclose(SamplerService.barker_matrix(r, proposals), SamplerService.barker_matrix(r, proposals, omega), atol=1e-12),
            "Barker depends on omega",
        )
    return "200 instances"


# --- hops_lp ------------------------------------------------------------------

@check("Membership", slow=True)
def _hops_membership(rng):
    for _ in range(200):
        measure, r, proposals = random_instance(rng, 10)
        report = DiagnosticsService.check_membership(HopsService.hops_matrix(r, proposals), measure)
        expect(report.is_member, f"HOPS matrix outside the monoid: {report.violated}")
    return "200 instances"


@check("Objective consistency")
def _objective_consistency(rng):
    for _ in range(100):
        _, r, proposals = random_instance(rng, 8)
        r_J = r[proposals.as_array()]
        program = HopsService.build_reduced_lp(r_J, proposals, n=r.size + 1)
        tau, solution = HopsService.solve(program)
        P = HopsService.recover_transition(tau, r)
        direct = (1.0 + r_J.sum()) - HopsService.frobenius_objective(P, r, proposals)
        expect(abs(solution.objective - direct) <= 1e-9, "LP objective disagrees with the trace identity")
    return "100 instances"


@check("Dominance over HOMS in objective")
def _dominance(rng):
    for _ in range(100):
        _, r, proposals = random_instance(rng, 8)
        hops = HopsService.frobenius_objective(HopsService.hops_matrix(r, proposals), r, proposals)
        homs = HopsService.frobenius_objective(SamplerService.metropolis_matrix(r, proposals), r, proposals)
        expect(hops >= homs - 1e-9, f"HOPS objective {hops} below HOMS {homs}")
    return "100 instances"


@check("Sign-convention equivalence")
def _sign_convention(rng):
    for _ in range(100):
        _, r, proposals = random_instance(rng, 8)
        first = HopsService.hops_matrix(r, proposals, "ones", "neg_ratios")
        second = HopsService.hops_matrix(r, proposals, "neg_ones", "ratios")
        expect(np.array_equal(first, second), "sign conventions give different solutions")
    return "100 instances"


@check("Full and reduced programs agree")
def _full_vs_reduced(rng):
    for _ in range(50):
        _, r, proposals = random_instance(rng, 6)
        full = HopsService.build_lp(r, proposals)
        _, full_solution = HopsService.solve(full)
        _, reduced_solution = HopsService.solve(HopsService.reduce(full))
        expect(abs(full_solution.objective - reduced_solution.objective) <= 1e-9, "full and reduced optima differ")
    return "50 instances"


# --- lp_solver ----------------------------------------------------------------

def _random_lp(rng) -> LinearProgram:
    m = int(rng.integers(1, 13))
    k = int(rng.integers(1, 31))
    lower = rng.uniform(-2, 0, m)
    return LinearProgram(
        c=rng.normal(size=m),
        A=rng.normal(size=(k, m)),
        b=rng.uniform(0.1, 2.0, k),
        lower=lower,
        upper=lower + rng.uniform(0.5, 3.0, m),
    )


@check("Returned point satisfies all constraints within 1e-9")
def _lp_feasible(rng):
    for _ in range(200):
        lp = _random_lp(rng)
        solution = LpService.solve(lp)
        if solution.is_optimal:
            expect(LpService.is_feasible(lp, solution.x), "optimal point violates constraints")
    return "200 programs"


@check("Weak-duality sanity")
def _weak_duality(rng):
    for _ in range(100):
        lp = _random_lp(rng)
        solution = LpService.solve(lp)
        if not solution.is_optimal:
            continue
        samples = rng.uniform(lp.lower, lp.upper, size=(2000, lp.variable_count))
        feasible = samples[np.all(samples @ lp.A.T <= lp.b, axis=1)]
        if feasible.size:
            expect((feasible @ lp.c).min() >= solution.objective - 1e-7, "sampled point beats the optimum")
    return "100 programs"


@check("Determinism")
def _determinism(rng):
    for _ in range(50):
        lp = _random_lp(rng)
        first, second = LpService.solve(lp), LpService.solve(lp)
        expect(np.array_equal(first.x, second.x) and first.iterations == second.iterations, "solver is not deterministic")
    return "50 programs"


# --- spin_glass ---------------------------------------------------------------

@check("Global flip symmetry")
def _flip_symmetry(rng):
    model = SpinGlassService.build_model(6, 0.7, int(rng.integers(2**31)))
    p = SpinGlassService.exact_distribution(model).as_array()
    flipped = (model.n_states - 1) - np.arange(model.n_states)
    expect(np.abs(p - p[flipped]).max() <= 1e-12, "exact distribution is not flip symmetric")
    return "N = 6"


@check("ratios_for over this oracle reproduces exact_distribution ratios")
def _sk_ratios(rng):
    model = SpinGlassService.build_model(7, 0.5, int(rng.integers(2**31)))
    oracle = SpinGlassService.tabulated_oracle(model)
    p = SpinGlassService.exact_distribution(model).as_array()
    for _ in range(500):
        current = int(rng.integers(model.n_states))
        proposals = SamplerService.propose_uniform(rng, model.n_states, current, 1)
        ratio = MeasureService.ratios_for(oracle, current, proposals)[0]
        expected = p[proposals.indices[0]] / p[current]
        expect(abs(ratio - expected) <= 1e-10 * max(1.0, expected), "SK ratio mismatch")
    return "500 pairs"


# --- diagnostics --------------------------------------------------------------

def _sk_exact_case():
    model = SpinGlassService.build_model(4, 0.25, settings.DEFAULT_SEED)
    return SpinGlassService.tabulated_oracle(model), SpinGlassService.exact_distribution(model)


@check("invariant_measure(expected_kernel) = exact_distribution", slow=True)
def _central(rng):
    oracle, target = _sk_exact_case()
    worst = 0.0
    for kind in (SamplerKind.HOBS, SamplerKind.HOMS, SamplerKind.HOPS):
        for d in (1, 2, 4):
            kernel = DiagnosticsService.expected_kernel(oracle, kind, d)
            tv = DiagnosticsService.total_variation(DiagnosticsService.invariant_measure(kernel), target)
            expect(tv <= 1e-8, f"{kind.value} d={d}: invariant measure is {tv} away from the target")
            worst = max(worst, tv)
    return f"max TV {worst:.2e}"


@lru_cache(maxsize=1)
def _exact_curves(sizes=(2, 4), steps: int = 100) -> dict:
    oracle, target = _sk_exact_case()
    mu0 = DiagnosticsService.point_mass(0, oracle.n_states)
    return {
        (kind, d): DiagnosticsService.tv_curve_exact(
            DiagnosticsService.expected_kernel(oracle, kind, d), target, mu0, steps
        )
        for d in sizes
        for kind in (SamplerKind.HOBS, SamplerKind.HOMS, SamplerKind.HOPS)
    }


@check("tv_curve_exact is non-increasing", slow=True)
def _monotone(rng):
    for (kind, d), curve in _exact_curves().items():
        expect(np.all(np.diff(curve) <= 1e-12), f"{kind.value} d={d}: TV curve increases")
    return "HOBS, HOMS, HOPS at d = 2, 4"


@check("Sampler ordering on exact curves (reported)", slow=True)
def _ordering(rng):
    """Areas and pointwise wins of each sampler; the ordering is reported, not enforced"""
    curves = _exact_curves()
    parts = []
    for d in (2, 4):
        hobs, homs, hops = (curves[(kind, d)] for kind in (SamplerKind.HOBS, SamplerKind.HOMS, SamplerKind.HOPS))
        areas = "/".join(f"{DiagnosticsService.curve_area(curve):.4f}" for curve in (hobs, homs, hops))
        parts.append(
            f"d={d} area HOBS/HOMS/HOPS {areas}, "
            f"HOMS<=HOBS at {int(np.sum(homs[1:] <= hobs[1:] + 1e-12))}/100, "
            f"HOPS<=HOMS at {int(np.sum(hops[1:] <= homs[1:] + 1e-12))}/100"
        )
    return "; ".join(parts)


@check("total_variation is symmetric and satisfies the triangle inequality")
def _tv_metric(rng):
    for _ in range(1000):
        n = int(rng.integers(2, 20))
        p, q, s = (rng.dirichlet(np.ones(n)) for _ in range(3))
        tv = DiagnosticsService.total_variation
        expect(abs(tv(p, q) - tv(q, p)) <= 1e-12, "TV is not symmetric")
        expect(tv(p, s) <= tv(p, q) + tv(q, s) + 1e-12, "TV triangle inequality fails")
    return "1000 triples"


@check("Monoid membership of constructed matrices")
def _monoid(rng):
    for _ in range(200):
        measure, r, proposals = random_instance(rng, 12)
        n = measure.n
        t = rng.exponential(1.0, n - 1) * (rng.random(n - 1) < 0.5)
        A = LieAlgebraService.assemble_A(r[proposals.as_array()], 1.0, proposals, n)
        matrices = (
            LieAlgebraService.diagonal_semigroup_element(r, t),
            LieAlgebraService.exp_A(A, 1.0, -float(rng.exponential(1.0))),
            SamplerService.barker_matrix(r, proposals),
            SamplerService.metropolis_matrix(r, proposals),
        )
        for P in matrices:
            report = DiagnosticsService.check_membership(P, measure)
            expect(report.is_member, f"constructed matrix outside the monoid: {report.violated}")
    return "200 instances"


# --- cli ----------------------------------------------------------------------

@check("CSV schema stable")
def _csv_schema(rng):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(BENCH_HEADER)
    writer.writerow(("hobs", "1", "0", repr(0.5), "0"))
    lines = buffer.getvalue().split("\n")
    expect(lines[0] == "sampler,d,t,tv,evals" and buffer.getvalue().endswith("\n"), "CSV header changed")
    return "header sampler,d,t,tv,evals"


@check("Reduced SK benchmark", slow=True)
def _reduced_bench(rng):
    """5 spins, 512 chains, 30 steps: schema, shared start and reported areas"""
    spec = RunSpec(
        subcommand="sk-bench",
        spins=5,
        chains=512,
        steps=30,
        seed=settings.DEFAULT_SEED,
        samplers=[SamplerKind.HOBS, SamplerKind.HOMS, SamplerKind.HOPS],
        d=[1, 2],
    )
    started = time.perf_counter()
    rows = BenchmarkService.sk_bench(spec)
    elapsed = time.perf_counter() - started
    expect(len(rows) == 3 * 2 * 31, f"expected {3 * 2 * 31} rows, got {len(rows)}")
    curves = {}
    for sampler, d, t, tv, evals in rows:
        expect(0.0 <= tv <= 1.0 and evals == d * t, f"bad row {sampler},{d},{t},{tv},{evals}")
        curves.setdefault((sampler, d), []).append(tv)
    starts = {curve[0] for curve in curves.values()}
    expect(len(starts) == 1, f"chains did not share the initial TV: {starts}")
    areas = ", ".join(f"{s} d={d} {DiagnosticsService.curve_area(c):.3f}" for (s, d), c in curves.items())
    return f"{areas}; {elapsed:.1f}s"


@check("Paired-seed protocol")
def _paired_seed(rng):
    model = SpinGlassService.build_model(4, 0.25, settings.DEFAULT_SEED)
    table = SpinGlassService.log_weight_table(model)
    seed = int(rng.integers(2**31))
    n, d, chains, steps = table.size, 2, 16, 5
    start = rng.integers(n, size=chains)

    def stream():
        return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))

    # Предложения, которые должен увидеть каждый сэмплер, если текущие состояния совпадают
    reference = stream()
    expected = []
    for _ in range(steps):
        expected.append(SamplerService.ensemble_proposals(start, n, d, reference))
        reference.random(chains)
    tail = reference.random()

    for kind in (SamplerKind.HOBS, SamplerKind.HOMS, SamplerKind.HOPS):
        generator = stream()
        for proposals in expected:
            replay = np.random.default_rng()
            replay.bit_generator.state = generator.bit_generator.state
            expect(
                np.array_equal(SamplerService.ensemble_proposals(start, n, d, replay), proposals),
                f"{kind.value}: proposal stream differs from the paired reference",
            )
            moved = SamplerService.ensemble_step(start, table, kind, d, generator)
            stayed = moved == start
            expect(
                np.all(stayed | np.any(proposals == moved[:, None], axis=1)),
                f"{kind.value}: chain moved outside its proposal set",
            )
        expect(generator.random() == tail, f"{kind.value}: consumed a different number of draws")
    return f"identical proposal streams for HOBS, HOMS, HOPS over {steps} steps"


# --- golden examples ----------------------------------------------------------

@check("Golden generator, exponential, Barker and Metropolis matrices")
def _golden_matrices(rng):
    measure, r, proposals = golden_case()
    A = LieAlgebraService.assemble_A(r[proposals.as_array()], 1.0, proposals, measure.n)
    pairs = (
        ("generator", A.matrix),
        ("exponential", LieAlgebraService.exp_A(A, 1.0, -math.log(2.0))),
        ("barker", SamplerService.barker_matrix(r, proposals)),
        ("metropolis", SamplerService.metropolis_matrix(r, proposals)),
    )
    for name, matrix in pairs:
        expect(np.abs(matrix - GOLDEN[name]).max() <= 1e-12, f"{name} matrix differs from the reference values")
    return "4 matrices"


@check("Golden HOPS matrix")
def _golden_hops(rng):
    measure, r, proposals = golden_case()
    P = HopsService.hops_matrix(r, proposals)
    expect(np.abs(P - GOLDEN["hops"]).max() <= 1e-6, "HOPS matrix differs from the reference values")
    hops = HopsService.frobenius_objective(P, r, proposals)
    metropolis = HopsService.frobenius_objective(SamplerService.metropolis_matrix(r, proposals), r, proposals)
    expect(hops > metropolis, f"HOPS objective {hops} does not exceed Metropolis {metropolis}")
    return f"objective {hops:.4f} > {metropolis:.4f}"


class VerificationService:
    """Runs the registered property checks"""

    @staticmethod
    def names() -> List[str]:
        return [item.name for item in CHECKS]

    @staticmethod
    def run(seed: Optional[int] = None, only: Optional[str] = None, include_slow: bool = True) -> List[CheckResult]:
        seed = settings.DEFAULT_SEED if seed is None else seed
        results = []
        for index, item in enumerate(CHECKS):
            if only and only.lower() not in item.name.lower():
                continue
            if item.slow and not include_slow:
                continue
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
            started = time.perf_counter()
            try:
                detail = item.run(rng)
                passed = True
            except (AssertionError, SamplerToolkitError) as exc:
                detail = str(exc)
                passed = False
            elapsed = time.perf_counter() - started
            results.append(CheckResult(name=item.name, passed=passed, detail=detail, seconds=elapsed))
            if not passed:
                run_logger.error(f"FAIL {item.name}: {detail}")
        return results
