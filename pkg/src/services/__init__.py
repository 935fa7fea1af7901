from src.services.measure_service import MeasureService
from src.services.lie_algebra_service import LieAlgebraService
from src.services.lp_service import LpService, SimplexSolver
from src.services.hops_service import HopsService
from src.services.sampler_service import SamplerService
from src.services.spin_glass_service import SpinGlassService, SkOracle
from src.services.diagnostics_service import DiagnosticsService
from src.services.benchmark_service import BenchmarkService
from src.services.verification_service import VerificationService
