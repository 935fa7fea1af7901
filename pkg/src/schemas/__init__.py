from src.schemas.lp import LinearProgram, LpSolution, LpStatus
from src.schemas.diagnostics import MembershipReport, CheckResult
from src.schemas.run import ChainConfig, ChainRun, RunSpec, LP_PRESETS
