import argparse

from src.schemas.run import RunSpec
from src.services.benchmark_service import CURVE_HEADER, BenchmarkService
from src.services.spin_glass_service import SpinGlassService
from src.commands.options import add_run_options, spec_from_args


def register(subparsers) -> None:
    parser = subparsers.add_parser("exact-curve", help="exact TV curves from expected kernels (small N)")
    add_run_options(parser, default_out="exact_curve.csv")
    parser.set_defaults(handler=cmd_exact_curve)


def cmd_exact_curve(args: argparse.Namespace) -> int:
    spec: RunSpec = spec_from_args("exact-curve", args)
    rows = BenchmarkService.exact_curves(spec)
    BenchmarkService.write_csv(rows, CURVE_HEADER, spec.out)
    if spec.out is not None:
        model = BenchmarkService.load_model(spec)
        SpinGlassService.save_couplings(BenchmarkService.couplings_path(spec.out), model.couplings)
    return 0
