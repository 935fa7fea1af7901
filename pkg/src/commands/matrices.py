import argparse
import csv
import math
import sys

import numpy as np

from src.core.exceptions import InvalidParameterError
from src.models.chain import ProposalSet, SamplerKind
from src.schemas.run import LP_PRESETS
from src.services.hops_service import HopsService
from src.services.lie_algebra_service import LieAlgebraService
from src.services.measure_service import MeasureService
from src.services.sampler_service import SamplerService

MATRIX_KINDS = ("generator", "exp", "barker", "metropolis", "hops")


def _numbers(text: str, cast):
    try:
        return [cast(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise InvalidParameterError(f"cannot parse list '{text}'") from exc


def register(subparsers) -> None:
    parser = subparsers.add_parser("matrices", help="print a transition or generator matrix as CSV")
    parser.add_argument("--p", required=True, help="comma-separated nonnegative weights")
    parser.add_argument("--J", required=True, help="comma-separated 1-based proposal states")
    parser.add_argument("--sampler", choices=MATRIX_KINDS, default="barker")
    parser.add_argument("--current", type=int, default=None, help="1-based current state (default: last)")
    parser.add_argument("--omega", type=float, default=1.0)
    parser.add_argument("--t", type=float, default=-math.log(2.0), help="time for --sampler exp")
    parser.add_argument("--lp-x", choices=LP_PRESETS, default="ones")
    parser.add_argument("--lp-y", choices=LP_PRESETS, default="neg_ratios")
    parser.set_defaults(handler=cmd_matrices)


def build_matrix(args: argparse.Namespace) -> np.ndarray:
    measure = MeasureService.normalize(_numbers(args.p, float))
    n = measure.n
    current = n - 1 if args.current is None else args.current - 1
    proposals = ProposalSet.of(index - 1 for index in _numbers(args.J, int))
    proposals.validate_against(current, n)

    if args.sampler in ("barker", "metropolis", "hops") and current != n - 1:
        kind = {"barker": SamplerKind.HOBS, "metropolis": SamplerKind.HOMS, "hops": SamplerKind.HOPS}[args.sampler]
        return SamplerService.transition_matrix(kind, measure, current, proposals, args.lp_x, args.lp_y)
    if current != n - 1:
        raise InvalidParameterError("generator and exp matrices are built with the last state as current")

    r = MeasureService.reference_ratios(measure)
    if args.sampler == "barker":
        return SamplerService.barker_matrix(r, proposals, args.omega)
    if args.sampler == "metropolis":
        return SamplerService.metropolis_matrix(r, proposals, args.omega)
    if args.sampler == "hops":
        return HopsService.hops_matrix(r, proposals, args.lp_x, args.lp_y)
    A = LieAlgebraService.assemble_A(r[proposals.as_array()], args.omega, proposals, n)
    if args.sampler == "generator":
        return A.matrix
    return LieAlgebraService.exp_A(A, args.omega, args.t)


def cmd_matrices(args: argparse.Namespace) -> int:
    matrix = build_matrix(args)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    for row in matrix:
        writer.writerow(repr(float(value)) for value in row)
    return 0
