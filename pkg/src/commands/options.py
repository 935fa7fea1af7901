import argparse
from pathlib import Path

from pydantic import ValidationError

from src.core.exceptions import InvalidParameterError
from src.schemas.run import LP_PRESETS, RunSpec


def add_run_options(parser: argparse.ArgumentParser, default_out: str) -> None:
    """Flags shared by sk-bench and exact-curve"""
    parser.add_argument("--spins", type=int, default=None)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--samplers", default=None, help="comma-separated, e.g. hobs,homs,hops")
    parser.add_argument("--d", default=None, help="comma-separated proposal sizes, e.g. 1,2,4,8")
    parser.add_argument("--steps", type=int, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=default_out, help="CSV path, '-' for stdout")
    parser.add_argument("--lp-x", choices=LP_PRESETS, default=None)
    parser.add_argument("--lp-y", choices=LP_PRESETS, default=None)
    parser.add_argument("--couplings", default=None, help="plain-text coupling matrix to reuse")
    parser.add_argument("--initial", type=int, default=None, help="1-based initial state")
    parser.add_argument("--workers", type=int, default=None)


def spec_from_args(subcommand: str, args: argparse.Namespace) -> RunSpec:
    # Неуказанные флаги берутся из значений по умолчанию RunSpec
    fields = {
        "spins": args.spins,
        "beta": args.beta,
        "samplers": args.samplers,
        "d": args.d,
        "steps": args.steps,
        "chains": getattr(args, "chains", None),
        "seed": args.seed,
        "lp_x": args.lp_x,
        "lp_y": args.lp_y,
        "couplings": args.couplings,
        "initial": args.initial,
        "workers": args.workers,
    }
    payload = {key: value for key, value in fields.items() if value is not None}
    payload["out"] = None if args.out in (None, "-") else Path(args.out)
    try:
        return RunSpec(subcommand=subcommand, **payload)
    except ValidationError as exc:
        messages = "; ".join(error["msg"] for error in exc.errors())
        raise InvalidParameterError(f"invalid {subcommand} options: {messages}") from exc
