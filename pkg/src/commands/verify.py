import argparse

from src.logs import run_logger
from src.services.verification_service import VerificationService


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="run the property suite and reference examples")
    parser.add_argument("--seed", type=int, default=None, help="master seed for randomized checks")
    parser.add_argument("--only", default=None, help="run checks whose name contains this text")
    parser.add_argument("--skip-slow", action="store_true", help="skip checks that solve many linear programs")
    parser.set_defaults(handler=cmd_verify)


def cmd_verify(args: argparse.Namespace) -> int:
    results = VerificationService.run(seed=args.seed, only=args.only, include_slow=not args.skip_slow)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.name} ({result.seconds:.2f}s): {result.detail}")
    failed = [result for result in results if not result.passed]
    run_logger.info(f"verify: {len(results) - len(failed)} passed, {len(failed)} failed")
    return 1 if failed else 0
