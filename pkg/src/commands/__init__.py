import argparse

from src.commands import exact_curve, matrices, sk_bench, verify

# Регистрируем подкоманды
COMMANDS = (verify, matrices, sk_bench, exact_curve)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="liemcmc",
        description="Lie-group MCMC samplers, verification oracles and SK benchmarks",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser
