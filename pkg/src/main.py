import sys
from typing import Optional, Sequence

from src.commands import build_parser
from src.core import get_settings
from src.core.exceptions import SamplerToolkitError
from src.logs import run_logger

# Get application settings
settings = get_settings()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    run_logger.info(f"{settings.PROJECT_NAME}: {args.command}")
    try:
        return args.handler(args)
    except SamplerToolkitError as exc:
        run_logger.error(f"{type(exc).__name__}: {exc.detail}")
        return 1
    except OSError as exc:
        run_logger.error(f"I/O failure: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
