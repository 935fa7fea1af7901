import logging
import sys
from pathlib import Path

from src.core import get_settings

settings = get_settings()

# Логи пишем рядом с модулем
log_dir = Path(__file__).parent
log_dir.mkdir(exist_ok=True)


# Логирование в файл и в stderr (stdout занят под CSV и матрицы)
def setup_logging():
    logger = logging.getLogger("run_logger")
    logger.setLevel(getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO))
    logger.propagate = False

    if logger.handlers:
        return logger

    formatter = logging.Formatter('%(asctime)s - %(levelname)s - %(message)s')

    file_handler = logging.FileHandler(log_dir / "runs.log", encoding="utf-8")
    file_handler.setFormatter(formatter)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)

    logger.addHandler(file_handler)
    logger.addHandler(console_handler)

    return logger


run_logger = setup_logging()
