from src.logs.run_log import run_logger
from src.logs.debug_log import debug_logger, log_function
