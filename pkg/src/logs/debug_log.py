import logging
import sys
import json
import inspect
import time
from pathlib import Path
from functools import wraps
import traceback

import numpy as np

from src.core import get_settings

settings = get_settings()

# Создаем директорию для логов, если её нет
log_dir = Path(__file__).parent
log_dir.mkdir(exist_ok=True)

# Константы для цветного вывода
BLUE = '\033[94m'
GREEN = '\033[92m'
YELLOW = '\033[93m'
RED = '\033[91m'
PURPLE = '\033[95m'
CYAN = '\033[96m'
BOLD = '\033[1m'
END = '\033[0m'


def format_object(obj):
    """Компактное представление аргументов и результатов, включая массивы numpy"""
    if isinstance(obj, np.ndarray):
        if obj.size > 16:
            return f"ndarray(shape={obj.shape}, dtype={obj.dtype})"
        return np.array2string(obj, precision=6)
    if isinstance(obj, (list, dict, tuple, set)):
        try:
            return json.dumps(obj, ensure_ascii=False, default=format_object)
        except (TypeError, ValueError):
            return str(obj)
    return str(obj)


class DebugLogger:
    """Расширенный логгер для дебага с подробной информацией и цветным выводом"""

    def __init__(self, name="debug", level=None):
        if level is None:
            level = logging.DEBUG if settings.DEBUG else logging.WARNING
        self.logger = logging.getLogger(name)
        self.logger.setLevel(level)
        self.logger.propagate = False

        # Очищаем handlers если они уже были добавлены
        if self.logger.handlers:
            self.logger.handlers.clear()

        formatter = logging.Formatter(
            '%(asctime)s - %(levelname)s - [%(filename)s:%(lineno)d] - %(message)s'
        )

        file_handler = logging.FileHandler(log_dir / "debug.log", encoding='utf-8')
        file_handler.setFormatter(formatter)
        file_handler.setLevel(level)

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        console_handler.setLevel(level)

        self.logger.addHandler(file_handler)
        self.logger.addHandler(console_handler)

    def isEnabledFor(self, level) -> bool:
        return self.logger.isEnabledFor(level)

    def debug(self, message, *args, **kwargs):
        """Дебаг лог с информацией о вызывающем коде"""
        frame = inspect.currentframe().f_back
        filename = frame.f_code.co_filename
        lineno = frame.f_lineno
        function = frame.f_code.co_name

        # Относительный путь к файлу
        if "src" in filename:
            filename = filename[filename.index("src"):]

        caller_info = f"{BLUE}[{filename}:{lineno} - {function}]{END}"
        self.logger.debug(f"{caller_info} {message}", *args, **kwargs)

    def info(self, message, *args, **kwargs):
        self.logger.info(f"{GREEN}{message}{END}", *args, **kwargs)

    def warning(self, message, *args, **kwargs):
        self.logger.warning(f"{YELLOW}{message}{END}", *args, **kwargs)

    def error(self, message, *args, **kwargs):
        """Лог ошибок с трейсом, если он есть"""
        trace = traceback.format_exc()
        if trace and trace != 'NoneType: None\n':
            message = f"{message}\n{RED}Traceback:{END}\n{trace}"
        self.logger.error(f"{RED}{message}{END}", *args, **kwargs)

    def start_func(self, func_name, params=None):
        params_str = f" с параметрами: {format_object(params)}" if params else ""
        self.debug(f"{PURPLE}Начало выполнения функции {func_name}{END}{params_str}")

    def end_func(self, func_name, result=None, execution_time=None):
        result_str = ""
        if result is not None:
            text = format_object(result)
            result_str = f", результат: {text[:1000]}"
            if len(text) > 1000:
                result_str += "... [обрезано]"

        time_str = f", время выполнения: {execution_time:.4f}с" if execution_time else ""
        self.debug(f"{PURPLE}Окончание выполнения функции {func_name}{END}{result_str}{time_str}")

    def log_exception(self, message="Произошло исключение"):
        exc_type, exc_value, _ = sys.exc_info()
        if exc_type:
            self.error(f"{message}: {exc_type.__name__}: {exc_value}")
        else:
            self.error(message)

    def log_data(self, name, data):
        """Логирование произвольных данных (матрицы, векторы) в удобном формате"""
        self.debug(f"{CYAN}{name}:{END}\n{format_object(data)}")


def log_function(logger=None):
    """Декоратор для логирования крупных операций: вход, выход, время"""

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            active = logger if logger is not None else debug_logger
            if not active.isEnabledFor(logging.DEBUG):
                return func(*args, **kwargs)

            func_args = dict(zip(inspect.getfullargspec(func).args, args))
            func_args.update(kwargs)
            func_args.pop('self', None)
            func_args.pop('cls', None)

            start_time = time.perf_counter()
            active.start_func(func.__name__, func_args)
            try:
                result = func(*args, **kwargs)
            except Exception:
                active.log_exception(f"Ошибка в функции {func.__name__}")
                raise
            active.end_func(func.__name__, result, time.perf_counter() - start_time)
            return result

        return wrapper

    return decorator


# Глобальный экземпляр логгера для дебага
debug_logger = DebugLogger()
