from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from multiprocessing import Pool
from typing import Callable, Iterable, List, Sequence


@contextmanager
def process_pool(processes: int):
    """Pool that is closed and joined on exit instead of terminated"""
    pool = Pool(processes)
    try:
        yield pool
    finally:
        pool.close()
        pool.join()


def run_tasks(func: Callable, arguments: Iterable[Sequence], workers: int, processes: bool = False) -> List:
    """func(*args) for every argument tuple, results in submission order.

    Processes are for pure-Python work that holds the GIL (the HOPS simplex);
    numpy-vectorised work runs on threads. func must be importable by name when
    processes is set.
    """
    arguments = [tuple(args) for args in arguments]
    if workers <= 1 or len(arguments) <= 1:
        return [func(*args) for args in arguments]
    if processes:
        with process_pool(min(workers, len(arguments))) as pool:
            return pool.starmap(func, arguments)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(func, *args) for args in arguments]
        return [future.result() for future in futures]
