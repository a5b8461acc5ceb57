"""
Fan-out of independent tasks (fit restarts, optimizer starts).

With ``parallel`` enabled in the configuration, tasks are wrapped in
``dask.delayed`` and computed on the configured local scheduler. Otherwise they
run in a plain loop behind a ``rich`` progress bar. Both paths return results in
task order.
"""

import dask
from rich.progress import track

from .config import PyxbarConfigManager
from .logging import logger


def map_tasks(func, tasks, parallel=None, description="Working...", config=None):
    tasks = list(tasks)
    config = config or PyxbarConfigManager.from_pyxbar_cfg()
    if parallel is None:
        parallel = config("parallel")
    if parallel and len(tasks) > 1:
        scheduler = config("dask_scheduler")
        logger.debug(f"Running {len(tasks)} tasks with dask ({scheduler})")
        delayed = [dask.delayed(func)(task) for task in tasks]
        return list(dask.compute(*delayed, scheduler=scheduler))
    logger.debug(f"Running {len(tasks)} tasks serially")
    if config("quiet") or len(tasks) == 1:
        return [func(task) for task in tasks]
    return [func(task) for task in track(tasks, description=description)]
