"""
Паралельне виконання незалежних задач.
Результати завжди впорядковані за індексом задачі, тому не залежать від планування потоків.
"""
import logging
from functools import partial
from typing import Callable, List, TypeVar

import anyio
import anyio.to_thread

try:
    from builtins import BaseExceptionGroup
except ImportError:  # Python < 3.11
    from exceptiongroup import BaseExceptionGroup

logger = logging.getLogger(__name__)

T = TypeVar("T")


async def _run_indexed(fn: Callable[[int], T], count: int, workers: int) -> List[T]:
    results: List[T] = [None] * count  # type: ignore[list-item]
    limiter = anyio.CapacityLimiter(workers)

    async def _one(index: int) -> None:
        results[index] = await anyio.to_thread.run_sync(partial(fn, index), limiter=limiter)

    async with anyio.create_task_group() as tg:
        for index in range(count):
            tg.start_soon(_one, index)
    return results


def _first_leaf(group: BaseExceptionGroup) -> BaseException:
    error: BaseException = group
    while isinstance(error, BaseExceptionGroup):
        error = error.exceptions[0]
    return error


def map_indexed(fn: Callable[[int], T], count: int, workers: int = 1) -> List[T]:
    """
    Обчислення fn(0), …, fn(count-1); при workers > 1 задачі йдуть у пул потоків.

    Виняток із задачі піднімається так само, як і при послідовному виконанні.
    """
    if count <= 0:
        return []
    if workers <= 1 or count == 1:
        return [fn(index) for index in range(count)]
    logger.debug("Запуск %d задач на %d потоках", count, workers)
    try:
        return anyio.run(_run_indexed, fn, count, workers)
    except BaseExceptionGroup as group:
        error = _first_leaf(group)
        logger.debug("Задача завершилася з помилкою %s; решту скасовано", type(error).__name__)
        raise error from group
