"""Small runtime helpers shared by the compute modules and the CLI."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import ConfigError

_T = TypeVar("_T")
_R = TypeVar("_R")

THREADS_ENV_VAR = "RISLINK_THREADS"


def worker_count(default: int = 1) -> int:
    """Worker cap from the RISLINK_THREADS environment variable (min 1)."""
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or not raw.strip():
        return max(1, default)
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from None
    return max(1, value)


def parallel_map(fn: Callable[[_T], _R], items: Iterable[_T], workers: int = 1) -> list[_R]:
    """Map ``fn`` over ``items``, optionally on a thread pool.

    Output order always follows input order, so results are deterministic
    regardless of ``workers``.
    """
    seq: Sequence[_T] = list(items)
    if workers <= 1 or len(seq) < 2:
        return [fn(item) for item in seq]
    with ThreadPoolExecutor(max_workers=min(workers, len(seq))) as pool:
        return list(pool.map(fn, seq))
