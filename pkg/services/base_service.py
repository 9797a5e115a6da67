from abc import ABC, abstractmethod
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Any, Callable, Optional
import logging

from utils.exceptions import ServiceError
from utils.parallel import resolve_workers

logger = logging.getLogger(__name__)


class Service(ABC):
    """Base class for the toolkit's worker-pool services."""

    def __init__(self, threads: Optional[int] = 0):
        self._is_running = False
        self._executor: Optional[ThreadPoolExecutor] = None
        self.threads = threads

    @abstractmethod
    def start(self) -> None:
        """Start the worker pool (``threads`` = 0 means one worker per CPU)."""
        self._is_running = True
        self._executor = ThreadPoolExecutor(max_workers=resolve_workers(self.threads),
                                            thread_name_prefix=type(self).__name__)

    @abstractmethod
    def stop(self) -> None:
        """Stop the service and wait for running work."""
        self._is_running = False
        if self._executor:
            self._executor.shutdown(wait=True)
            self._executor = None

    @property
    def is_running(self) -> bool:
        """Check if the service is currently running."""
        return self._is_running

    def submit(self, func: Callable[..., Any], *args, **kwargs) -> Future:
        """Queue work on the pool; the service must be running."""
        if not self._is_running or self._executor is None:
            raise ServiceError(f"{type(self).__name__} is not running")
        return self._executor.submit(func, *args, **kwargs)
