"""Progress reporting for chains, sweeps and golden reruns."""
from typing import Optional, Callable, Dict, Any
from dataclasses import dataclass
from enum import Enum
import logging
import threading
import time

logger = logging.getLogger(__name__)


class ProgressState(Enum):
    """States of a tracked run."""
    NOT_STARTED = "not_started"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class ProgressInfo:
    """Snapshot of a run's progress."""
    operation_id: str
    state: ProgressState
    progress: float  # 0.0 to 1.0
    message: str
    current_step: int
    total_steps: int
    start_time: float
    update_time: float
    error: Optional[str] = None
    details: Optional[Dict[str, Any]] = None


class ProgressReporter:
    """Thread-safe step counter with a snapshot callback.

    Workers of a parallel run share one reporter; ``step_callback`` adapts it
    to the ``(done, total)`` callbacks taken by the numerical routines.
    """

    def __init__(self, operation_id: str, total_steps: int = 100,
                 callback: Optional[Callable[[ProgressInfo], None]] = None):
        self.operation_id = operation_id
        self.total_steps = max(1, int(total_steps))
        self.callback = callback
        self.current_step = 0
        self.start_time = time.time()
        self.state = ProgressState.NOT_STARTED
        self.message = ""
        self.error = None
        self.details: Dict[str, Any] = {}
        self._lock = threading.Lock()

    def start(self, message: str = "Starting..."):
        with self._lock:
            self.state = ProgressState.RUNNING
            self.message = message
            self.start_time = time.time()
        logger.debug(f"{self.operation_id}: {message}")
        self._notify()

    def update(self, step: int, message: Optional[str] = None, **details):
        with self._lock:
            self.current_step = min(step, self.total_steps)
            if message is not None:
                self.message = message
            self.details.update(details)
        self._notify()

    def increment(self, amount: int = 1, message: Optional[str] = None):
        with self._lock:
            self.current_step = min(self.current_step + amount, self.total_steps)
            if message is not None:
                self.message = message
        self._notify()

    def step_callback(self, offset: int = 0) -> Callable[[int, int], None]:
        """Callback mapping a worker's (done, total) onto this reporter, shifted by ``offset``."""
        def report(done: int, total: int):
            self.update(offset + done)
        return report

    def complete(self, message: str = "Completed"):
        with self._lock:
            self.current_step = self.total_steps
            self.state = ProgressState.COMPLETED
            self.message = message
        logger.debug(f"{self.operation_id}: {message}")
        self._notify()

    def fail(self, error: str):
        with self._lock:
            self.state = ProgressState.FAILED
            self.error = error
            self.message = f"Failed: {error}"
        logger.error(f"{self.operation_id} failed: {error}")
        self._notify()

    def snapshot(self) -> ProgressInfo:
        with self._lock:
            return ProgressInfo(
                operation_id=self.operation_id,
                state=self.state,
                progress=self.current_step / self.total_steps,
                message=self.message,
                current_step=self.current_step,
                total_steps=self.total_steps,
                start_time=self.start_time,
                update_time=time.time(),
                error=self.error,
                details=self.details.copy(),
            )

    def _notify(self):
        if self.callback:
            self.callback(self.snapshot())
