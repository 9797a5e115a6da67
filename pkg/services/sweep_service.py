from typing import Callable, List, Optional, Sequence
import logging

from core.neumann import Core, neumann_ground_state
from core.vmc import dyson_sweep
from models.neumann_solution import NeumannSolution
from models.vmc_models import DysonPoint
from utils.progress import ProgressInfo, ProgressReporter
from .base_service import Service

logger = logging.getLogger(__name__)


class SweepService(Service):
    """Parameter sweeps evaluated on the worker pool, returned in input order."""

    def __init__(self, threads: Optional[int] = 0):
        super().__init__(threads)

    def start(self) -> None:
        super().start()

    def stop(self) -> None:
        super().stop()

    def _ordered(self, name: str, func: Callable, values: Sequence, progress) -> List:
        reporter = ProgressReporter(name, total_steps=len(values), callback=progress)
        reporter.start(f"{name}: {len(values)} point(s)")
        futures = [self.submit(func, k, value) for k, value in enumerate(values)]
        results = []
        try:
            for future in futures:
                results.append(future.result())
                reporter.increment()
        except Exception as e:
            reporter.fail(str(e))
            raise
        reporter.complete()
        return results

    def neumann_sweep(self, core: Core, ells: Sequence[float], tol: Optional[float] = None,
                      progress: Optional[Callable[[ProgressInfo], None]] = None) -> List[NeumannSolution]:
        """Neumann ground states for one core over several ball radii."""
        solutions = self._ordered("neumann-sweep", lambda k, ell: neumann_ground_state(core, ell, tol),
                                  list(ells), progress)
        logger.info(f"Neumann sweep over {len(solutions)} radii finished")
        return solutions

    def dyson_sweep(self, values: Sequence[float], n_particles: int = 8, box_side: float = 1.0,
                    steps: Optional[int] = None, burn_in: Optional[int] = None, seed: int = 0,
                    progress: Optional[Callable[[ProgressInfo], None]] = None) -> List[DysonPoint]:
        """Dyson points for each ρ·core³, evaluated on the pool; point k uses seed + k."""
        def mapper(func, items):
            return self._ordered("dyson-sweep", lambda k, item: func(item), items, progress)

        points = dyson_sweep(values, n_particles, box_side, steps, burn_in, seed, mapper=mapper)
        logger.info(f"Dyson sweep over {len(points)} densities finished")
        return points
