from typing import Callable, List, Optional, Tuple
import logging

from config import config
from core.estimators import estimate_energy, merge_estimates
from core.vmc import run_chain
from models.neumann_solution import NeumannSolution
from models.vmc_models import ChainResult, EnergyEstimate, TorusGas
from utils.progress import ProgressInfo, ProgressReporter
from .base_service import Service

logger = logging.getLogger(__name__)


class ChainService(Service):
    """Runs independent Metropolis chains on the worker pool and merges their estimates."""

    def __init__(self, threads: Optional[int] = 0):
        super().__init__(threads)

    def start(self) -> None:
        super().start()

    def stop(self) -> None:
        super().stop()

    def run_chains(self, gas: TorusGas, sol: NeumannSolution, chains: Optional[int] = None,
                   steps: Optional[int] = None, burn_in: Optional[int] = None,
                   step_size: Optional[float] = None, seed: int = 0,
                   progress: Optional[Callable[[ProgressInfo], None]] = None
                   ) -> Tuple[List[ChainResult], List[EnergyEstimate], EnergyEstimate]:
        """Run ``chains`` chains with seeds seed, seed + 1, ...

        Returns:
            Chain results and per-chain estimates in chain order, and the
            sample-weighted merged estimate.
        """
        chains = int(config.get("vmc", "chains") if chains is None else chains)
        steps = int(config.get("vmc", "steps") if steps is None else steps)
        reporter = ProgressReporter(f"vmc-N{gas.n_particles}", total_steps=chains * steps, callback=progress)
        reporter.start(f"Running {chains} chain(s) of {steps} sweeps")

        def one_chain(k: int) -> Tuple[ChainResult, EnergyEstimate]:
            chain = run_chain(gas, sol, steps=steps, burn_in=burn_in, step_size=step_size, seed=seed + k,
                              progress_callback=reporter.step_callback(offset=k * steps))
            return chain, estimate_energy(chain, sol, gas)

        try:
            futures = [self.submit(one_chain, k) for k in range(chains)]
            outcomes = [future.result() for future in futures]
        except Exception as e:
            reporter.fail(str(e))
            raise
        results = [chain for chain, _ in outcomes]
        estimates = [estimate for _, estimate in outcomes]
        merged = merge_estimates(estimates)
        reporter.complete(f"Merged {chains} chain(s): total {merged.total:.6g} ± {merged.std_error:.2e}")
        logger.info(f"Merged {chains} chain(s) for N={gas.n_particles}: total={merged.total:.6g}")
        return results, estimates, merged
