"""Metropolis sampling of ∏ f_ℓ² for hard spheres on the torus, and its deterministic checks."""
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad, simpson

from config import config
from core.estimators import estimate_energy
from core.neumann import neumann_ground_state
from models.neumann_solution import NeumannSolution
from models.vmc_models import ChainResult, DysonPoint, ParticleConfiguration, TorusGas, minimum_image
from utils.exceptions import DomainError, SetupError, SolverError

logger = logging.getLogger(__name__)


def initial_configuration(gas: TorusGas) -> ParticleConfiguration:
    """First N sites of the smallest cubic sublattice holding N particles."""
    per_axis = int(math.ceil(gas.n_particles ** (1.0 / 3.0) - 1e-12))
    spacing = gas.box_side / per_axis
    if per_axis > 1 and spacing <= gas.core_radius:
        raise SetupError(f"Sublattice spacing {spacing:g} does not clear the core radius {gas.core_radius:g}")
    axis = (np.arange(per_axis) + 0.5) * spacing
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    return ParticleConfiguration(grid[: gas.n_particles].copy(), gas.box_side)


def log_weight(configuration: ParticleConfiguration, sol: NeumannSolution, gas: TorusGas) -> float:
    """Σ_{i<j} 2 log f_ℓ(d_ij) with minimum-image distances; -inf when a pair overlaps the core."""
    if configuration.n_particles < 2:
        return 0.0
    return float(2.0 * np.sum(sol.log_f(configuration.pair_distances())))


def move_log_ratio(positions: np.ndarray, index: int, trial: np.ndarray, sol: NeumannSolution,
                   gas: TorusGas) -> float:
    """log of the weight ratio when particle ``index`` moves to ``trial``."""
    others = np.delete(positions, index, axis=0)
    if len(others) == 0:
        return 0.0
    old = np.linalg.norm(minimum_image(others - positions[index], gas.box_side), axis=1)
    new = np.linalg.norm(minimum_image(others - trial, gas.box_side), axis=1)
    new_log = sol.log_f(new)
    if np.any(np.isneginf(new_log)):
        return -math.inf
    return float(2.0 * (np.sum(new_log) - np.sum(sol.log_f(old))))


def acceptance_probability(log_ratio: float) -> float:
    """Metropolis acceptance min(1, w'/w) from the log weight ratio."""
    return 1.0 if log_ratio >= 0.0 else math.exp(log_ratio)


def run_chain(
gas: TorusGas, sol: NeumannSolution, steps: Optional[int] = None,
              burn_in: Optional[int] = None, step_size: Optional[float] = None, seed: int = 0,
              progress_callback: Optional[Callable[[int, int], None]] = None) -> ChainResult:
    """Single-particle Metropolis chain sampling ∏_{i<j} f_ℓ(d_ij)².

    One sweep is N trial moves, each a uniform displacement in a cube of side
    ``step_size``. During burn-in the step size is tuned towards the target
    acceptance window and then frozen; one sample is kept per production sweep.
    """
    settings = config.get("vmc")
    steps = int(settings["steps"] if steps is None else steps)
    burn_in = int(settings["burn_in"] if burn_in is None else burn_in)
    step_size = float(settings["step_size"] if step_size is None else step_size)
    low, high = settings["target_acceptance"]
    tune_interval = int(settings["tune_interval"])
    if steps < 1 or burn_in < 0:
        raise DomainError(f"Need steps >= 1 and burn_in >= 0, got {steps}, {burn_in}")
    if not 0 < step_size < 0.5 * gas.box_side:
        raise DomainError(f"step_size {step_size:g} must lie in (0, L/2)")
    if not math.isclose(sol.ell, gas.ell) or (sol.hard_core and sol.core_radius != gas.core_radius):
        raise DomainError("Neumann solution was not built for this gas's core radius and ell")

    rng = np.random.default_rng(seed)
    positions = initial_configuration(gas).positions
    n, box = gas.n_particles, gas.box_side
    samples = np.empty((steps, n, 3))
    accepted = 0
    window_accepted = 0
    window_moves = 0

    for sweep in range(burn_in + steps):
        for i in range(n):
            trial = (positions[i] + rng.uniform(-0.5 * step_size, 0.5 * step_size, 3)) % box
            if rng.random() < acceptance_probability(move_log_ratio(positions, i, trial, sol, gas)):
                positions[i] = trial
                if sweep >= burn_in:
                    accepted += 1
                else:
                    window_accepted += 1
            if sweep < burn_in:
                window_moves += 1

        if sweep < burn_in and (sweep + 1) % tune_interval == 0:
            rate = window_accepted / window_moves
            if rate < low:
                step_size *= 0.8
            elif rate > high:
                step_size = min(step_size * 1.25, 0.49 * box)
            window_accepted = window_moves = 0
            logger.debug(f"Burn-in sweep {sweep + 1}: acceptance {rate:.3f}, step {step_size:.4g}")
        if sweep >= burn_in:
            samples[sweep - burn_in] = positions
            if progress_callback and (sweep - burn_in + 1) % 1000 == 0:
                progress_callback(sweep - burn_in + 1, steps)

    rate = accepted / (steps * n)
    logger.info(f"Chain seed={seed}: {steps} sweeps, acceptance {rate:.3f}, step {step_size:.4g}")
    return ChainResult(samples=samples, acceptance_rate=rate, step_size=step_size, seed=seed, burn_in=burn_in)


def two_body_oracle(gas: TorusGas, sol: NeumannSolution, method: str = "quad") -> float:
    """N = 2 energy 2λ ∫_{B_ℓ} f² / [L³ - ∫_{B_ℓ}(1 - f²)] by radial quadrature.

    ``method`` selects adaptive Gauss-Kronrod ("quad") or composite Simpson
    ("simpson") so the two rules can be cross-checked.
    """
    if gas.n_particles != 2:
        raise DomainError(f"The two-body oracle needs N = 2, got {gas.n_particles}")
    if sol.eigenvalue == 0.0:
        return 0.0
    start = sol.exclusion_radius

    def inside(r):
        return 4.0 * np.pi * r * r * sol.f(r) ** 2

    if method == "quad":
        numerator, err = quad(lambda r: float(inside(r)), start, sol.ell, epsabs=0.0, epsrel=1e-13, limit=400)
        if not np.isfinite(numerator):
            raise SolverError("Two-body quadrature failed")
    elif method == "simpson":
        r = np.linspace(start, sol.ell, 200001)
        numerator = float(simpson(inside(r), x=r))
    else:
        raise DomainError(f"Unknown quadrature method {method!r}")
    # ∫_{B_ℓ}(1 - f²) = |B_ℓ| - ∫ f²
    excluded = 4.0 / 3.0 * np.pi * sol.ell ** 3 - numerator
    return 2.0 * sol.eigenvalue * numerator / (gas.volume - excluded)


def radial_histogram(samples: np.ndarray, gas: TorusGas, bins: int = 50,
                     r_max: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Counts of minimum-image pair distances over all samples and pairs."""
    r_max = 0.5 * gas.box_side if r_max is None else r_max
    i, j = np.triu_indices(gas.n_particles, k=1)
    delta = minimum_image(samples[:, i, :] - samples[:, j, :], gas.box_side)
    distances = np.linalg.norm(delta, axis=-1).ravel()
    return np.histogram(distances, bins=bins, range=(0.0, r_max))


def dyson_gas(rho_core3: float, n_particles: int = 8, box_side: float = 1.0) -> TorusGas:
    """Gas at ρ·core³ = rho_core3 with the correlation length ℓ = ρ^{-1/3} (capped at L/2)."""
    if rho_core3 <= 0:
        raise DomainError(f"rho·core³ must be positive, got {rho_core3}")
    rho = n_particles / box_side ** 3
    core = (rho_core3 / rho) ** (1.0 / 3.0)
    ell = min(rho ** (-1.0 / 3.0), 0.5 * box_side)
    return TorusGas(box_side, n_particles, core, ell)


def dyson_point(rho_core3: float, n_particles: int = 8, box_side: float = 1.0,
                steps: Optional[int] = None, burn_in: Optional[int] = None, seed: int = 0) -> DysonPoint:
    """One point of the dilute sweep: Neumann profile, chain and energy estimate."""
    gas = dyson_gas(rho_core3, n_particles, box_side)
    sol = neumann_ground_state(gas.core_radius, gas.ell)
    step = min(float(config.get("vmc", "step_size")), 0.49 * box_side)
    chain = run_chain(gas, sol, steps=steps, burn_in=burn_in, step_size=step, seed=seed)
    point = DysonPoint(rho_core3, gas, estimate_energy(chain, sol, gas))
    logger.info(f"Dyson point rho·core³={rho_core3:g}: ratio per pair {point.ratio_pairs:.5f}")
    return point


def dyson_sweep(values: Sequence[float], n_particles: int = 8, box_side: float = 1.0,
                steps: Optional[int] = None, burn_in: Optional[int] = None, seed: int = 0,
                mapper: Optional[Callable[[Callable, Sequence], List]] = None) -> List[DysonPoint]:
    """Dyson points for each ρ·core³ in input order; point k uses seed + k.

    ``mapper(func, items)`` evaluates the points and must return them in item
    order; the default evaluates them one after the other.
    """
    def point(item: Tuple[int, float]) -> DysonPoint:
        k, rho_core3 = item
        return dyson_point(rho_core3, n_particles, box_side, steps, burn_in, seed + k)

    items = list(enumerate(values))
    return list(map(point, items)) if mapper is None else list(mapper(point, items))
