"""A and B energy terms of the Jastrow state from Metropolis samples."""
import logging
import math
from typing import Optional, Sequence, Union

import numpy as np

from config import config
from core.blocking import blocking_error
from models.neumann_solution import NeumannSolution
from models.vmc_models import ChainResult, EnergyEstimate, TorusGas, minimum_image
from utils.exceptions import AccuracyError, DomainError

logger = logging.getLogger(__name__)

# Upper bound on floats held by one batch of triple arrays
_BATCH_FLOATS = 4_000_000


def a_term_samples(samples: np.ndarray, sol: NeumannSolution, gas: TorusGas) -> np.ndarray:
    """2λ Σ_{i<j} χ_ℓ(d_ij) for every sample."""
    i, j = np.triu_indices(gas.n_particles, k=1)
    delta = minimum_image(samples[:, i, :] - samples[:, j, :], gas.box_side)
    distances = np.linalg.norm(delta, axis=-1)
    return 2.0 * sol.eigenvalue * np.sum(sol.chi(distances), axis=1)


def _pair_gradients(x: np.ndarray, sol: NeumannSolution, gas: TorusGas):
    """Displacements x_j - x_i, their norms (1 on the diagonal), g_ji = (∇f/f)(x_j - x_i) and G_j = Σ_i g_ji."""
    eye = np.eye(gas.n_particles, dtype=bool)
    delta = minimum_image(x[:, :, None, :] - x[:, None, :, :], gas.box_side)
    safe_r = np.where(eye, 1.0, np.linalg.norm(delta, axis=-1))
    radial = np.where(eye, 0.0, sol.grad_log_f(safe_r))
    g = radial[..., None] * delta / safe_r[..., None]
    return delta, safe_r, g, np.sum(g, axis=2)


def _b_term_batch(x: np.ndarray, sol: NeumannSolution, gas: TorusGas) -> np.ndarray:
    n = gas.n_particles
    eye = np.eye(n, dtype=bool)
    delta, safe_r, g, total = _pair_gradients(x, sol, gas)

    # log f(d_ik), zero on the diagonal
    log_f = np.where(eye, 0.0, sol.log_f(safe_r))

    # Reflect particle i through particle j: x_i' = x_j + (x_j - x_i)
    reflected = x[:, :, None, :] + delta            # [s, j, i]
    shift = minimum_image(reflected[:, :, :, None, :] - x[:, None, None, :, :], gas.box_side)  # [s, j, i, k]
    new_log_f = sol.log_f(np.linalg.norm(shift, axis=-1))
    idx = np.arange(n)
    mask = np.ones((n, n, n), dtype=bool)
    mask[idx, :, idx] = False         # k == j
    mask[:, idx, idx] = False         # k == i
    change = np.where(mask[None], new_log_f - log_f[:, None, :, :], 0.0)
    log_ratio = 2.0 * np.sum(change, axis=-1)      # [s, j, i]
    # (1 - ρ)/(1 + ρ) with ρ = exp(log_ratio)
    weight = np.tanh(-0.5 * log_ratio)

    cross = np.einsum("sjia,sja->sji", g, total) - np.sum(g * g, axis=-1)
    return -np.sum(np.where(eye[None], 0.0, weight * cross), axis=(1, 2))


def b_term_samples(samples: np.ndarray, sol: NeumannSolution, gas: TorusGas) -> np.ndarray:
    """-Σ_{i,j,m distinct} (∇f/f)(x_j - x_i)·(∇f/f)(x_j - x_m) per sample, symmetrized.

    Reflecting particle i through particle j preserves the torus measure and
    flips the sign of the summand, so each term is weighted by (1 - ρ)/(1 + ρ),
    ρ being the weight ratio of the reflected configuration. The weight keeps
    the mean, stays in [-1, 1], and vanishes when no third particle feels i.
    """
    n = gas.n_particles
    if n < 3:
        return np.zeros(samples.shape[0])
    batch = max(1, _BATCH_FLOATS // (3 * n ** 3))
    parts = [_b_term_batch(samples[s:s + batch], sol, gas) for s in range(0, samples.shape[0], batch)]
    return np.concatenate(parts)


def estimate_energy(samples: Union[ChainResult, np.ndarray], sol: NeumannSolution, gas: TorusGas,
                    minimum: Optional[int] = None, acceptance_rate: Optional[float] = None,
                    seed: Optional[int] = None) -> EnergyEstimate:
    """Average A and B over the samples; the standard error comes from blocking A + B.

    Raises:
        AccuracyError: fewer samples than the blocking minimum.
    """
    if isinstance(samples, ChainResult):
        acceptance_rate = samples.acceptance_rate if acceptance_rate is None else acceptance_rate
        seed = samples.seed if seed is None else seed
        samples = samples.samples
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 3 or samples.shape[0] == 0:
        raise DomainError("estimate_energy needs a non-empty (samples, N, 3) array")
    minimum = int(config.get("vmc", "blocking_minimum") if minimum is None else minimum)
    if samples.shape[0] < minimum:
        raise AccuracyError(f"{samples.shape[0]} samples are fewer than the blocking minimum {minimum}",
                            required=minimum)

    a_values = a_term_samples(samples, sol, gas)
    b_values = b_term_samples(samples, sol, gas)
    blocking = blocking_error(a_values + b_values, minimum)
    estimate = EnergyEstimate(
        a_term=float(np.mean(a_values)),
        b_term=float(np.mean(b_values)),
        std_error=blocking.std_error,
        acceptance_rate=float(acceptance_rate if acceptance_rate is not None else float("nan")),
        n_samples=int(samples.shape[0]),
        seed=int(seed if seed is not None else 0),
    )
    logger.info(f"Energy estimate: A={estimate.a_term:.6g}, B={estimate.b_term:.6g}, "
                f"total={estimate.total:.6g} ± {estimate.std_error:.2e}")
    return estimate


def b_term_raw(samples: np.ndarray, sol: NeumannSolution, gas: TorusGas) -> np.ndarray:
    """Unsymmetrized B summand per sample, for comparison with the symmetrized form."""
    _, _, g, total = _pair_gradients(np.asarray(samples, dtype=float), sol, gas)
    return -(np.sum(total * total, axis=(1, 2)) - np.sum(g * g, axis=(1, 2, 3)))


def merge_estimates(estimates: Sequence[EnergyEstimate]) -> EnergyEstimate:
    """Sample-weighted average of independent chain estimates, combined in the given order.

    Errors of independent chains add in quadrature with the same weights.
    """
    if not estimates:
        raise DomainError("merge_estimates needs at least one estimate")
    weights = np.array([e.n_samples for e in estimates], dtype=float)
    weights /= weights.sum()
    a_term = float(sum(w * e.a_term for w, e in zip(weights, estimates)))
    b_term = float(sum(w * e.b_term for w, e in zip(weights, estimates)))
    std_error = math.sqrt(sum((w * e.std_error) ** 2 for w, e in zip(weights, estimates)))
    acceptance = float(sum(w * e.acceptance_rate for w, e in zip(weights, estimates)))
    return EnergyEstimate(a_term=a_term, b_term=b_term, std_error=std_error, acceptance_rate=acceptance,
                          n_samples=int(sum(e.n_samples for e in estimates)), seed=estimates[0].seed)
