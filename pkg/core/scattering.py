"""Zero-energy scattering solutions, Fourier coefficients and potential rescaling."""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp

from config import config
from models.potential import RadialPotential, ScaledRegime
from models.scattering_solution import ScatteringSolution
from utils.exceptions import DomainError, SolverError

logger = logging.getLogger(__name__)


def soft_sphere_scattering_length(height: float, radius: float) -> float:
    """Closed form R - tanh(κR)/κ with κ = √(V₀/2)."""
    if height <= 0 or radius <= 0:
        return 0.0
    kappa = math.sqrt(height / 2.0)
    return radius - math.tanh(kappa * radius) / kappa


def segment_edges(potential: RadialPotential, max_growth: float) -> np.ndarray:
    """Integration breakpoints on [0, R] keeping κ·Δr bounded on each piece."""
    support = potential.support_radius
    edges = np.unique(np.concatenate(([0.0], potential.breakpoints, [support])))
    kappa = math.sqrt(potential.max_value / 2.0)
    pieces = max(1, int(math.ceil(kappa * support / max_growth)))
    if pieces == 1:
        return edges
    refined = np.linspace(0.0, support, pieces + 1)
    return np.unique(np.concatenate((edges, refined)))


def integrate_radial(potential: RadialPotential, edges: np.ndarray, y0: np.ndarray, tol: float,
                     energy: float = 0.0):
    """Integrate w'' = (½V(r) - energy) w piecewise, renormalizing between pieces.

    Returns a list of (r0, r1, dense solution, log scale) tuples and the final state.
    """
    pieces = []
    log_scale = 0.0
    y = np.asarray(y0, dtype=float)
    for r0, r1 in zip(edges[:-1], edges[1:]):
        if r1 <= r0:
            continue
        # V is sampled strictly inside the piece; jumps sit on the edges.
        inset = 1e-12 * (r1 - r0)

        def rhs(r, y, lo=r0 + inset, hi=r1 - inset):
            return [y[1], (0.5 * float(potential(min(max(r, lo), hi))) - energy) * y[0]]

        sol = solve_ivp(rhs, (r0, r1), y, method="RK45", rtol=tol, atol=tol * 1e-3,
                        dense_output=True)
        if not sol.success:
            raise SolverError(f"Scattering integrator failed on [{r0:g}, {r1:g}]: {sol.message}")
        pieces.append((r0, r1, sol.sol, log_scale))
        y = sol.y[:, -1]
        scale = float(np.max(np.abs(y)))
        if scale == 0.0 or not np.isfinite(scale):
            raise SolverError(f"Scattering solution degenerated at r={r1:g}")
        y = y / scale
        log_scale += math.log(scale)
    return pieces, y, log_scale


def evaluate_radial(pieces, r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Return (log|w|, w'/w) at radii r, with log|w| in absolute scale."""
    log_w = np.full(r.shape, -np.inf)
    ratio = np.full(r.shape, np.inf)
    for r0, r1, dense, log_scale in pieces:
        mask = (r >= r0) & (r <= r1)
        if not np.any(mask):
            continue
        values = dense(r[mask])
        with np.errstate(divide="ignore"):
            log_w[mask] = np.log(np.abs(values[0])) + log_scale
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio[mask] = values[1] / values[0]
    return log_w, ratio


def scattering_length(potential: RadialPotential, r_max: Optional[float] = None,
                      tol: Optional[float] = None) -> ScatteringSolution:
    """Solve [-Δ + ½V] f = 0 and read off the scattering length.

    Args:
        potential: Repulsive radial potential.
        r_max: Outer radius; defaults to a multiple of the support radius.
        tol: Relative tolerance of the integrator.

    Returns:
        ScatteringSolution with the asymptotic fit of w = r f.
    """
    settings = config.get("scattering")
    tol = settings["tol"] if tol is None else tol
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    support = potential.support_radius
    if r_max is None:
        r_max = settings["r_max_factor"] * max(support, 1e-300)
    n_profile = int(settings["profile_points"])

    if potential.is_trivial:
        r_max = r_max if r_max > 0 else 1.0
        radii = np.linspace(0.0, r_max, n_profile)
        return ScatteringSolution(0.0, radii, np.ones_like(radii), 0.0, True)
    if r_max <= 2.0 * support:
        raise DomainError(f"r_max={r_max:g} must exceed twice the support radius {support:g}")

    if potential.is_hard_core:
        pieces, _, _ = integrate_radial(RadialPotential.zero(), np.array([support, r_max]),
                                  np.array([0.0, 1.0]), tol)
        start = support
    else:
        edges = np.append(segment_edges(potential, float(settings["max_growth"])), r_max)
        pieces, _, _ = integrate_radial(potential, edges, np.array([0.0, 1.0]), tol)
        start = 0.0

    # Asymptotic linear fit over the outer part of [support, r_max]
    fit_start = r_max - settings["fit_fraction"] * (r_max - support)
    r_fit = np.linspace(fit_start, r_max, int(settings["fit_points"]))
    r0, r1, dense, log_scale = pieces[-1]
    w_fit = dense(r_fit)[0]
    slope, intercept = np.polyfit(r_fit, w_fit, 1)
    if slope <= 0:
        raise SolverError("Scattering solution does not grow linearly beyond the support")
    a = -intercept / slope
    fit_residual = float(np.sqrt(np.mean((w_fit - (slope * r_fit + intercept)) ** 2)) / (slope * r_max))
    log_slope = math.log(slope) + log_scale

    radii = np.unique(np.concatenate((
        np.linspace(0.0, support, n_profile // 2, endpoint=False),
        np.linspace(support, r_max, n_profile - n_profile // 2),
    )))
    profile = np.zeros_like(radii)
    inside = (radii >= start) & (radii > 0.0)
    log_w, _ = evaluate_radial(pieces, radii[inside])
    profile[inside] = np.exp(log_w - log_slope - np.log(radii[inside]))
    if start == 0.0:
        # f(0) is the limit w'(0)/slope
        profile[radii == 0.0] = math.exp(-log_slope)
    profile = np.clip(profile, 0.0, 1.0)

    converged = fit_residual <= max(100.0 * tol, 1e-12)
    if not converged:
        logger.warning(f"Scattering fit residual {fit_residual:.3e} above tolerance for {potential.describe()}")
    logger.info(f"Scattering length of {potential.describe()}: {a:.12g} (fit residual {fit_residual:.2e})")
    return ScatteringSolution(float(a), radii, profile, fit_residual, converged)


def fourier_coefficient(potential: RadialPotential, p_norm: float) -> float:
    """V̂(p) = 4π ∫₀^R r² V(r) sinc(|p| r) dr by adaptive quadrature."""
    if potential.is_hard_core:
        raise DomainError("non-integrable potential: hard spheres have no Fourier coefficient")
    if potential.is_trivial:
        return 0.0
    p = abs(float(p_norm))
    edges = np.unique(np.concatenate(([0.0], potential.breakpoints, [potential.support_radius])))

    def integrand(r):
        return 4.0 * np.pi * r * r * float(potential(r)) * np.sinc(p * r / np.pi)

    total = 0.0
    for r0, r1 in zip(edges[:-1], edges[1:]):
        value, error = quad(integrand, r0, r1, epsabs=0.0, epsrel=1e-12, limit=200)
        total += value
    return float(total)


def scale_potential(potential: RadialPotential, regime: ScaledRegime) -> RadialPotential:
    """Return r ↦ N^{3β-1} V(N^β r)."""
    return potential.scaled(regime.height_factor, regime.length_factor)
