"""Ground state of the Neumann problem on a ball, profile norms and the ratio-profile residual."""
import logging
import math
from typing import List, Optional, Union

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from config import config
from core.scattering import evaluate_radial, integrate_radial, segment_edges
from models.neumann_solution import NeumannSolution, NormReport
from models.potential import PotentialKind, RadialPotential
from utils.exceptions import DomainError, SolverError

logger = logging.getLogger(__name__)

Core = Union[float, RadialPotential]


def _radial_grid(start: float, ell: float, n_points: int, log_fraction: float) -> np.ndarray:
    """Grid on [start, ell]: log-spaced offsets near start, uniform towards ell."""
    span = ell - start
    n_log = n_points // 2
    near = np.geomspace(span * 1e-6, span * log_fraction, n_log, endpoint=False)
    far = np.linspace(span * log_fraction, span, n_points - n_log)
    return start + np.concatenate(([0.0], near, far))


def _split_core(core: Core):
    """Return (hard radius, potential or None)."""
    if isinstance(core, RadialPotential):
        if core.kind == PotentialKind.HARD_SPHERE:
            return core.radius, None
        if core.is_trivial:
            return 0.0, None
        return 0.0, core
    radius = float(core)
    if radius < 0:
        raise DomainError(f"Hard-core radius must be non-negative, got {radius}")
    return radius, None


def _hard_core_ground_state(a: float, ell: float, tol: float, grid: np.ndarray) -> NeumannSolution:
    if a == 0.0:
        return NeumannSolution(ell=ell, eigenvalue=0.0, radii=grid, profile=np.ones_like(grid),
                               derivative=np.zeros_like(grid), core_radius=0.0)
    span = ell - a
    upper = math.pi / (2.0 * span)

    # sin(k(ℓ-a)) - kℓ cos(k(ℓ-a)) vanishes where tan(k(ℓ-a)) = kℓ, without the pole
    def mismatch(k):
        return math.sin(k * span) - k * ell * math.cos(k * span)

    lower = 1e-3 * math.sqrt(a / ell ** 3)
    if mismatch(lower) >= 0 or mismatch(upper) <= 0:
        raise SolverError(f"Cannot bracket the Neumann ground state for a={a:g}, ell={ell:g}")
    k = brentq(mismatch, lower, upper, xtol=1e-300, rtol=max(tol, 1e-15), maxiter=500)
    amplitude = ell / math.sin(k * span)
    partial = NeumannSolution(ell=ell, eigenvalue=k * k, radii=grid, profile=np.zeros_like(grid),
                              derivative=np.zeros_like(grid), core_radius=a,
                              wavenumber=k, amplitude=amplitude)
    profile = np.clip(partial.f(grid), 0.0, 1.0)
    derivative = partial.df(grid)
    return NeumannSolution(ell=ell, eigenvalue=k * k, radii=grid, profile=profile,
                           derivative=derivative, core_radius=a, wavenumber=k, amplitude=amplitude)


def _potential_core_ground_state(potential: RadialPotential, ell: float, tol: float,
                                 grid: np.ndarray) -> NeumannSolution:
    support = potential.support_radius
    edges = np.unique(np.append(segment_edges(potential, float(config.get("scattering", "max_growth"))), ell))
    ode_tol = max(min(tol, 1e-10), 1e-13)

    def mismatch(lam: float) -> float:
        _, y, _ = integrate_radial(potential, edges, np.array([0.0, 1.0]), ode_tol, energy=lam)
        # f'(ℓ) = 0  ⇔  ℓ w'(ℓ) - w(ℓ) = 0
        return ell * y[1] - y[0]

    # The hard core of the same support bounds the ground state from above
    upper = (math.pi / (2.0 * (ell - support))) ** 2
    trial = np.geomspace(upper * 1e-12, upper, 49)
    values = [mismatch(lam) for lam in trial]
    if values[0] <= 0:
        raise SolverError("Neumann mismatch is not positive near zero eigenvalue")
    for lo, hi, m_lo, m_hi in zip(trial[:-1], trial[1:], values[:-1], values[1:]):
        if m_lo > 0 >= m_hi:
            break
    else:
        raise SolverError(f"Cannot bracket the Neumann ground state below {upper:g}")
    lam = brentq(mismatch, lo, hi, xtol=1e-300, rtol=max(tol, 1e-15), maxiter=500)

    pieces, _, _ = integrate_radial(potential, edges, np.array([0.0, 1.0]), ode_tol, energy=lam)
    log_w, ratio = evaluate_radial(pieces, grid)
    interior = grid > 0
    log_f = np.empty_like(grid)
    log_f[interior] = log_w[interior] - np.log(grid[interior])
    log_f[~interior] = 0.0  # w'(0) = 1 in the unscaled first piece
    log_norm = log_f[-1]
    profile = np.exp(log_f - log_norm)
    derivative = np.zeros_like(grid)
    derivative[interior] = profile[interior] * (ratio[interior] - 1.0 / grid[interior])
    if not np.all(np.isfinite(profile)) or np.any(profile <= 0) or np.any(np.diff(profile) < -1e-9):
        raise SolverError("Neumann shooting produced a profile with a node")
    derivative[-1] = 0.0
    return NeumannSolution(ell=ell, eigenvalue=lam, radii=grid, profile=np.clip(profile, 0.0, 1.0),
                           derivative=derivative, core_potential=potential)


def neumann_ground_state(core: Core, ell: float, tol: Optional[float] = None) -> NeumannSolution:
    """Smallest Neumann eigenvalue and nodeless profile on the ball of radius ell.

    Args:
        core: Hard-core radius, or a potential entering the equation as ½W.
        ell: Ball radius.
        tol: Relative tolerance of the eigenvalue root.

    Returns:
        NeumannSolution normalized by f(ell) = 1.
    """
    settings = config.get("neumann")
    tol = settings["tol"] if tol is None else tol
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    if ell <= 0:
        raise DomainError(f"ell must be positive, got {ell}")
    radius, potential = _split_core(core)
    if radius >= ell:
        raise DomainError(f"Hard-core radius {radius:g} must be smaller than ell={ell:g}")
    if potential is not None and potential.support_radius >= ell:
        raise DomainError(f"Potential support {potential.support_radius:g} must be smaller than ell={ell:g}")

    grid = _radial_grid(radius, ell, int(settings["grid_points"]), float(settings["log_fraction"]))
    if potential is None:
        solution = _hard_core_ground_state(radius, ell, tol, grid)
    else:
        solution = _potential_core_ground_state(potential, ell, tol, grid)
    logger.info(f"Neumann ground state ell={ell:g}: eigenvalue {solution.eigenvalue:.12g}")
    return solution


def effective_scattering_length(sol: NeumannSolution) -> float:
    """Scattering length implied by the eigenvalue, λℓ³/3."""
    return sol.eigenvalue * sol.ell ** 3 / 3.0


def profile_norms(sol: NeumannSolution, r_exponent: float,
                  include_gradient: bool = True) -> NormReport:
    """L^r norms of u = 1 - f² and of ∇f over the ball.

    The gradient norm diverges for r >= 3/2 in the point-core limit, so it is
    only computed below that exponent; ``include_gradient=False`` allows the
    u norms up to r < 3.
    """
    r = float(r_exponent)
    if not 1.0 <= r < 3.0:
        raise DomainError(f"u-norm ‖u‖_r diverges or is undefined for r={r:g}; need 1 <= r < 3")
    if include_gradient and r >= 1.5:
        raise DomainError(f"gradient norm ‖∇f‖_r diverges for r={r:g}; need 1 <= r < 3/2")

    radii = sol.radii
    weight = 4.0 * np.pi * radii ** 2
    u = np.abs(1.0 - sol.profile ** 2)
    core_ball = 4.0 / 3.0 * np.pi * sol.exclusion_radius ** 3

    u_l1 = float(simpson(u * weight, x=radii)) + core_ball
    u_lr = (float(simpson(u ** r * weight, x=radii)) + core_ball) ** (1.0 / r)
    gradf_lr = float("nan")
    if include_gradient:
        gradf_lr = float(simpson(np.abs(sol.derivative) ** r * weight, x=radii)) ** (1.0 / r)

    a_eff = effective_scattering_length(sol)
    predicted = a_eff * sol.ell ** (3.0 / r - 1.0)
    ratio = u_lr / predicted if predicted > 0 else 0.0
    return NormReport(r_exponent=r, u_l1=u_l1, u_lr=float(u_lr), gradf_lr=gradf_lr,
                      predicted_scaling_ratio=float(ratio))


def _residual_on_grid(inner: NeumannSolution, outer: NeumannSolution, n_points: int) -> float:
    start = inner.exclusion_radius + 0.05 * (inner.ell - inner.exclusion_radius)
    r = np.linspace(start, outer.ell, n_points + 1)
    h = r[1] - r[0]
    g = outer.f(r) / inner.f(r)
    q = r * g
    ri = r[1:-1]
    laplacian = (q[2:] - 2.0 * q[1:-1] + q[:-2]) / (h * h * ri)
    dg = (g[2:] - g[:-2]) / (2.0 * h)
    drift = np.where(ri < inner.ell, inner.grad_log_f(ri), 0.0)
    residual = (-laplacian - 2.0 * drift * dg
                + inner.eigenvalue * inner.chi(ri) * g[1:-1]
                - outer.eigenvalue * g[1:-1])
    # Stencils straddling ell see the jump of f'' and are left out
    keep = np.abs(ri - inner.ell) >= h
    if not np.any(keep):
        return 0.0
    scale = outer.eigenvalue * np.max(np.abs(g))
    if scale == 0.0:
        return float(np.max(np.abs(residual[keep])))
    return float(np.max(np.abs(residual[keep])) / scale)


def ratio_residual_sequence(sol_inner: NeumannSolution, sol_outer: NeumannSolution,
                            base_points: Optional[int] = None,
                            refinements: Optional[int] = None) -> List[float]:
    """Relative residuals of the ratio-profile equation on successively halved grids."""
    settings = config.get("neumann")
    base_points = int(settings["residual_points"] if base_points is None else base_points)
    refinements = int(settings["residual_refinements"] if refinements is None else refinements)
    if not sol_inner.same_core(sol_outer):
        raise DomainError("ratio_residual needs two solutions with the same core")
    if sol_inner.ell > sol_outer.ell:
        raise DomainError(f"Inner ell {sol_inner.ell:g} must not exceed outer ell {sol_outer.ell:g}")
    return [_residual_on_grid(sol_inner, sol_outer, base_points * 2 ** level)
            for level in range(refinements + 1)]


def ratio_residual(sol_inner: NeumannSolution, sol_outer: NeumannSolution,
                   base_points: Optional[int] = None, refinements: Optional[int] = None) -> float:
    """Residual of -Δg - 2(∇f/f)·∇g + λχg = λ₀g for g = f_outer / f_inner.

    Returns the finest-grid residual relative to λ₀·max|g|.
    """
    history = ratio_residual_sequence(sol_inner, sol_outer, base_points, refinements)
    logger.debug(f"Ratio residual history: {history}")
    finest = history[-1]
    if len(history) > 1 and finest > 1e-10 and finest > 0.75 * history[-2]:
        raise SolverError(f"Ratio residual does not decrease under refinement: {history}")
    return finest
