"""Bogoliubov dispersion laws, coefficient sequences and ground-state energy assembly."""
import logging
import math
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad

from config import config
from core.born_series import born_series
from core.lattice import bracket_sum, e_lambda
from models.energy import (CoefficientSequences, EnergyRegime, EnergySummary, ExcitationSpectrum,
                           Occupation, RegimeTag, modes_within)
from models.lattice_result import BornSeriesSpec, BracketKind, BracketVariant
from models.neumann_solution import NeumannSolution
from models.potential import RadialPotential, ScaledRegime
from utils.exceptions import DomainError

logger = logging.getLogger(__name__)

VhatSource = Union[RadialPotential, Callable[[np.ndarray], np.ndarray]]


def dispersion(p, kind: BracketKind) -> np.ndarray:
    """Excitation energy ε(p) for momenta of norm p.

    gp:          √(p⁴ + 16π𝔞 p²)
    mean_field:  √(p⁴ + 2p²V̂(p))
    beta_regime: √(p⁴ + 2p²V̂(0))
    """
    p = np.asarray(p, dtype=float)
    if np.any(p == 0):
        raise DomainError("The dispersion is defined for p ≠ 0 only")
    p2 = p * p
    if kind.variant == BracketVariant.MEAN_FIELD:
        coupling = 2.0 * np.asarray(kind.vhat(np.abs(p)), dtype=float)
        if np.any(coupling < 0):
            raise DomainError("V̂(p) is negative; the mean-field dispersion needs V̂(p) >= 0")
    else:
        coupling = 2.0 * kind.coupling
    return np.sqrt(p2 * p2 + coupling * p2)


def _vhat_evaluator(source: VhatSource) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(source, RadialPotential):
        if source.is_hard_core:
            raise DomainError("non-integrable potential: τ_p needs V̂")
        return source.fourier_transform
    return source


def _w_transform(sol: NeumannSolution, p: float) -> float:
    """ŵ(p) = 4π ∫₀^ℓ r² (1 - f(r)) sinc(pr) dr."""
    a = sol.exclusion_radius
    if p == 0.0:
        core = 4.0 * math.pi * a ** 3 / 3.0
    else:
        core = 4.0 * math.pi * (math.sin(p * a) - p * a * math.cos(p * a)) / p ** 3

    def integrand(r):
        return 4.0 * math.pi * r * r * (1.0 - float(sol.f(r))) * np.sinc(p * r / math.pi)

    value, _ = quad(integrand, a, sol.ell, epsabs=1e-14, epsrel=1e-12, limit=400)
    return core + value


def coefficient_sequences(cutoff: float, vhat: Optional[VhatSource] = None,
                          solution: Optional[NeumannSolution] = None,
                          n_particles: Optional[int] = None) -> CoefficientSequences:
    """τ_p and/or η_p for every mode 0 < |p| <= cutoff.

    τ_p = ½ artanh(-V̂(p)/(p² + V̂(p))) needs ``vhat``; η_p = -N ŵ(p) with
    w = 1 - f on the Neumann ball needs ``solution`` and ``n_particles``.
    """
    if vhat is None and solution is None:
        raise DomainError("coefficient_sequences needs V̂ or a Neumann solution")
    modes = modes_within(cutoff)
    shells: Dict[int, List] = {}
    for mode in modes:
        shells.setdefault(mode.norm2, []).append(mode.n)
    sequences = CoefficientSequences()

    if vhat is not None:
        evaluate = _vhat_evaluator(vhat)
        for norm2, triples in shells.items():
            p = 2.0 * math.pi * math.sqrt(norm2)
            v = float(np.asarray(evaluate(np.array([p])), dtype=float)[0])
            denominator = p * p + v
            if denominator <= 0:
                raise DomainError(f"p² + V̂(p) <= 0 at |p|={p:g}")
            argument = -v / denominator
            if abs(argument) >= 1.0:
                raise DomainError(f"|tanh(2τ_p)| = {abs(argument):g} >= 1 at |p|={p:g}: coupling is non-perturbative")
            tau = 0.5 * math.atanh(argument)
            for t in triples:
                sequences.tau[t] = tau

    if solution is not None:
        if n_particles is None or n_particles < 1:
            raise DomainError("η_p needs the particle number N")
        if solution.ell >= 0.5:
            raise DomainError(f"ℓ₀ = {solution.ell:g} must be below ½ so that w fits in the unit torus")
        for norm2, triples in shells.items():
            eta = -n_particles * _w_transform(solution, 2.0 * math.pi * math.sqrt(norm2))
            for t in triples:
                sequences.eta[t] = eta
        sequences.eta_zero = -n_particles * _w_transform(solution, 0.0)

    logger.debug(f"Coefficient sequences on {len(modes)} modes up to |p| = {cutoff:g}")
    return sequences


def ground_state_energy(regime: EnergyRegime, cutoff: Optional[float] = None,
                        M_max: Optional[int] = None, born_order: Optional[int] = None,
                        threads: Optional[int] = None, deterministic: Optional[bool] = None) -> EnergySummary:
    """Assemble leading + finite-volume + second-order parts for one regime.

    gp:         4π𝔞(N-1) + e_Λ𝔞² - ½Σ[gp bracket]
    mean_field: (N-1)V̂(0)/2 - ½Σ[mean-field bracket]
    beta:       4π(N-1)𝔞_N^β - ½Σ[bracket with V̂(0)], 𝔞_N^β from the Born series
    """
    n = regime.n_particles
    details = {}
    if regime.tag == RegimeTag.GP:
        a = regime.a
        if a == 0.0:
            return EnergySummary(0.0, 0.0, 0.0, regime.label)
        leading = 4.0 * math.pi * a * (n - 1)
        lam = e_lambda(M_max, threads=threads, deterministic=deterministic)
        finite_volume = lam.value * a * a
        bracket = bracket_sum(BracketKind.gp(a), cutoff, threads=threads, deterministic=deterministic)
        details = {"e_lambda": lam.value, "e_lambda_diagnostic": lam.diagnostic,
                   "bracket_diagnostic": bracket.diagnostic}
    elif regime.tag == RegimeTag.MEAN_FIELD:
        vhat0 = float(regime.potential.fourier_transform(np.array([0.0]))[0])
        leading = (n - 1) * vhat0 / 2.0
        finite_volume = 0.0
        bracket = bracket_sum(BracketKind.mean_field(regime.potential), cutoff,
                              threads=threads, deterministic=deterministic)
        details = {"vhat0": vhat0, "bracket_diagnostic": bracket.diagnostic}
    else:
        order = int(config.get("lattice", "born_order") if born_order is None else born_order)
        spec = BornSeriesSpec(regime.potential, ScaledRegime(n, regime.beta), order)
        born = born_series(spec, threads=threads, deterministic=deterministic)
        leading = (n - 1) * born.partials[-1] / 2.0
        finite_volume = 0.0
        vhat0 = float(regime.potential.fourier_transform(np.array([0.0]))[0])
        bracket = bracket_sum(BracketKind.beta_regime(vhat0), cutoff,
                              threads=threads, deterministic=deterministic)
        details = {"born_partials": born.partials, "bracket_diagnostic": bracket.diagnostic}

    summary = EnergySummary(leading, finite_volume, bracket.value, regime.label, details=details)
    logger.info(f"Ground state energy ({regime.label}, N={n}): {summary.total:.12g}")
    return summary


def excitation_levels(summary: EnergySummary, spectrum: ExcitationSpectrum) -> List[Tuple[float, Occupation]]:
    """Low-lying energies E_N + Σ n_p ε(p) of the Bogoliubov approximation."""
    return [(summary.total + energy, occupation) for occupation, energy in spectrum.entries]


def mean_field_scattering_estimate(potential: RadialPotential, cutoff: Optional[float] = None,
                                   order: int = 2) -> float:
    """8π𝔞 of V from its Born series on the unit torus (N = 1, β = 0)."""
    spec = BornSeriesSpec(potential, ScaledRegime(1, 0.0), order, momentum_cutoff=cutoff)
    return born_series(spec).partials[-1]
