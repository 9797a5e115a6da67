"""Lattice-sum results, bracket variants and Born series specifications."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from models.potential import RadialPotential, ScaledRegime
from utils.exceptions import DomainError


@dataclass
class LatticeSumResult:
    """Value of a truncated lattice sum with its convergence diagnostics."""
    value: float
    partials: List[Tuple[float, float]]
    extrapolated: bool = False
    diagnostic: float = 0.0
    extrapolants: List[Tuple[int, float]] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.partials:
            raise DomainError("A lattice sum result needs at least one partial sum")
        if not self.diagnostic >= 0:
            raise DomainError(f"Diagnostic must be non-negative, got {self.diagnostic}")

    def rows(self) -> List[Dict[str, Any]]:
        """(M, partial, extrapolant) rows for CSV export."""
        extrapolants = dict(self.extrapolants)
        return [{"M": m, "partial": s, "extrapolant": extrapolants.get(m, "")}
                for m, s in self.partials]

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "value": self.value,
            "extrapolated": self.extrapolated,
            "diagnostic": self.diagnostic,
            "n_partials": len(self.partials),
        }
        data.update(self.details)
        return data


class BracketVariant(Enum):
    """Second-order bracket of the three interaction regimes."""
    GP = "gp"
    MEAN_FIELD = "mean_field"
    BETA_REGIME = "beta_regime"


@dataclass(frozen=True)
class BracketKind:
    """Bracket summand of a second-order energy sum.

    gp:           p² + α - √(p⁴ + 2αp²) - α²/(2p²) with α = 8π a
    mean_field:   p² + V̂(p) - √(p⁴ + 2p²V̂(p))
    beta_regime:  the gp form with α = V̂(0)
    """
    variant: BracketVariant
    a: float = 0.0
    vhat0: float = 0.0
    vhat: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.variant == BracketVariant.GP and self.a < 0:
            raise DomainError(f"Scattering length must be non-negative, got {self.a}")
        if self.variant == BracketVariant.BETA_REGIME and self.vhat0 < 0:
            raise DomainError(f"V̂(0) must be non-negative, got {self.vhat0}")
        if self.variant == BracketVariant.MEAN_FIELD and self.vhat is None:
            raise DomainError("Mean-field bracket needs a V̂ evaluator")

    @classmethod
    def gp(cls, a: float) -> "BracketKind":
        return cls(BracketVariant.GP, a=float(a))

    @classmethod
    def mean_field(cls, vhat) -> "BracketKind":
        """``vhat`` is a RadialPotential or a vectorized callable of |p|."""
        if isinstance(vhat, RadialPotential):
            vhat = vhat.fourier_transform
        return cls(BracketVariant.MEAN_FIELD, vhat=vhat)

    @classmethod
    def beta_regime(cls, vhat0: float) -> "BracketKind":
        return cls(BracketVariant.BETA_REGIME, vhat0=float(vhat0))

    @property
    def coupling(self) -> float:
        """α of the counterterm forms (0 for mean field)."""
        if self.variant == BracketVariant.GP:
            return 8.0 * np.pi * self.a
        if self.variant == BracketVariant.BETA_REGIME:
            return self.vhat0
        return 0.0

    def evaluate(self, p) -> np.ndarray:
        """Bracket value at momenta of norm p (p > 0)."""
        p = np.asarray(p, dtype=float)
        p2 = p * p
        if self.variant == BracketVariant.MEAN_FIELD:
            v = np.asarray(self.vhat(p), dtype=float)
            radicand = p2 * p2 + 2.0 * p2 * v
            if np.any(radicand < 0):
                raise DomainError("p⁴ + 2p²V̂(p) is negative; the mean-field dispersion is not real")
            root = np.sqrt(radicand)
            return v * v / (p2 + v + root)
        alpha = self.coupling
        if alpha == 0.0:
            return np.zeros_like(p)
        root = np.sqrt(p2 * p2 + 2.0 * alpha * p2)
        return alpha * alpha * (p2 - alpha - root) / (2.0 * p2 * (p2 + alpha + root))

    def to_dict(self) -> Dict[str, Any]:
        return {"variant": self.variant.value, "a": self.a, "vhat0": self.vhat0}


class BornGeometry(Enum):
    """Momentum space of the Born sums: the unit-torus lattice or its continuum limit."""
    TORUS = "torus"
    CONTINUUM = "continuum"


@dataclass(frozen=True)
class BornSeriesSpec:
    """Inputs of the finite Born series for N times the scattering length of the scaled potential."""
    potential: RadialPotential
    regime: ScaledRegime
    order: int
    momentum_cutoff: Optional[float] = None
    geometry: BornGeometry = BornGeometry.TORUS

    def __post_init__(self):
        if self.order < 1:
            raise DomainError(f"Born order must be at least 1, got {self.order}")
        if self.potential.is_hard_core:
            raise DomainError("non-integrable potential: the Born series needs an integrable V")
        if self.momentum_cutoff is not None and self.momentum_cutoff < 2.0 * np.pi * self.regime.length_factor:
            raise DomainError(
                f"Momentum cutoff {self.momentum_cutoff:g} must cover the scaled support scale "
                f"2πN^β = {2.0 * np.pi * self.regime.length_factor:g}")


@dataclass
class BornSeriesResult:
    """Cumulative partial values of 8π times N times the scaled scattering length."""
    partials: List[float]
    momentum_cutoff: float
    geometry: BornGeometry
    tail_estimate: float = 0.0

    @property
    def steps(self) -> List[float]:
        return [b - a for a, b in zip(self.partials[:-1], self.partials[1:])]

    @property
    def scattering_length(self) -> float:
        """N times the scattering length of the scaled potential, from the last partial."""
        return self.partials[-1] / (8.0 * np.pi)

    def to_dict(self) -> Dict[str, Any]:
        data = {f"order_{k + 1}": value for k, value in enumerate(self.partials)}
        data.update({
            "scattering_length": self.scattering_length,
            "momentum_cutoff": self.momentum_cutoff,
            "geometry": self.geometry.value,
            "tail_estimate": self.tail_estimate,
        })
        return data
