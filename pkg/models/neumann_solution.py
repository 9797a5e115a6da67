"""Ground state of the Neumann problem on a ball and its derived norms."""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from models.potential import RadialPotential


@dataclass(frozen=True)
class NeumannSolution:
    """Radial profile f on [0, ell] with f(ell) = 1, f'(ell) = 0, extended by 1 beyond ell.

    A hard core is described by ``core_radius`` alone; a potential core by
    ``core_potential`` (the scaled interaction entering as ½W). Hard-core
    profiles are evaluated from the closed form c·sin(k(r - a))/r, potential
    cores from a Hermite spline through the shooting samples.
    """
    ell: float
    eigenvalue: float
    radii: np.ndarray = field(repr=False)
    profile: np.ndarray = field(repr=False)
    derivative: np.ndarray = field(repr=False)
    core_radius: float = 0.0
    core_potential: Optional[RadialPotential] = None
    wavenumber: float = 0.0
    amplitude: float = 1.0
    _spline: Any = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.core_potential is not None and self._spline is None:
            object.__setattr__(self, "_spline",
                               CubicHermiteSpline(self.radii, self.profile, self.derivative))

    @property
    def core(self) -> Union[float, RadialPotential]:
        return self.core_potential if self.core_potential is not None else self.core_radius

    @property
    def hard_core(self) -> bool:
        return self.core_potential is None

    @property
    def exclusion_radius(self) -> float:
        """Radius inside which f vanishes identically (0 for potential cores)."""
        return self.core_radius if self.hard_core else 0.0

    @property
    def u_profile(self) -> np.ndarray:
        return 1.0 - self.profile ** 2

    def same_core(self, other: "NeumannSolution") -> bool:
        if self.hard_core != other.hard_core:
            return False
        if self.hard_core:
            return self.core_radius == other.core_radius
        return self.core_potential == other.core_potential

    def f(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.hard_core:
            if self.wavenumber == 0.0:
                inside = np.ones_like(r)
            else:
                with np.errstate(divide="ignore", invalid="ignore"):
                    inside = self.amplitude * np.sin(self.wavenumber * (r - self.core_radius)) / r
            inside = np.where(r <= self.core_radius, 0.0, inside)
        else:
            inside = self._spline(np.clip(r, 0.0, self.ell))
        return np.where(r >= self.ell, 1.0, inside)

    def df(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.hard_core:
            if self.wavenumber == 0.0:
                inside = np.zeros_like(r)
            else:
                k, a = self.wavenumber, self.core_radius
                with np.errstate(divide="ignore", invalid="ignore"):
                    inside = self.amplitude * (k * r * np.cos(k * (r - a)) - np.sin(k * (r - a))) / r ** 2
            inside = np.where(r < self.core_radius, 0.0, inside)
        else:
            inside = self._spline(np.clip(r, 0.0, self.ell), 1)
        return np.where(r >= self.ell, 0.0, inside)

    def log_f(self, r) -> np.ndarray:
        """log f(r); -inf inside a hard core, 0 beyond ell."""
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.hard_core and self.wavenumber > 0.0:
                k, a = self.wavenumber, self.core_radius
                value = np.log(self.amplitude) + np.log(np.sin(k * (r - a))) - np.log(r)
            else:
                value = np.log(self.f(r))
        value = np.where(r >= self.ell, 0.0, value)
        if self.hard_core:
            value = np.where(r <= self.core_radius, -np.inf, value)
        return value

    def grad_log_f(self, r) -> np.ndarray:
        """Radial component of ∇f/f; r is clamped just outside a hard core."""
        r = np.asarray(r, dtype=float)
        if self.hard_core and self.core_radius > 0:
            r = np.maximum(r, self.core_radius * (1.0 + 1e-12))
        if self.hard_core and self.wavenumber > 0.0:
            k, a = self.wavenumber, self.core_radius
            with np.errstate(divide="ignore", invalid="ignore"):
                value = k / np.tan(k * (r - a)) - 1.0 / r
        else:
            with np.errstate(divide="ignore", invalid="ignore"):
                value = self.df(r) / self.f(r)
        return np.where(r >= self.ell, 0.0, value)

    def chi(self, r) -> np.ndarray:
        """Indicator of the ball r <= ell."""
        return (np.asarray(r, dtype=float) <= self.ell).astype(float)

    def to_rows(self) -> List[Tuple[float, float]]:
        """Two-column (r, f(r)) export."""
        return list(zip(self.radii.tolist(), self.profile.tolist()))

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "ell": self.ell,
            "eigenvalue": self.eigenvalue,
            "core_radius": self.core_radius,
            "grid_points": int(len(self.radii)),
        }
        if self.core_potential is not None:
            data["core_potential"] = self.core_potential.describe()
        return data


@dataclass(frozen=True)
class NormReport:
    """Quadrature norms of u = 1 - f² and ∇f over the ball."""
    r_exponent: float
    u_l1: float
    u_lr: float
    gradf_lr: float
    predicted_scaling_ratio: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "r_exponent": self.r_exponent,
            "u_l1": self.u_l1,
            "u_lr": self.u_lr,
            "gradf_lr": self.gradf_lr,
            "predicted_scaling_ratio": self.predicted_scaling_ratio,
        }
